//! Scalar abstraction shared by every probability-carrying computation.
//!
//! Exact claims are checked with [`BigRational`]; the same code paths run
//! over `f64`/`f32` when a fast approximate answer is enough.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

pub trait Scalar: Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static {
    /// True when the value should be treated as zero (exactly zero for
    /// exact types, within a small absolute tolerance for floats).
    fn is_negligible(&self) -> bool;

    fn to_f64(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self;

    /// Parses `"p/q"`, `"p"` or (for floats) a decimal literal.
    fn parse(text: &str) -> Result<Self>;

    /// Draws an index with probability proportional to `weights`.
    /// Weights must be nonnegative with a positive total.
    fn draw<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> usize;

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }
}

/// Scalars with exact equality, usable as memoization keys.
pub trait ExactScalar: Scalar + Eq + Ord + Hash {}

impl ExactScalar for BigRational {}

impl Scalar for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (num, den) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
        let den = BigInt::from_str(den).map_err(|_| Error::Parse(format!("bad rational `{text}`")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        Ok(BigRational::new(num, den))
    }

    fn draw<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> usize {
        // Exact categorical draw: scale to a common denominator and pick a
        // uniform integer below the total numerator.
        let lcm = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let scaled: Vec<BigInt> = weights.iter().map(|w| w.numer() * (&lcm / w.denom())).collect();
        let total: BigInt = scaled.iter().sum();
        let mut u = rng.gen_bigint_range(&BigInt::zero(), &total);
        for (k, s) in scaled.iter().enumerate() {
            if &u < s {
                return k;
            }
            u -= s;
        }
        weights.len() - 1
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn is_negligible(&self) -> bool {
                self.abs() <= $tol
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn ratio(num: i64, den: i64) -> Self {
                num as $t / den as $t
            }

            fn parse(text: &str) -> Result<Self> {
                let text = text.trim();
                if let Some((n, d)) = text.split_once('/') {
                    let n: $t = n
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
                    let d: $t = d
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad number `{text}`")))?;
                    return Ok(n / d);
                }
                text.parse()
                    .map_err(|_| Error::Parse(format!("bad number `{text}`")))
            }

            fn draw<R: Rng + ?Sized>(weights: &[Self], rng: &mut R) -> usize {
                let total: $t = weights.iter().sum();
                let mut u = rng.gen::<$t>() * total;
                for (k, w) in weights.iter().enumerate() {
                    if u < *w {
                        return k;
                    }
                    u -= *w;
                }
                // Rounding can leave u just above the last bucket.
                weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
            }
        }
    };
}

float_scalar!(f64, 1e-12);
float_scalar!(f32, 1e-6);

pub fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

pub fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

/// Display a rational as `p/q`, always including the denominator.
pub fn rational_text(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}
