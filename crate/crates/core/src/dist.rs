//! Finite distributions over bit strings, pairs of them, and mixtures of
//! pairs.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use rand::Rng;

use crate::bits::{BitString, Subcube};
use crate::error::{Error, Result};
use crate::function::PartialFunction;
use crate::scalar::Scalar;

/// A probability distribution on `{0,1}^m` with finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist<T = BigRational> {
    m: usize,
    weights: BTreeMap<BitString, T>,
}

impl<T: Scalar> Dist<T> {
    /// Builds a distribution; zero weights are dropped, repeated points add.
    pub fn new<I>(m: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitString, T)>,
    {
        let mut map: BTreeMap<BitString, T> = BTreeMap::new();
        for (x, w) in weights {
            if x.len() != m {
                return Err(Error::arity(m, x.len()));
            }
            if w.is_negative() && !w.is_negligible() {
                return Err(Error::Domain(format!("negative weight {w} on {x}")));
            }
            let e = map.entry(x).or_insert_with(T::zero);
            *e = e.clone() + w;
        }
        map.retain(|_, w| !w.is_negligible());
        if map.is_empty() {
            return Err(Error::Domain("distribution has empty support".into()));
        }
        let total = map.values().fold(T::zero(), |a, w| a + w.clone());
        if !total.approx_eq(&T::one()) {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Dist { m, weights: map })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn normalized<I>(m: usize, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitString, T)>,
    {
        let raw: Vec<(BitString, T)> = weights.into_iter().collect();
        let total = raw.iter().fold(T::zero(), |a, (_, w)| a + w.clone());
        if total.is_negligible() {
            return Err(Error::EmptyConditioning);
        }
        Self::new(m, raw.into_iter().map(|(x, w)| (x, w / total.clone())))
    }

    pub fn point(x: BitString) -> Self {
        let m = x.len();
        Dist {
            m,
            weights: BTreeMap::from([(x, T::one())]),
        }
    }

    pub fn uniform(points: &[BitString]) -> Result<Self> {
        let m = points
            .first()
            .map(|x| x.len())
            .ok_or_else(|| Error::Domain("uniform distribution over an empty set".into()))?;
        let set: BTreeSet<&BitString> = points.iter().collect();
        let w = T::one() / T::from_usize(set.len()).expect("small count");
        Self::new(m, set.into_iter().map(|x| (x.clone(), w.clone())))
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn weight(&self, x: &BitString) -> T {
        self.weights.get(x).cloned().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &T)> {
        self.weights.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &BitString> {
        self.weights.keys()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn total(&self) -> T {
        self.weights.values().fold(T::zero(), |a, w| a + w.clone())
    }

    pub fn mass_in(&self, c: &Subcube) -> T {
        self.weights
            .iter()
            .filter(|(x, _)| c.contains(x))
            .fold(T::zero(), |a, (_, w)| a + w.clone())
    }

    /// `μ|C`: `μ(x) / μ(C)` on `C`, zero outside.
    pub fn condition(&self, c: &Subcube) -> Result<Dist<T>> {
        if c.arity() != self.m {
            return Err(Error::arity(self.m, c.arity()));
        }
        let mass = self.mass_in(c);
        if mass.is_negligible() {
            return Err(Error::EmptyConditioning);
        }
        Ok(Dist {
            m: self.m,
            weights: self
                .weights
                .iter()
                .filter(|(x, _)| c.contains(x))
                .map(|(x, w)| (x.clone(), w.clone() / mass.clone()))
                .collect(),
        })
    }

    /// `Pr[x_j = 0 | x ∈ C]`.
    pub fn prob_zero_at(&self, j: usize, c: &Subcube) -> Result<T> {
        let mass = self.mass_in(c);
        if mass.is_negligible() {
            return Err(Error::EmptyConditioning);
        }
        Ok(self.mass_in(&c.with(j, false)) / mass)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let keys: Vec<&BitString> = self.weights.keys().collect();
        let ws: Vec<T> = self.weights.values().cloned().collect();
        keys[T::draw(&ws, rng)].clone()
    }

    pub fn to_f64(&self) -> Dist<f64> {
        Dist {
            m: self.m,
            weights: self.weights.iter().map(|(x, w)| (x.clone(), w.to_f64())).collect(),
        }
    }
}

/// A pair `(μ₀, μ₁)` of distributions with disjoint supports.
#[derive(Debug, Clone, PartialEq)]
pub struct DistPair<T = BigRational> {
    pub mu0: Dist<T>,
    pub mu1: Dist<T>,
}

impl<T: Scalar> DistPair<T> {
    pub fn new(mu0: Dist<T>, mu1: Dist<T>) -> Result<Self> {
        if mu0.arity() != mu1.arity() {
            return Err(Error::arity(mu0.arity(), mu1.arity()));
        }
        if let Some(x) = mu0.support().find(|x| !mu1.weight(x).is_negligible()) {
            return Err(Error::InvalidPair(format!("supports intersect at {x}")));
        }
        Ok(DistPair { mu0, mu1 })
    }

    /// The singleton pair `(δ_x, δ_y)`.
    pub fn points(x: BitString, y: BitString) -> Result<Self> {
        if x == y {
            return Err(Error::InvalidPair(format!("{x} paired with itself")));
        }
        Self::new(Dist::point(x), Dist::point(y))
    }

    pub fn arity(&self) -> usize {
        self.mu0.arity()
    }

    pub fn side(&self, b: bool) -> &Dist<T> {
        if b {
            &self.mu1
        } else {
            &self.mu0
        }
    }

    /// Both supports are single points.
    pub fn is_singleton(&self) -> bool {
        self.mu0.support_len() == 1 && self.mu1.support_len() == 1
    }

    /// Checks `supp(μ_b) ⊆ g⁻¹(b)`.
    pub fn check_against(&self, g: &PartialFunction) -> Result<()> {
        if g.arity() != self.arity() {
            return Err(Error::arity(g.arity(), self.arity()));
        }
        for b in [false, true] {
            for x in self.side(b).support() {
                if g.value(x) != Some(b) {
                    return Err(Error::InvalidPair(format!(
                        "{x} is in the support of mu{} but g({x}) != {}",
                        b as u8, b as u8
                    )));
                }
            }
        }
        Ok(())
    }

    /// Conditions both sides on `C`; fails if either side has no mass there.
    pub fn condition(&self, c: &Subcube) -> Result<Self> {
        Ok(DistPair {
            mu0: self.mu0.condition(c)?,
            mu1: self.mu1.condition(c)?,
        })
    }
}

/// A finite mixture `Q` of distribution pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMixture<T = BigRational> {
    entries: Vec<(T, DistPair<T>)>,
}

impl<T: Scalar> PairMixture<T> {
    /// Builds a consistent mixture: weights sum to one and the union of
    /// 0-side supports is disjoint from the union of 1-side supports.
    pub fn new(entries: Vec<(T, DistPair<T>)>) -> Result<Self> {
        let entries: Vec<_> = entries.into_iter().filter(|(w, _)| !w.is_negligible()).collect();
        if entries.is_empty() {
            return Err(Error::Consistency("empty mixture".into()));
        }
        let m = entries[0].1.arity();
        let mut total = T::zero();
        for (w, p) in &entries {
            if w.is_negative() {
                return Err(Error::Domain(format!("negative mixture weight {w}")));
            }
            if p.arity() != m {
                return Err(Error::arity(m, p.arity()));
            }
            total = total + w.clone();
        }
        if !total.approx_eq(&T::one()) {
            return Err(Error::Domain(format!("mixture weights sum to {total}, not 1")));
        }
        let q = PairMixture { entries };
        let s0 = q.supp(false);
        if let Some(x) = q.supp(true).intersection(&s0).next() {
            return Err(Error::Consistency(format!("{x} lies in both supp0(Q) and supp1(Q)")));
        }
        Ok(q)
    }

    pub fn singleton(pair: DistPair<T>) -> Self {
        PairMixture {
            entries: vec![(T::one(), pair)],
        }
    }

    pub fn arity(&self) -> usize {
        self.entries[0].1.arity()
    }

    pub fn entries(&self) -> &[(T, DistPair<T>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `supp_b(Q)`: union of the `b`-side supports.
    pub fn supp(&self, b: bool) -> BTreeSet<BitString> {
        self.entries
            .iter()
            .flat_map(|(_, p)| p.side(b).support().cloned())
            .collect()
    }

    pub fn check_against(&self, g: &PartialFunction) -> Result<()> {
        self.entries.iter().try_for_each(|(_, p)| p.check_against(g))
    }

    /// The partial function with `g⁻¹(b) = supp_b(Q)`.
    pub fn induced_function(&self) -> PartialFunction {
        PartialFunction::explicit(self.arity(), self.supp(false), self.supp(true))
            .expect("consistent mixture induces a partial function")
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let ws: Vec<T> = self.entries.iter().map(|(w, _)| w.clone()).collect();
        T::draw(&ws, rng)
    }
}
