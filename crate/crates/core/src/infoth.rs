//! Entropy, mutual information, KL divergence and L1 distance on finite
//! joint tables, plus the Pinsker and binary-channel information checks.
//!
//! Logarithms are base 2 and `0 · log 0 = 0`. Identities are checked
//! within [`SLACK`].

use std::collections::BTreeMap;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

/// Absolute slack on every inequality and identity checked here.
pub const SLACK: f64 = 1e-9;

/// Tolerance on the total mass of a table.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A joint distribution of finitely many variables; variable `k` takes
/// values `0..arities[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable<F> {
    arities: Vec<usize>,
    probs: BTreeMap<Vec<usize>, F>,
}

fn plogp<F: Float>(p: F) -> F {
    if p > F::zero() {
        p * p.log2()
    } else {
        F::zero()
    }
}

impl<F: Float> JointTable<F> {
    pub fn new<I>(arities: Vec<usize>, probs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, F)>,
    {
        let mut table: BTreeMap<Vec<usize>, F> = BTreeMap::new();
        for (k, p) in probs {
            if k.len() != arities.len() {
                return Err(Error::arity(arities.len(), k.len()));
            }
            if k.iter().zip(&arities).any(|(v, a)| v >= a) {
                return Err(Error::Domain(format!("value tuple {k:?} is out of range")));
            }
            if p.is_nan() || p < F::zero() {
                return Err(Error::Domain("negative or NaN probability".into()));
            }
            let e = table.entry(k).or_insert_with(F::zero);
            *e = *e + p;
        }
        let total = table.values().fold(F::zero(), |a, p| a + *p);
        let tol = F::from(MASS_TOLERANCE).expect("representable");
        if (total - F::one()).abs() > tol {
            return Err(Error::Domain(format!(
                "table mass is {}, not 1",
                total.to_f64().unwrap_or(f64::NAN)
            )));
        }
        Ok(JointTable { arities, probs: table })
    }

    /// Product table of independent marginals.
    pub fn product(marginals: &[Vec<F>]) -> Result<Self> {
        let arities: Vec<usize> = marginals.iter().map(Vec::len).collect();
        let mut entries = vec![(Vec::new(), F::one())];
        for m in marginals {
            entries = entries
                .into_iter()
                .flat_map(|(k, p)| {
                    m.iter().enumerate().map(move |(v, q)| {
                        let mut k = k.clone();
                        k.push(v);
                        (k, p * *q)
                    })
                })
                .collect();
        }
        JointTable::new(arities, entries)
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &F)> {
        self.probs.iter()
    }

    /// Marginal on `vars`, in the order given.
    pub fn marginal(&self, vars: &[usize]) -> Result<JointTable<F>> {
        if let Some(v) = vars.iter().find(|v| **v >= self.arities.len()) {
            return Err(Error::Domain(format!("no variable {v}")));
        }
        let mut out: BTreeMap<Vec<usize>, F> = BTreeMap::new();
        for (k, p) in &self.probs {
            let key: Vec<usize> = vars.iter().map(|v| k[*v]).collect();
            let e = out.entry(key).or_insert_with(F::zero);
            *e = *e + *p;
        }
        Ok(JointTable {
            arities: vars.iter().map(|v| self.arities[*v]).collect(),
            probs: out,
        })
    }

    /// Probability vector over all value tuples in lexicographic order.
    pub fn dense(&self) -> Vec<F> {
        let mut out = Vec::new();
        let mut k = vec![0usize; self.arities.len()];
        if self.arities.contains(&0) {
            return out;
        }
        loop {
            out.push(self.probs.get(&k).copied().unwrap_or_else(F::zero));
            let mut pos = k.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                k[pos] += 1;
                if k[pos] < self.arities[pos] {
                    break;
                }
                k[pos] = 0;
            }
        }
    }
}

/// `H(vars)`.
pub fn entropy<F: Float>(t: &JointTable<F>, vars: &[usize]) -> Result<F> {
    Ok(t.marginal(vars)?.probs.values().fold(F::zero(), |a, p| a - plogp(*p)))
}

fn joined(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

/// `H(X | Z) = H(X, Z) − H(Z)`.
pub fn conditional_entropy<F: Float>(t: &JointTable<F>, x: &[usize], z: &[usize]) -> Result<F> {
    Ok(entropy(t, &joined(x, z))? - entropy(t, z)?)
}

/// `I(X ; Y | Z) = H(X,Z) + H(Y,Z) − H(X,Y,Z) − H(Z)`.
pub fn mutual_information<F: Float>(t: &JointTable<F>, x: &[usize], y: &[usize], z: &[usize]) -> Result<F> {
    let xz = joined(x, z);
    let yz = joined(y, z);
    let xyz = joined(x, &yz);
    Ok(entropy(t, &xz)? + entropy(t, &yz)? - entropy(t, &xyz)? - entropy(t, z)?)
}

fn same_len<F>(p: &[F], q: &[F]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::arity(p.len(), q.len()));
    }
    Ok(())
}

/// `D(P ‖ Q)`; `+∞` when `supp(P) ⊄ supp(Q)`.
pub fn kl<F: Float>(p: &[F], q: &[F]) -> Result<F> {
    same_len(p, q)?;
    let mut acc = F::zero();
    for (a, b) in p.iter().zip(q) {
        if *a > F::zero() {
            if *b <= F::zero() {
                return Ok(F::infinity());
            }
            acc = acc + *a * (*a / *b).log2();
        }
    }
    Ok(acc)
}

pub fn l1<F: Float>(p: &[F], q: &[F]) -> Result<F> {
    same_len(p, q)?;
    Ok(p.iter().zip(q).fold(F::zero(), |a, (x, y)| a + (*x - *y).abs()))
}

/// Both sides of an inequality `lhs ≥ rhs` and whether it holds within
/// [`SLACK`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check<F> {
    pub lhs: F,
    pub rhs: F,
    pub holds: bool,
}

impl<F: Float> Check<F> {
    fn at_least(lhs: F, rhs: F) -> Self {
        let slack = F::from(SLACK).expect("representable");
        Check {
            lhs,
            rhs,
            holds: lhs >= rhs - slack,
        }
    }
}

/// Pinsker: `D(P ‖ Q) ≥ ½ ‖P − Q‖₁²`.
pub fn pinsker_check<F: Float>(p: &[F], q: &[F]) -> Result<Check<F>> {
    let d = l1(p, q)?;
    let half = F::from(0.5).expect("representable");
    Ok(Check::at_least(kl(p, q)?, half * d * d))
}

fn unit<F: Float>(name: &str, x: F) -> Result<()> {
    if !(x >= F::zero() && x <= F::one()) {
        return Err(Error::Domain(format!("{name} is outside [0, 1]")));
    }
    Ok(())
}

/// The joint of `(b, x)` with `Pr[b = 0] = pb0` and `Pr[x = 0 | b] = p_b`.
pub fn binary_channel<F: Float>(pb0: F, p0: F, p1: F) -> Result<JointTable<F>> {
    unit("pb0", pb0)?;
    unit("p0", p0)?;
    unit("p1", p1)?;
    let pb1 = F::one() - pb0;
    JointTable::new(
        vec![2, 2],
        vec![
            (vec![0, 0], pb0 * p0),
            (vec![0, 1], pb0 * (F::one() - p0)),
            (vec![1, 0], pb1 * p1),
            (vec![1, 1], pb1 * (F::one() - p1)),
        ],
    )
}

/// `I(b ; x) ≥ 8 (pb0 (1 − pb0) |p0 − p1|)²` for the channel above.
pub fn mutin_check<F: Float>(pb0: F, p0: F, p1: F) -> Result<Check<F>> {
    let t = binary_channel(pb0, p0, p1)?;
    let i = mutual_information(&t, &[0], &[1], &[])?;
    let s = pb0 * (F::one() - pb0) * (p0 - p1).abs();
    let eight = F::from(8.0).expect("representable");
    Ok(Check::at_least(i, eight * s * s))
}

/// A random probability vector of length `n`; some entries are exactly 0
/// when `sparse`.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, sparse: bool, rng: &mut R) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if sparse && rng.gen_bool(0.25) {
                    0.0
                } else {
                    rng.gen_range(1..=64) as f64
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

/// A random joint table with the given arities.
pub fn random_table<R: Rng + ?Sized>(arities: &[usize], rng: &mut R) -> JointTable<f64> {
    let size: usize = arities.iter().product();
    let p = random_distribution(size, true, rng);
    let mut entries = Vec::with_capacity(size);
    let mut k = vec![0usize; arities.len()];
    for w in p {
        entries.push((k.clone(), w));
        for pos in (0..k.len()).rev() {
            k[pos] += 1;
            if k[pos] < arities[pos] {
                break;
            }
            k[pos] = 0;
        }
    }
    JointTable::new(arities.to_vec(), entries).expect("normalized weights")
}
