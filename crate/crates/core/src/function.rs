//! Partial Boolean functions, relations and block composition.

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Output label of a relation. Labels are opaque and compared by equality.
pub type Label = String;

/// Default cap on explicit enumeration of input points.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Evaluation {
    Zero,
    One,
    Invalid,
}

impl Evaluation {
    pub fn bit(self) -> Option<bool> {
        match self {
            Evaluation::Zero => Some(false),
            Evaluation::One => Some(true),
            Evaluation::Invalid => None,
        }
    }
}

pub fn bit_label(b: bool) -> Label {
    if b { "1" } else { "0" }.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FunctionRule {
    Explicit {
        zeros: BTreeSet<BitString>,
        ones: BTreeSet<BitString>,
    },
    /// Weight at most n/2 - sqrt(n) maps to 0, at least n/2 + sqrt(n) to 1.
    HammingGap,
}

/// A promise Boolean function on `m` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFunction {
    m: usize,
    rule: FunctionRule,
}

fn check_len(m: usize, x: &BitString) -> Result<()> {
    if x.len() != m {
        return Err(Error::arity(m, x.len()));
    }
    Ok(())
}

fn enumerable(n: usize, cap: u64) -> Result<()> {
    if n >= 64 || (1u64 << n) > cap {
        return Err(Error::budget(format!(
            "enumerating 2^{n} points exceeds the cap of {cap}"
        )));
    }
    Ok(())
}

/// `|x| <= n/2 - sqrt(n)` in integer arithmetic.
pub(crate) fn weight_at_most_low(weight: usize, n: usize) -> bool {
    let d = n as i128 - 2 * weight as i128;
    d >= 0 && d * d >= 4 * n as i128
}

/// `|x| >= n/2 + sqrt(n)` in integer arithmetic.
pub(crate) fn weight_at_least_high(weight: usize, n: usize) -> bool {
    let d = 2 * weight as i128 - n as i128;
    d >= 0 && d * d >= 4 * n as i128
}

impl PartialFunction {
    pub fn explicit<I, J>(m: usize, zeros: I, ones: J) -> Result<Self>
    where
        I: IntoIterator<Item = BitString>,
        J: IntoIterator<Item = BitString>,
    {
        let zeros: BTreeSet<BitString> = zeros.into_iter().collect();
        let ones: BTreeSet<BitString> = ones.into_iter().collect();
        for x in zeros.iter().chain(&ones) {
            check_len(m, x)?;
        }
        if let Some(x) = zeros.intersection(&ones).next() {
            return Err(Error::Domain(format!("{x} is listed as both a 0- and a 1-input")));
        }
        Ok(PartialFunction {
            m,
            rule: FunctionRule::Explicit { zeros, ones },
        })
    }

    /// Total function given by a predicate.
    pub fn total(m: usize, f: impl Fn(&BitString) -> bool) -> Self {
        let (ones, zeros): (Vec<_>, Vec<_>) = BitString::all(m).partition(|x| f(x));
        Self::explicit(m, zeros, ones).expect("total function is well formed")
    }

    pub fn or(m: usize) -> Self {
        Self::total(m, |x| x.weight() > 0)
    }

    pub fn and(m: usize) -> Self {
        Self::total(m, |x| x.weight() == m)
    }

    pub fn xor(m: usize) -> Self {
        Self::total(m, |x| x.weight() % 2 == 1)
    }

    pub fn majority(m: usize) -> Self {
        Self::total(m, |x| 2 * x.weight() > m)
    }

    /// The gap-weight promise function on `n` bits.
    pub fn hamming_gap(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arity(1, 0));
        }
        Ok(PartialFunction {
            m: n,
            rule: FunctionRule::HammingGap,
        })
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.rule, FunctionRule::Explicit { .. })
    }

    pub fn evaluate(&self, x: &BitString) -> Result<Evaluation> {
        check_len(self.m, x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &BitString) -> Evaluation {
        match &self.rule {
            FunctionRule::Explicit { zeros, ones } => {
                if zeros.contains(x) {
                    Evaluation::Zero
                } else if ones.contains(x) {
                    Evaluation::One
                } else {
                    Evaluation::Invalid
                }
            }
            FunctionRule::HammingGap => {
                let w = x.weight();
                if weight_at_most_low(w, self.m) {
                    Evaluation::Zero
                } else if weight_at_least_high(w, self.m) {
                    Evaluation::One
                } else {
                    Evaluation::Invalid
                }
            }
        }
    }

    /// `g(x)` as a bit, `None` for invalid inputs.
    pub fn value(&self, x: &BitString) -> Option<bool> {
        if x.len() != self.m {
            return None;
        }
        self.eval_unchecked(x).bit()
    }

    pub fn preimage(&self, b: bool, cap: u64) -> Result<Vec<BitString>> {
        match &self.rule {
            FunctionRule::Explicit { zeros, ones } => Ok(if b { ones } else { zeros }.iter().cloned().collect()),
            FunctionRule::HammingGap => {
                enumerable(self.m, cap)?;
                Ok(BitString::all(self.m).filter(|x| self.value(x) == Some(b)).collect())
            }
        }
    }

    pub fn zeros(&self) -> Result<Vec<BitString>> {
        self.preimage(false, DEFAULT_ENUMERATION_CAP)
    }

    pub fn ones(&self) -> Result<Vec<BitString>> {
        self.preimage(true, DEFAULT_ENUMERATION_CAP)
    }

    pub fn valid_inputs(&self) -> Result<Vec<BitString>> {
        let mut v = self.zeros()?;
        v.extend(self.ones()?);
        v.sort();
        Ok(v)
    }

    pub fn as_explicit(&self, cap: u64) -> Result<PartialFunction> {
        PartialFunction::explicit(self.m, self.preimage(false, cap)?, self.preimage(true, cap)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RelationRule {
    Explicit {
        outputs: Vec<Label>,
        pairs: BTreeSet<(BitString, Label)>,
    },
    /// `(z, a)` is a member iff `|a xor z| <= n/2 - sqrt(n)`; outputs are
    /// n-bit strings.
    XorDistance,
    Function(PartialFunction),
    Composed {
        outer: Box<Relation>,
        inner: PartialFunction,
        blocks: usize,
    },
}

/// A relation `h ⊆ {0,1}^n × S`, stored either explicitly or as a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    rule: RelationRule,
}

impl Relation {
    /// Explicit relation. Every input must have at least one output.
    pub fn explicit<I>(n: usize, outputs: Vec<Label>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitString, Label)>,
    {
        let pairs: BTreeSet<(BitString, Label)> = pairs.into_iter().collect();
        for (z, s) in &pairs {
            check_len(n, z)?;
            if !outputs.contains(s) {
                return Err(Error::Domain(format!("label `{s}` is not a declared output")));
            }
        }
        enumerable(n, DEFAULT_ENUMERATION_CAP)?;
        for z in BitString::all(n) {
            if !outputs.iter().any(|s| pairs.contains(&(z.clone(), s.clone()))) {
                return Err(Error::Domain(format!("relation has no output for input {z}")));
            }
        }
        Ok(Relation {
            n,
            rule: RelationRule::Explicit { outputs, pairs },
        })
    }

    /// The relation `{(z, f(z))}` of a total labelling.
    pub fn from_fn(n: usize, outputs: Vec<Label>, f: impl Fn(&BitString) -> Label) -> Result<Self> {
        let pairs: Vec<_> = BitString::all(n)
            .map(|z| {
                let s = f(&z);
                (z, s)
            })
            .collect();
        Self::explicit(n, outputs, pairs)
    }

    pub fn parity(n: usize) -> Self {
        Self::from_fn(n, vec![bit_label(false), bit_label(true)], |z| {
            bit_label(z.weight() % 2 == 1)
        })
        .expect("parity relation is total")
    }

    pub fn identity(n: usize) -> Self {
        let outputs = BitString::all(n).map(|z| z.to_string()).collect();
        Self::from_fn(n, outputs, |z| z.to_string()).expect("identity relation is total")
    }

    /// The XOR-distance threshold relation on `n` bits (outputs are `n`-bit strings).
    pub fn xor_distance(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arity(1, 0));
        }
        Ok(Relation {
            n,
            rule: RelationRule::XorDistance,
        })
    }

    pub fn from_function(g: &PartialFunction) -> Self {
        Relation {
            n: g.arity(),
            rule: RelationRule::Function(g.clone()),
        }
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.rule, RelationRule::Explicit { .. })
    }

    /// `Some("f0")` for the XOR-distance rule.
    pub fn named(&self) -> Option<&'static str> {
        match self.rule {
            RelationRule::XorDistance => Some("f0"),
            _ => None,
        }
    }

    pub fn outputs(&self) -> Result<Vec<Label>> {
        match &self.rule {
            RelationRule::Explicit { outputs, .. } => Ok(outputs.clone()),
            RelationRule::XorDistance => {
                enumerable(self.n, DEFAULT_ENUMERATION_CAP)?;
                Ok(BitString::all(self.n).map(|a| a.to_string()).collect())
            }
            RelationRule::Function(_) => Ok(vec![bit_label(false), bit_label(true)]),
            RelationRule::Composed { outer, .. } => outer.outputs(),
        }
    }

    pub fn contains(&self, z: &BitString, s: &str) -> Result<bool> {
        check_len(self.n, z)?;
        match &self.rule {
            RelationRule::Explicit { pairs, .. } => Ok(pairs.contains(&(z.clone(), s.to_string()))),
            RelationRule::XorDistance => {
                let a: BitString = match s.parse() {
                    Ok(a) => a,
                    Err(_) => return Ok(false),
                };
                if a.len() != self.n {
                    return Ok(false);
                }
                Ok(weight_at_most_low(a.xor(z)?.weight(), self.n))
            }
            RelationRule::Function(g) => Ok(match g.evaluate(z)?.bit() {
                None => true,
                Some(b) => s == bit_label(b),
            }),
            RelationRule::Composed { outer, inner, .. } => {
                let m = inner.arity();
                let mut values = Vec::with_capacity(self.n / m.max(1));
                for block in z.blocks(m) {
                    match inner.evaluate(&block)?.bit() {
                        // An invalid block makes every output acceptable.
                        None => return Ok(true),
                        Some(b) => values.push(b),
                    }
                }
                outer.contains(&BitString::new(values), s)
            }
        }
    }

    /// Converts a rule-based relation into an explicit table, subject to `cap`
    /// input points.
    pub fn materialize(&self, cap: u64) -> Result<Relation> {
        if self.is_explicit() {
            return Ok(self.clone());
        }
        enumerable(self.n, cap)?;
        let outputs = self.outputs()?;
        let mut pairs = Vec::new();
        for z in BitString::all(self.n) {
            for s in &outputs {
                if self.contains(&z, s)? {
                    pairs.push((z.clone(), s.clone()));
                }
            }
        }
        Relation::explicit(self.n, outputs, pairs)
    }
}

/// Composes `f ⊆ {0,1}^n × S` with `n` copies of `g`. The result is a rule
/// evaluated on demand; call [`Relation::materialize`] for a table.
pub fn compose(f: &Relation, g: &PartialFunction, n: usize) -> Result<Relation> {
    if f.arity() != n {
        return Err(Error::arity(n, f.arity()));
    }
    Ok(Relation {
        n: n * g.arity(),
        rule: RelationRule::Composed {
            outer: Box::new(f.clone()),
            inner: g.clone(),
            blocks: n,
        },
    })
}

/// Common interface of the query problems the tree searches solve.
pub trait QueryProblem {
    fn arity(&self) -> usize;

    fn outputs(&self) -> Result<Vec<Label>>;

    fn accepts(&self, x: &BitString, s: &str) -> Result<bool>;

    /// Inputs that constrain the output. Inputs outside this set accept
    /// every output.
    fn constrained_inputs(&self) -> Result<Vec<BitString>>;
}

impl QueryProblem for PartialFunction {
    fn arity(&self) -> usize {
        self.m
    }

    fn outputs(&self) -> Result<Vec<Label>> {
        Ok(vec![bit_label(false), bit_label(true)])
    }

    fn accepts(&self, x: &BitString, s: &str) -> Result<bool> {
        Ok(match self.evaluate(x)?.bit() {
            None => true,
            Some(b) => s == bit_label(b),
        })
    }

    fn constrained_inputs(&self) -> Result<Vec<BitString>> {
        self.valid_inputs()
    }
}

impl QueryProblem for Relation {
    fn arity(&self) -> usize {
        self.n
    }

    fn outputs(&self) -> Result<Vec<Label>> {
        Relation::outputs(self)
    }

    fn accepts(&self, x: &BitString, s: &str) -> Result<bool> {
        self.contains(x, s)
    }

    fn constrained_inputs(&self) -> Result<Vec<BitString>> {
        if let RelationRule::Function(g) = &self.rule {
            return g.valid_inputs();
        }
        enumerable(self.n, DEFAULT_ENUMERATION_CAP)?;
        Ok(BitString::all(self.n).collect())
    }
}

impl fmt::Display for PartialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            FunctionRule::Explicit { zeros, ones } => write!(
                f,
                "g[m={}; zeros={}; ones={}]",
                self.m,
                zeros.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                ones.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
            FunctionRule::HammingGap => write!(f, "g0[n={}]", self.m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let or2 = PartialFunction::or(2);
        assert_eq!(or2.evaluate(&b("00")).unwrap(), Evaluation::Zero);
        assert_eq!(or2.evaluate(&b("10")).unwrap(), Evaluation::One);
        let g0 = PartialFunction::hamming_gap(4).unwrap();
        assert_eq!(g0.evaluate(&b("0110")).unwrap(), Evaluation::Invalid);
        assert_eq!(g0.zeros().unwrap(), vec![b("0000")]);
        assert_eq!(g0.ones().unwrap(), vec![b("1111")]);
        assert!(matches!(or2.evaluate(&b("000")), Err(Error::Arity { .. })));
    }

    #[test]
    fn explicit_rejects_overlap() {
        assert!(PartialFunction::explicit(1, vec![b("0")], vec![b("0")]).is_err());
        assert!(PartialFunction::explicit(2, vec![b("0")], vec![]).is_err());
    }

    #[test]
    fn compose_examples() {
        let parity = Relation::parity(2);
        let h = compose(&parity, &PartialFunction::or(2), 2).unwrap();
        assert_eq!(h.arity(), 4);
        assert!(h.contains(&b("0100"), "1").unwrap());
        assert!(!h.contains(&b("0100"), "0").unwrap());

        let g0 = PartialFunction::hamming_gap(4).unwrap();
        let h0 = compose(&parity, &g0, 2).unwrap();
        let x = b("01101111");
        assert!(h0.contains(&x, "0").unwrap());
        assert!(h0.contains(&x, "1").unwrap());

        let id = Relation::identity(2);
        let hid = compose(&id, &PartialFunction::and(2), 2).unwrap();
        assert!(hid.contains(&b("1100"), "10").unwrap());
        assert!(!hid.contains(&b("1100"), "11").unwrap());

        assert!(matches!(compose(&parity, &g0, 3), Err(Error::Arity { .. })));
    }

    #[test]
    fn relation_must_be_total() {
        let outs = vec!["a".to_string()];
        assert!(Relation::explicit(1, outs.clone(), vec![(b("0"), "a".to_string())]).is_err());
        assert!(Relation::explicit(1, outs, vec![(b("0"), "a".into()), (b("1"), "a".into())]).is_ok());
    }

    #[test]
    fn materialize_matches_rule() {
        let h = compose(&Relation::parity(2), &PartialFunction::xor(2), 2).unwrap();
        let t = h.materialize(1 << 8).unwrap();
        for z in BitString::all(4) {
            for s in ["0", "1"] {
                assert_eq!(h.contains(&z, s).unwrap(), t.contains(&z, s).unwrap());
            }
        }
        assert!(h.materialize(8).is_err());
    }
}
