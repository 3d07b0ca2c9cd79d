//! Seeded random instances for property suites: partial functions, small
//! rational distributions, pairs, mixtures and trees.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::dist::{Dist, DistPair, PairMixture};
use crate::dtree::DecisionTree;
use crate::error::Result;
use crate::function::PartialFunction;
use crate::scalar::Scalar;
use crate::Rational;

/// Independent generator number `k` under a master seed.
pub fn substream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Largest denominator of generated weights.
pub const MAX_DENOMINATOR: i64 = 8;

/// A partial function on `m` bits where each point is a 0-input, a 1-input
/// or invalid; both values occur.
pub fn partial_function<R: Rng + ?Sized>(m: usize, rng: &mut R) -> PartialFunction {
    loop {
        let mut zeros = Vec::new();
        let mut ones = Vec::new();
        for x in BitString::all(m) {
            match rng.gen_range(0..4) {
                0 => {}
                1 => zeros.push(x),
                _ => ones.push(x),
            }
        }
        if !zeros.is_empty() && !ones.is_empty() {
            return PartialFunction::explicit(m, zeros, ones).expect("disjoint by construction");
        }
    }
}

/// `k` positive integers summing to `total`.
fn composition<R: Rng + ?Sized>(k: usize, total: i64, rng: &mut R) -> Vec<i64> {
    let mut parts = vec![1; k];
    for _ in 0..(total - k as i64) {
        parts[rng.gen_range(0..k)] += 1;
    }
    parts
}

/// Weights `w_1/D, …, w_k/D` with `D ≤ MAX_DENOMINATOR` on a random subset
/// of `points` of size at most `max_support`.
pub fn weights_on<R: Rng + ?Sized>(
    points: &[BitString],
    max_support: usize,
    rng: &mut R,
) -> Vec<(BitString, Rational)> {
    let k = rng.gen_range(1..=points.len().min(max_support).min(MAX_DENOMINATOR as usize));
    let chosen: Vec<&BitString> = points.choose_multiple(rng, k).collect();
    let total = rng.gen_range(k as i64..=MAX_DENOMINATOR);
    chosen
        .into_iter()
        .zip(composition(k, total, rng))
        .map(|(x, w)| (x.clone(), Rational::ratio(w, total)))
        .collect()
}

pub fn dist_on<R: Rng + ?Sized>(m: usize, points: &[BitString], max_support: usize, rng: &mut R) -> Dist<Rational> {
    Dist::new(m, weights_on(points, max_support, rng)).expect("weights sum to one")
}

/// A pair with `supp(μ_b) ⊆ g⁻¹(b)`.
pub fn pair<R: Rng + ?Sized>(g: &PartialFunction, max_support: usize, rng: &mut R) -> Result<DistPair<Rational>> {
    let m = g.arity();
    DistPair::new(
        dist_on(m, &g.zeros()?, max_support, rng),
        dist_on(m, &g.ones()?, max_support, rng),
    )
}

/// A uniformly chosen point pair `(δ_x, δ_y)` with `g(x) = 0`, `g(y) = 1`.
pub fn point_pair<R: Rng + ?Sized>(g: &PartialFunction, rng: &mut R) -> Result<DistPair<Rational>> {
    let zeros = g.zeros()?;
    let ones = g.ones()?;
    DistPair::points(
        zeros.choose(rng).expect("g has 0-inputs").clone(),
        ones.choose(rng).expect("g has 1-inputs").clone(),
    )
}

/// A mixture of at most `max_len` pairs drawn by [`pair`]; consistent with
/// `g` by construction.
pub fn mixture<R: Rng + ?Sized>(
    g: &PartialFunction,
    max_len: usize,
    max_support: usize,
    rng: &mut R,
) -> Result<PairMixture<Rational>> {
    let len = rng.gen_range(1..=max_len.min(MAX_DENOMINATOR as usize));
    let total = rng.gen_range(len as i64..=MAX_DENOMINATOR);
    let entries = composition(len, total, rng)
        .into_iter()
        .map(|w| Ok((Rational::ratio(w, total), pair(g, max_support, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    PairMixture::new(entries)
}

/// A random tree with unlabeled leaves and depth at most `depth`; a node
/// stops early with probability `stop`.
pub fn tree<R: Rng + ?Sized>(m: usize, depth: usize, stop: f64, rng: &mut R) -> DecisionTree {
    fn go<R: Rng + ?Sized>(m: usize, left: usize, stop: f64, used: &mut Vec<bool>, rng: &mut R) -> DecisionTree {
        let free: Vec<usize> = (1..=m).filter(|&i| !used[i]).collect();
        if left == 0 || free.is_empty() || rng.gen_bool(stop) {
            return DecisionTree::leaf(m, None);
        }
        let i = *free.choose(rng).expect("nonempty");
        used[i] = true;
        let zero = go(m, left - 1, stop, used, rng);
        let one = go(m, left - 1, stop, used, rng);
        used[i] = false;
        DecisionTree::branch(i, zero, one).expect("index unused on the path")
    }
    go(m, depth, stop, &mut vec![false; m + 1], rng)
}

/// A random tree extended so that it computes `g`.
pub fn computing_tree<R: Rng + ?Sized>(g: &PartialFunction, depth: usize, rng: &mut R) -> Result<DecisionTree> {
    tree(g.arity(), depth, 0.3, rng).extend_to_compute(g)
}
