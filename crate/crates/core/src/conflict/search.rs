use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::dist::{Dist, DistPair};
use crate::dtree::{min_chi_tree, DecisionTree, TreeSearchBudget};
use crate::error::{Error, Result};
use crate::function::PartialFunction;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct ChiSearchConfig {
    pub restarts: usize,
    /// Every weight is a multiple of `1 / denominator`.
    pub denominator: u32,
    pub seed: u64,
    /// Cap on structured starts per side.
    pub structured_cap: usize,
}

impl Default for ChiSearchConfig {
    fn default() -> Self {
        ChiSearchConfig {
            restarts: 32,
            denominator: 16,
            seed: 0,
            structured_cap: 64,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChiSearch<T> {
    /// Best `min_T χ(T, pair)` found: a lower bound on `χ(g)`.
    pub value: T,
    pub pair: DistPair<T>,
    /// Optimal full tree for `pair`.
    pub tree: DecisionTree,
}

/// Grid weights on each side, summing to the denominator.
type Grid = (Vec<u32>, Vec<u32>);

struct Objective<'a> {
    zeros: &'a [BitString],
    ones: &'a [BitString],
    denominator: u32,
    budget: &'a TreeSearchBudget,
    m: usize,
}

impl Objective<'_> {
    fn pair<T: Scalar>(&self, w: &Grid) -> Result<DistPair<T>> {
        let side = |pts: &[BitString], ws: &[u32]| {
            Dist::new(
                self.m,
                pts.iter()
                    .zip(ws)
                    .filter(|(_, &k)| k > 0)
                    .map(|(x, &k)| (x.clone(), T::ratio(k as i64, self.denominator as i64))),
            )
        };
        DistPair::new(side(self.zeros, &w.0)?, side(self.ones, &w.1)?)
    }

    fn eval<T: Scalar>(&self, w: &Grid) -> Result<T> {
        Ok(min_chi_tree(&self.pair::<T>(w)?, self.budget)?.0)
    }

    /// Best-improvement ascent over single-unit transfers within a side.
    fn ascend<T: Scalar>(&self, mut w: Grid) -> Result<(T, Grid)> {
        let mut v = self.eval::<T>(&w)?;
        loop {
            let mut best: Option<(T, Grid)> = None;
            for side in 0..2 {
                let len = if side == 0 { w.0.len() } else { w.1.len() };
                for from in 0..len {
                    for to in 0..len {
                        let ws = if side == 0 { &w.0 } else { &w.1 };
                        if from == to || ws[from] == 0 {
                            continue;
                        }
                        let mut next = w.clone();
                        let nw = if side == 0 { &mut next.0 } else { &mut next.1 };
                        nw[from] -= 1;
                        nw[to] += 1;
                        let nv = self.eval::<T>(&next)?;
                        let beats = match &best {
                            None => nv > v,
                            Some((bv, _)) => nv > *bv,
                        };
                        if beats {
                            best = Some((nv, next));
                        }
                    }
                }
            }
            match best {
                Some((nv, next)) => {
                    v = nv;
                    w = next;
                }
                None => return Ok((v, w)),
            }
        }
    }
}

fn subsets(n: usize, size: usize, cap: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, size, cur, out, cap);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::new(), &mut out, cap);
    out
}

/// Uniform weights over subsets of size 1, 2 and 4 (when the grid can
/// represent them), at most `cap` of them.
fn structured(n: usize, denominator: u32, cap: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for size in [1usize, 2, 4] {
        if size > n || !denominator.is_multiple_of(size as u32) {
            continue;
        }
        for s in subsets(n, size, cap.saturating_sub(out.len())) {
            let mut w = vec![0; n];
            for i in s {
                w[i] = denominator / size as u32;
            }
            out.push(w);
        }
    }
    out
}

fn random_weights<R: Rng>(n: usize, denominator: u32, rng: &mut R) -> Vec<u32> {
    let support = rng.gen_range(1..=n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..support {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut w = vec![0; n];
    for _ in 0..denominator {
        w[idx[rng.gen_range(0..support)]] += 1;
    }
    w
}

/// Searches rational-grid pairs for a large `min_T χ(T, (μ₀, μ₁))`.
///
/// Structured starts are scored directly and the best is refined by
/// coordinate ascent; each random restart `k` draws its start from ChaCha
/// stream `k` of the seed and is refined likewise. Restarts run in
/// parallel and are merged in index order, so the result depends only on
/// the configuration. The value is a lower bound on `χ(g)`.
pub fn chi_search<T: Scalar>(
    g: &PartialFunction,
    config: &ChiSearchConfig,
    budget: &TreeSearchBudget,
) -> Result<ChiSearch<T>> {
    if config.denominator == 0 {
        return Err(Error::Config("grid denominator must be positive".into()));
    }
    let zeros = g.zeros()?;
    let ones = g.ones()?;
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::Domain("g must take both values".into()));
    }
    let obj = Objective {
        zeros: &zeros,
        ones: &ones,
        denominator: config.denominator,
        budget,
        m: g.arity(),
    };

    let s0 = structured(zeros.len(), config.denominator, config.structured_cap);
    let s1 = structured(ones.len(), config.denominator, config.structured_cap);
    let mut best: Option<(T, Grid)> = None;
    for a in &s0 {
        for b in &s1 {
            let w = (a.clone(), b.clone());
            let v = obj.eval::<T>(&w)?;
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, w));
            }
        }
    }
    let mut starts: Vec<Grid> = best.iter().map(|(_, w)| w.clone()).collect();
    for k in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(k as u64);
        starts.push((
            random_weights(zeros.len(), config.denominator, &mut rng),
            random_weights(ones.len(), config.denominator, &mut rng),
        ));
    }
    let results: Vec<(T, Grid)> = starts
        .into_par_iter()
        .map(|w| obj.ascend::<T>(w))
        .collect::<Result<_>>()?;
    for (v, w) in results {
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, w));
        }
    }
    let (value, w) = best.expect("at least one start");
    let pair = obj.pair::<T>(&w)?;
    let (_, tree) = min_chi_tree(&pair, budget)?;
    Ok(ChiSearch { value, pair, tree })
}
