//! The BITSAMPLER query process `P(B, Q)` on composed inputs, its exact
//! state distribution, the `γ_z(Q)` sampler, the composed algorithm `T`,
//! and the truncations built from them.
//!
//! A composed tree acts on `t` blocks of `m` bits; block `i` (1-based)
//! occupies indices `(i-1)m + 1 ..= im`.

mod algo;
mod chart;

use std::fmt;

use rand::Rng;

pub use algo::{append_subtrees, completing_attachments, default_fallback, truncate, RandomizedAlgorithm, TRun};
pub use chart::{exact_process_chart, gamma_pushforward, is_full_composed, ChartOptions, ProcessChart};

use crate::bits::{BitString, Subcube};
use crate::dist::PairMixture;
use crate::dtree::{DecisionTree, Node, NodeId};
use crate::error::{Error, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Block `i` and in-block coordinate `j` of composed index `index`.
pub fn block_of(index: usize, m: usize) -> (usize, usize) {
    ((index - 1) / m + 1, (index - 1) % m + 1)
}

/// The part of a composed subcube lying in block `i`.
pub fn block_cube(cube: &Subcube, i: usize, m: usize) -> Subcube {
    cube.restrict((i - 1) * m, m)
}

/// Number of blocks, after checking that `tree` acts on `t` blocks of the
/// mixture's arity.
pub(crate) fn check_shape<T: Scalar>(tree: &DecisionTree, q: &PairMixture<T>, t: usize) -> Result<usize> {
    let m = q.arity();
    if tree.arity() != t * m {
        return Err(Error::arity(t * m, tree.arity()));
    }
    if t > 64 {
        return Err(Error::Domain("at most 64 blocks are supported".into()));
    }
    Ok(m)
}

/// One BITSAMPLER call: returns `(bit, queried)`.
///
/// Draws one of three outcomes with probabilities `min(p0,p1)` (bit 0),
/// `1 - max(p0,p1)` (bit 1) and `|p0 - p1|` (the conflict band). Only in
/// the band is `z` read; the bit is then 0 iff `p_z` is the larger of the
/// two, so `Pr[bit = 0] = p_z` in every case.
pub fn bitsampler<T: Scalar, R: Rng + ?Sized>(
    p0: &T,
    p1: &T,
    z: impl FnOnce() -> bool,
    rng: &mut R,
) -> Result<(bool, bool)> {
    for p in [p0, p1] {
        if p.is_negative() || *p > T::one() {
            return Err(Error::Domain(format!("probability {p} is outside [0, 1]")));
        }
    }
    let lo = min_of(p0, p1);
    let hi = max_of(p0, p1);
    let band = hi.clone() - lo.clone();
    match T::draw(&[lo, band, T::one() - hi.clone()], rng) {
        0 => Ok((false, false)),
        2 => Ok((true, false)),
        _ => {
            let pz = if z() { p1 } else { p0 };
            Ok((*pz != hi, true))
        }
    }
}

/// One step of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub node: NodeId,
    pub block: usize,
    /// This step read `z_block`.
    pub queried: bool,
    pub branch: bool,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}, {}, {}, {}",
            self.node, self.block, self.queried as u8, self.branch as u8
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessState {
    pub node: NodeId,
    /// `QUERY_i` for each block.
    pub queried: Vec<bool>,
    /// `N_i` for each block.
    pub counts: Vec<usize>,
}

impl ProcessState {
    pub fn z_queries(&self) -> usize {
        self.queried.iter().filter(|q| **q).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessRun {
    /// `None` when the run stopped on its z-query budget.
    pub leaf: Option<NodeId>,
    pub state: ProcessState,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ProcessOptions {
    /// Stop instead of making z-query number `budget + 1`.
    pub z_budget: Option<usize>,
    /// Record every step.
    pub log: bool,
}

/// One trajectory of `P(B, Q)` on `z`.
///
/// A pair is drawn from `Q` for every block up front. At a query `(i, j)`
/// with `QUERY_i = 0`, `N_i` is incremented and BITSAMPLER answers with the
/// two conditional probabilities of `x_j = 0` inside the block's current
/// subcube; once `QUERY_i = 1` the bit is drawn from `μ_{z_i}` directly.
pub fn run_process<T: Scalar, R: Rng + ?Sized>(
    tree: &DecisionTree,
    q: &PairMixture<T>,
    z: &BitString,
    options: ProcessOptions,
    rng: &mut R,
) -> Result<ProcessRun> {
    let t = z.len();
    let m = check_shape(tree, q, t)?;
    let pairs: Vec<usize> = (0..t).map(|_| q.sample_index(rng)).collect();
    let mut state = ProcessState {
        node: tree.root(),
        queried: vec![false; t],
        counts: vec![0; t],
    };
    let mut steps = Vec::new();
    let mut cube = Subcube::full(tree.arity());
    loop {
        let v = state.node;
        let Node::Query { index, children } = tree.node(v) else {
            return Ok(ProcessRun {
                leaf: Some(v),
                state,
                steps,
            });
        };
        let (i, j) = block_of(*index, m);
        let pair = &q.entries()[pairs[i - 1]].1;
        let local = block_cube(&cube, i, m);
        let zi = z.bit(i);
        let cond = |b: bool| {
            pair.side(b)
                .prob_zero_at(j, &local)
                .map_err(|_| Error::Defect(format!("block {i} has no mass on side {} at node {v}", b as u8)))
        };
        let (branch, queried) = if state.queried[i - 1] {
            let pz = cond(zi)?;
            (T::draw(&[pz.clone(), T::one() - pz], rng) == 1, false)
        } else {
            state.counts[i - 1] += 1;
            let (p0, p1) = (cond(false)?, cond(true)?);
            let budget_hit = options.z_budget.is_some_and(|b| state.z_queries() >= b);
            let mut read = false;
            let (bit, queried) = bitsampler(
                &p0,
                &p1,
                || {
                    read = true;
                    zi
                },
                rng,
            )?;
            if read && budget_hit {
                return Ok(ProcessRun {
                    leaf: None,
                    state,
                    steps,
                });
            }
            if queried {
                state.queried[i - 1] = true;
            }
            (bit, queried)
        };
        if options.log {
            steps.push(Step {
                node: v,
                block: i,
                queried,
                branch,
            });
        }
        cube = cube.with(*index, branch);
        state.node = children[branch as usize];
    }
}

/// A composed input drawn from `γ_z(Q)`: a pair per block from `Q`, then
/// block `i` from `μ_{z_i}` of its pair.
pub fn sample_gamma<T: Scalar, R: Rng + ?Sized>(z: &BitString, q: &PairMixture<T>, rng: &mut R) -> BitString {
    let blocks: Vec<BitString> = (1..=z.len())
        .map(|i| {
            let k = q.sample_index(rng);
            q.entries()[k].1.side(z.bit(i)).sample(rng)
        })
        .collect();
    BitString::concat(&blocks)
}

#[cfg(test)]
mod tests;
