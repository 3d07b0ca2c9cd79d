use std::collections::BTreeMap;

use super::{block_cube, block_of, check_shape};
use crate::bits::{BitString, Subcube};
use crate::dist::{Dist, DistPair, PairMixture};
use crate::dtree::{DecisionTree, Node, NodeId};
use crate::error::{Error, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Default cap on weighted states visited by [`exact_process_chart`].
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct ChartOptions {
    /// Stop instead of making z-query number `budget + 1`.
    pub z_budget: Option<usize>,
    pub state_cap: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            z_budget: None,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

/// Exact distribution of `P(B, Q)` on one `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessChart<T> {
    /// Probability of visiting each `(node, queried-block mask)`; bit
    /// `i - 1` of the mask is `QUERY_i`.
    pub states: BTreeMap<(NodeId, u64), T>,
    /// Probability of ending at each leaf; absent leaves have probability 0.
    pub leaves: BTreeMap<NodeId, T>,
    /// `E[N_i]`, indexed by block minus one.
    pub expected_counts: Vec<T>,
    /// `Pr[F_i]`: probability that `z_i` is queried.
    pub query_probs: Vec<T>,
    /// Probability of stopping on the z-query budget.
    pub stopped: T,
}

impl<T: Scalar> ProcessChart<T> {
    /// Expected number of z-queries, `Σ_i Pr[F_i]`.
    pub fn expected_queries(&self) -> T {
        self.query_probs.iter().fold(T::zero(), |a, p| a + p.clone())
    }

    pub fn total_count(&self) -> T {
        self.expected_counts.iter().fold(T::zero(), |a, p| a + p.clone())
    }
}

fn add<K: Ord, T: Scalar>(map: &mut BTreeMap<K, T>, k: K, v: T) {
    if v.is_zero() {
        return;
    }
    let e = map.entry(k).or_insert_with(T::zero);
    *e = e.clone() + v;
}

/// Exact state distribution of `P(B, Q)` on `z`.
///
/// The outer draw of pairs is enumerated over the blocks `B` queries; for
/// each pair tuple the chain is propagated node by node (children have
/// larger ids). At an unqueried block the chain moves left with
/// `min(p0,p1)`, right with `1 - max(p0,p1)`, and with `|p0 - p1|` queries
/// `z_i` and moves left iff `p_{z_i} = max(p0,p1)`.
pub fn exact_process_chart<T: Scalar>(
    tree: &DecisionTree,
    q: &PairMixture<T>,
    z: &BitString,
    options: &ChartOptions,
) -> Result<ProcessChart<T>> {
    let t = z.len();
    let m = check_shape(tree, q, t)?;
    let cubes = tree.subcubes();
    let mut touched: Vec<usize> = tree
        .nodes()
        .iter()
        .filter_map(|n| match n {
            Node::Query { index, .. } => Some(block_of(*index, m).0),
            Node::Leaf { .. } => None,
        })
        .collect();
    touched.sort_unstable();
    touched.dedup();

    let mut chart = ProcessChart {
        states: BTreeMap::new(),
        leaves: BTreeMap::new(),
        expected_counts: vec![T::zero(); t],
        query_probs: vec![T::zero(); t],
        stopped: T::zero(),
    };
    let k = q.len();
    let combos = k.checked_pow(touched.len() as u32).unwrap_or(usize::MAX);
    if combos > options.state_cap {
        return Err(Error::budget(format!("{combos} pair tuples exceed the state cap")));
    }
    let mut visited = 0usize;
    let mut choice = vec![0usize; touched.len()];
    loop {
        let mut pairs: Vec<Option<&DistPair<T>>> = vec![None; t + 1];
        let mut weight = T::one();
        for (slot, &i) in touched.iter().enumerate() {
            let (w, p) = &q.entries()[choice[slot]];
            weight = weight * w.clone();
            pairs[i] = Some(p);
        }
        propagate(tree, &cubes, m, z, &pairs, &weight, options, &mut chart, &mut visited)?;

        let mut slot = 0;
        while slot < choice.len() {
            choice[slot] += 1;
            if choice[slot] < k {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
        if slot == choice.len() {
            return Ok(chart);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn propagate<T: Scalar>(
    tree: &DecisionTree,
    cubes: &[Subcube],
    m: usize,
    z: &BitString,
    pairs: &[Option<&DistPair<T>>],
    weight: &T,
    options: &ChartOptions,
    chart: &mut ProcessChart<T>,
    visited: &mut usize,
) -> Result<()> {
    let mut frontier: BTreeMap<(NodeId, u64), T> = BTreeMap::new();
    frontier.insert((tree.root(), 0), weight.clone());
    while let Some(((v, mask), p)) = frontier.pop_first() {
        *visited += 1;
        if *visited > options.state_cap {
            return Err(Error::budget(format!(
                "process chart exceeds {} states",
                options.state_cap
            )));
        }
        add(&mut chart.states, (v, mask), p.clone());
        let (index, children) = match tree.node(v) {
            Node::Leaf { .. } => {
                add(&mut chart.leaves, v, p);
                continue;
            }
            Node::Query { index, children } => (*index, *children),
        };
        let (i, j) = block_of(index, m);
        let pair = pairs[i].expect("touched block has a pair");
        let local = block_cube(&cubes[v], i, m);
        let cond = |b: bool| {
            pair.side(b)
                .prob_zero_at(j, &local)
                .map_err(|_| Error::Defect(format!("block {i} has no mass on side {} at node {v}", b as u8)))
        };
        let bit = 1u64 << (i - 1);
        if mask & bit != 0 {
            let pz = cond(z.bit(i))?;
            add(&mut frontier, (children[0], mask), p.clone() * pz.clone());
            add(&mut frontier, (children[1], mask), p * (T::one() - pz));
            continue;
        }
        let ix = i - 1;
        chart.expected_counts[ix] = chart.expected_counts[ix].clone() + p.clone();
        let (p0, p1) = (cond(false)?, cond(true)?);
        let hi = max_of(&p0, &p1);
        let lo = min_of(&p0, &p1);
        let band = p.clone() * (hi.clone() - lo.clone());
        add(&mut frontier, (children[0], mask), p.clone() * lo);
        add(&mut frontier, (children[1], mask), p * (T::one() - hi.clone()));
        if band.is_zero() {
            continue;
        }
        let made = mask.count_ones() as usize;
        if options.z_budget.is_some_and(|b| made >= b) {
            chart.stopped = chart.stopped.clone() + band;
            continue;
        }
        chart.query_probs[ix] = chart.query_probs[ix].clone() + band.clone();
        let pz = if z.bit(i) { p1 } else { p0 };
        let go = if pz == hi { children[0] } else { children[1] };
        add(&mut frontier, (go, mask | bit), band);
    }
    Ok(())
}

/// Leaf distribution of `B(x)` for `x ∼ γ_z(Q)`.
///
/// Blocks of `x` are independent with marginal `Σ_k w_k μ^{(k)}_{z_i}`, so
/// each leaf's probability is the product of its block marginals.
pub fn gamma_pushforward<T: Scalar>(
    tree: &DecisionTree,
    q: &PairMixture<T>,
    z: &BitString,
) -> Result<BTreeMap<NodeId, T>> {
    let t = z.len();
    let m = check_shape(tree, q, t)?;
    let marginals: Vec<Dist<T>> = (1..=t)
        .map(|i| {
            let mut acc: BTreeMap<BitString, T> = BTreeMap::new();
            for (w, pair) in q.entries() {
                for (x, px) in pair.side(z.bit(i)).iter() {
                    add(&mut acc, x.clone(), w.clone() * px.clone());
                }
            }
            Dist::new(m, acc)
        })
        .collect::<Result<_>>()?;
    let cubes = tree.subcubes();
    let mut out = BTreeMap::new();
    for leaf in tree.leaves() {
        let p = (1..=t).fold(T::one(), |a, i| {
            a * marginals[i - 1].mass_in(&block_cube(&cubes[leaf], i, m))
        });
        add(&mut out, leaf, p);
    }
    Ok(out)
}

/// `(B, Q)` is full: for every `z`, every `z_i` is queried with probability 1.
pub fn is_full_composed<T: Scalar>(tree: &DecisionTree, q: &PairMixture<T>, t: usize) -> Result<bool> {
    check_shape(tree, q, t)?;
    for z in BitString::all(t) {
        let chart = exact_process_chart(tree, q, &z, &ChartOptions::default())?;
        if !chart.query_probs.iter().all(|p| p.approx_eq(&T::one())) {
            return Ok(false);
        }
    }
    Ok(true)
}
