//! Memoized dynamic programs over subcubes.
//!
//! Each search keys its memo table on the canonical subcube encoding and
//! fails with a budget error instead of evicting once `memo_cap` entries
//! are stored. Ties go to the smallest query index; a leaf wins a tie
//! against any query.

use std::collections::HashMap;
use std::hash::Hash;

use crate::bits::{BitString, Subcube};
use crate::dist::DistPair;
use crate::dtree::DecisionTree;
use crate::error::{Error, Result};
use crate::function::{bit_label, Label, PartialFunction, QueryProblem};
use crate::scalar::{max_of, min_of, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSearchBudget {
    /// Deepest tree `enumerate_trees` will produce.
    pub max_depth: usize,
    /// Cap on the number of enumerated trees.
    pub max_nodes: usize,
    /// Cap on memo entries in any single search.
    pub memo_cap: usize,
}

impl Default for TreeSearchBudget {
    fn default() -> Self {
        TreeSearchBudget {
            max_depth: 3,
            max_nodes: 100_000,
            memo_cap: 1 << 20,
        }
    }
}

impl TreeSearchBudget {
    pub fn new(max_depth: usize, max_nodes: usize, memo_cap: usize) -> Result<Self> {
        if max_depth == 0 || max_nodes == 0 || memo_cap == 0 {
            return Err(Error::Config("tree search budgets must be positive".into()));
        }
        Ok(TreeSearchBudget {
            max_depth,
            max_nodes,
            memo_cap,
        })
    }
}

#[derive(Debug, Clone)]
enum Choice {
    Leaf(Option<Label>),
    Query(usize),
}

struct Memo<K, V> {
    map: HashMap<K, (V, Choice)>,
    cap: usize,
    what: &'static str,
}

impl<K: Hash + Eq + Clone, V: Clone> Memo<K, V> {
    fn new(cap: usize, what: &'static str) -> Self {
        Memo {
            map: HashMap::new(),
            cap,
            what,
        }
    }

    fn get(&self, k: &K) -> Option<V> {
        self.map.get(k).map(|(v, _)| v.clone())
    }

    fn insert(&mut self, k: K, v: V, c: Choice) -> Result<()> {
        if self.map.len() >= self.cap {
            return Err(Error::budget(format!(
                "{} memo table exceeds {} entries",
                self.what, self.cap
            )));
        }
        self.map.insert(k, (v, c));
        Ok(())
    }

    fn choice(&self, k: &K) -> &Choice {
        &self.map.get(k).expect("solved state").1
    }
}

/// Rebuilds the witness tree from memoized choices; `key` maps a subcube
/// to the memo key used for it during the search.
fn rebuild<K, V>(memo: &Memo<K, V>, arity: usize, cube: &Subcube, key: &dyn Fn(&Subcube) -> K) -> DecisionTree
where
    K: Hash + Eq + Clone,
    V: Clone,
{
    match memo.choice(&key(cube)) {
        Choice::Leaf(label) => DecisionTree::leaf(arity, label.clone()),
        Choice::Query(i) => DecisionTree::branch(
            *i,
            rebuild(memo, arity, &cube.with(*i, false), key),
            rebuild(memo, arity, &cube.with(*i, true), key),
        )
        .expect("free index"),
    }
}

fn sorted_outputs<P: QueryProblem + ?Sized>(h: &P) -> Result<Vec<Label>> {
    let mut outs = h.outputs()?;
    outs.sort();
    outs.dedup();
    if outs.is_empty() {
        return Err(Error::Domain("relation has no outputs".into()));
    }
    Ok(outs)
}

fn acceptance<P: QueryProblem + ?Sized>(h: &P, points: &[BitString], outputs: &[Label]) -> Result<Vec<Vec<bool>>> {
    points
        .iter()
        .map(|x| outputs.iter().map(|s| h.accepts(x, s)).collect())
        .collect()
}

/// `D(h)`: exact worst-case query complexity with a witness tree.
///
/// A subcube closes as a leaf iff some output is valid for every
/// constrained input inside it.
pub fn optimal_depth<P: QueryProblem + ?Sized>(h: &P, budget: &TreeSearchBudget) -> Result<(usize, DecisionTree)> {
    let k = h.arity();
    let outputs = sorted_outputs(h)?;
    let points = h.constrained_inputs()?;
    let accept = acceptance(h, &points, &outputs)?;
    let all: Vec<usize> = (0..points.len()).collect();
    let mut memo: Memo<Subcube, usize> = Memo::new(budget.memo_cap, "optimal depth");

    fn solve(
        cube: &Subcube,
        pts: &[usize],
        points: &[BitString],
        accept: &[Vec<bool>],
        outputs: &[Label],
        memo: &mut Memo<Subcube, usize>,
    ) -> Result<usize> {
        if let Some(v) = memo.get(cube) {
            return Ok(v);
        }
        let closing = (0..outputs.len()).find(|&s| pts.iter().all(|&p| accept[p][s]));
        if let Some(s) = closing {
            memo.insert(cube.clone(), 0, Choice::Leaf(Some(outputs[s].clone())))?;
            return Ok(0);
        }
        let mut best: Option<(usize, usize)> = None;
        for i in cube.free_indices().collect::<Vec<_>>() {
            let (p0, p1): (Vec<usize>, Vec<usize>) = pts.iter().partition(|&&p| !points[p].bit(i));
            let d0 = solve(&cube.with(i, false), &p0, points, accept, outputs, memo)?;
            let d1 = solve(&cube.with(i, true), &p1, points, accept, outputs, memo)?;
            let d = 1 + d0.max(d1);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, i));
            }
            if d == 1 {
                break;
            }
        }
        let (d, i) =
            best.ok_or_else(|| Error::Defect("no output fits a single point; relation is not total".into()))?;
        memo.insert(cube.clone(), d, Choice::Query(i))?;
        Ok(d)
    }

    let root = Subcube::full(k);
    let d = solve(&root, &all, &points, &accept, &outputs, &mut memo)?;
    let tree = rebuild(&memo, k, &root, &|c: &Subcube| c.clone());
    Ok((d, tree))
}

/// Minimum distributional error `Pr_{x∼μ}[(x, T(x)) ∉ h]` over trees of
/// depth at most `depth`, with a witness tree.
pub fn distributional_opt<T, P>(
    h: &P,
    mu: &crate::dist::Dist<T>,
    depth: usize,
    budget: &TreeSearchBudget,
) -> Result<(T, DecisionTree)>
where
    T: Scalar,
    P: QueryProblem + ?Sized,
{
    let k = h.arity();
    if mu.arity() != k {
        return Err(Error::arity(k, mu.arity()));
    }
    let outputs = sorted_outputs(h)?;
    let points: Vec<BitString> = mu.support().cloned().collect();
    let weights: Vec<T> = mu.iter().map(|(_, w)| w.clone()).collect();
    let accept = acceptance(h, &points, &outputs)?;
    let mut memo: Memo<(Subcube, usize), T> = Memo::new(budget.memo_cap, "distributional error");

    struct Ctx<'a, T> {
        points: &'a [BitString],
        weights: &'a [T],
        accept: &'a [Vec<bool>],
        outputs: &'a [Label],
    }

    fn solve<T: Scalar>(
        cube: &Subcube,
        left: usize,
        pts: &[usize],
        cx: &Ctx<'_, T>,
        memo: &mut Memo<(Subcube, usize), T>,
    ) -> Result<T> {
        let key = (cube.clone(), left);
        if let Some(v) = memo.get(&key) {
            return Ok(v);
        }
        let total = pts.iter().fold(T::zero(), |a, &p| a + cx.weights[p].clone());
        let mut best_s = 0;
        let mut best_mass: Option<T> = None;
        for s in 0..cx.outputs.len() {
            let mass = pts
                .iter()
                .filter(|&&p| cx.accept[p][s])
                .fold(T::zero(), |a, &p| a + cx.weights[p].clone());
            if best_mass.as_ref().is_none_or(|b| mass > *b) {
                best_mass = Some(mass);
                best_s = s;
            }
        }
        let leaf_err = total - best_mass.expect("outputs nonempty");
        let mut best = (leaf_err.clone(), Choice::Leaf(Some(cx.outputs[best_s].clone())));
        if left > 0 && !leaf_err.is_negligible() {
            for i in cube.free_indices().collect::<Vec<_>>() {
                let (p0, p1): (Vec<usize>, Vec<usize>) = pts.iter().partition(|&&p| !cx.points[p].bit(i));
                let e0 = solve(&cube.with(i, false), left - 1, &p0, cx, memo)?;
                let e1 = solve(&cube.with(i, true), left - 1, &p1, cx, memo)?;
                let e = e0 + e1;
                if e < best.0 {
                    best = (e, Choice::Query(i));
                }
            }
        }
        memo.insert(key, best.0.clone(), best.1)?;
        Ok(best.0)
    }

    let cx = Ctx {
        points: &points,
        weights: &weights,
        accept: &accept,
        outputs: &outputs,
    };
    let root = Subcube::full(k);
    let all: Vec<usize> = (0..points.len()).collect();
    let err = solve(&root, depth, &all, &cx, &mut memo)?;

    // Rebuild, tracking remaining depth alongside the subcube.
    fn build<T: Scalar>(memo: &Memo<(Subcube, usize), T>, k: usize, cube: &Subcube, left: usize) -> DecisionTree {
        match memo.choice(&(cube.clone(), left)) {
            Choice::Leaf(label) => DecisionTree::leaf(k, label.clone()),
            Choice::Query(i) => DecisionTree::branch(
                *i,
                build(memo, k, &cube.with(*i, false), left - 1),
                build(memo, k, &cube.with(*i, true), left - 1),
            )
            .expect("free index"),
        }
    }
    let tree = build(&memo, k, &root, depth);
    Ok((err, tree))
}

/// `min_T E_{(x,y)∼p}[sep_T(x, y)]` over trees computing `g`, with a witness.
///
/// The expectation equals the total mass of still-unseparated pairs summed
/// over the nodes they reach; the search minimizes that sum and then
/// extends the witness so it computes `g`.
pub fn min_sep_tree<T: Scalar>(
    g: &PartialFunction,
    p: &[(T, BitString, BitString)],
    budget: &TreeSearchBudget,
) -> Result<(T, DecisionTree)> {
    let k = g.arity();
    let mut total = T::zero();
    for (w, x, y) in p {
        if x == y {
            return Err(Error::InvalidPair(format!("pair ({x}, {x}) has equal sides")));
        }
        if g.value(x) != Some(false) || g.value(y) != Some(true) {
            return Err(Error::InvalidPair(format!(
                "pair ({x}, {y}) is not a (0-input, 1-input) pair of g"
            )));
        }
        if w.is_negative() {
            return Err(Error::Domain(format!("negative weight {w}")));
        }
        total = total + w.clone();
    }
    if !total.approx_eq(&T::one()) {
        return Err(Error::Domain(format!("pair weights sum to {total}, not 1")));
    }
    let mut memo: Memo<Subcube, T> = Memo::new(budget.memo_cap, "separation");

    fn solve<T: Scalar>(
        cube: &Subcube,
        alive: &[usize],
        p: &[(T, BitString, BitString)],
        memo: &mut Memo<Subcube, T>,
    ) -> Result<T> {
        if let Some(v) = memo.get(cube) {
            return Ok(v);
        }
        if alive.is_empty() {
            memo.insert(cube.clone(), T::zero(), Choice::Leaf(None))?;
            return Ok(T::zero());
        }
        let mass = alive.iter().fold(T::zero(), |a, &k| a + p[k].0.clone());
        let mut best: Option<(T, usize)> = None;
        for i in cube.free_indices().collect::<Vec<_>>() {
            let side = |b: bool| -> Vec<usize> {
                alive
                    .iter()
                    .copied()
                    .filter(|&k| p[k].1.bit(i) == b && p[k].2.bit(i) == b)
                    .collect()
            };
            let (a0, a1) = (side(false), side(true));
            let v =
                mass.clone() + solve(&cube.with(i, false), &a0, p, memo)? + solve(&cube.with(i, true), &a1, p, memo)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, i));
            }
        }
        let (v, i) = best.ok_or_else(|| Error::Defect("unseparated pair in a point subcube".into()))?;
        memo.insert(cube.clone(), v.clone(), Choice::Query(i))?;
        Ok(v)
    }

    let root = Subcube::full(k);
    let alive: Vec<usize> = (0..p.len()).filter(|&i| !p[i].0.is_negligible()).collect();
    let v = solve(&root, &alive, p, &mut memo)?;
    let raw = rebuild(&memo, k, &root, &|c: &Subcube| c.clone());
    Ok((v, raw.extend_to_compute(g)?))
}

/// `min_T χ(T, (μ₀, μ₁))` over full trees, with a witness.
///
/// `V(C) = min_i [1 + a_i V(C, x_i=0) + b_i V(C, x_i=1)]` where `a_i` and
/// `b_i` are the two walk transition probabilities inside `C`; `V(C) = 0`
/// once either side has no mass in `C`. Witness leaves are labeled with the
/// side whose support reaches them; use
/// [`DecisionTree::extend_to_compute`] for a tree computing a given `g`.
pub fn min_chi_tree<T: Scalar>(pair: &DistPair<T>, budget: &TreeSearchBudget) -> Result<(T, DecisionTree)> {
    let k = pair.arity();
    let side = |b: bool| -> Vec<(BitString, T)> { pair.side(b).iter().map(|(x, w)| (x.clone(), w.clone())).collect() };
    let (s0, s1) = (side(false), side(true));
    if s0.is_empty() || s1.is_empty() {
        return Err(Error::InvalidPair("one side of the pair has empty support".into()));
    }
    let mut memo: Memo<Subcube, T> = Memo::new(budget.memo_cap, "conflict complexity");

    fn mass<T: Scalar>(pts: &[(BitString, T)]) -> T {
        pts.iter().fold(T::zero(), |a, (_, w)| a + w.clone())
    }

    fn solve<T: Scalar>(
        cube: &Subcube,
        s0: &[(BitString, T)],
        s1: &[(BitString, T)],
        memo: &mut Memo<Subcube, T>,
    ) -> Result<T> {
        if let Some(v) = memo.get(cube) {
            return Ok(v);
        }
        let (m0, m1) = (mass(s0), mass(s1));
        if m0.is_negligible() || m1.is_negligible() {
            let label = if !m0.is_negligible() {
                Some(bit_label(false))
            } else if !m1.is_negligible() {
                Some(bit_label(true))
            } else {
                None
            };
            memo.insert(cube.clone(), T::zero(), Choice::Leaf(label))?;
            return Ok(T::zero());
        }
        let mut best: Option<(T, usize)> = None;
        for i in cube.free_indices().collect::<Vec<_>>() {
            let split = |s: &[(BitString, T)]| {
                let halves: (Vec<_>, Vec<_>) = s.iter().cloned().partition(|(x, _)| !x.bit(i));
                halves
            };
            let (l0, r0) = split(s0);
            let (l1, r1) = split(s1);
            let p0 = mass(&l0) / m0.clone();
            let p1 = mass(&l1) / m1.clone();
            let a = min_of(&p0, &p1);
            let b = T::one() - max_of(&p0, &p1);
            let mut v = T::one();
            if !a.is_negligible() {
                v = v + a * solve(&cube.with(i, false), &l0, &l1, memo)?;
            }
            if !b.is_negligible() {
                v = v + b * solve(&cube.with(i, true), &r0, &r1, memo)?;
            }
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, i));
            }
        }
        let (v, i) = best.ok_or_else(|| Error::Defect("supports overlap at a point".into()))?;
        memo.insert(cube.clone(), v.clone(), Choice::Query(i))?;
        Ok(v)
    }

    let root = Subcube::full(k);
    let v = solve(&root, &s0, &s1, &mut memo)?;

    // Children with zero transition probability were never solved; label
    // them directly by which side reaches them.
    fn build<T: Scalar>(memo: &Memo<Subcube, T>, k: usize, cube: &Subcube, pair: &DistPair<T>) -> DecisionTree {
        match memo.map.get(cube).map(|(_, c)| c) {
            Some(Choice::Query(i)) => DecisionTree::branch(
                *i,
                build(memo, k, &cube.with(*i, false), pair),
                build(memo, k, &cube.with(*i, true), pair),
            )
            .expect("free index"),
            Some(Choice::Leaf(label)) => DecisionTree::leaf(k, label.clone()),
            None => {
                let label = if !pair.mu0.mass_in(cube).is_negligible() {
                    Some(bit_label(false))
                } else if !pair.mu1.mass_in(cube).is_negligible() {
                    Some(bit_label(true))
                } else {
                    None
                };
                DecisionTree::leaf(k, label)
            }
        }
    }
    let tree = build(&memo, k, &root, pair);
    Ok((v, tree))
}
