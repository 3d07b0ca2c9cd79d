//! Conflict complexity: the conflict walk, `χ` of trees and mixtures, the
//! sabotage game, and certified lower bounds on `χ̄(g)`.

mod search;
mod walk;

use std::collections::HashMap;
use std::marker::PhantomData;

pub use search::{chi_search, ChiSearch, ChiSearchConfig};
pub use walk::{chi_mixture, is_full, is_full_mixture, walk_chart, WalkChart, WalkNode};

use crate::bits::{BitString, Subcube};
use crate::dist::{Dist, DistPair, PairMixture};
use crate::dtree::{min_sep_tree, DecisionTree, TreeSearchBudget};
use crate::error::{Error, Result};
use crate::function::PartialFunction;
use crate::games::{best_against, double_oracle, OracleGame, DEFAULT_MAX_ROUNDS};
use crate::scalar::{max_of, min_of, ExactScalar, Scalar};

/// Per-pair conditional data inside a subcube: the points of each side that
/// lie in it, with their unconditioned weights.
#[derive(Clone)]
struct Sides<T> {
    s0: Vec<(BitString, T)>,
    s1: Vec<(BitString, T)>,
}

impl<T: Scalar> Sides<T> {
    fn of(pair: &DistPair<T>) -> Self {
        let side = |b: bool| pair.side(b).iter().map(|(x, w)| (x.clone(), w.clone())).collect();
        Sides {
            s0: side(false),
            s1: side(true),
        }
    }

    fn split(&self, i: usize, b: bool) -> Self {
        let keep = |s: &[(BitString, T)]| s.iter().filter(|(x, _)| x.bit(i) == b).cloned().collect();
        Sides {
            s0: keep(&self.s0),
            s1: keep(&self.s1),
        }
    }

    /// Walk transition probabilities `(min(p0,p1), 1 - max(p0,p1))` at index `i`.
    fn transitions(&self, i: usize) -> (T, T) {
        let mass = |s: &[(BitString, T)], zero_only: bool| {
            s.iter()
                .filter(|(x, _)| !zero_only || !x.bit(i))
                .fold(T::zero(), |a, (_, w)| a + w.clone())
        };
        let p0 = mass(&self.s0, true) / mass(&self.s0, false);
        let p1 = mass(&self.s1, true) / mass(&self.s1, false);
        (min_of(&p0, &p1), T::one() - max_of(&p0, &p1))
    }
}

type MixKey<T> = (Subcube, Vec<T>);

/// `min_T χ(T, Q)` over trees computing `g`, with a witness computing `g`.
///
/// State is a subcube with the vector of walk-visit masses of the pairs
/// still alive there; `V(C, r) = Σr + min_i [V(C₀, r·a_i) + V(C₁, r·b_i)]`.
/// `V` is homogeneous of degree one in `r`, so the memo stores `V / Σr`
/// under the normalized vector. On memo overflow the error carries the χ
/// of a greedily built computing tree as a non-certified upper bound.
pub fn min_chi_mixture<T: ExactScalar>(
    g: &PartialFunction,
    q: &PairMixture<T>,
    budget: &TreeSearchBudget,
) -> Result<(T, DecisionTree)> {
    if q.arity() != g.arity() {
        return Err(Error::arity(g.arity(), q.arity()));
    }
    q.check_against(g)?;
    let sides: Vec<Sides<T>> = q.entries().iter().map(|(_, p)| Sides::of(p)).collect();
    let weights: Vec<T> = q.entries().iter().map(|(w, _)| w.clone()).collect();
    let mut memo: HashMap<MixKey<T>, (T, Option<usize>)> = HashMap::new();

    fn solve<T: ExactScalar>(
        cube: &Subcube,
        alive: &[(usize, T)],
        sides: &[Sides<T>],
        memo: &mut HashMap<MixKey<T>, (T, Option<usize>)>,
        cap: usize,
    ) -> Result<T> {
        if alive.is_empty() {
            return Ok(T::zero());
        }
        let total = alive.iter().fold(T::zero(), |a, (_, r)| a + r.clone());
        let key = normalized_key(cube, alive, &total, sides.len());
        if let Some((v, _)) = memo.get(&key) {
            return Ok(v.clone() * total);
        }
        let mut best: Option<(T, usize)> = None;
        for i in cube.free_indices().collect::<Vec<_>>() {
            let mut a0 = Vec::new();
            let mut a1 = Vec::new();
            for (k, r) in alive {
                let (a, b) = sides[*k].transitions(i);
                if !a.is_zero() {
                    a0.push((*k, r.clone() * a));
                }
                if !b.is_zero() {
                    a1.push((*k, r.clone() * b));
                }
            }
            let c0 = cube.with(i, false);
            let c1 = cube.with(i, true);
            let sub0 = restrict(sides, &a0, i, false);
            let sub1 = restrict(sides, &a1, i, true);
            let v = solve(&c0, &a0, &sub0, memo, cap)? + solve(&c1, &a1, &sub1, memo, cap)?;
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, i));
            }
        }
        let (v, i) = best.ok_or_else(|| Error::Defect("alive pair in a point subcube".into()))?;
        let v = v + total.clone();
        if memo.len() >= cap {
            return Err(Error::budget(format!("mixture conflict memo exceeds {cap} entries")));
        }
        memo.insert(key, (v.clone() / total, Some(i)));
        Ok(v)
    }

    let root = Subcube::full(g.arity());
    let alive: Vec<(usize, T)> = weights.iter().cloned().enumerate().collect();
    let value = match solve(&root, &alive, &sides, &mut memo, budget.memo_cap) {
        Ok(v) => v,
        Err(Error::Budget { what, .. }) => {
            let fallback = DecisionTree::leaf(g.arity(), None).extend_to_compute(g)?;
            let ub = chi_mixture(&fallback, q)?;
            return Err(Error::Budget {
                what,
                upper_bound: Some(ub.to_string()),
            });
        }
        Err(e) => return Err(e),
    };

    fn build<T: ExactScalar>(
        cube: &Subcube,
        alive: &[(usize, T)],
        sides: &[Sides<T>],
        memo: &HashMap<MixKey<T>, (T, Option<usize>)>,
        m: usize,
    ) -> DecisionTree {
        if alive.is_empty() {
            return DecisionTree::leaf(m, None);
        }
        let total = alive.iter().fold(T::zero(), |a, (_, r)| a + r.clone());
        let i = memo[&normalized_key(cube, alive, &total, sides.len())]
            .1
            .expect("alive states query");
        let mut a0 = Vec::new();
        let mut a1 = Vec::new();
        for (k, r) in alive {
            let (a, b) = sides[*k].transitions(i);
            if !a.is_zero() {
                a0.push((*k, r.clone() * a));
            }
            if !b.is_zero() {
                a1.push((*k, r.clone() * b));
            }
        }
        let sub0 = restrict(sides, &a0, i, false);
        let sub1 = restrict(sides, &a1, i, true);
        DecisionTree::branch(
            i,
            build(&cube.with(i, false), &a0, &sub0, memo, m),
            build(&cube.with(i, true), &a1, &sub1, memo, m),
        )
        .expect("free index")
    }
    let raw = build(&root, &alive, &sides, &memo, g.arity());
    Ok((value, raw.extend_to_compute(g)?))
}

/// Restricts every alive pair's sides to `x_i = b`; dead pairs are left as
/// they are since they are never read again.
fn restrict<T: Scalar>(sides: &[Sides<T>], alive: &[(usize, T)], i: usize, b: bool) -> Vec<Sides<T>> {
    let mut out = sides.to_vec();
    for (k, _) in alive {
        out[*k] = sides[*k].split(i, b);
    }
    out
}

fn normalized_key<T: ExactScalar>(cube: &Subcube, alive: &[(usize, T)], total: &T, n: usize) -> MixKey<T> {
    let mut r = vec![T::zero(); n];
    for (k, w) in alive {
        r[*k] = w.clone() / total.clone();
    }
    (cube.clone(), r)
}

/// All cross pairs `(x, y)` with `g(x) = 0` and `g(y) = 1`.
pub fn cross_pairs(g: &PartialFunction) -> Result<Vec<(BitString, BitString)>> {
    let zeros = g.zeros()?;
    let ones = g.ones()?;
    if zeros.is_empty() || ones.is_empty() {
        return Err(Error::Domain("g must take both values".into()));
    }
    Ok(zeros
        .iter()
        .flat_map(|x| ones.iter().map(move |y| (x.clone(), y.clone())))
        .collect())
}

struct SabotageGame<'a, T> {
    g: &'a PartialFunction,
    pairs: Vec<(BitString, BitString)>,
    budget: TreeSearchBudget,
    sep: HashMap<(usize, DecisionTree), usize>,
    _value: PhantomData<T>,
}

impl<T: Scalar> OracleGame for SabotageGame<'_, T> {
    type Value = T;
    type Row = usize;
    type Col = DecisionTree;

    fn payoff(&mut self, row: &usize, tree: &DecisionTree) -> Result<T> {
        let key = (*row, tree.clone());
        let s = match self.sep.get(&key) {
            Some(&s) => s,
            None => {
                let (x, y) = &self.pairs[*row];
                let s = tree.sep(x, y)?;
                self.sep.insert(key, s);
                s
            }
        };
        Ok(T::from_usize(s).expect("depth fits"))
    }

    fn best_row(&mut self, cols: &[(DecisionTree, T)]) -> Result<(usize, T)> {
        let rows: Vec<usize> = (0..self.pairs.len()).collect();
        best_against(&rows, cols, |r, t| self.payoff(r, t), true)
    }

    fn best_col(&mut self, rows: &[(usize, T)]) -> Result<(DecisionTree, T)> {
        let p: Vec<(T, BitString, BitString)> = rows
            .iter()
            .map(|(k, w)| (w.clone(), self.pairs[*k].0.clone(), self.pairs[*k].1.clone()))
            .collect();
        let (v, tree) = min_sep_tree(self.g, &p, &self.budget)?;
        Ok((tree, v))
    }
}

#[derive(Debug, Clone)]
pub struct Sabotage<T> {
    /// `RS(g)`.
    pub value: T,
    /// Optimal distribution over cross pairs.
    pub pairs: Vec<(T, BitString, BitString)>,
    /// Optimal randomized tree: a distribution over trees computing `g`.
    pub trees: Vec<(DecisionTree, T)>,
    pub certified: bool,
}

/// `RS(g) = max_p min_T E_{(x,y)∼p} sep_T(x, y)`, solved by double oracle
/// with cross pairs as rows and `min_sep_tree` as the column oracle.
pub fn sabotage<T: Scalar>(g: &PartialFunction, budget: &TreeSearchBudget) -> Result<Sabotage<T>> {
    let pairs = cross_pairs(g)?;
    if pairs.len() > budget.max_nodes {
        return Err(Error::budget(format!(
            "{} cross pairs exceed the cap of {}",
            pairs.len(),
            budget.max_nodes
        )));
    }
    let uniform = T::one() / T::from_usize(pairs.len()).expect("count fits");
    let p: Vec<(T, BitString, BitString)> = pairs
        .iter()
        .map(|(x, y)| (uniform.clone(), x.clone(), y.clone()))
        .collect();
    let (_, seed_tree) = min_sep_tree(g, &p, budget)?;
    let mut game = SabotageGame::<T> {
        g,
        pairs,
        budget: *budget,
        sep: HashMap::new(),
        _value: PhantomData,
    };
    let sol = double_oracle(&mut game, vec![0], vec![seed_tree], &T::zero(), DEFAULT_MAX_ROUNDS)?;
    let pairs = sol
        .rows
        .iter()
        .map(|(k, w)| (w.clone(), game.pairs[*k].0.clone(), game.pairs[*k].1.clone()))
        .collect();
    Ok(Sabotage {
        value: sol.value,
        pairs,
        trees: sol.cols,
        certified: sol.certified,
    })
}

struct ChiGame<'a, T> {
    g: &'a PartialFunction,
    candidates: &'a [DistPair<T>],
    budget: TreeSearchBudget,
    chi: HashMap<(usize, DecisionTree), T>,
}

impl<T: ExactScalar> OracleGame for ChiGame<'_, T> {
    type Value = T;
    type Row = usize;
    type Col = DecisionTree;

    fn payoff(&mut self, row: &usize, tree: &DecisionTree) -> Result<T> {
        let key = (*row, tree.clone());
        if let Some(v) = self.chi.get(&key) {
            return Ok(v.clone());
        }
        let chart = walk_chart(tree, &self.candidates[*row])?;
        if !chart.is_full() {
            return Err(Error::NotFull);
        }
        self.chi.insert(key, chart.total.clone());
        Ok(chart.total)
    }

    fn best_row(&mut self, cols: &[(DecisionTree, T)]) -> Result<(usize, T)> {
        let rows: Vec<usize> = (0..self.candidates.len()).collect();
        best_against(&rows, cols, |r, t| self.payoff(r, t), true)
    }

    fn best_col(&mut self, rows: &[(usize, T)]) -> Result<(DecisionTree, T)> {
        let q = PairMixture::new(
            rows.iter()
                .map(|(k, w)| (w.clone(), self.candidates[*k].clone()))
                .collect(),
        )?;
        let (v, tree) = min_chi_mixture(self.g, &q, &self.budget)?;
        Ok((tree, v))
    }
}

#[derive(Debug, Clone)]
pub struct ChibarBound<T> {
    /// Value of the mixtures-over-candidates game: a lower bound on `χ̄(g)`.
    pub value: T,
    pub witness: PairMixture<T>,
    pub trees: Vec<(DecisionTree, T)>,
    pub certified: bool,
}

/// Certified lower bound on `χ̄(g)`: the exact value of the game in which
/// the maximizer mixes over `candidates` and the minimizer picks trees
/// computing `g`.
pub fn chibar_lower_bound<T: ExactScalar>(
    g: &PartialFunction,
    candidates: &[DistPair<T>],
    budget: &TreeSearchBudget,
) -> Result<ChibarBound<T>> {
    if candidates.is_empty() {
        return Err(Error::Consistency("no candidate pairs".into()));
    }
    let uniform = T::one() / T::from_usize(candidates.len()).expect("count fits");
    // Checks the combined candidate set for consistency.
    let all = PairMixture::new(candidates.iter().map(|p| (uniform.clone(), p.clone())).collect())?;
    all.check_against(g)?;
    let (_, seed_tree) = min_chi_mixture(g, &all, budget)?;
    let mut game = ChiGame {
        g,
        candidates,
        budget: *budget,
        chi: HashMap::new(),
    };
    let sol = double_oracle(&mut game, vec![0], vec![seed_tree], &T::zero(), DEFAULT_MAX_ROUNDS)?;
    let witness = PairMixture::new(
        sol.rows
            .iter()
            .map(|(k, w)| (w.clone(), candidates[*k].clone()))
            .collect(),
    )?;
    Ok(ChibarBound {
        value: sol.value,
        witness,
        trees: sol.cols,
        certified: sol.certified,
    })
}

/// Every `(δ_x, δ_y)` with `g(x) = 0`, `g(y) = 1`.
pub fn singleton_candidates<T: Scalar>(g: &PartialFunction) -> Result<Vec<DistPair<T>>> {
    cross_pairs(g)?
        .into_iter()
        .map(|(x, y)| DistPair::points(x, y))
        .collect()
}

/// Pairs `(uniform S₀, uniform S₁)` for all `S_b ⊆ g⁻¹(b)` with
/// `1 ≤ |S_b| ≤ 2`; the singletons come first.
pub fn default_candidates<T: Scalar>(g: &PartialFunction) -> Result<Vec<DistPair<T>>> {
    fn small_subsets(pts: &[BitString]) -> Vec<Vec<BitString>> {
        let mut out: Vec<Vec<BitString>> = pts.iter().map(|x| vec![x.clone()]).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                out.push(vec![pts[i].clone(), pts[j].clone()]);
            }
        }
        out
    }
    let s0 = small_subsets(&g.zeros()?);
    let s1 = small_subsets(&g.ones()?);
    if s0.is_empty() || s1.is_empty() {
        return Err(Error::Domain("g must take both values".into()));
    }
    let mut out = singleton_candidates(g)?;
    for a in &s0 {
        for b in &s1 {
            if a.len() == 1 && b.len() == 1 {
                continue;
            }
            out.push(DistPair::new(Dist::uniform(a)?, Dist::uniform(b)?)?);
        }
    }
    Ok(out)
}
