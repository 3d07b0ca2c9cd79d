//! Zero-sum games: an exact simplex solver, the double-oracle method for
//! games whose strategy universes are only reachable through best-response
//! oracles, and randomized query complexity as a game value.

mod simplex;

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

pub use simplex::{solve_matrix, GameSolution, MatrixGame};

use crate::bits::BitString;
use crate::dist::Dist;
use crate::dtree::{distributional_opt, optimal_depth, DecisionTree, TreeSearchBudget};
use crate::error::{Error, Result};
use crate::function::QueryProblem;
use num_traits::Signed;

use crate::scalar::Scalar;

/// Default cap on double-oracle rounds.
pub const DEFAULT_MAX_ROUNDS: usize = 10_000;

/// A zero-sum game whose strategy sets are explored through exact
/// best-response oracles. The row player maximizes.
pub trait OracleGame {
    type Value: Scalar;
    type Row: Clone + Eq + Hash + Debug;
    type Col: Clone + Eq + Hash + Debug;

    fn payoff(&mut self, row: &Self::Row, col: &Self::Col) -> Result<Self::Value>;

    /// A row maximizing expected payoff against the column mix, and that payoff.
    fn best_row(&mut self, cols: &[(Self::Col, Self::Value)]) -> Result<(Self::Row, Self::Value)>;

    /// A column minimizing expected payoff against the row mix, and that payoff.
    fn best_col(&mut self, rows: &[(Self::Row, Self::Value)]) -> Result<(Self::Col, Self::Value)>;
}

#[derive(Debug, Clone)]
pub struct OracleSolution<R, C, T> {
    /// Value of the final restricted game.
    pub value: T,
    /// Best lower bound certified by a column best response.
    pub lo: T,
    /// Best upper bound certified by a row best response.
    pub hi: T,
    pub rows: Vec<(R, T)>,
    pub cols: Vec<(C, T)>,
    /// `hi - lo` is within tolerance.
    pub certified: bool,
    pub rounds: usize,
}

fn support<S: Clone, T: Scalar>(strats: &[S], mix: &[T]) -> Vec<(S, T)> {
    strats
        .iter()
        .zip(mix)
        .filter(|(_, w)| !w.is_zero())
        .map(|(s, w)| (s.clone(), w.clone()))
        .collect()
}

/// Double oracle: solve the restricted game, ask each oracle for a best
/// response to the opponent's restricted optimum, add them, repeat.
///
/// Every round yields `lo ≤ value(G) ≤ hi`; the bracket kept is the
/// tightest seen. Stops once `hi - lo ≤ tolerance`, once neither oracle
/// contributes a new strategy, or after `max_rounds` (non-certified).
pub fn double_oracle<G: OracleGame>(
    game: &mut G,
    seed_rows: Vec<G::Row>,
    seed_cols: Vec<G::Col>,
    tolerance: &G::Value,
    max_rounds: usize,
) -> Result<OracleSolution<G::Row, G::Col, G::Value>> {
    if seed_rows.is_empty() || seed_cols.is_empty() {
        return Err(Error::Domain("double oracle needs a seed strategy on each side".into()));
    }
    if tolerance.is_negative() {
        return Err(Error::Domain("gap tolerance must be nonnegative".into()));
    }
    let mut rows: Vec<G::Row> = Vec::new();
    let mut cols: Vec<G::Col> = Vec::new();
    let mut row_ix: HashMap<G::Row, usize> = HashMap::new();
    let mut col_ix: HashMap<G::Col, usize> = HashMap::new();
    let mut matrix: Vec<Vec<G::Value>> = Vec::new();

    fn add_row<G: OracleGame>(
        game: &mut G,
        r: G::Row,
        rows: &mut Vec<G::Row>,
        row_ix: &mut HashMap<G::Row, usize>,
        cols: &[G::Col],
        matrix: &mut Vec<Vec<G::Value>>,
    ) -> Result<bool> {
        if row_ix.contains_key(&r) {
            return Ok(false);
        }
        let line = cols.iter().map(|c| game.payoff(&r, c)).collect::<Result<Vec<_>>>()?;
        row_ix.insert(r.clone(), rows.len());
        rows.push(r);
        matrix.push(line);
        Ok(true)
    }

    fn add_col<G: OracleGame>(
        game: &mut G,
        c: G::Col,
        cols: &mut Vec<G::Col>,
        col_ix: &mut HashMap<G::Col, usize>,
        rows: &[G::Row],
        matrix: &mut [Vec<G::Value>],
    ) -> Result<bool> {
        if col_ix.contains_key(&c) {
            return Ok(false);
        }
        for (r, line) in rows.iter().zip(matrix.iter_mut()) {
            line.push(game.payoff(r, &c)?);
        }
        col_ix.insert(c.clone(), cols.len());
        cols.push(c);
        Ok(true)
    }

    for c in seed_cols {
        add_col(game, c, &mut cols, &mut col_ix, &rows, &mut matrix)?;
    }
    for r in seed_rows {
        add_row(game, r, &mut rows, &mut row_ix, &cols, &mut matrix)?;
    }

    let mut lo: Option<G::Value> = None;
    let mut hi: Option<G::Value> = None;
    let mut rounds = 0;
    loop {
        let sol = MatrixGame::new(matrix.clone())?.solve();
        let row_mix = support(&rows, &sol.row_mix);
        let col_mix = support(&cols, &sol.col_mix);
        let (br_row, up) = game.best_row(&col_mix)?;
        let (br_col, down) = game.best_col(&row_mix)?;
        if hi.as_ref().is_none_or(|h| up < *h) {
            hi = Some(up);
        }
        if lo.as_ref().is_none_or(|l| down > *l) {
            lo = Some(down);
        }
        rounds += 1;
        let (l, h) = (lo.clone().unwrap(), hi.clone().unwrap());
        let gap = h.clone() - l.clone();
        let done = gap <= *tolerance || gap.is_negligible();
        let grew_r = !done && add_row(game, br_row, &mut rows, &mut row_ix, &cols, &mut matrix)?;
        let grew_c = !done && add_col(game, br_col, &mut cols, &mut col_ix, &rows, &mut matrix)?;
        let stalled = !done && !grew_r && !grew_c;
        if done || stalled || rounds >= max_rounds {
            // A stall means both best responses are already present, so the
            // restricted optimum is an equilibrium of the whole game.
            let (lo, hi) = if stalled {
                (sol.value.clone(), sol.value.clone())
            } else {
                (l, h)
            };
            return Ok(OracleSolution {
                value: sol.value,
                certified: done || stalled,
                lo,
                hi,
                rows: row_mix,
                cols: col_mix,
                rounds,
            });
        }
    }
}

/// Expected payoff of each universe member against a mix, via `payoff`.
pub fn best_against<S, O, T, F>(universe: &[S], mix: &[(O, T)], mut payoff: F, maximize: bool) -> Result<(S, T)>
where
    S: Clone,
    T: Scalar,
    F: FnMut(&S, &O) -> Result<T>,
{
    let mut best: Option<(usize, T)> = None;
    for (k, s) in universe.iter().enumerate() {
        let mut v = T::zero();
        for (o, w) in mix {
            v = v + w.clone() * payoff(s, o)?;
        }
        let better = match &best {
            None => true,
            Some((_, b)) => {
                if maximize {
                    v > *b
                } else {
                    v < *b
                }
            }
        };
        if better {
            best = Some((k, v));
        }
    }
    let (k, v) = best.ok_or_else(|| Error::Domain("empty strategy universe".into()))?;
    Ok((universe[k].clone(), v))
}

/// The game behind `R_ε` at a fixed depth: inputs against depth-`ℓ` trees,
/// payoff 1 when the tree errs on the input.
pub struct ErrorGame<'a, T, P: QueryProblem + ?Sized> {
    problem: &'a P,
    inputs: Vec<BitString>,
    depth: usize,
    budget: TreeSearchBudget,
    cache: HashMap<(BitString, DecisionTree), bool>,
    _value: std::marker::PhantomData<T>,
}

impl<'a, T: Scalar, P: QueryProblem + ?Sized> ErrorGame<'a, T, P> {
    pub fn new(problem: &'a P, depth: usize, budget: TreeSearchBudget) -> Result<Self> {
        let inputs = problem.constrained_inputs()?;
        if inputs.is_empty() {
            return Err(Error::Domain("problem has no constrained inputs".into()));
        }
        Ok(ErrorGame {
            problem,
            inputs,
            depth,
            budget,
            cache: HashMap::new(),
            _value: std::marker::PhantomData,
        })
    }

    fn errs(&mut self, x: &BitString, tree: &DecisionTree) -> Result<bool> {
        let key = (x.clone(), tree.clone());
        if let Some(&e) = self.cache.get(&key) {
            return Ok(e);
        }
        let e = match tree.eval(x)?.1 {
            Some(s) => !self.problem.accepts(x, s)?,
            None => true,
        };
        self.cache.insert(key, e);
        Ok(e)
    }
}

impl<T: Scalar, P: QueryProblem + ?Sized> OracleGame for ErrorGame<'_, T, P> {
    type Value = T;
    type Row = BitString;
    type Col = DecisionTree;

    fn payoff(&mut self, x: &BitString, tree: &DecisionTree) -> Result<T> {
        Ok(if self.errs(x, tree)? { T::one() } else { T::zero() })
    }

    fn best_row(&mut self, cols: &[(DecisionTree, T)]) -> Result<(BitString, T)> {
        let inputs = self.inputs.clone();
        best_against(&inputs, cols, |x, t| self.payoff(x, t), true)
    }

    fn best_col(&mut self, rows: &[(BitString, T)]) -> Result<(DecisionTree, T)> {
        let mu = Dist::new(self.problem.arity(), rows.iter().cloned())?;
        let (err, tree) = distributional_opt(self.problem, &mu, self.depth, &self.budget)?;
        Ok((tree, err))
    }
}

/// Game value bracket at one depth budget.
#[derive(Debug, Clone)]
pub struct DepthValue<T> {
    pub depth: usize,
    pub lo: T,
    pub hi: T,
    pub certified: bool,
    /// Optimal input distribution (maximizer support).
    pub inputs: Vec<(BitString, T)>,
    /// Optimal randomized tree (minimizer support).
    pub trees: Vec<(DecisionTree, T)>,
}

#[derive(Debug, Clone)]
pub struct RandomizedComplexity<T> {
    /// Least depth whose certified upper bound is at most ε.
    pub value: usize,
    /// Every depth below `value` has a certified lower bound above ε.
    pub certified: bool,
    pub per_depth: Vec<DepthValue<T>>,
}

/// `R_ε(h)` as the least depth `ℓ` for which the minimax error of depth-`ℓ`
/// randomized trees is at most `ε`.
pub fn randomized_complexity<T, P>(
    h: &P,
    epsilon: &T,
    budget: &TreeSearchBudget,
    max_rounds: usize,
) -> Result<RandomizedComplexity<T>>
where
    T: Scalar,
    P: QueryProblem + ?Sized,
{
    if epsilon.is_negative() || *epsilon >= T::one() {
        return Err(Error::Domain(format!("epsilon {epsilon} is outside [0, 1)")));
    }
    let (d, _) = optimal_depth(h, budget)?;
    let mut per_depth = Vec::new();
    let mut certified = true;
    for depth in 0..=d {
        let mut game: ErrorGame<'_, T, P> = ErrorGame::new(h, depth, *budget)?;
        let uniform: Dist<T> = Dist::uniform(&game.inputs)?;
        let (_, seed_tree) = distributional_opt(h, &uniform, depth, budget)?;
        let seed_row = game.inputs[0].clone();
        let sol = double_oracle(&mut game, vec![seed_row], vec![seed_tree], &T::zero(), max_rounds)?;
        let row = DepthValue {
            depth,
            lo: sol.lo.clone(),
            hi: sol.hi.clone(),
            certified: sol.certified,
            inputs: sol.rows,
            trees: sol.cols,
        };
        let reached = row.hi <= *epsilon;
        if !reached && row.lo <= *epsilon {
            certified = false;
        }
        per_depth.push(row);
        if reached {
            return Ok(RandomizedComplexity {
                value: depth,
                certified,
                per_depth,
            });
        }
    }
    Err(Error::Defect("depth D(h) did not reach zero error".into()))
}
