use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite two-player zero-sum game. The row player maximizes.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame<T> {
    payoffs: Vec<Vec<T>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution<T> {
    pub value: T,
    pub row_mix: Vec<T>,
    pub col_mix: Vec<T>,
}

impl<T: Scalar> MatrixGame<T> {
    pub fn new(payoffs: Vec<Vec<T>>) -> Result<Self> {
        let cols = payoffs.first().map_or(0, Vec::len);
        if payoffs.is_empty() || cols == 0 {
            return Err(Error::Domain("game matrix is empty".into()));
        }
        if payoffs.iter().any(|r| r.len() != cols) {
            return Err(Error::Domain("game matrix is ragged".into()));
        }
        Ok(MatrixGame {
            row_labels: (0..payoffs.len()).map(|i| format!("r{i}")).collect(),
            col_labels: (0..cols).map(|j| format!("c{j}")).collect(),
            payoffs,
        })
    }

    pub fn rows(&self) -> usize {
        self.payoffs.len()
    }

    pub fn cols(&self) -> usize {
        self.payoffs[0].len()
    }

    pub fn payoff(&self, i: usize, j: usize) -> &T {
        &self.payoffs[i][j]
    }

    /// Expected payoff of each row against a column mix.
    pub fn row_payoffs(&self, col_mix: &[T]) -> Vec<T> {
        self.payoffs
            .iter()
            .map(|row| {
                row.iter()
                    .zip(col_mix)
                    .fold(T::zero(), |a, (p, y)| a + p.clone() * y.clone())
            })
            .collect()
    }

    /// Expected payoff of each column against a row mix.
    pub fn col_payoffs(&self, row_mix: &[T]) -> Vec<T> {
        (0..self.cols())
            .map(|j| {
                self.payoffs
                    .iter()
                    .zip(row_mix)
                    .fold(T::zero(), |a, (row, x)| a + row[j].clone() * x.clone())
            })
            .collect()
    }

    /// Exact value and optimal mixed strategies, by simplex with Bland's
    /// rule on the shifted game.
    ///
    /// With every payoff shifted to be at least 1, the column LP
    /// `max Σw s.t. Bw ≤ 1, w ≥ 0` has optimum `1/v`; the row strategy is
    /// read off the slack reduced costs.
    pub fn solve(&self) -> GameSolution<T> {
        let (r, c) = (self.rows(), self.cols());
        let min = self
            .payoffs
            .iter()
            .flatten()
            .fold(self.payoffs[0][0].clone(), |a, p| if *p < a { p.clone() } else { a });
        let shift = T::one() - min;

        // Tableau rows 0..r are constraints, row r is the objective.
        // Columns 0..c are w, c..c+r are slacks, the last is the rhs.
        let width = c + r + 1;
        let mut tab: Vec<Vec<T>> = Vec::with_capacity(r + 1);
        for i in 0..r {
            let mut row = vec![T::zero(); width];
            for (cell, p) in row.iter_mut().zip(&self.payoffs[i]) {
                *cell = p.clone() + shift.clone();
            }
            row[c + i] = T::one();
            row[width - 1] = T::one();
            tab.push(row);
        }
        let mut obj = vec![T::zero(); width];
        for cell in obj.iter_mut().take(c) {
            *cell = -T::one();
        }
        tab.push(obj);
        let mut basis: Vec<usize> = (c..c + r).collect();

        loop {
            let entering = (0..c + r).find(|&j| {
                let rc = &tab[r][j];
                rc.is_negative() && !rc.is_negligible()
            });
            let Some(e) = entering else { break };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..r {
                let a = &tab[i][e];
                if a.is_positive() && !a.is_negligible() {
                    let ratio = tab[i][width - 1].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio.approx_eq(lr) && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (p, _) = leave.expect("shifted game LP is bounded");
            let pivot = tab[p][e].clone();
            for cell in tab[p].iter_mut() {
                *cell = cell.clone() / pivot.clone();
            }
            let prow = tab[p].clone();
            for (i, row) in tab.iter_mut().enumerate() {
                if i == p {
                    continue;
                }
                let f = row[e].clone();
                if f.is_zero() {
                    continue;
                }
                for (cell, pv) in row.iter_mut().zip(&prow) {
                    *cell = cell.clone() - f.clone() * pv.clone();
                }
            }
            basis[p] = e;
        }

        let z = tab[r][width - 1].clone();
        let mut w = vec![T::zero(); c];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < c {
                w[bv] = tab[i][width - 1].clone();
            }
        }
        let col_mix: Vec<T> = w.into_iter().map(|wj| wj / z.clone()).collect();
        let row_mix: Vec<T> = (0..r).map(|i| tab[r][c + i].clone() / z.clone()).collect();
        GameSolution {
            value: T::one() / z - shift,
            row_mix,
            col_mix,
        }
    }
}

/// Solves a matrix game given as rows of payoffs.
pub fn solve_matrix<T: Scalar>(payoffs: Vec<Vec<T>>) -> Result<GameSolution<T>> {
    Ok(MatrixGame::new(payoffs)?.solve())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect()
    }

    /// max row payoff against the column mix equals the value, and so does
    /// the min column payoff against the row mix.
    fn certify(g: &MatrixGame<Rational>, s: &GameSolution<Rational>) {
        let hi = g.row_payoffs(&s.col_mix).into_iter().max().unwrap();
        let lo = g.col_payoffs(&s.row_mix).into_iter().min().unwrap();
        assert_eq!(hi, s.value);
        assert_eq!(lo, s.value);
        assert_eq!(s.row_mix.iter().sum::<Rational>(), q(1, 1));
        assert_eq!(s.col_mix.iter().sum::<Rational>(), q(1, 1));
    }

    #[test]
    fn two_by_two() {
        // Hand formula for a 2x2 game without saddle point:
        // v = (ad - bc) / (a + d - b - c) = (4 - 1) / 2.
        let g = MatrixGame::new(m(&[&[2, 1], &[1, 2]])).unwrap();
        let s = g.solve();
        assert_eq!(s.value, q(3, 2));
        assert_eq!(s.row_mix, vec![q(1, 2), q(1, 2)]);
        assert_eq!(s.col_mix, vec![q(1, 2), q(1, 2)]);
        certify(&g, &s);
    }

    #[test]
    fn trivial_games() {
        let s = solve_matrix(vec![vec![q(-7, 3)]]).unwrap();
        assert_eq!(s.value, q(-7, 3));
        let g = MatrixGame::new(m(&[&[1, 0], &[0, 0]])).unwrap();
        let s = g.solve();
        assert_eq!(s.value, q(0, 1));
        certify(&g, &s);
        assert!(solve_matrix::<Rational>(vec![]).is_err());
    }

    #[test]
    fn rock_paper_scissors_variant() {
        let g = MatrixGame::new(m(&[&[0, 2, -1], &[-1, 0, 1], &[1, -1, 0]])).unwrap();
        let s = g.solve();
        assert_eq!(s.value, q(1, 12));
        certify(&g, &s);
    }

    #[test]
    fn float_solver_agrees() {
        let g = MatrixGame::<f64>::new(vec![vec![0.0, 2.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]).unwrap();
        assert!((g.solve().value - 1.0 / 12.0).abs() < 1e-9);
    }

    fn small_game() -> impl Strategy<Value = Vec<Vec<i64>>> {
        (1usize..5, 1usize..5)
            .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-6i64..7, c), r))
    }

    proptest! {
        #[test]
        fn value_is_certified_and_invariant(rows in small_game(), rot in 0usize..4) {
            let a: Vec<Vec<Rational>> =
                rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect();
            let g = MatrixGame::new(a.clone()).unwrap();
            let s = g.solve();
            certify(&g, &s);

            // permuting rows and columns
            let mut p = a.clone();
            let n = p.len();
            p.rotate_left(rot % n);
            for row in p.iter_mut() {
                let k = row.len();
                row.rotate_left(rot % k);
            }
            prop_assert_eq!(solve_matrix(p).unwrap().value, s.value.clone());

            // adding a dominated row (pointwise minimum minus one)
            let mut d = a.clone();
            let dominated: Vec<Rational> = (0..a[0].len())
                .map(|j| a.iter().map(|r| r[j].clone()).min().unwrap() - q(1, 1))
                .collect();
            d.push(dominated);
            prop_assert_eq!(solve_matrix(d).unwrap().value, s.value.clone());

            // and a dominated column for the minimizer (pointwise maximum plus one)
            let mut d = a.clone();
            let top = a.iter().map(|r| r.iter().max().unwrap().clone()).collect::<Vec<_>>();
            for (row, t) in d.iter_mut().zip(top) {
                row.push(t + q(1, 1));
            }
            prop_assert_eq!(solve_matrix(d).unwrap().value, s.value);
        }
    }
}
