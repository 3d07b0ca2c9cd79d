//! The tree searches against exhaustive enumeration written independently
//! here: trees are plain recursive values and every cost is evaluated by
//! walking them directly.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use qclab::dist::{Dist, DistPair};
use qclab::dtree::{distributional_opt, min_chi_tree, min_sep_tree, optimal_depth};
use qclab::{BitString, PartialFunction, Rational, TreeSearchBudget};

#[derive(Debug, Clone)]
enum Tree {
    Leaf,
    Query(usize, Box<Tree>, Box<Tree>),
}

/// Every tree over the `free` indices that queries each index at most once
/// per path.
fn trees(free: &[usize]) -> Vec<Tree> {
    let mut out = vec![Tree::Leaf];
    for (k, &i) in free.iter().enumerate() {
        let rest: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &v)| v)
            .collect();
        let subs = trees(&rest);
        for a in &subs {
            for b in &subs {
                out.push(Tree::Query(i, Box::new(a.clone()), Box::new(b.clone())));
            }
        }
    }
    out
}

fn depth(t: &Tree) -> usize {
    match t {
        Tree::Leaf => 0,
        Tree::Query(_, a, b) => 1 + depth(a).max(depth(b)),
    }
}

/// Answers read by `x` on its way to a leaf; identifies the leaf.
fn route(t: &Tree, x: &BitString) -> Vec<bool> {
    let mut path = Vec::new();
    let mut cur = t;
    while let Tree::Query(i, a, b) = cur {
        let bit = x.bit(*i);
        path.push(bit);
        cur = if bit { b } else { a };
    }
    path
}

/// Number of queries after which the paths of `x` and `y` part, if they do.
fn sep(t: &Tree, x: &BitString, y: &BitString) -> Option<usize> {
    let mut cur = t;
    let mut d = 0;
    while let Tree::Query(i, a, b) = cur {
        d += 1;
        if x.bit(*i) != y.bit(*i) {
            return Some(d);
        }
        cur = if x.bit(*i) { b } else { a };
    }
    None
}

fn table(g: &PartialFunction) -> Vec<(BitString, bool)> {
    BitString::all(g.arity())
        .filter_map(|x| g.value(&x).map(|v| (x, v)))
        .collect()
}

fn depth_oracle(g: &PartialFunction) -> usize {
    let all: Vec<usize> = (1..=g.arity()).collect();
    let points = table(g);
    trees(&all)
        .iter()
        .filter(|t| {
            let mut seen: BTreeMap<Vec<bool>, bool> = BTreeMap::new();
            points.iter().all(|(x, v)| *seen.entry(route(t, x)).or_insert(*v) == *v)
        })
        .map(depth)
        .min()
        .unwrap()
}

fn error_oracle(g: &PartialFunction, mu: &[(BitString, Rational)], d: usize) -> Rational {
    let all: Vec<usize> = (1..=g.arity()).collect();
    trees(&all)
        .iter()
        .filter(|t| depth(t) <= d)
        .map(|t| {
            // Per leaf: mass of each value; the leaf keeps the heavier one.
            let mut leaves: BTreeMap<Vec<bool>, [Rational; 2]> = BTreeMap::new();
            for (x, w) in mu {
                if let Some(v) = g.value(x) {
                    leaves
                        .entry(route(t, x))
                        .or_insert_with(|| [Rational::zero(), Rational::zero()])[v as usize] += w.clone();
                }
            }
            leaves
                .values()
                .fold(Rational::zero(), |a, [m0, m1]| a + m0.clone().min(m1.clone()))
        })
        .min()
        .unwrap()
}

fn sep_oracle(m: usize, p: &[(Rational, BitString, BitString)]) -> Rational {
    let all: Vec<usize> = (1..=m).collect();
    trees(&all)
        .iter()
        .filter_map(|t| {
            p.iter().try_fold(Rational::zero(), |a, (w, x, y)| {
                Some(a + w.clone() * Rational::from_integer(sep(t, x, y)?.into()))
            })
        })
        .min()
        .unwrap()
}

fn prob(mu: &[(BitString, Rational)], cube: &[(usize, bool)]) -> Rational {
    mu.iter()
        .filter(|(x, _)| cube.iter().all(|&(i, b)| x.bit(i) == b))
        .fold(Rational::zero(), |a, (_, w)| a + w.clone())
}

/// `(χ, halting mass)` of the conflict walk on `t`.
fn walk(
    t: &Tree,
    mu0: &[(BitString, Rational)],
    mu1: &[(BitString, Rational)],
    cube: &mut Vec<(usize, bool)>,
    reach: Rational,
    d: usize,
) -> (Rational, Rational) {
    let Tree::Query(i, a, b) = t else {
        return (Rational::zero(), Rational::zero());
    };
    if reach.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let zero_prob = |mu: &[(BitString, Rational)], cube: &mut Vec<(usize, bool)>| {
        let whole = prob(mu, cube);
        cube.push((*i, false));
        let left = prob(mu, cube);
        cube.pop();
        left / whole
    };
    let p0 = zero_prob(mu0, cube);
    let p1 = zero_prob(mu1, cube);
    let delta = (p0.clone() - p1.clone()).abs();
    let mut chi = Rational::from_integer(d.into()) * delta.clone() * reach.clone();
    let mut mass = delta * reach.clone();
    let one = Rational::one();
    for (bit, child, step) in [
        (false, a, p0.clone().min(p1.clone())),
        (true, b, (one.clone() - p0).min(one.clone() - p1)),
    ] {
        cube.push((*i, bit));
        let (c, ms) = walk(child, mu0, mu1, cube, reach.clone() * step, d + 1);
        cube.pop();
        chi += c;
        mass += ms;
    }
    (chi, mass)
}

fn chi_oracle(m: usize, mu0: &[(BitString, Rational)], mu1: &[(BitString, Rational)]) -> Rational {
    let all: Vec<usize> = (1..=m).collect();
    trees(&all)
        .iter()
        .map(|t| walk(t, mu0, mu1, &mut Vec::new(), Rational::one(), 1))
        .filter(|(_, mass)| mass.is_one())
        .map(|(chi, _)| chi)
        .min()
        .unwrap()
}

fn function(m: usize, cells: &[u8]) -> PartialFunction {
    let pick = |v: u8| {
        BitString::all(m)
            .zip(cells)
            .filter(move |(_, c)| **c == v)
            .map(|(x, _)| x)
    };
    PartialFunction::explicit(m, pick(0), pick(1)).unwrap()
}

fn weights(points: &[BitString], raw: &[u32]) -> Vec<(BitString, Rational)> {
    let total: u32 = points.iter().zip(raw).map(|(_, w)| *w).sum();
    points
        .iter()
        .zip(raw)
        .filter(|(_, w)| **w > 0)
        .map(|(x, w)| (x.clone(), Rational::new((*w).into(), total.into())))
        .collect()
}

fn instance() -> impl Strategy<Value = (usize, Vec<u8>, Vec<u32>, Vec<u32>)> {
    (1usize..=3).prop_flat_map(|m| {
        let n = 1 << m;
        (
            Just(m),
            prop::collection::vec(0u8..3, n),
            prop::collection::vec(0u32..6, n),
            prop::collection::vec(0u32..6, n),
        )
    })
}

#[test]
fn tree_counts() {
    assert_eq!(trees(&[1]).len(), 2);
    assert_eq!(trees(&[1, 2]).len(), 9);
    assert_eq!(trees(&[1, 2, 3]).len(), 244);
}

#[test]
fn known_depths() {
    let budget = TreeSearchBudget::default();
    for (g, d) in [
        (PartialFunction::or(3), 3),
        (PartialFunction::xor(2), 2),
        (PartialFunction::majority(3), 3),
        (PartialFunction::hamming_gap(4).unwrap(), 1),
    ] {
        assert_eq!(optimal_depth(&g, &budget).unwrap().0, d, "{g}");
        if g.arity() <= 3 {
            assert_eq!(depth_oracle(&g), d);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn worst_case_depth((m, cells, _, _) in instance()) {
        let g = function(m, &cells);
        let (d, tree) = optimal_depth(&g, &TreeSearchBudget::default()).unwrap();
        prop_assert_eq!(d, depth_oracle(&g));
        prop_assert_eq!(tree.depth(), d);
        prop_assert!(tree.computes(&g).unwrap());
    }

    #[test]
    fn distributional_error((m, cells, raw, _) in instance()) {
        let g = function(m, &cells);
        let points: Vec<BitString> = BitString::all(m).collect();
        let mu = weights(&points, &raw);
        prop_assume!(!mu.is_empty());
        let dist = Dist::new(m, mu.clone()).unwrap();
        for d in 0..=m {
            let (err, tree) = distributional_opt(&g, &dist, d, &TreeSearchBudget::default()).unwrap();
            prop_assert_eq!(&err, &error_oracle(&g, &mu, d), "depth {}", d);
            prop_assert!(tree.depth() <= d);
        }
    }

    #[test]
    fn expected_separation((m, cells, raw, _) in instance()) {
        let g = function(m, &cells);
        let (zeros, ones) = (g.zeros().unwrap(), g.ones().unwrap());
        let pairs: Vec<(BitString, BitString)> =
            zeros.iter().flat_map(|x| ones.iter().map(move |y| (x.clone(), y.clone()))).collect();
        let total: u32 = raw.iter().take(pairs.len()).sum();
        prop_assume!(total > 0);
        let p: Vec<(Rational, BitString, BitString)> = pairs
            .into_iter()
            .zip(&raw)
            .filter(|(_, w)| **w > 0)
            .map(|((x, y), w)| (Rational::new((*w).into(), total.into()), x, y))
            .collect();
        let (v, tree) = min_sep_tree(&g, &p, &TreeSearchBudget::default()).unwrap();
        prop_assert_eq!(v, sep_oracle(m, &p));
        prop_assert!(tree.computes(&g).unwrap());
    }

    #[test]
    fn conflict_complexity((m, cells, raw0, raw1) in instance()) {
        let g = function(m, &cells);
        let mu0 = weights(&g.zeros().unwrap(), &raw0);
        let mu1 = weights(&g.ones().unwrap(), &raw1);
        prop_assume!(!mu0.is_empty() && !mu1.is_empty());
        let pair = DistPair::new(Dist::new(m, mu0.clone()).unwrap(), Dist::new(m, mu1.clone()).unwrap()).unwrap();
        let (v, _) = min_chi_tree(&pair, &TreeSearchBudget::default()).unwrap();
        prop_assert_eq!(v, chi_oracle(m, &mu0, &mu1));
    }
}
