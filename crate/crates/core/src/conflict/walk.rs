use crate::bits::Subcube;
use crate::dist::{DistPair, PairMixture};
use crate::dtree::{DecisionTree, Node, NodeId};
use crate::error::{Error, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Walk quantities at one node reached with positive probability.
///
/// Leaves carry `p0 = p1 = delta = 0`: the walk cannot halt there, so a
/// leaf with positive `reach` is mass the walk never terminates.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkNode<T> {
    pub node: NodeId,
    pub depth: usize,
    pub p0: T,
    pub p1: T,
    pub delta: T,
    /// `R(v)`, the probability that the walk visits `v`.
    pub reach: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkChart<T> {
    /// Preorder; nodes with `R = 0` are absent.
    pub nodes: Vec<WalkNode<T>>,
    /// `χ(T, (μ₀, μ₁)) = Σ d(v) Δ(v) R(v)`.
    pub total: T,
    /// `Σ Δ(v) R(v)`, the halting probability.
    pub mass: T,
}

impl<T: Scalar> WalkChart<T> {
    pub fn is_full(&self) -> bool {
        self.mass.approx_eq(&T::one())
    }

    pub fn get(&self, v: NodeId) -> Option<&WalkNode<T>> {
        self.nodes.iter().find(|n| n.node == v)
    }
}

/// Runs the conflict walk of `pair` on `tree` exactly.
pub fn walk_chart<T: Scalar>(tree: &DecisionTree, pair: &DistPair<T>) -> Result<WalkChart<T>> {
    if tree.arity() != pair.arity() {
        return Err(Error::arity(tree.arity(), pair.arity()));
    }
    let mut nodes = Vec::new();
    let mut stack = vec![(tree.root(), Subcube::full(tree.arity()), T::one(), 1usize)];
    let (mut total, mut mass) = (T::zero(), T::zero());
    while let Some((v, cube, reach, depth)) = stack.pop() {
        match tree.node(v) {
            Node::Leaf { .. } => nodes.push(WalkNode {
                node: v,
                depth,
                p0: T::zero(),
                p1: T::zero(),
                delta: T::zero(),
                reach,
            }),
            Node::Query { index, children } => {
                let p0 = pair.mu0.prob_zero_at(*index, &cube).map_err(|_| defect(v))?;
                let p1 = pair.mu1.prob_zero_at(*index, &cube).map_err(|_| defect(v))?;
                let delta = (p0.clone() - p1.clone()).abs();
                let go0 = reach.clone() * min_of(&p0, &p1);
                let go1 = reach.clone() * (T::one() - max_of(&p0, &p1));
                let dr = delta.clone() * reach.clone();
                total = total + T::from_usize(depth).expect("depth fits") * dr.clone();
                mass = mass + dr;
                // Pushed in reverse so the 0-child pops first.
                if !go1.is_negligible() {
                    stack.push((children[1], cube.with(*index, true), go1, depth + 1));
                }
                if !go0.is_negligible() {
                    stack.push((children[0], cube.with(*index, false), go0, depth + 1));
                }
                nodes.push(WalkNode {
                    node: v,
                    depth,
                    p0,
                    p1,
                    delta,
                    reach,
                });
            }
        }
    }
    if mass > T::one() && !mass.approx_eq(&T::one()) {
        return Err(Error::Defect(format!("walk halting mass {mass} exceeds 1")));
    }
    Ok(WalkChart { nodes, total, mass })
}

fn defect(v: NodeId) -> Error {
    Error::Defect(format!("walk reached node {v} where one side has no mass"))
}

/// `(T, pair)` is full: the walk halts with probability 1.
pub fn is_full<T: Scalar>(tree: &DecisionTree, pair: &DistPair<T>) -> Result<bool> {
    Ok(walk_chart(tree, pair)?.is_full())
}

/// Full for every pair in the support of `q`.
pub fn is_full_mixture<T: Scalar>(tree: &DecisionTree, q: &PairMixture<T>) -> Result<bool> {
    for (w, pair) in q.entries() {
        if !w.is_zero() && !is_full(tree, pair)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `χ(T, Q) = E_{(μ₀,μ₁)∼Q} χ(T, (μ₀, μ₁))`, defined for full `(T, Q)`.
pub fn chi_mixture<T: Scalar>(tree: &DecisionTree, q: &PairMixture<T>) -> Result<T> {
    let mut acc = T::zero();
    for (w, pair) in q.entries() {
        if w.is_zero() {
            continue;
        }
        let chart = walk_chart(tree, pair)?;
        if !chart.is_full() {
            return Err(Error::NotFull);
        }
        acc = acc + w.clone() * chart.total;
    }
    Ok(acc)
}
