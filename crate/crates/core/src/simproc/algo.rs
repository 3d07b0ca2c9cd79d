use std::collections::BTreeMap;

use rand::Rng;

use super::chart::{exact_process_chart, ChartOptions, ProcessChart};
use super::{block_cube, check_shape, run_process, ProcessOptions};
use crate::bits::{BitString, Subcube};
use crate::dist::{Dist, PairMixture};
use crate::dtree::{complete_on, DecisionTree, Node, NodeId};
use crate::error::{Error, Result};
use crate::function::{bit_label, Label, PartialFunction, Relation};
use crate::scalar::Scalar;

/// The composed algorithm `T`: run `P(A′, Q)` on `z` and output the label
/// of the leaf reached. With a z-query budget, a run that would exceed it
/// outputs the fallback instead.
#[derive(Debug, Clone)]
pub struct RandomizedAlgorithm<T> {
    pub tree: DecisionTree,
    pub mixture: PairMixture<T>,
    pub blocks: usize,
    pub z_budget: Option<usize>,
    pub fallback: Option<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TRun {
    pub output: Label,
    pub z_queries: usize,
    pub stopped: bool,
}

/// Smallest output label of `f`, the output on early termination.
pub fn default_fallback(f: &Relation) -> Result<Label> {
    f.outputs()?
        .into_iter()
        .min()
        .ok_or_else(|| Error::Domain("relation has no outputs".into()))
}

impl<T: Scalar> RandomizedAlgorithm<T> {
    /// `T` built from a tree `A′` on `blocks` blocks of the mixture's arity.
    pub fn build(aprime: DecisionTree, q: PairMixture<T>, blocks: usize) -> Result<Self> {
        check_shape(&aprime, &q, blocks)?;
        Ok(RandomizedAlgorithm {
            tree: aprime,
            mixture: q,
            blocks,
            z_budget: None,
            fallback: None,
        })
    }

    /// Stops after `budget` z-queries and outputs `fallback`.
    pub fn truncate_runtime(&self, budget: usize, fallback: Label) -> Self {
        RandomizedAlgorithm {
            z_budget: Some(budget),
            fallback: Some(fallback),
            ..self.clone()
        }
    }

    fn check_z(&self, z: &BitString) -> Result<()> {
        if z.len() != self.blocks {
            return Err(Error::arity(self.blocks, z.len()));
        }
        Ok(())
    }

    fn leaf_label(&self, leaf: NodeId) -> Result<Label> {
        self.tree
            .label(leaf)
            .cloned()
            .ok_or_else(|| Error::Defect(format!("unlabeled leaf {leaf} reached")))
    }

    pub fn run<R: Rng + ?Sized>(&self, z: &BitString, rng: &mut R) -> Result<TRun> {
        self.check_z(z)?;
        let opts = ProcessOptions {
            z_budget: self.z_budget,
            log: false,
        };
        let r = run_process(&self.tree, &self.mixture, z, opts, rng)?;
        let z_queries = r.state.z_queries();
        Ok(match r.leaf {
            Some(leaf) => TRun {
                output: self.leaf_label(leaf)?,
                z_queries,
                stopped: false,
            },
            None => TRun {
                output: self.fallback.clone().expect("budgeted algorithms carry a fallback"),
                z_queries,
                stopped: true,
            },
        })
    }

    pub fn chart(&self, z: &BitString) -> Result<ProcessChart<T>> {
        self.check_z(z)?;
        let opts = ChartOptions {
            z_budget: self.z_budget,
            ..ChartOptions::default()
        };
        exact_process_chart(&self.tree, &self.mixture, z, &opts)
    }

    /// Exact output distribution on `z`.
    pub fn output_distribution(&self, z: &BitString) -> Result<BTreeMap<Label, T>> {
        let chart = self.chart(z)?;
        let mut out: BTreeMap<Label, T> = BTreeMap::new();
        for (leaf, p) in chart.leaves {
            let e = out.entry(self.leaf_label(leaf)?).or_insert_with(T::zero);
            *e = e.clone() + p;
        }
        if !chart.stopped.is_zero() {
            let fb = self.fallback.clone().expect("budgeted algorithms carry a fallback");
            let e = out.entry(fb).or_insert_with(T::zero);
            *e = e.clone() + chart.stopped;
        }
        Ok(out)
    }

    /// `Pr[(z, T(z)) ∈ f]`.
    pub fn success_probability(&self, f: &Relation, z: &BitString) -> Result<T> {
        let mut acc = T::zero();
        for (s, p) in self.output_distribution(z)? {
            if f.contains(z, &s)? {
                acc = acc + p;
            }
        }
        Ok(acc)
    }

    /// Exact expected number of z-queries on `z`.
    pub fn expected_queries(&self, z: &BitString) -> Result<T> {
        Ok(self.chart(z)?.expected_queries())
    }
}

/// `A′` followed, at each leaf, by the attached single-block trees in
/// ascending block order. Keys are `(leaf of A′, block)`; attachments act on
/// `m` bits. Every new leaf keeps the label of its `A′` leaf.
pub fn append_subtrees(
    aprime: &DecisionTree,
    attachments: &BTreeMap<(NodeId, usize), DecisionTree>,
    m: usize,
) -> Result<DecisionTree> {
    let n = aprime.arity();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::arity(m, n));
    }
    let mut per_leaf: BTreeMap<NodeId, Vec<(usize, &DecisionTree)>> = BTreeMap::new();
    for (&(leaf, block), t) in attachments {
        if t.arity() != m {
            return Err(Error::arity(m, t.arity()));
        }
        if block == 0 || block > n / m {
            return Err(Error::Structural(format!("block {block} is out of range")));
        }
        if leaf >= aprime.len() || !aprime.is_leaf(leaf) {
            return Err(Error::Structural(format!("node {leaf} is not a leaf")));
        }
        per_leaf.entry(leaf).or_default().push((block, t));
    }
    let mut grafts = BTreeMap::new();
    for (leaf, chain) in per_leaf {
        let label = aprime.label(leaf).cloned();
        let mut tail = DecisionTree::leaf(n, label);
        // BTreeMap order gives ascending blocks; build the chain from the end.
        for (block, t) in chain.into_iter().rev() {
            let embedded = t.embed((block - 1) * m, n)?;
            let at: BTreeMap<NodeId, DecisionTree> = embedded.leaves().into_iter().map(|l| (l, tail.clone())).collect();
            tail = embedded.graft(&at)?;
        }
        grafts.insert(leaf, tail);
    }
    aprime.graft(&grafts).map_err(|e| match e {
        Error::Structural(s) => Error::Structural(s),
        other => Error::Structural(other.to_string()),
    })
}

/// For every leaf `ℓ` of `A′` and block `i` on which `g` is not constant
/// over the valid inputs in `ℓ⁽ⁱ⁾`, a tree computing `g` inside `ℓ⁽ⁱ⁾`.
pub fn completing_attachments(
    aprime: &DecisionTree,
    g: &PartialFunction,
) -> Result<BTreeMap<(NodeId, usize), DecisionTree>> {
    let m = g.arity();
    let n = aprime.arity();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::arity(m, n));
    }
    let valid = g.valid_inputs()?;
    let cubes = aprime.subcubes();
    let mut out = BTreeMap::new();
    for leaf in aprime.leaves() {
        for i in 1..=n / m {
            let local = block_cube(&cubes[leaf], i, m);
            let pts: Vec<&BitString> = valid.iter().filter(|x| local.contains(x)).collect();
            let values: Vec<bool> = pts.iter().filter_map(|x| g.value(x)).collect();
            if values.iter().any(|v| *v) && values.iter().any(|v| !*v) {
                out.insert((leaf, i), complete_on(g, &local, &pts));
            }
        }
    }
    Ok(out)
}

/// `B` cut after `budget` queries. Each cut point becomes a leaf labeled
/// `argmax_b Pr_{x∼μ}[g(x) = b | x ∈ v]` (ties to 0); a cut point without
/// μ-mass takes the label of its nearest ancestor with mass. Leaves of `B`
/// above the cut keep their labels.
pub fn truncate<T: Scalar>(
    tree: &DecisionTree,
    budget: usize,
    mu: &Dist<T>,
    g: &PartialFunction,
) -> Result<DecisionTree> {
    if mu.arity() != g.arity() || tree.arity() != g.arity() {
        return Err(Error::arity(g.arity(), mu.arity()));
    }
    if let Some(x) = mu.support().find(|x| g.value(x).is_none()) {
        return Err(Error::Domain(format!("μ puts mass on invalid input {x}")));
    }
    let plurality = |cube: &Subcube| -> Option<bool> {
        let (mut m0, mut m1) = (T::zero(), T::zero());
        for (x, w) in mu.iter().filter(|(x, _)| cube.contains(x)) {
            if g.value(x) == Some(true) {
                m1 = m1 + w.clone();
            } else {
                m0 = m0 + w.clone();
            }
        }
        if m0.is_zero() && m1.is_zero() {
            None
        } else {
            Some(m1 > m0)
        }
    };
    fn go<F: Fn(&Subcube) -> Option<bool>>(
        tree: &DecisionTree,
        v: NodeId,
        used: usize,
        budget: usize,
        cube: Subcube,
        inherited: bool,
        plurality: &F,
    ) -> Result<DecisionTree> {
        let here = plurality(&cube).unwrap_or(inherited);
        match tree.node(v) {
            Node::Leaf { label } => Ok(DecisionTree::leaf(tree.arity(), label.clone())),
            Node::Query { .. } if used == budget => Ok(DecisionTree::labeled_leaf(tree.arity(), bit_label(here))),
            Node::Query { index, children } => DecisionTree::branch(
                *index,
                go(
                    tree,
                    children[0],
                    used + 1,
                    budget,
                    cube.with(*index, false),
                    here,
                    plurality,
                )?,
                go(
                    tree,
                    children[1],
                    used + 1,
                    budget,
                    cube.with(*index, true),
                    here,
                    plurality,
                )?,
            ),
        }
    }
    let root = Subcube::full(tree.arity());
    let top = plurality(&root).unwrap_or(false);
    go(tree, tree.root(), 0, budget, root, top, &plurality)
}
