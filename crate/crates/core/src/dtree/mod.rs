//! Decision trees over `{0,1}^m` and the exact searches that optimize them.
//!
//! Nodes live in an arena in preorder, so a parent always has a smaller id
//! than its children and the root is node 0. Outcome 0 is the left child.

mod search;
mod text;

use std::collections::BTreeMap;

pub use search::{distributional_opt, min_chi_tree, min_sep_tree, optimal_depth, TreeSearchBudget};

use crate::bits::{BitString, Subcube};
use crate::error::{Error, Result};
use crate::function::{bit_label, Label, PartialFunction};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf { label: Option<Label> },
    Query { index: usize, children: [NodeId; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    arity: usize,
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(arity: usize, label: Option<Label>) -> Self {
        DecisionTree {
            arity,
            nodes: vec![Node::Leaf { label }],
        }
    }

    pub fn labeled_leaf(arity: usize, label: impl Into<Label>) -> Self {
        Self::leaf(arity, Some(label.into()))
    }

    /// A root querying `index` with the given subtrees for outcomes 0 and 1.
    pub fn branch(index: usize, zero: DecisionTree, one: DecisionTree) -> Result<Self> {
        if zero.arity != one.arity {
            return Err(Error::arity(zero.arity, one.arity));
        }
        let arity = zero.arity;
        if index == 0 || index > arity {
            return Err(Error::Structural(format!("query index {index} outside 1..={arity}")));
        }
        if zero.queries(index) || one.queries(index) {
            return Err(Error::Structural(format!("index {index} is queried twice on one path")));
        }
        let off0 = 1;
        let off1 = 1 + zero.nodes.len();
        let mut nodes = Vec::with_capacity(off1 + one.nodes.len());
        nodes.push(Node::Query {
            index,
            children: [off0, off1],
        });
        nodes.extend(zero.nodes.into_iter().map(|n| n.shifted(off0)));
        nodes.extend(one.nodes.into_iter().map(|n| n.shifted(off1)));
        Ok(DecisionTree { arity, nodes })
    }

    /// A tree querying `indices` in order on every path, with unlabeled leaves.
    pub fn complete(arity: usize, indices: &[usize]) -> Result<Self> {
        match indices.split_first() {
            None => Ok(Self::leaf(arity, None)),
            Some((&i, rest)) => {
                let sub = Self::complete(arity, rest)?;
                Self::branch(i, sub.clone(), sub)
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id], Node::Leaf { .. })
    }

    pub fn label(&self, id: NodeId) -> Option<&Label> {
        match &self.nodes[id] {
            Node::Leaf { label } => label.as_ref(),
            Node::Query { .. } => None,
        }
    }

    pub fn queries(&self, index: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| matches!(n, Node::Query { index: i, .. } if *i == index))
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&v| self.is_leaf(v)).collect()
    }

    /// Parent of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let mut parent = vec![None; self.nodes.len()];
        for (v, n) in self.nodes.iter().enumerate() {
            if let Node::Query { children, .. } = n {
                parent[children[0]] = Some(v);
                parent[children[1]] = Some(v);
            }
        }
        parent
    }

    /// `d_T(v)`: number of vertices on the root path, the root having depth 1.
    pub fn node_depths(&self) -> Vec<usize> {
        let mut depth = vec![1; self.nodes.len()];
        for (v, n) in self.nodes.iter().enumerate() {
            if let Node::Query { children, .. } = n {
                depth[children[0]] = depth[v] + 1;
                depth[children[1]] = depth[v] + 1;
            }
        }
        depth
    }

    /// Worst-case number of queries.
    pub fn depth(&self) -> usize {
        let depths = self.node_depths();
        self.leaves().into_iter().map(|l| depths[l] - 1).max().unwrap_or(0)
    }

    /// The subcube of inputs reaching each node.
    pub fn subcubes(&self) -> Vec<Subcube> {
        let mut cubes = vec![Subcube::full(self.arity); self.nodes.len()];
        for v in 0..self.nodes.len() {
            if let Node::Query { index, children } = &self.nodes[v] {
                cubes[children[0]] = cubes[v].with(*index, false);
                cubes[children[1]] = cubes[v].with(*index, true);
            }
        }
        cubes
    }

    fn check_input(&self, x: &BitString) -> Result<()> {
        if x.len() != self.arity {
            return Err(Error::arity(self.arity, x.len()));
        }
        Ok(())
    }

    /// Nodes visited by `x`, root first, ending at a leaf.
    pub fn path(&self, x: &BitString) -> Result<Vec<NodeId>> {
        self.check_input(x)?;
        let mut v = 0;
        let mut path = vec![0];
        while let Node::Query { index, children } = &self.nodes[v] {
            v = children[x.bit(*index) as usize];
            path.push(v);
        }
        Ok(path)
    }

    /// The leaf reached by `x` and its label.
    pub fn eval(&self, x: &BitString) -> Result<(NodeId, Option<&Label>)> {
        let leaf = *self.path(x)?.last().expect("path is nonempty");
        Ok((leaf, self.label(leaf)))
    }

    /// `sep_T(x, y)`: depth of the first common node whose query tells `x`
    /// and `y` apart.
    pub fn sep(&self, x: &BitString, y: &BitString) -> Result<usize> {
        self.check_input(x)?;
        self.check_input(y)?;
        let no_sep = || Error::NoSeparation {
            x: x.to_string(),
            y: y.to_string(),
        };
        if x == y {
            return Err(no_sep());
        }
        let mut v = 0;
        let mut depth = 1;
        while let Node::Query { index, children } = &self.nodes[v] {
            let (a, b) = (x.bit(*index), y.bit(*index));
            if a != b {
                return Ok(depth);
            }
            v = children[a as usize];
            depth += 1;
        }
        Err(no_sep())
    }

    /// `None` when every valid input of `g` reaches a leaf labeled `g(x)`;
    /// otherwise a valid input that does not.
    pub fn validate_computes(&self, g: &PartialFunction) -> Result<Option<BitString>> {
        if g.arity() != self.arity {
            return Err(Error::arity(g.arity(), self.arity));
        }
        for x in g.valid_inputs()? {
            let want = bit_label(g.value(&x).expect("valid input"));
            match self.eval(&x)?.1 {
                Some(s) if *s == want => {}
                _ => return Ok(Some(x)),
            }
        }
        Ok(None)
    }

    pub fn computes(&self, g: &PartialFunction) -> Result<bool> {
        Ok(self.validate_computes(g)?.is_none())
    }

    /// The subtree rooted at `v`, as a tree on the same arity.
    pub fn subtree(&self, v: NodeId) -> DecisionTree {
        match &self.nodes[v] {
            Node::Leaf { label } => DecisionTree::leaf(self.arity, label.clone()),
            Node::Query { index, children } => {
                DecisionTree::branch(*index, self.subtree(children[0]), self.subtree(children[1]))
                    .expect("subtree of a valid tree is valid")
            }
        }
    }

    /// Replaces the given leaves with whole trees. A replacement may not
    /// query an index already queried on the path to its leaf.
    pub fn graft(&self, attachments: &BTreeMap<NodeId, DecisionTree>) -> Result<DecisionTree> {
        for (&leaf, t) in attachments {
            if leaf >= self.nodes.len() || !self.is_leaf(leaf) {
                return Err(Error::Structural(format!("node {leaf} is not a leaf")));
            }
            if t.arity != self.arity {
                return Err(Error::arity(self.arity, t.arity));
            }
        }
        self.graft_from(0, attachments)
    }

    fn graft_from(&self, v: NodeId, attachments: &BTreeMap<NodeId, DecisionTree>) -> Result<DecisionTree> {
        match &self.nodes[v] {
            Node::Leaf { label } => Ok(match attachments.get(&v) {
                Some(t) => t.clone(),
                None => DecisionTree::leaf(self.arity, label.clone()),
            }),
            Node::Query { index, children } => DecisionTree::branch(
                *index,
                self.graft_from(children[0], attachments)?,
                self.graft_from(children[1], attachments)?,
            ),
        }
    }

    /// Re-embeds this tree as a tree on `new_arity` bits, mapping index `j`
    /// to `j + offset`.
    pub fn embed(&self, offset: usize, new_arity: usize) -> Result<DecisionTree> {
        if offset + self.arity > new_arity {
            return Err(Error::arity(offset + self.arity, new_arity));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|n| match n {
                Node::Leaf { label } => Node::Leaf { label: label.clone() },
                Node::Query { index, children } => Node::Query {
                    index: index + offset,
                    children: *children,
                },
            })
            .collect();
        Ok(DecisionTree {
            arity: new_arity,
            nodes,
        })
    }

    /// Same structure with leaf labels replaced by `label(leaf)`.
    pub fn relabel(&self, mut label: impl FnMut(NodeId) -> Option<Label>) -> DecisionTree {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(v, n)| match n {
                Node::Leaf { .. } => Node::Leaf { label: label(v) },
                q => q.clone(),
            })
            .collect();
        DecisionTree {
            arity: self.arity,
            nodes,
        }
    }

    /// Extends the tree so that it computes `g`: leaves whose subcube holds
    /// valid inputs of both values get a completing subtree; every other
    /// leaf is labeled with the value `g` takes there (`0` if none).
    pub fn extend_to_compute(&self, g: &PartialFunction) -> Result<DecisionTree> {
        if g.arity() != self.arity {
            return Err(Error::arity(g.arity(), self.arity));
        }
        let valid = g.valid_inputs()?;
        let cubes = self.subcubes();
        let mut attach = BTreeMap::new();
        for leaf in self.leaves() {
            let pts: Vec<&BitString> = valid.iter().filter(|x| cubes[leaf].contains(x)).collect();
            attach.insert(leaf, complete_on(g, &cubes[leaf], &pts));
        }
        self.graft(&attach)
    }
}

impl Node {
    fn shifted(self, off: usize) -> Node {
        match self {
            Node::Query { index, children } => Node::Query {
                index,
                children: [children[0] + off, children[1] + off],
            },
            leaf => leaf,
        }
    }
}

/// A tree computing `g` inside `cube`, querying the smallest free index until
/// the valid inputs left are all of one value.
pub(crate) fn complete_on(g: &PartialFunction, cube: &Subcube, pts: &[&BitString]) -> DecisionTree {
    let m = g.arity();
    let value = |x: &&BitString| g.value(x).expect("valid input");
    match pts.first() {
        None => DecisionTree::labeled_leaf(m, bit_label(false)),
        Some(first) if pts.iter().all(|x| value(x) == value(first)) => {
            DecisionTree::labeled_leaf(m, bit_label(value(first)))
        }
        Some(_) => {
            let j = cube
                .free_indices()
                .next()
                .expect("two valid inputs of different value share no free index");
            let (zero, one): (Vec<&BitString>, Vec<&BitString>) = pts.iter().partition(|x| !x.bit(j));
            DecisionTree::branch(
                j,
                complete_on(g, &cube.with(j, false), &zero),
                complete_on(g, &cube.with(j, true), &one),
            )
            .expect("free index is not on the path")
        }
    }
}

/// Number of distinct trees of depth at most `depth` over `free` available
/// indices, `t(d, A) = 1 + Σ_{i∈A} t(d−1, A∖i)²`.
pub fn count_trees(free: usize, depth: usize) -> u128 {
    if depth == 0 || free == 0 {
        return 1;
    }
    let sub = count_trees(free - 1, depth - 1);
    1 + free as u128 * sub * sub
}

/// Every structurally distinct tree with unlabeled leaves, of depth at most
/// `max_depth`, on `m` bits.
pub fn enumerate_trees(m: usize, max_depth: usize, budget: &TreeSearchBudget) -> Result<Vec<DecisionTree>> {
    if max_depth > budget.max_depth {
        return Err(Error::budget(format!(
            "tree enumeration depth {max_depth} exceeds {}",
            budget.max_depth
        )));
    }
    let count = count_trees(m, max_depth);
    if count > budget.max_nodes as u128 {
        return Err(Error::budget(format!(
            "{count} trees exceed the enumeration cap {}",
            budget.max_nodes
        )));
    }
    let mut free = vec![true; m + 1];
    Ok(enumerate_from(m, max_depth, &mut free))
}

fn enumerate_from(m: usize, depth: usize, free: &mut [bool]) -> Vec<DecisionTree> {
    let mut out = vec![DecisionTree::leaf(m, None)];
    if depth == 0 {
        return out;
    }
    for i in 1..=m {
        if !free[i] {
            continue;
        }
        free[i] = false;
        let subs = enumerate_from(m, depth - 1, free);
        free[i] = true;
        for a in &subs {
            for b in &subs {
                out.push(DecisionTree::branch(i, a.clone(), b.clone()).expect("fresh index"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// x1 at the root; on 0 query x2, on 1 stop.
    fn x1_then_x2() -> DecisionTree {
        let l = |s: &str| DecisionTree::labeled_leaf(2, s);
        let left = DecisionTree::branch(2, l("a"), l("b")).unwrap();
        DecisionTree::branch(1, left, l("c")).unwrap()
    }

    fn or2_tree() -> DecisionTree {
        let l = |s: &str| DecisionTree::labeled_leaf(2, s);
        let left = DecisionTree::branch(2, l("0"), l("1")).unwrap();
        DecisionTree::branch(1, left, l("1")).unwrap()
    }

    #[test]
    fn eval_examples() {
        let t = x1_then_x2();
        let (leaf, label) = t.eval(&b("01")).unwrap();
        assert_eq!(label.unwrap(), "b");
        assert_eq!(t.path(&b("01")).unwrap(), vec![0, 1, leaf]);
        let single = DecisionTree::labeled_leaf(2, "z");
        assert_eq!(single.eval(&b("11")).unwrap(), (0, Some(&"z".to_string())));
        assert_eq!(or2_tree().eval(&b("10")).unwrap().1.unwrap(), "1");
        assert!(t.eval(&b("1")).is_err());
    }

    #[test]
    fn validate_examples() {
        let l = |s: &str| DecisionTree::labeled_leaf(2, s);
        let xor = DecisionTree::branch(
            1,
            DecisionTree::branch(2, l("0"), l("1")).unwrap(),
            DecisionTree::branch(2, l("1"), l("0")).unwrap(),
        )
        .unwrap();
        assert!(xor.computes(&PartialFunction::xor(2)).unwrap());
        assert_eq!(
            l("0").validate_computes(&PartialFunction::or(2)).unwrap(),
            Some(b("01"))
        );
        let g0 = PartialFunction::hamming_gap(4).unwrap();
        let one_bit = DecisionTree::branch(
            3,
            DecisionTree::labeled_leaf(4, "0"),
            DecisionTree::labeled_leaf(4, "1"),
        )
        .unwrap();
        assert!(one_bit.computes(&g0).unwrap());
        let unlabeled = DecisionTree::leaf(2, None);
        assert!(!unlabeled.computes(&PartialFunction::or(2)).unwrap());
    }

    #[test]
    fn sep_examples() {
        let t = x1_then_x2();
        assert_eq!(t.sep(&b("00"), &b("10")).unwrap(), 1);
        assert_eq!(t.sep(&b("00"), &b("01")).unwrap(), 2);
        assert!(matches!(t.sep(&b("00"), &b("00")), Err(Error::NoSeparation { .. })));
        assert!(matches!(t.sep(&b("10"), &b("11")), Err(Error::NoSeparation { .. })));
    }

    #[test]
    fn repeated_query_is_rejected() {
        let inner = DecisionTree::complete(2, &[1]).unwrap();
        assert!(matches!(
            DecisionTree::branch(1, inner.clone(), inner),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn depths_and_subcubes() {
        let t = x1_then_x2();
        assert_eq!(t.node_depths(), vec![1, 2, 3, 3, 2]);
        assert_eq!(t.depth(), 2);
        let cubes = t.subcubes();
        assert_eq!(cubes[3].to_string(), "01");
        assert_eq!(t.parents()[3], Some(1));
    }

    #[test]
    fn enumeration_counts() {
        let budget = TreeSearchBudget::default();
        assert_eq!(enumerate_trees(1, 1, &budget).unwrap().len(), 2);
        assert_eq!(enumerate_trees(2, 1, &budget).unwrap().len(), 3);
        // t(2, {1,2}) = 1 + 2 * t(1, {.})^2 = 1 + 2 * 4 = 9, evaluated by hand.
        assert_eq!(enumerate_trees(2, 2, &budget).unwrap().len(), 9);
        assert_eq!(enumerate_trees(3, 3, &budget).unwrap().len(), 244);
        assert!(enumerate_trees(3, 4, &budget).is_err());
        let all = enumerate_trees(3, 3, &budget).unwrap();
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn extension_computes() {
        let maj = PartialFunction::majority(3);
        let t = DecisionTree::complete(3, &[2]).unwrap();
        let ext = t.extend_to_compute(&maj).unwrap();
        assert!(ext.computes(&maj).unwrap());
        // the root query is kept
        assert!(matches!(ext.node(0), Node::Query { index: 2, .. }));
    }

    #[test]
    fn graft_rejects_path_repeats() {
        let t = DecisionTree::complete(2, &[1]).unwrap();
        let mut att = BTreeMap::new();
        att.insert(1, DecisionTree::complete(2, &[1]).unwrap());
        assert!(t.graft(&att).is_err());
        att.insert(1, DecisionTree::complete(2, &[2]).unwrap());
        assert_eq!(t.graft(&att).unwrap().depth(), 2);
    }
}
