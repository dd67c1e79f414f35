//! Binary interaction trees, node labels, the parenthood order, and the
//! admissible total orders that index the iterated-integral expansion.
//!
//! A tree is either a leaf ⊥ or a node with two subtrees. Internal nodes are
//! labelled by their path from the root over {1 = left, 2 = right} (the root
//! is the empty path). The parenthood order m ≤ m′ holds when m′ is an
//! ancestor of m (equivalently: m′'s path is a prefix of m's), so the root is
//! the unique maximum. A total order σ on the n internal nodes is admissible
//! when it extends parenthood — children are always placed before parents —
//! and σ is *paired* when additionally σ(2j−1) ≤ σ(2j) for every j, which is
//! the class of diagrams that survives the pairwise cancellations.

use std::fmt;

use crate::error::{Error, Result};

// ─── tree structure ───

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Node(Box<Tree>, Box<Tree>),
}

/// Path from the root over {1 = left, 2 = right}; empty = root itself.
pub type NodePath = Vec<u8>;

impl Tree {
    pub fn node(left: Tree, right: Tree) -> Tree {
        Tree::Node(Box::new(left), Box::new(right))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    pub fn internal_count(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, r) => 1 + l.internal_count() + r.internal_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.internal_count() + 1
    }

    /// Subtree rooted at `path`; errors if the path walks off the tree.
    pub fn subtree(&self, path: &[u8]) -> Result<&Tree> {
        let mut cur = self;
        for (i, step) in path.iter().enumerate() {
            match (cur, step) {
                (Tree::Node(l, _), 1) => cur = l,
                (Tree::Node(_, r), 2) => cur = r,
                _ => {
                    return Err(Error::config(format!(
                        "path {:?} leaves the tree at depth {i}",
                        path
                    )))
                }
            }
        }
        Ok(cur)
    }

    /// Paths of all internal nodes, preorder (root, left subtree, right).
    pub fn internal_nodes(&self) -> Vec<NodePath> {
        let mut out = Vec::with_capacity(self.internal_count());
        collect_internal(self, &mut Vec::new(), &mut out);
        out
    }

    /// Paths of all leaves, left to right; this order fixes how a leaf
    /// frequency vector (ξ₁,…,ξ_{n+1}) attaches to the tree.
    pub fn leaves(&self) -> Vec<NodePath> {
        let mut out = Vec::with_capacity(self.leaf_count());
        collect_leaves(self, &mut Vec::new(), &mut out);
        out
    }
}

fn collect_internal(t: &Tree, prefix: &mut NodePath, out: &mut Vec<NodePath>) {
    if let Tree::Node(l, r) = t {
        out.push(prefix.clone());
        prefix.push(1);
        collect_internal(l, prefix, out);
        prefix.pop();
        prefix.push(2);
        collect_internal(r, prefix, out);
        prefix.pop();
    }
}

fn collect_leaves(t: &Tree, prefix: &mut NodePath, out: &mut Vec<NodePath>) {
    match t {
        Tree::Leaf => out.push(prefix.clone()),
        Tree::Node(l, r) => {
            prefix.push(1);
            collect_leaves(l, prefix, out);
            prefix.pop();
            prefix.push(2);
            collect_leaves(r, prefix, out);
            prefix.pop();
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => write!(f, "⊥"),
            Tree::Node(l, r) => write!(f, "({l},{r})"),
        }
    }
}

// ─── parenthood order ───

/// m ≤ m′ in the parenthood order: m′ is an ancestor of m (prefix path).
pub fn le_parenthood(m: &[u8], m_prime: &[u8]) -> bool {
    m.len() >= m_prime.len() && &m[..m_prime.len()] == m_prime
}

// ─── enumeration ───

/// Catalan number cₙ; guarded by cₙ ≤ 4ⁿ staying inside u64 (n ≤ 12 here).
pub fn catalan(n: usize) -> Result<u64> {
    if n > 12 {
        return Err(Error::config(format!("catalan({n}) beyond guarded range n ≤ 12")));
    }
    let mut c = vec![0u64; n + 1];
    c[0] = 1;
    for m in 1..=n {
        for i in 0..m {
            c[m] += c[i] * c[m - 1 - i];
        }
    }
    Ok(c[n])
}

/// All binary trees with exactly n internal nodes, deterministic order.
pub fn enumerate_trees(n: usize) -> Result<Vec<Tree>> {
    if n > 8 {
        return Err(Error::config(format!(
            "enumerate_trees({n}): combinatorial guard allows n ≤ 8"
        )));
    }
    Ok(enumerate_unchecked(n))
}

fn enumerate_unchecked(n: usize) -> Vec<Tree> {
    if n == 0 {
        return vec![Tree::Leaf];
    }
    let mut out = Vec::new();
    for left_n in 0..n {
        let lefts = enumerate_unchecked(left_n);
        let rights = enumerate_unchecked(n - 1 - left_n);
        for l in &lefts {
            for r in &rights {
                out.push(Tree::node(l.clone(), r.clone()));
            }
        }
    }
    out
}

// ─── admissible orders ───

/// All total orders on the internal nodes extending parenthood (children
/// placed before parents). Position m−1 of a returned vector holds σ(m).
pub fn admissible_orders(tree: &Tree) -> Result<Vec<Vec<NodePath>>> {
    let n = tree.internal_count();
    if n > 10 {
        return Err(Error::config(format!(
            "admissible_orders: {n} nodes exceeds the n ≤ 10 guard"
        )));
    }
    let nodes = tree.internal_nodes();
    // unplaced_children[i] counts internal children of node i not yet placed.
    let mut unplaced_children: Vec<usize> = nodes
        .iter()
        .map(|p| {
            let mut c = 0;
            for step in [1u8, 2u8] {
                let mut child = p.clone();
                child.push(step);
                if matches!(tree.subtree(&child), Ok(Tree::Node(_, _))) {
                    c += 1;
                }
            }
            c
        })
        .collect();
    let parent_of: Vec<Option<usize>> = nodes
        .iter()
        .map(|p| {
            if p.is_empty() {
                None
            } else {
                let par = &p[..p.len() - 1];
                Some(nodes.iter().position(|q| q == par).expect("parent present"))
            }
        })
        .collect();

    let mut placed = vec![false; n];
    let mut current: Vec<usize> = Vec::with_capacity(n);
    let mut out = Vec::new();
    extend_orders(
        &nodes,
        &parent_of,
        &mut unplaced_children,
        &mut placed,
        &mut current,
        &mut out,
    );
    Ok(out)
}

fn extend_orders(
    nodes: &[NodePath],
    parent_of: &[Option<usize>],
    unplaced_children: &mut Vec<usize>,
    placed: &mut Vec<bool>,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<NodePath>>,
) {
    if current.len() == nodes.len() {
        out.push(current.iter().map(|&i| nodes[i].clone()).collect());
        return;
    }
    for i in 0..nodes.len() {
        if placed[i] || unplaced_children[i] > 0 {
            continue;
        }
        placed[i] = true;
        current.push(i);
        if let Some(par) = parent_of[i] {
            unplaced_children[par] -= 1;
        }
        extend_orders(nodes, parent_of, unplaced_children, placed, current, out);
        if let Some(par) = parent_of[i] {
            unplaced_children[par] += 1;
        }
        current.pop();
        placed[i] = false;
    }
}

/// Linear-extension count by the hook-length formula for forests:
/// n!/Π_m h(m), h(m) = number of internal nodes in m's subtree.
pub fn hook_order_count(tree: &Tree) -> u64 {
    let n = tree.internal_count() as u64;
    let mut numerator: u64 = (1..=n).product();
    for m in tree.internal_nodes() {
        let h = tree.subtree(&m).expect("own node").internal_count() as u64;
        numerator /= h;
    }
    numerator
}

// ─── ordered trees and the pairing condition ───

/// A tree with an admissible total order on its internal nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedTree {
    pub tree: Tree,
    /// order[m−1] = σ(m); empty for the bare leaf.
    pub order: Vec<NodePath>,
}

impl OrderedTree {
    /// Validates that `order` is a bijection onto the internal nodes and
    /// extends the parenthood order.
    pub fn new(tree: Tree, order: Vec<NodePath>) -> Result<Self> {
        let mut nodes = tree.internal_nodes();
        if nodes.len() != order.len() {
            return Err(Error::config(format!(
                "order length {} ≠ internal node count {}",
                order.len(),
                nodes.len()
            )));
        }
        let mut sorted = order.clone();
        sorted.sort();
        nodes.sort();
        if sorted != nodes {
            return Err(Error::config("order is not a bijection onto the internal nodes"));
        }
        for (i, m) in order.iter().enumerate() {
            for m_later in &order[i + 1..] {
                if le_parenthood(m_later, m) {
                    return Err(Error::config(
                        "order violates parenthood: an ancestor precedes a descendant",
                    ));
                }
            }
        }
        Ok(OrderedTree { tree, order })
    }

    pub fn n_internal(&self) -> usize {
        self.order.len()
    }

    /// σ(m) for m = 1..n.
    pub fn sigma(&self, m: usize) -> &NodePath {
        &self.order[m - 1]
    }

    /// Pairing condition σ(2j−1) ≤ σ(2j) for all j (even node count).
    pub fn is_paired(&self) -> bool {
        let n = self.order.len();
        if n % 2 != 0 {
            return false;
        }
        (0..n / 2).all(|j| le_parenthood(&self.order[2 * j], &self.order[2 * j + 1]))
    }
}

/// All paired ordered trees with 2·n_pairs internal nodes.
pub fn paired_trees(n_pairs: usize) -> Result<Vec<OrderedTree>> {
    if n_pairs > 4 {
        return Err(Error::config(format!(
            "paired_trees({n_pairs}): enumeration guard allows n ≤ 4 pairs"
        )));
    }
    if n_pairs == 0 {
        return Ok(vec![OrderedTree { tree: Tree::Leaf, order: vec![] }]);
    }
    let mut out = Vec::new();
    for tree in enumerate_trees(2 * n_pairs)? {
        for order in admissible_orders(&tree)? {
            let ot = OrderedTree { tree: tree.clone(), order };
            if ot.is_paired() {
                out.push(ot);
            }
        }
    }
    Ok(out)
}

// ─── tests ───

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf() -> Tree {
        Tree::Leaf
    }

    /// ((⊥,(⊥,⊥)),(⊥,⊥))
    fn example_tree() -> Tree {
        Tree::node(
            Tree::node(leaf(), Tree::node(leaf(), leaf())),
            Tree::node(leaf(), leaf()),
        )
    }

    #[test]
    fn enumeration_matches_catalan() {
        let expect = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430];
        for (n, &c) in expect.iter().enumerate() {
            assert_eq!(catalan(n).unwrap(), c);
            assert_eq!(enumerate_trees(n).unwrap().len() as u64, c, "n = {n}");
        }
        assert!(enumerate_trees(9).is_err());
        assert!(catalan(13).is_err());
    }

    #[test]
    fn zero_node_enumeration_is_the_leaf() {
        assert_eq!(enumerate_trees(0).unwrap(), vec![Tree::Leaf]);
    }

    #[test]
    fn display_matches_nested_parenthesis_form() {
        assert_eq!(example_tree().to_string(), "((⊥,(⊥,⊥)),(⊥,⊥))");
        assert_eq!(leaf().to_string(), "⊥");
    }

    #[test]
    fn node_labels_follow_the_recursive_scheme() {
        // N((A1,A2)) = {root} ⊔ 1·N(A1) ⊔ 2·N(A2)
        let t = example_tree();
        let nodes = t.internal_nodes();
        assert_eq!(nodes, vec![vec![], vec![1], vec![1, 2], vec![2]]);
        assert_eq!(t.leaves().len(), 5);
        assert_eq!(t.internal_count(), 4);
    }

    #[test]
    fn parenthood_is_a_partial_order_with_root_maximal() {
        let t = example_tree();
        let nodes = t.internal_nodes();
        for a in &nodes {
            assert!(le_parenthood(a, a), "reflexive");
            assert!(le_parenthood(a, &[]), "root is maximal");
            for b in &nodes {
                if le_parenthood(a, b) && le_parenthood(b, a) {
                    assert_eq!(a, b, "antisymmetric");
                }
                for c in &nodes {
                    if le_parenthood(a, b) && le_parenthood(b, c) {
                        assert!(le_parenthood(a, c), "transitive");
                    }
                }
            }
        }
    }

    #[test]
    fn example_tree_has_three_admissible_orders() {
        let orders = admissible_orders(&example_tree()).unwrap();
        assert_eq!(orders.len(), 3);
        for sigma in &orders {
            assert_eq!(sigma.last().unwrap(), &Vec::<u8>::new(), "root placed last");
        }
    }

    #[test]
    fn chain_trees_have_exactly_one_order() {
        let left_chain = Tree::node(
            Tree::node(Tree::node(leaf(), leaf()), leaf()),
            leaf(),
        );
        let right_chain = Tree::node(
            leaf(),
            Tree::node(leaf(), Tree::node(leaf(), leaf())),
        );
        assert_eq!(admissible_orders(&left_chain).unwrap().len(), 1);
        assert_eq!(admissible_orders(&right_chain).unwrap().len(), 1);
    }

    #[test]
    fn order_counts_sum_to_factorial_and_match_hook_formula() {
        for n in 0..=6usize {
            let mut total = 0u64;
            for tree in enumerate_trees(n).unwrap() {
                let count = admissible_orders(&tree).unwrap().len() as u64;
                assert_eq!(count, hook_order_count(&tree), "tree {tree}");
                total += count;
            }
            let factorial: u64 = (1..=n as u64).product();
            assert_eq!(total, factorial, "n = {n}");
        }
    }

    #[test]
    fn ordered_tree_constructor_validates() {
        let t = example_tree();
        let good = admissible_orders(&t).unwrap().remove(0);
        assert!(OrderedTree::new(t.clone(), good.clone()).is_ok());
        // Root first violates parenthood.
        let mut bad = good.clone();
        bad.reverse();
        assert!(OrderedTree::new(t.clone(), bad).is_err());
        // Wrong length.
        assert!(OrderedTree::new(t, good[..3].to_vec()).is_err());
    }

    #[test]
    fn paired_tree_counts() {
        assert_eq!(paired_trees(0).unwrap().len(), 1);
        assert_eq!(paired_trees(1).unwrap().len(), 2);
        assert_eq!(paired_trees(2).unwrap().len(), 12);
        assert!(paired_trees(5).is_err());
        for ot in paired_trees(2).unwrap() {
            assert!(ot.is_paired());
            assert_eq!(ot.n_internal(), 4);
        }
    }

    #[test]
    fn pairing_count_for_three_pairs_is_reported_by_enumeration() {
        // No closed form is asserted here; the enumeration itself is the
        // ground truth for downstream cancellation checks.
        let count = paired_trees(3).unwrap().len();
        assert!(count > 12, "pairing classes must grow with the pair count");
    }

    #[test]
    fn second_to_last_placed_node_is_a_root_child_in_paired_trees() {
        for n in 1..=3usize {
            for ot in paired_trees(n).unwrap() {
                let m = ot.sigma(2 * n - 1);
                assert_eq!(m.len(), 1, "σ(2n−1) must sit directly under the root");
            }
        }
    }
}
