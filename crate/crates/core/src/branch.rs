//! Branch decompositions, tree decompositions, their inductive forms, and the
//! two bridges into monoidal decompositions over the cospan algebra.
//!
//! A branch decomposition is a subcubic tree whose leaves biject with the
//! edges of a hypergraph; each tree edge is priced by the number of vertices
//! separating the two induced edge sets. The inductive form replaces the
//! unrooted tree by a binary tree of labelled subhypergraphs, which is the
//! shape that maps directly onto decomposition trees.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cospan::{
    compose_with_injections, intern_fresh, intern_structural, CospanAlgebra, CospanHG, Hypergraph,
    HypergraphWithSources,
};
use crate::decomp::{copy_decompose, evaluate, CopyableAlgebra, DecompTree, WeightedSignature};
use crate::error::{Error, Result};

// --- classical branch decompositions ----------------------------------------

/// Unrooted subcubic tree with a bijection from its leaves to the edge
/// indices of a hypergraph. The empty decomposition stands for an edgeless
/// hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchDec {
    pub node_count: usize,
    pub tree_edges: Vec<(usize, usize)>,
    pub leaf_to_edge: BTreeMap<usize, usize>,
}

impl BranchDec {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(a, b) in &self.tree_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Tree shape, subcubic degrees, and leaf bijection onto `0..edge_count`.
    pub fn validate(&self, edge_count: usize) -> Result<()> {
        if self.node_count == 0 {
            if edge_count == 0 && self.tree_edges.is_empty() && self.leaf_to_edge.is_empty() {
                return Ok(());
            }
            return Err(Error::InvalidDecomposition(
                "empty tree for a hypergraph with edges".into(),
            ));
        }
        if self.tree_edges.len() + 1 != self.node_count {
            return Err(Error::InvalidDecomposition("not a tree".into()));
        }
        let adj = self.adjacency();
        if adj.iter().any(|n| n.len() > 3) {
            return Err(Error::InvalidDecomposition("tree is not subcubic".into()));
        }
        // Connectivity.
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidDecomposition("tree is disconnected".into()));
        }
        let leaves: BTreeSet<usize> = (0..self.node_count).filter(|&v| adj[v].len() <= 1).collect();
        let mapped: BTreeSet<usize> = self.leaf_to_edge.keys().copied().collect();
        if mapped != leaves {
            return Err(Error::InvalidDecomposition(
                "leaf map does not cover exactly the tree leaves".into(),
            ));
        }
        let images: BTreeSet<usize> = self.leaf_to_edge.values().copied().collect();
        if images.len() != self.leaf_to_edge.len()
            || images != (0..edge_count).collect::<BTreeSet<_>>()
        {
            return Err(Error::InvalidDecomposition(
                "leaf map is not a bijection onto the edge set".into(),
            ));
        }
        Ok(())
    }
}

/// Max over tree edges of the number of vertices shared by the two induced
/// edge sets; 0 when the tree has no edges.
pub fn branch_width_of(dec: &BranchDec, g: &Hypergraph) -> Result<usize> {
    dec.validate(g.edges.len())?;
    let adj = dec.adjacency();
    let mut best = 0;
    for &(a, b) in &dec.tree_edges {
        // Collect leaves on the `a` side of the edge (a, b).
        let mut seen = vec![false; dec.node_count];
        seen[b] = true;
        seen[a] = true;
        let mut queue = VecDeque::from([a]);
        let mut side = Vec::new();
        while let Some(x) = queue.pop_front() {
            if let Some(&e) = dec.leaf_to_edge.get(&x) {
                side.push(e);
            }
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        let in_side: BTreeSet<usize> = side.iter().copied().collect();
        let other: Vec<usize> = (0..g.edges.len()).filter(|e| !in_side.contains(e)).collect();
        let ends_a = g.ends_of(side);
        let ends_b = g.ends_of(other);
        best = best.max(ends_a.intersection(&ends_b).count());
    }
    Ok(best)
}

// --- tree decompositions -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDec {
    pub node_count: usize,
    pub tree_edges: Vec<(usize, usize)>,
    pub bags: Vec<BTreeSet<usize>>,
}

/// Checks the three tree-decomposition conditions and reports the width as
/// the maximum bag size (no convention offset).
pub fn tree_dec_check(dec: &TreeDec, g: &Hypergraph) -> (bool, usize) {
    let width = dec.bags.iter().map(BTreeSet::len).max().unwrap_or(0);
    if dec.bags.len() != dec.node_count {
        return (false, width);
    }
    if dec.node_count > 0 && dec.tree_edges.len() + 1 != dec.node_count {
        return (false, width);
    }
    let mut adj = vec![Vec::new(); dec.node_count];
    for &(a, b) in &dec.tree_edges {
        if a >= dec.node_count || b >= dec.node_count {
            return (false, width);
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    if dec.node_count > 0 {
        let mut seen = vec![false; dec.node_count];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return (false, width);
        }
    }
    // 1. Bags cover the vertices (and stay inside them).
    let mut covered = vec![false; g.vertices];
    for bag in &dec.bags {
        for &v in bag {
            if v >= g.vertices {
                return (false, width);
            }
            covered[v] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        return (false, width);
    }
    // 2. Every edge fits in some bag.
    for e in &g.edges {
        let ends: BTreeSet<usize> = e.iter().copied().collect();
        if !dec.bags.iter().any(|bag| ends.is_subset(bag)) {
            return (false, width);
        }
    }
    // 3. For each vertex, the bags containing it form a subtree.
    for v in 0..g.vertices {
        let holders: Vec<usize> = (0..dec.node_count)
            .filter(|&i| dec.bags[i].contains(&v))
            .collect();
        if holders.is_empty() {
            return (false, width);
        }
        let holder_set: BTreeSet<usize> = holders.iter().copied().collect();
        let mut seen = BTreeSet::from([holders[0]]);
        let mut queue = VecDeque::from([holders[0]]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if holder_set.contains(&y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        if seen.len() != holders.len() {
            return (false, width);
        }
    }
    (true, width)
}

// --- inductive branch decompositions -----------------------------------------

/// A subhypergraph of the ambient hypergraph-with-sources: vertex set, edge
/// indices, and the marked sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubHypergraph {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
    pub sources: BTreeSet<usize>,
}

/// Binary decomposition tree labelled with subhypergraphs. `Empty` covers a
/// discrete (edgeless) label and contributes width 0 — isolated vertices are
/// free by definition; `Leaf` carries exactly one edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InductiveBranchDec {
    Empty(SubHypergraph),
    Leaf(SubHypergraph),
    Node {
        label: SubHypergraph,
        left: Box<InductiveBranchDec>,
        right: Box<InductiveBranchDec>,
    },
}

impl InductiveBranchDec {
    pub fn label(&self) -> &SubHypergraph {
        match self {
            InductiveBranchDec::Empty(l)
            | InductiveBranchDec::Leaf(l)
            | InductiveBranchDec::Node { label: l, .. } => l,
        }
    }

    /// Max source-set size over all non-empty full subtrees.
    pub fn width(&self) -> usize {
        match self {
            InductiveBranchDec::Empty(_) => 0,
            InductiveBranchDec::Leaf(l) => l.sources.len(),
            InductiveBranchDec::Node { label, left, right } => label
                .sources
                .len()
                .max(left.width())
                .max(right.width()),
        }
    }
}

fn edge_ends(g: &Hypergraph, edges: &BTreeSet<usize>) -> BTreeSet<usize> {
    g.ends_of(edges.iter().copied())
}

/// Checks the subhypergraph and glueing conditions of an inductive branch
/// decomposition of `gamma` (whose underlying hypergraph supplies edge
/// endpoints).
pub fn validate_inductive_branch(
    t: &InductiveBranchDec,
    gamma: &HypergraphWithSources,
) -> Result<()> {
    let root = t.label();
    let all_vertices: BTreeSet<usize> = (0..gamma.graph.vertices).collect();
    let all_edges: BTreeSet<usize> = (0..gamma.graph.edges.len()).collect();
    if root.vertices != all_vertices || root.edges != all_edges || root.sources != gamma.sources {
        return Err(Error::InvalidDecomposition(
            "root label does not match the decomposed hypergraph".into(),
        ));
    }
    fn check(t: &InductiveBranchDec, g: &Hypergraph) -> Result<()> {
        let label = t.label();
        if !label.sources.is_subset(&label.vertices) {
            return Err(Error::InvalidDecomposition(
                "sources outside the label's vertices".into(),
            ));
        }
        if !edge_ends(g, &label.edges).is_subset(&label.vertices) {
            return Err(Error::InvalidDecomposition(
                "edge endpoints outside the label's vertices".into(),
            ));
        }
        match t {
            InductiveBranchDec::Empty(l) => {
                if !l.edges.is_empty() {
                    return Err(Error::InvalidDecomposition(
                        "empty decomposition with edges".into(),
                    ));
                }
                Ok(())
            }
            InductiveBranchDec::Leaf(l) => {
                if l.edges.len() != 1 {
                    return Err(Error::InvalidDecomposition(format!(
                        "leaf label must carry one edge, has {}",
                        l.edges.len()
                    )));
                }
                Ok(())
            }
            InductiveBranchDec::Node { label, left, right } => {
                let (l1, l2) = (left.label(), right.label());
                if label.edges.is_empty() {
                    return Err(Error::InvalidDecomposition(
                        "internal node with no edges".into(),
                    ));
                }
                if !l1.edges.is_disjoint(&l2.edges)
                    || &l1.edges | &l2.edges != label.edges
                {
                    return Err(Error::InvalidDecomposition(
                        "edges are not partitioned by the children".into(),
                    ));
                }
                if &l1.vertices | &l2.vertices != label.vertices {
                    return Err(Error::InvalidDecomposition(
                        "children vertices do not cover the label".into(),
                    ));
                }
                let shared = &l1.vertices & &l2.vertices;
                for (child, other) in [(l1, l2), (l2, l1)] {
                    let _ = other;
                    let expected = &shared | &(&label.sources & &child.vertices);
                    if child.sources != expected {
                        return Err(Error::InvalidDecomposition(format!(
                            "child sources {:?} differ from expected {:?}",
                            child.sources, expected
                        )));
                    }
                }
                check(left, g)?;
                check(right, g)
            }
        }
    }
    check(t, &gamma.graph)
}

/// Source set of the addressed full subtree recomputed globally: its vertices
/// meeting the ambient sources or any disjoint subtree. `path` descends with
/// `false` = left, `true` = right.
pub fn subtree_boundary(
    t: &InductiveBranchDec,
    ambient_sources: &BTreeSet<usize>,
    path: &[bool],
) -> Result<BTreeSet<usize>> {
    let mut outside = ambient_sources.clone();
    let mut cur = t;
    for &step in path {
        let InductiveBranchDec::Node { left, right, .. } = cur else {
            return Err(Error::OutOfRange("path descends past a leaf".into()));
        };
        let sibling = if step { left.label() } else { right.label() };
        outside.extend(sibling.vertices.iter().copied());
        cur = if step { right } else { left };
    }
    Ok(&cur.label().vertices & &outside)
}

/// Rooted binary view of a subcubic tree: leaves carry graph-edge indices,
/// degree-2 chains are contracted.
enum SplitTree {
    Leaf(usize),
    Node(Box<SplitTree>, Box<SplitTree>),
}

impl SplitTree {
    fn edges(&self, out: &mut BTreeSet<usize>) {
        match self {
            SplitTree::Leaf(e) => {
                out.insert(*e);
            }
            SplitTree::Node(l, r) => {
                l.edges(out);
                r.edges(out);
            }
        }
    }
}

fn split_tree(dec: &BranchDec, adj: &[Vec<usize>], x: usize, parent: usize) -> Result<SplitTree> {
    let children: Vec<usize> = adj[x].iter().copied().filter(|&y| y != parent).collect();
    match children.len() {
        0 => dec
            .leaf_to_edge
            .get(&x)
            .map(|&e| SplitTree::Leaf(e))
            .ok_or_else(|| Error::InvalidDecomposition("unmapped tree leaf".into())),
        1 => split_tree(dec, adj, children[0], x),
        2 => Ok(SplitTree::Node(
            Box::new(split_tree(dec, adj, children[0], x)?),
            Box::new(split_tree(dec, adj, children[1], x)?),
        )),
        _ => Err(Error::InvalidDecomposition("tree is not subcubic".into())),
    }
}

/// Converts a branch decomposition into an inductive one of width at most
/// `width(dec) + |sources|`. The tree is read from its lowest-index edge;
/// vertices missing from the first component ride with the second.
pub fn to_inductive_branch(
    dec: &BranchDec,
    gamma: &HypergraphWithSources,
) -> Result<InductiveBranchDec> {
    dec.validate(gamma.graph.edges.len())?;
    let all_vertices: BTreeSet<usize> = (0..gamma.graph.vertices).collect();
    let all_edges: BTreeSet<usize> = (0..gamma.graph.edges.len()).collect();
    let root_label = SubHypergraph {
        vertices: all_vertices.clone(),
        edges: all_edges,
        sources: gamma.sources.clone(),
    };
    if gamma.graph.edges.is_empty() {
        return Ok(InductiveBranchDec::Empty(root_label));
    }
    if gamma.graph.edges.len() == 1 {
        return Ok(InductiveBranchDec::Leaf(root_label));
    }
    let adj = dec.adjacency();
    let (a, b) = dec.tree_edges[0];
    let split = SplitTree::Node(
        Box::new(split_tree(dec, &adj, a, b)?),
        Box::new(split_tree(dec, &adj, b, a)?),
    );
    fn build(split: &SplitTree, g: &Hypergraph, label: SubHypergraph) -> InductiveBranchDec {
        match split {
            SplitTree::Leaf(_) => InductiveBranchDec::Leaf(label),
            SplitTree::Node(l, r) => {
                let mut e1 = BTreeSet::new();
                l.edges(&mut e1);
                let e2: BTreeSet<usize> = label.edges.difference(&e1).copied().collect();
                let v1 = edge_ends(g, &e1);
                let v2: BTreeSet<usize> = edge_ends(g, &e2)
                    .union(&label.vertices.difference(&v1).copied().collect())
                    .copied()
                    .collect();
                let shared = &v1 & &v2;
                let x1 = &shared | &(&label.sources & &v1);
                let x2 = &shared | &(&label.sources & &v2);
                let left = build(
                    l,
                    g,
                    SubHypergraph {
                        vertices: v1,
                        edges: e1,
                        sources: x1,
                    },
                );
                let right = build(
                    r,
                    g,
                    SubHypergraph {
                        vertices: v2,
                        edges: e2,
                        sources: x2,
                    },
                );
                InductiveBranchDec::Node {
                    label,
                    left: Box::new(left),
                    right: Box::new(right),
                }
            }
        }
    }
    Ok(build(&split, &gamma.graph, root_label))
}

/// Extracts the underlying subcubic tree and leaf bijection; the branch width
/// of the result is at most the inductive width.
pub fn from_inductive_branch(t: &InductiveBranchDec) -> Result<BranchDec> {
    let mut dec = BranchDec {
        node_count: 0,
        tree_edges: Vec::new(),
        leaf_to_edge: BTreeMap::new(),
    };
    fn walk(t: &InductiveBranchDec, dec: &mut BranchDec) -> Result<Option<usize>> {
        match t {
            InductiveBranchDec::Empty(_) => Ok(None),
            InductiveBranchDec::Leaf(l) => {
                let id = dec.node_count;
                dec.node_count += 1;
                let edge = *l.edges.iter().next().ok_or_else(|| {
                    Error::InvalidDecomposition("leaf without an edge".into())
                })?;
                dec.leaf_to_edge.insert(id, edge);
                Ok(Some(id))
            }
            InductiveBranchDec::Node { left, right, .. } => {
                // A discrete child contributes no tree node; contracting the
                // resulting unary chain keeps the leaf/edge bijection intact.
                let l = walk(left, dec)?;
                let r = walk(right, dec)?;
                match (l, r) {
                    (Some(a), Some(b)) => {
                        let id = dec.node_count;
                        dec.node_count += 1;
                        dec.tree_edges.push((id, a));
                        dec.tree_edges.push((id, b));
                        Ok(Some(id))
                    }
                    (Some(x), None) | (None, Some(x)) => Ok(Some(x)),
                    (None, None) => Err(Error::InvalidDecomposition(
                        "internal node with two discrete children".into(),
                    )),
                }
            }
        }
    }
    walk(t, &mut dec)?;
    Ok(dec)
}

/// DOT rendering of a labelled decomposition tree: each node shows its edge
/// set and sources.
pub fn inductive_branch_to_dot(t: &InductiveBranchDec) -> String {
    use std::fmt::Write as _;
    fn go(t: &InductiveBranchDec, out: &mut String, next: &mut usize) -> usize {
        let id = *next;
        *next += 1;
        let l = t.label();
        let shape = match t {
            InductiveBranchDec::Empty(_) => "plaintext",
            InductiveBranchDec::Leaf(_) => "box",
            InductiveBranchDec::Node { .. } => "ellipse",
        };
        writeln!(
            out,
            "  n{id} [shape={shape}, label=\"E={:?} X={:?}\"];",
            l.edges, l.sources
        )
        .unwrap();
        if let InductiveBranchDec::Node { left, right, .. } = t {
            let a = go(left, out, next);
            let b = go(right, out, next);
            writeln!(out, "  n{id} -> n{a};\n  n{id} -> n{b};").unwrap();
        }
        id
    }
    let mut out = String::from("digraph inductive_branch_decomposition {\n");
    let mut next = 0;
    go(t, &mut out, &mut next);
    out.push_str("}\n");
    out
}

// --- bridge: inductive branch decomposition -> monoidal decomposition --------

/// Result of the bridge into the cospan algebra: the tree plus the signature
/// holding its atoms.
pub struct CospanDecomposition {
    pub tree: DecompTree,
    pub signature: WeightedSignature<CospanHG>,
}

fn perm_tree(
    sig: &mut WeightedSignature<CospanHG>,
    routing: &[usize],
) -> Option<DecompTree> {
    if routing.iter().enumerate().all(|(i, &p)| i == p) {
        return None;
    }
    Some(DecompTree::Leaf(intern_fresh(
        sig,
        "route",
        CospanHG::permutation(routing),
    )))
}

/// Cospan of a discrete label: tensor of singleton vertices in ascending
/// order, sources exposed on the left.
fn discrete_label_tree(
    sig: &mut WeightedSignature<CospanHG>,
    label: &SubHypergraph,
) -> DecompTree {
    if label.vertices.is_empty() {
        let id = intern_structural(sig, "empty", CospanHG::closed(Hypergraph::discrete(0)));
        return DecompTree::Leaf(id);
    }
    let mut parts = Vec::new();
    for v in &label.vertices {
        let exposed = label.sources.contains(v);
        let c = CospanHG {
            apex: Hypergraph::discrete(1),
            left: if exposed { vec![0] } else { vec![] },
            right: vec![],
        };
        let name = if exposed { "point_src" } else { "point" };
        parts.push(DecompTree::Leaf(intern_structural(sig, name, c)));
    }
    DecompTree::tensor_all(parts).unwrap()
}

/// Cospan tree of a one-edge label: the edge on its endpoints tensored with
/// the label's isolated vertices, rerouted so the left boundary lists the
/// sources in ascending order.
fn leaf_label_tree(
    sig: &mut WeightedSignature<CospanHG>,
    g: &Hypergraph,
    label: &SubHypergraph,
) -> Result<DecompTree> {
    let edge = *label
        .edges
        .iter()
        .next()
        .ok_or_else(|| Error::InvalidDecomposition("leaf without an edge".into()))?;
    let ends: Vec<usize> = g.edges[edge].clone();
    let end_set: BTreeSet<usize> = ends.iter().copied().collect();
    let riders: Vec<usize> = label.vertices.difference(&end_set).copied().collect();
    // Edge component: apex = its endpoints, boundary = sources among them.
    let edge_sources: Vec<usize> = ends
        .iter()
        .enumerate()
        .filter(|(_, v)| label.sources.contains(v))
        .map(|(i, _)| i)
        .collect();
    let edge_cospan = CospanHG::new(
        Hypergraph::new(ends.len(), vec![(0..ends.len()).collect()])?,
        edge_sources,
        vec![],
    )?;
    let mut parts = vec![DecompTree::Leaf(intern_fresh(sig, "edge", edge_cospan))];
    // Boundary order produced by the tensor: sources among the endpoints,
    // then rider sources in ascending order.
    let mut produced: Vec<usize> = ends
        .iter()
        .copied()
        .filter(|v| label.sources.contains(v))
        .collect();
    for &v in &riders {
        let exposed = label.sources.contains(&v);
        let c = CospanHG {
            apex: Hypergraph::discrete(1),
            left: if exposed { vec![0] } else { vec![] },
            right: vec![],
        };
        let name = if exposed { "point_src" } else { "point" };
        parts.push(DecompTree::Leaf(intern_structural(sig, name, c)));
        if exposed {
            produced.push(v);
        }
    }
    let body = DecompTree::tensor_all(parts).unwrap();
    // Reroute sorted sources onto the produced order.
    let sorted: Vec<usize> = label.sources.iter().copied().collect();
    let routing: Vec<usize> = sorted
        .iter()
        .map(|v| produced.iter().position(|w| w == v).unwrap())
        .collect();
    Ok(match perm_tree(sig, &routing) {
        Some(p) => DecompTree::compose(p, sorted.len(), body),
        None => body,
    })
}

/// Maps an inductive branch decomposition of `gamma` to a decomposition of
/// the cospan `sources -> G <- 0` whose width is at most
/// `max(width(T) + 1, hyperedge size)`. Shared wires are copied one at a
/// time; wires private to one side are created or consumed locally.
pub fn branch_to_monoidal(
    t: &InductiveBranchDec,
    gamma: &HypergraphWithSources,
) -> Result<CospanDecomposition> {
    validate_inductive_branch(t, gamma)?;
    let mut sig = WeightedSignature::new();
    let tree = build_monoidal(t, &gamma.graph, &mut sig)?;
    Ok(CospanDecomposition {
        tree,
        signature: sig,
    })
}

fn build_monoidal(
    t: &InductiveBranchDec,
    g: &Hypergraph,
    sig: &mut WeightedSignature<CospanHG>,
) -> Result<DecompTree> {
    match t {
        InductiveBranchDec::Empty(label) => Ok(discrete_label_tree(sig, label)),
        InductiveBranchDec::Leaf(label) => leaf_label_tree(sig, g, label),
        InductiveBranchDec::Node { label, left, right } => {
            let (l1, l2) = (left.label(), right.label());
            let d1 = build_monoidal(left, g, sig)?;
            let d2 = build_monoidal(right, g, sig)?;
            let x: Vec<usize> = label.sources.iter().copied().collect();
            let x1: Vec<usize> = l1.sources.iter().copied().collect();
            let x2: Vec<usize> = l2.sources.iter().copied().collect();
            let xbar: Vec<usize> = l1
                .sources
                .intersection(&l2.sources)
                .copied()
                .collect();
            let consumed: Vec<usize> = l1
                .sources
                .difference(&l2.sources)
                .copied()
                .collect();
            let from_outer: Vec<usize> = x1
                .iter()
                .copied()
                .filter(|v| label.sources.contains(v))
                .collect();
            let created: Vec<usize> = x1
                .iter()
                .copied()
                .filter(|v| !label.sources.contains(v))
                .collect();
            let pass: Vec<usize> = x2
                .iter()
                .copied()
                .filter(|v| !l1.sources.contains(v))
                .collect();

            // d1 reordered to take inputs in (xbar ++ consumed) order.
            let box_order: Vec<usize> = xbar.iter().chain(&consumed).copied().collect();
            let routing_in: Vec<usize> = box_order
                .iter()
                .map(|v| x1.iter().position(|w| w == v).unwrap())
                .collect();
            let d1 = match perm_tree(sig, &routing_in) {
                Some(p) => DecompTree::compose(p, x1.len(), d1),
                None => d1,
            };
            // Copy the shared wires; the consumed ones ride along as Z.
            let alg = CospanAlgebra::default();
            let gamma_tree =
                copy_decompose(&alg, sig, &d1, &vec![1; xbar.len()], 0, consumed.len())?;
            // Feed the box: outer wires then freshly created ones, rerouted
            // into (xbar ++ consumed) order.
            let mut core = gamma_tree;
            if !created.is_empty() || !from_outer.is_empty() {
                let have: Vec<usize> = from_outer.iter().chain(&created).copied().collect();
                let routing: Vec<usize> = have
                    .iter()
                    .map(|v| box_order.iter().position(|w| w == v).unwrap())
                    .collect();
                let mut pre: Option<DecompTree> = None;
                if !created.is_empty() {
                    let unit = DecompTree::Leaf(intern_structural(
                        sig,
                        "new_point",
                        CospanHG::create(1),
                    ));
                    let units = DecompTree::tensor_all(vec![unit; created.len()]).unwrap();
                    pre = Some(match alg.identity_tree(sig, from_outer.len()) {
                        Some(id) => DecompTree::tensor(id, units),
                        None => units,
                    });
                }
                if let Some(p) = perm_tree(sig, &routing) {
                    pre = Some(match pre {
                        Some(q) => DecompTree::compose(q, x1.len(), p),
                        None => p,
                    });
                }
                if let Some(p) = pre {
                    core = DecompTree::compose(p, x1.len(), core);
                }
            }
            // Tensor the passing wires and reroute onto sorted X2. This
            // permutation sits after the box, so position y of the box's
            // output lands at its vertex's position in sorted X2.
            let mut whole = match alg.identity_tree(sig, pass.len()) {
                Some(id) => DecompTree::tensor(core, id),
                None => core,
            };
            let out_order: Vec<usize> = xbar.iter().chain(&pass).copied().collect();
            let routing_out: Vec<usize> = out_order
                .iter()
                .map(|v| x2.iter().position(|w| w == v).unwrap())
                .collect();
            if let Some(p) = perm_tree(sig, &routing_out) {
                whole = DecompTree::compose(whole, x2.len(), p);
            }
            // Domain: sorted X routed onto (from_outer ++ pass).
            let dom_order: Vec<usize> = from_outer.iter().chain(&pass).copied().collect();
            let routing_dom: Vec<usize> = x
                .iter()
                .map(|v| dom_order.iter().position(|w| w == v).unwrap())
                .collect();
            if let Some(p) = perm_tree(sig, &routing_dom) {
                whole = DecompTree::compose(p, x.len(), whole);
            }
            Ok(DecompTree::compose(whole, x2.len(), d2))
        }
    }
}

// --- bridge: monoidal decomposition -> inductive branch decomposition --------

/// Caterpillar split of a label's edge set, used where any valid inductive
/// decomposition will do.
fn caterpillar_ibd(
    ends: &[BTreeSet<usize>],
    label: SubHypergraph,
) -> InductiveBranchDec {
    if label.edges.is_empty() {
        return InductiveBranchDec::Empty(label);
    }
    if label.edges.len() == 1 {
        return InductiveBranchDec::Leaf(label);
    }
    let first = *label.edges.iter().next().unwrap();
    let e1 = BTreeSet::from([first]);
    let e2: BTreeSet<usize> = label.edges.iter().copied().skip(1).collect();
    let v1: BTreeSet<usize> = ends[first].clone();
    let ends2: BTreeSet<usize> = e2.iter().flat_map(|&e| ends[e].iter().copied()).collect();
    let v2: BTreeSet<usize> = ends2
        .union(&label.vertices.difference(&v1).copied().collect())
        .copied()
        .collect();
    let shared = &v1 & &v2;
    let x1 = &shared | &(&label.sources & &v1);
    let x2 = &shared | &(&label.sources & &v2);
    let left = InductiveBranchDec::Leaf(SubHypergraph {
        vertices: v1,
        edges: e1,
        sources: x1,
    });
    let right = caterpillar_ibd(
        ends,
        SubHypergraph {
            vertices: v2,
            edges: e2,
            sources: x2,
        },
    );
    InductiveBranchDec::Node {
        label,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Maps a decomposition of a cospan to an inductive branch decomposition of
/// the glued hypergraph, of width at most `2 * max(width(d), |A|, |B|)`.
/// `phi` maps the apex of the evaluation onto ambient vertices and may only
/// identify boundary vertices (the glueing property); the ambient hypergraph
/// is the image of the evaluation under `phi`.
pub fn monoidal_to_branch(
    d: &DecompTree,
    sig: &WeightedSignature<CospanHG>,
    phi: &[usize],
) -> Result<(InductiveBranchDec, HypergraphWithSources)> {
    let alg = CospanAlgebra::default();
    let h = evaluate(d, &alg, sig)?;
    if phi.len() != h.apex.vertices {
        return Err(Error::DimensionMismatch {
            context: "vertex mapping",
            expected: format!("{}", h.apex.vertices),
            found: format!("{}", phi.len()),
        });
    }
    check_glueing(&h, phi)?;
    // Ambient hypergraph: the image of the evaluation under phi, with edge
    // indices matching the evaluation's edge order.
    let ambient_v = phi.iter().copied().max().map_or(0, |m| m + 1);
    let ambient_edges: Vec<Vec<usize>> = h
        .apex
        .edges
        .iter()
        .map(|e| {
            let s: BTreeSet<usize> = e.iter().map(|&v| phi[v]).collect();
            s.into_iter().collect()
        })
        .collect();
    let ambient = Hypergraph {
        vertices: ambient_v,
        edges: ambient_edges,
    };
    let sources: BTreeSet<usize> = h
        .left
        .iter()
        .chain(&h.right)
        .map(|&v| phi[v])
        .collect();
    let ends: Vec<BTreeSet<usize>> = ambient
        .edges
        .iter()
        .map(|e| e.iter().copied().collect())
        .collect();
    let edge_ids: Vec<usize> = (0..h.apex.edges.len()).collect();
    let t = to_branch_rec(d, sig, &alg, phi, &edge_ids, &ends)?;
    let gamma = HypergraphWithSources {
        graph: ambient,
        sources,
    };
    Ok((t, gamma))
}

fn check_glueing(h: &CospanHG, phi: &[usize]) -> Result<()> {
    let boundary: BTreeSet<usize> = h.left.iter().chain(&h.right).copied().collect();
    for w in 0..h.apex.vertices {
        for w2 in w + 1..h.apex.vertices {
            if phi[w] == phi[w2] && (!boundary.contains(&w) || !boundary.contains(&w2)) {
                return Err(Error::GlueingViolation(w, w2));
            }
        }
    }
    Ok(())
}

fn label_of(h: &CospanHG, phi: &[usize], edge_ids: &[usize]) -> SubHypergraph {
    SubHypergraph {
        vertices: phi.iter().copied().collect(),
        edges: edge_ids.iter().copied().collect(),
        sources: h.left.iter().chain(&h.right).map(|&v| phi[v]).collect(),
    }
}

fn to_branch_rec(
    d: &DecompTree,
    sig: &WeightedSignature<CospanHG>,
    alg: &CospanAlgebra,
    phi: &[usize],
    edge_ids: &[usize],
    ends: &[BTreeSet<usize>],
) -> Result<InductiveBranchDec> {
    let h = evaluate(d, alg, sig)?;
    check_glueing(&h, phi)?;
    let label = label_of(&h, phi, edge_ids);
    if label.edges.is_empty() {
        return Ok(InductiveBranchDec::Empty(label));
    }
    match d {
        DecompTree::Leaf(_) => {
            if label.edges.len() == 1 {
                Ok(InductiveBranchDec::Leaf(label))
            } else {
                Ok(caterpillar_ibd(ends, label))
            }
        }
        DecompTree::Compose { left, right, .. } => {
            let h1 = evaluate(left, alg, sig)?;
            let h2 = evaluate(right, alg, sig)?;
            let (_, inj1, inj2) = compose_with_injections(&h1, &h2)?;
            let phi1: Vec<usize> = inj1.iter().map(|&v| phi[v]).collect();
            let phi2: Vec<usize> = inj2.iter().map(|&v| phi[v]).collect();
            let (ids1, ids2) = edge_ids.split_at(h1.apex.edges.len());
            let t1 = to_branch_rec(left, sig, alg, &phi1, ids1, ends)?;
            let t2 = to_branch_rec(right, sig, alg, &phi2, ids2, ends)?;
            Ok(InductiveBranchDec::Node {
                label,
                left: Box::new(t1),
                right: Box::new(t2),
            })
        }
        DecompTree::Tensor(left, right) => {
            let h1 = evaluate(left, alg, sig)?;
            let n1 = h1.apex.vertices;
            let (phi1, phi2) = phi.split_at(n1);
            let (ids1, ids2) = edge_ids.split_at(h1.apex.edges.len());
            let t1 = to_branch_rec(left, sig, alg, phi1, ids1, ends)?;
            let t2 = to_branch_rec(right, sig, alg, phi2, ids2, ends)?;
            Ok(InductiveBranchDec::Node {
                label,
                left: Box::new(t1),
                right: Box::new(t2),
            })
        }
    }
}
