//! Seeded random instance generators shared by the test suites and the CLI.
//! Everything is driven by a caller-supplied RNG so corpora are reproducible
//! from a single seed.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::boundary::{DanglingGraph, GraphWithBoundaries, InductiveRankDec};
use crate::branch::{InductiveBranchDec, SubHypergraph};
use crate::cospan::{intern_fresh, CospanHG, Hypergraph, HypergraphWithSources};
use crate::decomp::{DecompTree, WeightedSignature};
use crate::matrix::NatMatrix;

pub fn random_nat_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max_entry: u64) -> NatMatrix {
    NatMatrix::from_fn(rows, cols, |_, _| BigUint::from(rng.gen_range(0..=max_entry)))
}

/// Hypergraph with `1..=max_edges` edges of size `1..=max_arity` over a small
/// vertex pool; no isolated vertices.
pub fn random_hypergraph(rng: &mut ChaCha8Rng, max_edges: usize, max_arity: usize) -> Hypergraph {
    let edge_count = rng.gen_range(1..=max_edges);
    let pool = rng.gen_range(2..=7usize);
    let mut edges = Vec::with_capacity(edge_count);
    for _ in 0..edge_count {
        let arity = rng.gen_range(1..=max_arity.min(pool));
        let mut endpoints = BTreeSet::new();
        while endpoints.len() < arity {
            endpoints.insert(rng.gen_range(0..pool));
        }
        edges.push(endpoints.into_iter().collect());
    }
    let used: BTreeSet<usize> = edges.iter().flatten().copied().collect();
    // Compact away unused pool vertices.
    let remap: Vec<usize> = (0..pool)
        .scan(0usize, |next, v| {
            if used.contains(&v) {
                let id = *next;
                *next += 1;
                Some(id)
            } else {
                Some(usize::MAX)
            }
        })
        .collect();
    let edges = edges
        .into_iter()
        .map(|e: Vec<usize>| e.into_iter().map(|v| remap[v]).collect())
        .collect();
    Hypergraph::new(used.len(), edges).expect("endpoints in range")
}

/// Simple graph on `2..=max_vertices` vertices with at least one edge,
/// as an upper-triangular adjacency matrix.
pub fn random_simple_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> NatMatrix {
    let n = rng.gen_range(2..=max_vertices);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.45) {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1));
    }
    crate::boundary::adjacency_from_edges(n, &edges).expect("edges in range")
}

/// Random inductive branch decomposition of a hypergraph with sources, by
/// recursive random edge bipartitions.
pub fn random_inductive_branch(
    rng: &mut ChaCha8Rng,
    gamma: &HypergraphWithSources,
) -> InductiveBranchDec {
    let label = SubHypergraph {
        vertices: (0..gamma.graph.vertices).collect(),
        edges: (0..gamma.graph.edges.len()).collect(),
        sources: gamma.sources.clone(),
    };
    random_ibd_rec(rng, &gamma.graph, label)
}

fn random_ibd_rec(rng: &mut ChaCha8Rng, g: &Hypergraph, label: SubHypergraph) -> InductiveBranchDec {
    if label.edges.is_empty() {
        return InductiveBranchDec::Empty(label);
    }
    if label.edges.len() == 1 {
        return InductiveBranchDec::Leaf(label);
    }
    let all: Vec<usize> = label.edges.iter().copied().collect();
    let split = rng.gen_range(1..all.len());
    let mut shuffled = all.clone();
    shuffled.shuffle(rng);
    let e1: BTreeSet<usize> = shuffled[..split].iter().copied().collect();
    let e2: BTreeSet<usize> = shuffled[split..].iter().copied().collect();
    let v1 = g.ends_of(e1.iter().copied());
    let v2: BTreeSet<usize> = g
        .ends_of(e2.iter().copied())
        .union(&label.vertices.difference(&v1).copied().collect())
        .copied()
        .collect();
    let shared = &v1 & &v2;
    let x1 = &shared | &(&label.sources & &v1);
    let x2 = &shared | &(&label.sources & &v2);
    let left = random_ibd_rec(
        rng,
        g,
        SubHypergraph {
            vertices: v1,
            edges: e1,
            sources: x1,
        },
    );
    let right = random_ibd_rec(
        rng,
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

/// Random inductive rank decomposition of a graph with dangling edges, by a
/// shuffled leaf order and recursive random split points.
pub fn random_inductive_rank(rng: &mut ChaCha8Rng, gamma: &DanglingGraph) -> InductiveRankDec {
    let k = gamma.vertex_count();
    if k == 0 {
        return InductiveRankDec::Empty;
    }
    let mut vs: Vec<usize> = (0..k).collect();
    vs.shuffle(rng);
    let b0 = gamma
        .b
        .submatrix(&vs, &(0..gamma.b.cols()).collect::<Vec<_>>());
    random_ird_rec(rng, &gamma.g, &vs, b0)
}

fn random_ird_rec(
    rng: &mut ChaCha8Rng,
    ambient_g: &NatMatrix,
    vs: &[usize],
    b: NatMatrix,
) -> InductiveRankDec {
    let g_label = ambient_g.submatrix(vs, vs);
    if vs.len() == 1 {
        return InductiveRankDec::Leaf {
            vertex: vs[0],
            g: g_label,
            b,
        };
    }
    let split = rng.gen_range(1..vs.len());
    let (vs1, vs2) = vs.split_at(split);
    let sym = ambient_g.symmetrize().expect("square adjacency");
    let cut = sym.submatrix(vs1, vs2);
    let cols: Vec<usize> = (0..b.cols()).collect();
    let rows1: Vec<usize> = (0..split).collect();
    let rows2: Vec<usize> = (split..vs.len()).collect();
    let b1 = b.submatrix(&rows1, &cols).concat_h(&cut).unwrap();
    let b2 = b
        .submatrix(&rows2, &cols)
        .concat_h(&cut.transpose())
        .unwrap();
    let left = random_ird_rec(rng, ambient_g, vs1, b1);
    let right = random_ird_rec(rng, ambient_g, vs2, b2);
    InductiveRankDec::Node {
        vertices: vs.to_vec(),
        g: g_label,
        b,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Random well-typed decomposition tree over the cospan algebra. `dom`
/// forces the domain when given (needed under composition nodes).
pub fn random_cospan_expression(
    rng: &mut ChaCha8Rng,
    sig: &mut WeightedSignature<CospanHG>,
    depth: usize,
    dom: Option<usize>,
) -> (DecompTree, usize, usize) {
    if depth == 0 || rng.gen_bool(0.35) {
        let c = random_cospan_atom(rng, dom);
        let (n, m) = (c.left_boundary(), c.right_boundary());
        let id = intern_fresh(sig, "a", c);
        return (DecompTree::Leaf(id), n, m);
    }
    if rng.gen_bool(0.5) {
        let (dom_l, dom_r) = split_dom(rng, dom);
        let (l, n1, m1) = random_cospan_expression(rng, sig, depth - 1, dom_l);
        let (r, n2, m2) = random_cospan_expression(rng, sig, depth - 1, dom_r);
        (DecompTree::tensor(l, r), n1 + n2, m1 + m2)
    } else {
        let (l, n, k) = random_cospan_expression(rng, sig, depth - 1, dom);
        let (r, _, m) = random_cospan_expression(rng, sig, depth - 1, Some(k));
        (DecompTree::compose(l, k, r), n, m)
    }
}

fn split_dom(rng: &mut ChaCha8Rng, dom: Option<usize>) -> (Option<usize>, Option<usize>) {
    match dom {
        None => (None, None),
        Some(d) => {
            let left = rng.gen_range(0..=d);
            (Some(left), Some(d - left))
        }
    }
}

fn random_cospan_atom(rng: &mut ChaCha8Rng, dom: Option<usize>) -> CospanHG {
    let vertices = rng.gen_range(1..=3usize);
    let edge_count = rng.gen_range(0..=2usize);
    let mut edges = Vec::new();
    for _ in 0..edge_count {
        let arity = rng.gen_range(1..=vertices.min(3));
        let mut endpoints = BTreeSet::new();
        while endpoints.len() < arity {
            endpoints.insert(rng.gen_range(0..vertices));
        }
        edges.push(endpoints.into_iter().collect());
    }
    let apex = Hypergraph::new(vertices, edges).expect("endpoints in range");
    let n = dom.unwrap_or_else(|| rng.gen_range(0..=2));
    let m = rng.gen_range(0..=2usize);
    let left = (0..n).map(|_| rng.gen_range(0..vertices)).collect();
    let right = (0..m).map(|_| rng.gen_range(0..vertices)).collect();
    CospanHG::new(apex, left, right).expect("legs in range")
}

/// Random well-typed decomposition tree over the graphs-with-boundaries
/// algebra.
pub fn random_boundary_expression(
    rng: &mut ChaCha8Rng,
    sig: &mut WeightedSignature<GraphWithBoundaries>,
    depth: usize,
    dom: Option<usize>,
) -> (DecompTree, usize, usize) {
    if depth == 0 || rng.gen_bool(0.35) {
        let g = random_boundary_atom(rng, dom);
        let (n, m) = (g.domain(), g.codomain());
        let w = crate::boundary::boundary_weight(&g);
        let name = fresh_name(sig, "a");
        let id = sig.intern(name, g, w);
        return (DecompTree::Leaf(id), n, m);
    }
    if rng.gen_bool(0.5) {
        let (dom_l, dom_r) = split_dom(rng, dom);
        let (l, n1, m1) = random_boundary_expression(rng, sig, depth - 1, dom_l);
        let (r, n2, m2) = random_boundary_expression(rng, sig, depth - 1, dom_r);
        (DecompTree::tensor(l, r), n1 + n2, m1 + m2)
    } else {
        let (l, n, k) = random_boundary_expression(rng, sig, depth - 1, dom);
        let (r, _, m) = random_boundary_expression(rng, sig, depth - 1, Some(k));
        (DecompTree::compose(l, k, r), n, m)
    }
}

fn fresh_name<M>(sig: &WeightedSignature<M>, prefix: &str) -> String {
    let mut i = sig.len();
    loop {
        let name = format!("{prefix}{i}");
        if !sig.contains(&name) {
            return name;
        }
        i += 1;
    }
}

fn random_boundary_atom(rng: &mut ChaCha8Rng, dom: Option<usize>) -> GraphWithBoundaries {
    let k = rng.gen_range(0..=2usize);
    let n = dom.unwrap_or_else(|| rng.gen_range(0..=2));
    let m = rng.gen_range(0..=2usize);
    let g = NatMatrix::from_fn(k, k, |i, j| {
        if i < j && rng.gen_bool(0.4) {
            BigUint::from(1u32)
        } else {
            BigUint::from(0u32)
        }
    });
    let bit = |rng: &mut ChaCha8Rng, p: f64| -> BigUint {
        if rng.gen_bool(p) {
            BigUint::from(1u32)
        } else {
            BigUint::from(0u32)
        }
    };
    let l = NatMatrix::from_fn(k, n, |_, _| bit(rng, 0.5));
    let r = NatMatrix::from_fn(k, m, |_, _| bit(rng, 0.5));
    let p = NatMatrix::from_fn(m, n, |_, _| bit(rng, 0.3));
    let f = NatMatrix::from_fn(m, m, |_, _| bit(rng, 0.2));
    GraphWithBoundaries::new(g, l, r, p, f).expect("shapes coherent")
}

/// Random matrix of full row rank: an identity block scattered over random
/// columns, random entries elsewhere.
pub fn random_full_row_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max_entry: u64) -> NatMatrix {
    assert!(rows <= cols, "need at least as many columns as rows");
    let mut positions: Vec<usize> = (0..cols).collect();
    positions.shuffle(rng);
    let pivots: Vec<usize> = positions[..rows].to_vec();
    NatMatrix::from_fn(rows, cols, |i, j| {
        if pivots[i] == j {
            BigUint::from(1u32)
        } else if pivots.contains(&j) {
            BigUint::from(0u32)
        } else {
            BigUint::from(rng.gen_range(0..=max_entry))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{validate_inductive_rank, BoundaryAlgebra};
    use crate::branch::validate_inductive_branch;
    use crate::cospan::CospanAlgebra;
    use crate::decomp::evaluate;
    use crate::matrix::Field;
    use rand::SeedableRng;

    #[test]
    fn hypergraphs_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = random_hypergraph(&mut rng, 6, 3);
            assert!(!g.edges.is_empty());
            assert!(g.hyperedge_size() <= 3);
            let used: BTreeSet<usize> = g.edges.iter().flatten().copied().collect();
            assert_eq!(used.len(), g.vertices);
        }
    }

    #[test]
    fn simple_graphs_have_an_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let adj = random_simple_graph(&mut rng, 7);
            assert!(!adj.is_zero());
        }
    }

    #[test]
    fn random_branch_decompositions_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let g = random_hypergraph(&mut rng, 5, 3);
            let sources: BTreeSet<usize> = (0..g.vertices).filter(|_| rng.gen_bool(0.3)).collect();
            let gamma = HypergraphWithSources::new(g, sources).unwrap();
            let t = random_inductive_branch(&mut rng, &gamma);
            validate_inductive_branch(&t, &gamma).unwrap();
        }
    }

    #[test]
    fn random_rank_decompositions_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let adj = random_simple_graph(&mut rng, 6);
            let b = random_nat_matrix(&mut rng, adj.rows(), 2, 1);
            let gamma = DanglingGraph::new(adj, b).unwrap();
            let t = random_inductive_rank(&mut rng, &gamma);
            validate_inductive_rank(&t, &gamma).unwrap();
        }
    }

    #[test]
    fn random_cospan_expressions_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = CospanAlgebra::default();
        for _ in 0..30 {
            let mut sig = WeightedSignature::new();
            let (tree, n, m) = random_cospan_expression(&mut rng, &mut sig, 3, None);
            let value = evaluate(&tree, &alg, &sig).unwrap();
            assert_eq!(value.left_boundary(), n);
            assert_eq!(value.right_boundary(), m);
        }
    }

    #[test]
    fn random_boundary_expressions_evaluate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let alg = BoundaryAlgebra::default();
        for _ in 0..30 {
            let mut sig = WeightedSignature::new();
            let (tree, n, m) = random_boundary_expression(&mut rng, &mut sig, 3, None);
            let value = evaluate(&tree, &alg, &sig).unwrap();
            assert_eq!(value.domain(), n);
            assert_eq!(value.codomain(), m);
        }
    }

    #[test]
    fn full_row_rank_matrices_are_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(rows..=5);
            let m = random_full_row_rank(&mut rng, rows, cols, 2);
            assert_eq!(m.rank(Field::Rationals), rows);
        }
    }
}
