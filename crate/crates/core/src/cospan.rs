//! Cospans of undirected hypergraphs over discrete boundaries.
//!
//! A morphism `n -> m` is a hypergraph apex with two leg maps out of the
//! discrete boundaries. Composition glues the apexes by identifying the
//! vertices hit by the shared boundary (a union-find quotient); the monoidal
//! product is disjoint union. Morphism equality is isomorphism of apexes
//! commuting with the legs. Every morphism is an atom, weighted by the number
//! of apex vertices; the weight of a boundary object is its size.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decomp::{CopyableAlgebra, DecompTree, MonoidalAlgebra, ObjectLabel, WeightedSignature};
use crate::error::{Error, Result};

/// A multihypergraph: vertices are the ordinals below `vertices`, each edge
/// is a set of endpoints. Edge order in the sequence is identity-relevant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: usize,
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let set: BTreeSet<usize> = e.into_iter().collect();
            if set.iter().any(|&v| v >= vertices) {
                return Err(Error::OutOfRange(format!(
                    "edge endpoint beyond {vertices} vertices"
                )));
            }
            normalized.push(set.into_iter().collect());
        }
        Ok(Hypergraph {
            vertices,
            edges: normalized,
        })
    }

    pub fn discrete(vertices: usize) -> Self {
        Hypergraph {
            vertices,
            edges: Vec::new(),
        }
    }

    /// Largest endpoint count over the edges; 0 for an edgeless hypergraph.
    pub fn hyperedge_size(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Union of the endpoint sets of the given edge indices.
    pub fn ends_of(&self, edge_ids: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for e in edge_ids {
            out.extend(self.edges[e].iter().copied());
        }
        out
    }

    /// Per-vertex multiset of incident edge arities, a cheap isomorphism
    /// invariant.
    fn vertex_profiles(&self) -> Vec<Vec<usize>> {
        let mut profiles = vec![Vec::new(); self.vertices];
        for e in &self.edges {
            for &v in e {
                profiles[v].push(e.len());
            }
        }
        for p in &mut profiles {
            p.sort_unstable();
        }
        profiles
    }
}

/// A hypergraph with a marked source set: the glueable interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphWithSources {
    pub graph: Hypergraph,
    pub sources: BTreeSet<usize>,
}

impl HypergraphWithSources {
    pub fn new(graph: Hypergraph, sources: BTreeSet<usize>) -> Result<Self> {
        if sources.iter().any(|&v| v >= graph.vertices) {
            return Err(Error::OutOfRange("source beyond vertex count".into()));
        }
        Ok(HypergraphWithSources { graph, sources })
    }
}

/// A cospan with discrete boundaries: leg maps from boundary positions into
/// apex vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CospanHG {
    #[serde(flatten)]
    pub apex: Hypergraph,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl CospanHG {
    pub fn new(apex: Hypergraph, left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        if left.iter().chain(&right).any(|&v| v >= apex.vertices) {
            return Err(Error::OutOfRange("leg beyond apex vertices".into()));
        }
        Ok(CospanHG { apex, left, right })
    }

    pub fn left_boundary(&self) -> usize {
        self.left.len()
    }

    pub fn right_boundary(&self) -> usize {
        self.right.len()
    }

    /// Vertex count of the apex: the atom weight of this morphism.
    pub fn weight(&self) -> usize {
        self.apex.vertices
    }

    pub fn identity(n: usize) -> Self {
        CospanHG {
            apex: Hypergraph::discrete(n),
            left: (0..n).collect(),
            right: (0..n).collect(),
        }
    }

    /// Copy interface: `n -> n + n` over a discrete apex of `n` points.
    pub fn copy(n: usize) -> Self {
        CospanHG {
            apex: Hypergraph::discrete(n),
            left: (0..n).collect(),
            right: (0..n).chain(0..n).collect(),
        }
    }

    /// Block swap `a + b -> b + a` over a discrete apex.
    pub fn symmetry(a: usize, b: usize) -> Self {
        CospanHG {
            apex: Hypergraph::discrete(a + b),
            left: (0..a + b).collect(),
            right: (a..a + b).chain(0..a).collect(),
        }
    }

    /// Wire reordering: precomposing with this sends input `i` to apex point
    /// `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        CospanHG {
            apex: Hypergraph::discrete(perm.len()),
            left: perm.to_vec(),
            right: (0..perm.len()).collect(),
        }
    }

    /// Creates `n` fresh vertices exposed on the right: `0 -> n`.
    pub fn create(n: usize) -> Self {
        CospanHG {
            apex: Hypergraph::discrete(n),
            left: Vec::new(),
            right: (0..n).collect(),
        }
    }

    /// The closed cospan `0 -> 0` of a hypergraph.
    pub fn closed(graph: Hypergraph) -> Self {
        CospanHG {
            apex: graph,
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    /// The cospan `X -> G <- 0` of a hypergraph with sources, the left leg
    /// listing the sources in ascending order.
    pub fn from_sources(gamma: &HypergraphWithSources) -> Self {
        CospanHG {
            apex: gamma.graph.clone(),
            left: gamma.sources.iter().copied().collect(),
            right: Vec::new(),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Pushout composition, also returning the vertex injections of the two
/// apexes into the composite. Vertices are renumbered canonically in
/// first-seen order, so the result is deterministic.
pub fn compose_with_injections(
    c1: &CospanHG,
    c2: &CospanHG,
) -> Result<(CospanHG, Vec<usize>, Vec<usize>)> {
    if c1.right_boundary() != c2.left_boundary() {
        return Err(Error::DimensionMismatch {
            context: "cospan composition",
            expected: format!("{}", c1.right_boundary()),
            found: format!("{}", c2.left_boundary()),
        });
    }
    let n1 = c1.apex.vertices;
    let n2 = c2.apex.vertices;
    let mut uf = UnionFind::new(n1 + n2);
    for (r, l) in c1.right.iter().zip(&c2.left) {
        uf.union(*r, n1 + *l);
    }
    // Canonical renumbering of quotient classes in first-seen order.
    let mut class_of = vec![usize::MAX; n1 + n2];
    let mut count = 0;
    for v in 0..n1 + n2 {
        let root = uf.find(v);
        if class_of[root] == usize::MAX {
            class_of[root] = count;
            count += 1;
        }
        class_of[v] = class_of[root];
    }
    let inj1: Vec<usize> = (0..n1).map(|v| class_of[v]).collect();
    let inj2: Vec<usize> = (0..n2).map(|v| class_of[n1 + v]).collect();
    let mut edges = Vec::with_capacity(c1.apex.edges.len() + c2.apex.edges.len());
    for e in &c1.apex.edges {
        let set: BTreeSet<usize> = e.iter().map(|&v| inj1[v]).collect();
        edges.push(set.into_iter().collect());
    }
    for e in &c2.apex.edges {
        let set: BTreeSet<usize> = e.iter().map(|&v| inj2[v]).collect();
        edges.push(set.into_iter().collect());
    }
    let apex = Hypergraph {
        vertices: count,
        edges,
    };
    let left = c1.left.iter().map(|&v| inj1[v]).collect();
    let right = c2.right.iter().map(|&v| inj2[v]).collect();
    Ok((CospanHG { apex, left, right }, inj1, inj2))
}

pub fn compose_cospans(c1: &CospanHG, c2: &CospanHG) -> Result<CospanHG> {
    compose_with_injections(c1, c2).map(|(c, _, _)| c)
}

pub fn tensor_cospans(c1: &CospanHG, c2: &CospanHG) -> CospanHG {
    let n1 = c1.apex.vertices;
    let mut edges = c1.apex.edges.clone();
    edges.extend(
        c2.apex
            .edges
            .iter()
            .map(|e| e.iter().map(|&v| v + n1).collect::<Vec<_>>()),
    );
    let apex = Hypergraph {
        vertices: n1 + c2.apex.vertices,
        edges,
    };
    let left = c1
        .left
        .iter()
        .copied()
        .chain(c2.left.iter().map(|&v| v + n1))
        .collect();
    let right = c1
        .right
        .iter()
        .copied()
        .chain(c2.right.iter().map(|&v| v + n1))
        .collect();
    CospanHG { apex, left, right }
}

fn edge_key(e: &[usize], map: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = e.iter().map(|&v| map[v]).collect();
    set.into_iter().collect()
}

/// Isomorphism of apexes commuting with both legs, by backtracking with
/// degree-profile pruning. Refuses apexes larger than `cap`.
pub fn cospan_iso(c1: &CospanHG, c2: &CospanHG, cap: usize) -> Result<bool> {
    if c1.left_boundary() != c2.left_boundary() || c1.right_boundary() != c2.right_boundary() {
        return Ok(false);
    }
    let n = c1.apex.vertices;
    if n != c2.apex.vertices || c1.apex.edges.len() != c2.apex.edges.len() {
        return Ok(false);
    }
    if n > cap {
        return Err(Error::UndecidedAtCap(format!(
            "apex has {n} vertices, cap is {cap}"
        )));
    }
    let p1 = c1.apex.vertex_profiles();
    let p2 = c2.apex.vertex_profiles();
    {
        let mut s1 = p1.clone();
        let mut s2 = p2.clone();
        s1.sort();
        s2.sort();
        if s1 != s2 {
            return Ok(false);
        }
    }
    // Legs force part of the mapping.
    let mut map = vec![usize::MAX; n.max(1)];
    let mut used = vec![false; n.max(1)];
    let force = |a: usize, b: usize, map: &mut Vec<usize>, used: &mut Vec<bool>| -> bool {
        if map[a] == usize::MAX {
            if used[b] {
                return false;
            }
            map[a] = b;
            used[b] = true;
            true
        } else {
            map[a] == b
        }
    };
    for (a, b) in c1.left.iter().zip(&c2.left) {
        if !force(*a, *b, &mut map, &mut used) {
            return Ok(false);
        }
    }
    for (a, b) in c1.right.iter().zip(&c2.right) {
        if !force(*a, *b, &mut map, &mut used) {
            return Ok(false);
        }
    }
    let e2: Vec<Vec<usize>> = {
        let idmap: Vec<usize> = (0..n).collect();
        let mut keys: Vec<Vec<usize>> =
            c2.apex.edges.iter().map(|e| edge_key(e, &idmap)).collect();
        keys.sort();
        keys
    };
    fn edges_match(c1: &CospanHG, map: &[usize], e2: &[Vec<usize>]) -> bool {
        let mut keys: Vec<Vec<usize>> = c1.apex.edges.iter().map(|e| edge_key(e, map)).collect();
        keys.sort();
        keys == e2
    }
    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        v: usize,
        n: usize,
        p1: &[Vec<usize>],
        p2: &[Vec<usize>],
        c1: &CospanHG,
        e2: &[Vec<usize>],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if v == n {
            return edges_match(c1, map, e2);
        }
        if map[v] != usize::MAX {
            return backtrack(v + 1, n, p1, p2, c1, e2, map, used);
        }
        for w in 0..n {
            if !used[w] && p1[v] == p2[w] {
                map[v] = w;
                used[w] = true;
                if backtrack(v + 1, n, p1, p2, c1, e2, map, used) {
                    return true;
                }
                map[v] = usize::MAX;
                used[w] = false;
            }
        }
        false
    }
    Ok(backtrack(0, n, &p1, &p2, c1, &e2, &mut map, &mut used))
}

pub const DEFAULT_ISO_CAP: usize = 24;

/// The cospan algebra. Equality is isomorphism at the configured cap.
pub struct CospanAlgebra {
    pub iso_cap: usize,
}

impl Default for CospanAlgebra {
    fn default() -> Self {
        CospanAlgebra {
            iso_cap: DEFAULT_ISO_CAP,
        }
    }
}

impl MonoidalAlgebra for CospanAlgebra {
    type Morphism = CospanHG;

    fn domain(&self, m: &CospanHG) -> ObjectLabel {
        m.left_boundary()
    }

    fn codomain(&self, m: &CospanHG) -> ObjectLabel {
        m.right_boundary()
    }

    fn compose(&self, f: &CospanHG, g: &CospanHG) -> Result<CospanHG> {
        compose_cospans(f, g)
    }

    fn tensor(&self, f: &CospanHG, g: &CospanHG) -> CospanHG {
        tensor_cospans(f, g)
    }

    fn equal(&self, f: &CospanHG, g: &CospanHG) -> Result<bool> {
        cospan_iso(f, g, self.iso_cap)
    }
}

impl CopyableAlgebra for CospanAlgebra {
    fn copiable(&self, _x: ObjectLabel) -> bool {
        true
    }

    fn identity_tree(
        &self,
        sig: &mut WeightedSignature<CospanHG>,
        x: ObjectLabel,
    ) -> Option<DecompTree> {
        if x == 0 {
            return None;
        }
        Some(DecompTree::Leaf(intern_structural(
            sig,
            &format!("id_{x}"),
            CospanHG::identity(x),
        )))
    }

    fn copy_tree(
        &self,
        sig: &mut WeightedSignature<CospanHG>,
        x: ObjectLabel,
    ) -> Result<DecompTree> {
        Ok(DecompTree::Leaf(intern_structural(
            sig,
            &format!("cp_{x}"),
            CospanHG::copy(x),
        )))
    }

    fn symmetry_tree(
        &self,
        sig: &mut WeightedSignature<CospanHG>,
        x: ObjectLabel,
        y: ObjectLabel,
    ) -> Option<DecompTree> {
        if x + y == 0 {
            return None;
        }
        Some(DecompTree::Leaf(intern_structural(
            sig,
            &format!("sym_{x}_{y}"),
            CospanHG::symmetry(x, y),
        )))
    }

    fn identity_morphism(&self, x: ObjectLabel) -> CospanHG {
        CospanHG::identity(x)
    }

    fn copy_morphism(&self, x: ObjectLabel) -> CospanHG {
        CospanHG::copy(x)
    }

    fn symmetry_morphism(&self, x: ObjectLabel, y: ObjectLabel) -> CospanHG {
        CospanHG::symmetry(x, y)
    }
}

/// All cospans are atoms; structural ones get stable names.
pub fn intern_structural(
    sig: &mut WeightedSignature<CospanHG>,
    name: &str,
    c: CospanHG,
) -> crate::decomp::AtomId {
    let w = c.weight();
    sig.intern(name, c, w)
}

/// Interns an atom under a fresh name with the given prefix.
pub fn intern_fresh(
    sig: &mut WeightedSignature<CospanHG>,
    prefix: &str,
    c: CospanHG,
) -> crate::decomp::AtomId {
    let mut i = sig.len();
    loop {
        let name = format!("{prefix}{i}");
        if !sig.contains(&name) {
            let w = c.weight();
            return sig.intern(name, c, w);
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge(arity: usize) -> CospanHG {
        // One edge on `arity` vertices, all of them on both boundaries.
        let apex = Hypergraph::new(arity, vec![(0..arity).collect()]).unwrap();
        CospanHG::new(apex, (0..arity).collect(), (0..arity).collect()).unwrap()
    }

    #[test]
    fn compose_two_edges_gives_path_of_length_two() {
        // Two single-edge cospans 1 -> 1 glued on a shared endpoint.
        let e = {
            let apex = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
            CospanHG::new(apex, vec![0], vec![1]).unwrap()
        };
        let path = compose_cospans(&e, &e).unwrap();
        assert_eq!(path.apex.vertices, 3);
        assert_eq!(path.apex.edges.len(), 2);
        // Middle vertex shared by both edges.
        let shared = path
            .apex
            .ends_of([0])
            .intersection(&path.apex.ends_of([1]))
            .count();
        assert_eq!(shared, 1);
    }

    #[test]
    fn compose_with_identity_is_isomorphic() {
        let c = single_edge(3);
        let id3 = CospanHG::identity(3);
        let left = compose_cospans(&id3, &c).unwrap();
        let right = compose_cospans(&c, &id3).unwrap();
        assert!(cospan_iso(&left, &c, 10).unwrap());
        assert!(cospan_iso(&right, &c, 10).unwrap());
    }

    #[test]
    fn glueing_both_endpoints_twice_gives_two_cycle() {
        // Two parallel 2 -> 2 single-edge cospans glued on both points.
        let e = single_edge(2);
        let cycle = compose_cospans(&e, &e).unwrap();
        assert_eq!(cycle.apex.vertices, 2);
        assert_eq!(cycle.apex.edges.len(), 2);
        assert_eq!(cycle.apex.edges[0], cycle.apex.edges[1]);
    }

    #[test]
    fn tensor_disjoint_union() {
        let a = CospanHG::closed(Hypergraph::new(2, vec![vec![0, 1]]).unwrap());
        let b = CospanHG::closed(Hypergraph::new(2, vec![vec![0, 1]]).unwrap());
        let t = tensor_cospans(&a, &b);
        assert_eq!(t.apex.vertices, 4);
        assert_eq!(t.apex.edges, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn tensor_unit_law() {
        let c = single_edge(2);
        let unit = CospanHG::closed(Hypergraph::discrete(0));
        assert_eq!(tensor_cospans(&c, &unit), c);
    }

    #[test]
    fn tensor_arities() {
        let a = single_edge(3);
        let b = single_edge(2);
        let t = tensor_cospans(&a, &b);
        assert_eq!(t.apex.vertices, 5);
        assert_eq!(t.apex.edges.len(), 2);
    }

    #[test]
    fn iso_spots_relabelling() {
        let c1 = CospanHG::closed(Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap());
        let c2 = CospanHG::closed(Hypergraph::new(3, vec![vec![2, 1], vec![0, 1]]).unwrap());
        assert!(cospan_iso(&c1, &c2, 10).unwrap());
    }

    #[test]
    fn iso_distinguishes_path_from_matching() {
        let path = CospanHG::closed(Hypergraph::new(4, vec![vec![0, 1], vec![1, 2]]).unwrap());
        let matching = CospanHG::closed(Hypergraph::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap());
        assert!(!cospan_iso(&path, &matching, 10).unwrap());
    }

    #[test]
    fn iso_respects_legs() {
        let apex = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        let c1 = CospanHG::new(apex.clone(), vec![0], vec![1]).unwrap();
        let c2 = CospanHG::new(apex, vec![1], vec![1]).unwrap();
        assert!(!cospan_iso(&c1, &c2, 10).unwrap());
    }

    #[test]
    fn iso_differing_sizes() {
        let a = CospanHG::closed(Hypergraph::discrete(2));
        let b = CospanHG::closed(Hypergraph::discrete(3));
        assert!(!cospan_iso(&a, &b, 10).unwrap());
    }

    #[test]
    fn iso_cap_is_reported() {
        let a = CospanHG::closed(Hypergraph::discrete(11));
        assert!(matches!(
            cospan_iso(&a, &a, 10),
            Err(Error::UndecidedAtCap(_))
        ));
    }

    #[test]
    fn weights() {
        assert_eq!(single_edge(2).weight(), 2);
        let k3 =
            CospanHG::closed(Hypergraph::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap());
        assert_eq!(k3.weight(), 3);
        assert_eq!(CospanHG::identity(4).weight(), 4);
    }

    #[test]
    fn associativity_up_to_iso() {
        let e = {
            let apex = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
            CospanHG::new(apex, vec![0], vec![1]).unwrap()
        };
        let ab_c = compose_cospans(&compose_cospans(&e, &e).unwrap(), &e).unwrap();
        let a_bc = compose_cospans(&e, &compose_cospans(&e, &e).unwrap()).unwrap();
        assert!(cospan_iso(&ab_c, &a_bc, 10).unwrap());
    }

    #[test]
    fn json_inlines_the_apex() {
        let c = single_edge(2);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"vertices\":2"));
        assert!(text.contains("\"left\":[0,1]"));
        let back: CospanHG = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn copy_construction_matches_direct_morphism() {
        use crate::decomp::{copy_decompose, copy_direct, evaluate, width, WeightedSignature};
        let alg = CospanAlgebra::default();
        // f : 1 (x) 1 (x) 1 -> 0, a closed-off path with three sources.
        let apex = Hypergraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let f = CospanHG::new(apex, vec![0, 1, 2], vec![]).unwrap();
        let mut sig = WeightedSignature::new();
        let w = f.weight();
        let d = DecompTree::Leaf(sig.intern("f", f.clone(), w));
        let t = copy_decompose(&alg, &mut sig, &d, &[1], 1, 1).unwrap();
        let value = evaluate(&t, &alg, &sig).unwrap();
        let expect = copy_direct(&alg, &f, &[1], 1, 1).unwrap();
        assert!(cospan_iso(&value, &expect, 10).unwrap());
        assert!(width(&t, &sig).unwrap() <= w.max(1 + 1 + 2));
    }

    #[test]
    fn interchange_up_to_iso() {
        let alg = CospanAlgebra::default();
        let e = {
            let apex = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
            CospanHG::new(apex, vec![0], vec![1]).unwrap()
        };
        let lhs = alg
            .compose(&alg.tensor(&e, &e), &alg.tensor(&e, &e))
            .unwrap();
        let rhs = alg.tensor(&alg.compose(&e, &e).unwrap(), &alg.compose(&e, &e).unwrap());
        assert!(alg.equal(&lhs, &rhs).unwrap());
    }
}
