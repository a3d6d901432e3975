//! Brute-force oracles: exact branch width, rank width, tree width, exact
//! monoidal width of small matrices, and isomorphism search. These are the
//! ground truth every constructive bound is certified against; they refuse
//! inputs beyond their budget rather than degrade.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bialg;
use crate::boundary::RankDec;
use crate::branch::BranchDec;
use crate::cospan::Hypergraph;
use crate::error::{Error, Result};
use crate::matrix::{for_each_nat_factorization, Field, NatMatrix};

#[derive(Debug, Clone)]
pub struct OracleBudget {
    pub max_edges: usize,
    pub max_vertices: usize,
    pub max_entry: u64,
    pub max_matrix_dim: usize,
    pub max_inner_dim: usize,
    pub time_limit_ms: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_edges: 10,
            max_vertices: 8,
            max_entry: 2,
            max_matrix_dim: 4,
            max_inner_dim: 5,
            time_limit_ms: 60_000,
        }
    }
}

// --- exact branch width --------------------------------------------------------

/// Minimum branch width over all subcubic trees, by dynamic programming over
/// recursive edge bipartitions, together with an optimal decomposition.
pub fn exact_branch_width(g: &Hypergraph, budget: &OracleBudget) -> Result<(usize, BranchDec)> {
    let e = g.edges.len();
    if e > budget.max_edges {
        return Err(Error::BudgetExceeded(format!(
            "{e} edges beyond the cap of {}",
            budget.max_edges
        )));
    }
    if g.vertices > 64 {
        return Err(Error::BudgetExceeded("more than 64 vertices".into()));
    }
    if e == 0 {
        return Ok((
            0,
            BranchDec {
                node_count: 0,
                tree_edges: vec![],
                leaf_to_edge: BTreeMap::new(),
            },
        ));
    }
    if e == 1 {
        return Ok((
            0,
            BranchDec {
                node_count: 1,
                tree_edges: vec![],
                leaf_to_edge: BTreeMap::from([(0, 0)]),
            },
        ));
    }
    let ends: Vec<u64> = g
        .edges
        .iter()
        .map(|edge| edge.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let full: usize = (1 << e) - 1;
    let ends_of = |s: usize| -> u64 {
        (0..e).filter(|&i| s >> i & 1 == 1).fold(0, |m, i| m | ends[i])
    };
    let delta: Vec<usize> = (0..=full)
        .map(|s| (ends_of(s) & ends_of(full ^ s)).count_ones() as usize)
        .collect();
    let mut f = vec![usize::MAX; full + 1];
    let mut choice = vec![0usize; full + 1];
    let mut by_popcount: Vec<Vec<usize>> = vec![Vec::new(); e + 1];
    for s in 1..=full {
        by_popcount[s.count_ones() as usize].push(s);
    }
    for size in 1..=e {
        for &s in &by_popcount[size] {
            if size == 1 {
                f[s] = 0;
                continue;
            }
            let low = s & s.wrapping_neg();
            let mut best = usize::MAX;
            let mut best_t = 0;
            // Enumerate proper subsets containing the lowest edge.
            let mut t = (s - 1) & s;
            while t > 0 {
                if t & low != 0 {
                    let u = s ^ t;
                    let cost = delta[t].max(delta[u]).max(f[t]).max(f[u]);
                    if cost < best {
                        best = cost;
                        best_t = t;
                    }
                }
                t = (t - 1) & s;
            }
            f[s] = best;
            choice[s] = best_t;
        }
    }
    // Reconstruct the optimal tree.
    let mut dec = BranchDec {
        node_count: 0,
        tree_edges: Vec::new(),
        leaf_to_edge: BTreeMap::new(),
    };
    fn build(s: usize, choice: &[usize], dec: &mut BranchDec) -> usize {
        let id = dec.node_count;
        dec.node_count += 1;
        if s.count_ones() == 1 {
            dec.leaf_to_edge.insert(id, s.trailing_zeros() as usize);
            return id;
        }
        let t = choice[s];
        let l = build(t, choice, dec);
        dec.tree_edges.push((id, l));
        let r = build(s ^ t, choice, dec);
        dec.tree_edges.push((id, r));
        id
    }
    build(full, &choice, &mut dec);
    Ok((f[full], dec))
}

// --- exact rank width ------------------------------------------------------------

/// Minimum rank width over all subcubic trees, by dynamic programming over
/// vertex bipartitions, together with an optimal decomposition.
pub fn exact_rank_width(
    adjacency: &NatMatrix,
    field: Field,
    budget: &OracleBudget,
) -> Result<(usize, RankDec)> {
    let k = adjacency.rows();
    if k > budget.max_vertices {
        return Err(Error::BudgetExceeded(format!(
            "{k} vertices beyond the cap of {}",
            budget.max_vertices
        )));
    }
    if k == 0 {
        return Ok((
            0,
            RankDec {
                node_count: 0,
                tree_edges: vec![],
                leaf_to_vertex: BTreeMap::new(),
            },
        ));
    }
    if k == 1 {
        return Ok((
            0,
            RankDec {
                node_count: 1,
                tree_edges: vec![],
                leaf_to_vertex: BTreeMap::from([(0, 0)]),
            },
        ));
    }
    let sym = adjacency.symmetrize()?;
    let full: usize = (1 << k) - 1;
    let cut_rank = |s: usize| -> usize {
        let side: Vec<usize> = (0..k).filter(|&v| s >> v & 1 == 1).collect();
        let other: Vec<usize> = (0..k).filter(|&v| s >> v & 1 == 0).collect();
        sym.submatrix(&side, &other).rank(field)
    };
    let cuts: Vec<usize> = (0..=full).map(cut_rank).collect();
    let mut f = vec![usize::MAX; full + 1];
    let mut choice = vec![0usize; full + 1];
    let mut by_popcount: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for s in 1..=full {
        by_popcount[s.count_ones() as usize].push(s);
    }
    for size in 1..=k {
        for &s in &by_popcount[size] {
            if size == 1 {
                f[s] = 0;
                continue;
            }
            let low = s & s.wrapping_neg();
            let mut best = usize::MAX;
            let mut best_t = 0;
            let mut t = (s - 1) & s;
            while t > 0 {
                if t & low != 0 {
                    let u = s ^ t;
                    let cost = cuts[t].max(cuts[u]).max(f[t]).max(f[u]);
                    if cost < best {
                        best = cost;
                        best_t = t;
                    }
                }
                t = (t - 1) & s;
            }
            f[s] = best;
            choice[s] = best_t;
        }
    }
    let mut dec = RankDec {
        node_count: 0,
        tree_edges: Vec::new(),
        leaf_to_vertex: BTreeMap::new(),
    };
    fn build(s: usize, choice: &[usize], dec: &mut RankDec) -> usize {
        let id = dec.node_count;
        dec.node_count += 1;
        if s.count_ones() == 1 {
            dec.leaf_to_vertex.insert(id, s.trailing_zeros() as usize);
            return id;
        }
        let t = choice[s];
        let l = build(t, choice, dec);
        dec.tree_edges.push((id, l));
        let r = build(s ^ t, choice, dec);
        dec.tree_edges.push((id, r));
        id
    }
    build(full, &choice, &mut dec);
    Ok((f[full], dec))
}

// --- exact tree width -------------------------------------------------------------

/// Exact tree width in the maximum-bag-size convention, over elimination
/// orders of the primal graph (each hyperedge becomes a clique).
pub fn exact_tree_width(g: &Hypergraph, budget: &OracleBudget) -> Result<usize> {
    let k = g.vertices;
    if k > budget.max_vertices {
        return Err(Error::BudgetExceeded(format!(
            "{k} vertices beyond the cap of {}",
            budget.max_vertices
        )));
    }
    if k == 0 {
        return Ok(0);
    }
    let mut adj = vec![0u64; k];
    for e in &g.edges {
        for &u in e {
            for &v in e {
                if u != v {
                    adj[u] |= 1 << v;
                }
            }
        }
    }
    // Vertices reachable from v through the eliminated set s, minus s and v.
    let reach = |s: usize, v: usize| -> usize {
        let mut frontier = adj[v] as usize;
        let mut seen = frontier;
        loop {
            let through = frontier & s;
            if through == 0 {
                break;
            }
            let mut next = 0usize;
            let mut rest = through;
            while rest != 0 {
                let w = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                next |= adj[w] as usize;
            }
            frontier = next & !seen;
            seen |= next;
        }
        seen & !s & !(1 << v)
    };
    let full: usize = (1 << k) - 1;
    let mut tw = vec![usize::MAX; full + 1];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = usize::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prev = s & !(1 << v);
            let degree = reach(prev, v).count_ones() as usize;
            best = best.min(tw[prev].max(degree));
        }
        tw[s] = best;
    }
    Ok(tw[full] + 1)
}

// --- exact monoidal width of matrices ----------------------------------------------

/// Exact minimum width of a decomposition of `A` into the six matrix
/// generators, over the bounded search space: tensor nodes split diagonal
/// blocks, composition cuts range up to `min(m, n) + 1`, and factor entries
/// are bounded by the maximum entry of the matrix being split.
pub fn exact_matrix_mwd(a: &NatMatrix, budget: &OracleBudget) -> Result<usize> {
    MwdOracle::new().width(a, budget)
}

/// Reusable exact-width searcher; memo tables are shared across queries, so
/// batch runs over a corpus reuse each other's work.
pub struct MwdOracle {
    true_memo: HashSet<(usize, NatMatrix)>,
    false_memo: HashSet<(usize, NatMatrix)>,
    seed_cache: std::collections::HashMap<NatMatrix, usize>,
    sig: crate::decomp::WeightedSignature<NatMatrix>,
}

impl Default for MwdOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl MwdOracle {
    pub fn new() -> Self {
        MwdOracle {
            true_memo: HashSet::new(),
            false_memo: HashSet::new(),
            seed_cache: std::collections::HashMap::new(),
            sig: bialg::signature(),
        }
    }

    pub fn width(&mut self, a: &NatMatrix, budget: &OracleBudget) -> Result<usize> {
        if a.rows() > budget.max_matrix_dim || a.cols() > budget.max_matrix_dim {
            return Err(Error::BudgetExceeded(format!(
                "{}x{} matrix beyond the cap of {}",
                a.rows(),
                a.cols(),
                budget.max_matrix_dim
            )));
        }
        if a.max_entry() > BigUint::from(budget.max_entry) {
            return Err(Error::BudgetExceeded(format!(
                "entry {} beyond the cap of {}",
                a.max_entry(),
                budget.max_entry
            )));
        }
        let cap = a.rows().min(a.cols()) + 1;
        let deadline = Instant::now() + std::time::Duration::from_millis(budget.time_limit_ms);
        for w in 0..=cap.max(2) {
            if self.decide(a, w, deadline)? {
                return Ok(w);
            }
        }
        Err(Error::BudgetExceeded(
            "no decomposition within the bounded search space".into(),
        ))
    }

    /// Decides "some decomposition of `a` has width at most `w`" by
    /// saturation: repeated passes accumulate proven-decomposable matrices
    /// until a pass learns nothing new, at which point every open question
    /// raised along the way is exhaustively refuted.
    fn decide(&mut self, a: &NatMatrix, w: usize, deadline: Instant) -> Result<bool> {
        if self.true_memo.contains(&(w, a.clone())) {
            return Ok(true);
        }
        if self.false_memo.contains(&(w, a.clone())) {
            return Ok(false);
        }
        let mut worklist: Vec<NatMatrix> = vec![a.clone()];
        let mut queued: HashSet<NatMatrix> = worklist.iter().cloned().collect();
        loop {
            let before = self.true_memo.len();
            let mut pass = PassState {
                width: w,
                pass_false: HashSet::new(),
                path: Vec::new(),
                deadline,
            };
            let snapshot = worklist.clone();
            for x in &snapshot {
                if !self.true_memo.contains(&(w, x.clone())) {
                    self.can_pass(x, &mut pass, &mut worklist, &mut queued)?;
                }
            }
            if self.true_memo.contains(&(w, a.clone())) {
                return Ok(true);
            }
            if self.true_memo.len() == before {
                // Fixpoint: every root queried this pass without a proof has
                // none at this width.
                for x in &snapshot {
                    if !self.true_memo.contains(&(w, x.clone())) {
                        self.false_memo.insert((w, x.clone()));
                    }
                }
                return Ok(false);
            }
        }
    }

    fn can_pass(
        &mut self,
        a: &NatMatrix,
        pass: &mut PassState,
        worklist: &mut Vec<NatMatrix>,
        queued: &mut HashSet<NatMatrix>,
    ) -> Result<bool> {
        let key = (pass.width, a.clone());
        if self.true_memo.contains(&key) {
            return Ok(true);
        }
        if self.false_memo.contains(&key) || pass.pass_false.contains(a) {
            return Ok(false);
        }
        if pass.path.contains(a) || pass.path.len() >= PATH_DEPTH_CAP {
            // Provisionally closed; the matrix is requeried as a root in the
            // next pass, so nothing is lost.
            if queued.insert(a.clone()) {
                worklist.push(a.clone());
            }
            return Ok(false);
        }
        if Instant::now() > pass.deadline {
            return Err(Error::BudgetExceeded("time limit".into()));
        }
        pass.path.push(a.clone());
        let result = self.explore(a, pass, worklist, queued);
        pass.path.pop();
        let result = result?;
        if result {
            self.true_memo.insert(key);
        } else {
            pass.pass_false.insert(a.clone());
            if queued.insert(a.clone()) {
                worklist.push(a.clone());
            }
        }
        Ok(result)
    }

    /// Width of the constructed block/rank/boundary decomposition of `a`:
    /// a sound in-space witness used to close the easy side quickly.
    fn seed_bound(&mut self, a: &NatMatrix) -> Result<usize> {
        if let Some(&w) = self.seed_cache.get(a) {
            return Ok(w);
        }
        let up = bialg::monoidal_upper(&mut self.sig, a)?;
        let w = crate::decomp::width(&up.tree, &self.sig)?;
        self.seed_cache.insert(a.clone(), w);
        Ok(w)
    }

    fn explore(
        &mut self,
        a: &NatMatrix,
        pass: &mut PassState,
        worklist: &mut Vec<NatMatrix>,
        queued: &mut HashSet<NatMatrix>,
    ) -> Result<bool> {
        let w = pass.width;
        let (m, n) = (a.rows(), a.cols());
        // The empty morphism has no atoms and no proper tensor splits; its
        // cheapest decomposition creates a wire and discards it.
        if m == 0 && n == 0 {
            return Ok(w >= 1);
        }
        // Atoms.
        for name in bialg::GENERATOR_NAMES {
            let gm = bialg::generator_matrix(name)?;
            if gm == *a {
                let weight = if matches!(name, "cp" | "add" | "swap") { 2 } else { 1 };
                if weight <= w {
                    return Ok(true);
                }
            }
        }
        // Constructive witness.
        if self.seed_bound(a)? <= w {
            return Ok(true);
        }
        // Tensor splits over diagonal blocks.
        for i in 0..=m {
            for j in 0..=n {
                if (i == 0 && j == 0) || (i == m && j == n) {
                    continue;
                }
                let top_right_zero = (0..i).all(|r| (j..n).all(|c| a.get(r, c).is_zero()));
                if !top_right_zero {
                    continue;
                }
                let bottom_left_zero = (i..m).all(|r| (0..j).all(|c| a.get(r, c).is_zero()));
                if !bottom_left_zero {
                    continue;
                }
                let a1 = a.submatrix(&(0..i).collect::<Vec<_>>(), &(0..j).collect::<Vec<_>>());
                let a2 = a.submatrix(&(i..m).collect::<Vec<_>>(), &(j..n).collect::<Vec<_>>());
                if self.can_pass(&a1, pass, worklist, queued)?
                    && self.can_pass(&a2, pass, worklist, queued)?
                {
                    return Ok(true);
                }
            }
        }
        // Composition splits through every factorization at each cut. The
        // enumerator yields one piece order per factorization; the order is
        // material (it decides which factor matrices the recursion sees), so
        // every reordering of the inner dimension is tried.
        let bound = a.max_entry().max(BigUint::one());
        let rank = a.rank(Field::Rationals);
        let cap = (m.min(n) + 1).min(w);
        for k in rank..=cap {
            if Instant::now() > pass.deadline {
                return Err(Error::BudgetExceeded("time limit".into()));
            }
            let perms = permutations(k);
            let mut err: Option<Error> = None;
            let mut found = false;
            for_each_nat_factorization(a, k, &bound, &mut |h, g| {
                let mut seen: HashSet<(NatMatrix, NatMatrix)> = HashSet::new();
                for perm in &perms {
                    let hp = NatMatrix::from_fn(h.rows(), k, |i, j| h.get(i, perm[j]).clone());
                    let gp = NatMatrix::from_fn(k, g.cols(), |i, j| g.get(perm[i], j).clone());
                    if !seen.insert((hp.clone(), gp.clone())) {
                        continue;
                    }
                    match self.try_pair(&hp, &gp, pass, worklist, queued) {
                        Ok(true) => {
                            found = true;
                            return true;
                        }
                        Ok(false) => {}
                        Err(e) => {
                            err = Some(e);
                            return true;
                        }
                    }
                }
                false
            });
            if let Some(e) = err {
                return Err(e);
            }
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn try_pair(
        &mut self,
        h: &NatMatrix,
        g: &NatMatrix,
        pass: &mut PassState,
        worklist: &mut Vec<NatMatrix>,
        queued: &mut HashSet<NatMatrix>,
    ) -> Result<bool> {
        Ok(self.can_pass(h, pass, worklist, queued)?
            && self.can_pass(g, pass, worklist, queued)?)
    }
}

/// Recursion ceiling per pass; anything deeper is deferred to the worklist.
const PATH_DEPTH_CAP: usize = 40;

struct PassState {
    width: usize,
    pass_false: HashSet<NatMatrix>,
    path: Vec<NatMatrix>,
    deadline: Instant,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn heap(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            heap(n - 1, cur, out);
            if n % 2 == 0 {
                cur.swap(i, n - 1);
            } else {
                cur.swap(0, n - 1);
            }
        }
    }
    heap(k, &mut cur, &mut out);
    out
}

// --- hypergraph isomorphism ---------------------------------------------------------

/// Backtracking hypergraph isomorphism with a vertex witness; `None` when the
/// graphs are not isomorphic.
pub fn graph_iso(
    g: &Hypergraph,
    h: &Hypergraph,
    budget: &OracleBudget,
) -> Result<Option<Vec<usize>>> {
    if g.vertices != h.vertices || g.edges.len() != h.edges.len() {
        return Ok(None);
    }
    let n = g.vertices;
    if n > budget.max_vertices.max(budget.max_edges * 3) {
        return Err(Error::BudgetExceeded(format!("{n} vertices")));
    }
    let profile = |g: &Hypergraph| -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); g.vertices];
        for e in &g.edges {
            for &v in e {
                p[v].push(e.len());
            }
        }
        for q in &mut p {
            q.sort_unstable();
        }
        p
    };
    let pg = profile(g);
    let ph = profile(h);
    {
        let mut a = pg.clone();
        let mut b = ph.clone();
        a.sort();
        b.sort();
        if a != b {
            return Ok(None);
        }
    }
    let h_keys = {
        let mut keys: Vec<Vec<usize>> = h.edges.clone();
        keys.sort();
        keys
    };
    fn matches(g: &Hypergraph, map: &[usize], h_keys: &[Vec<usize>]) -> bool {
        let mut keys: Vec<Vec<usize>> = g
            .edges
            .iter()
            .map(|e| {
                let mut k: Vec<usize> = e.iter().map(|&v| map[v]).collect();
                k.sort_unstable();
                k
            })
            .collect();
        keys.sort();
        keys == h_keys
    }
    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        v: usize,
        n: usize,
        g: &Hypergraph,
        pg: &[Vec<usize>],
        ph: &[Vec<usize>],
        h_keys: &[Vec<usize>],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if v == n {
            return matches(g, map, h_keys);
        }
        for w in 0..n {
            if !used[w] && pg[v] == ph[w] {
                map[v] = w;
                used[w] = true;
                if backtrack(v + 1, n, g, pg, ph, h_keys, map, used) {
                    return true;
                }
                used[w] = false;
            }
        }
        false
    }
    let mut map = vec![0usize; n];
    let mut used = vec![false; n];
    if backtrack(0, n, g, &pg, &ph, &h_keys, &mut map, &mut used) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}
