//! The prop of natural-number matrices, presented by its six generators.
//!
//! A morphism `n -> m` is an `m x n` matrix; `compose(f, g)` in diagram order
//! is the product `mat(g) * mat(f)`, and the monoidal product is the
//! block-diagonal sum. Decomposition leaves are restricted to the generators
//! `cp, add, delete, zero, swap, id`, so every construction here expands
//! matrices down to generator level. Each generator weighs `max(m, n)`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::decomp::{
    copy_decompose, type_of, CopyableAlgebra, DecompTree, MonoidalAlgebra, ObjectLabel,
    WeightedSignature,
};
use crate::error::{Error, Result};
use crate::matrix::{nat_rank_factorize, Field, NatMatrix};

pub const GENERATOR_NAMES: [&str; 6] = ["cp", "add", "delete", "zero", "swap", "id"];

/// Matrices of the six generators, read off their diagrams by path counting.
pub fn generator_matrix(name: &str) -> Result<NatMatrix> {
    Ok(match name {
        "cp" => NatMatrix::from_u64(&[vec![1], vec![1]]),
        "add" => NatMatrix::from_u64(&[vec![1, 1]]),
        "delete" => NatMatrix::zero(0, 1),
        "zero" => NatMatrix::zero(1, 0),
        "swap" => NatMatrix::from_u64(&[vec![0, 1], vec![1, 0]]),
        "id" => NatMatrix::identity(1),
        other => return Err(Error::UnknownAtom(other.to_owned())),
    })
}

fn generator_weight(name: &str) -> usize {
    match name {
        "cp" | "add" | "swap" => 2,
        _ => 1,
    }
}

/// The fixed atom table for this algebra: the six generators under their
/// stable names.
pub fn signature() -> WeightedSignature<NatMatrix> {
    let mut sig = WeightedSignature::new();
    for name in GENERATOR_NAMES {
        let m = generator_matrix(name).expect("fixed generator");
        sig.intern(name, m, generator_weight(name));
    }
    sig
}

pub struct BialgAlgebra;

impl MonoidalAlgebra for BialgAlgebra {
    type Morphism = NatMatrix;

    fn domain(&self, m: &NatMatrix) -> ObjectLabel {
        m.cols()
    }

    fn codomain(&self, m: &NatMatrix) -> ObjectLabel {
        m.rows()
    }

    fn compose(&self, f: &NatMatrix, g: &NatMatrix) -> Result<NatMatrix> {
        g.multiply(f)
    }

    fn tensor(&self, f: &NatMatrix, g: &NatMatrix) -> NatMatrix {
        f.direct_sum(g)
    }

    fn equal(&self, f: &NatMatrix, g: &NatMatrix) -> Result<bool> {
        Ok(f == g)
    }
}

impl CopyableAlgebra for BialgAlgebra {
    fn copiable(&self, x: ObjectLabel) -> bool {
        x == 1
    }

    fn identity_tree(
        &self,
        sig: &mut WeightedSignature<NatMatrix>,
        x: ObjectLabel,
    ) -> Option<DecompTree> {
        identity_tree(sig, x)
    }

    fn copy_tree(
        &self,
        sig: &mut WeightedSignature<NatMatrix>,
        x: ObjectLabel,
    ) -> Result<DecompTree> {
        if x != 1 {
            return Err(Error::NotCopiable(x));
        }
        Ok(DecompTree::Leaf(sig.id_of("cp")?))
    }

    fn symmetry_tree(
        &self,
        sig: &mut WeightedSignature<NatMatrix>,
        x: ObjectLabel,
        y: ObjectLabel,
    ) -> Option<DecompTree> {
        symmetry_tree(sig, x, y)
    }

    fn identity_morphism(&self, x: ObjectLabel) -> NatMatrix {
        NatMatrix::identity(x)
    }

    fn copy_morphism(&self, x: ObjectLabel) -> NatMatrix {
        let id = NatMatrix::identity(x);
        id.concat_v(&id).expect("same width")
    }

    fn symmetry_morphism(&self, x: ObjectLabel, y: ObjectLabel) -> NatMatrix {
        let mut m = NatMatrix::zero(x + y, x + y);
        for i in 0..x {
            m.set(y + i, i, BigUint::one());
        }
        for j in 0..y {
            m.set(j, x + j, BigUint::one());
        }
        m
    }
}

/// Tensor fold of `x` identity leaves; `None` for the empty object.
pub fn identity_tree(sig: &mut WeightedSignature<NatMatrix>, x: usize) -> Option<DecompTree> {
    if x == 0 {
        return None;
    }
    let id = sig.id_of("id").expect("generator table");
    DecompTree::tensor_all(vec![DecompTree::Leaf(id); x])
}

/// Network of adjacent transpositions moving a block of `a` wires past a
/// block of `b` wires; width `a + b` (every layer is a full-width cut).
pub fn symmetry_tree(
    sig: &mut WeightedSignature<NatMatrix>,
    a: usize,
    b: usize,
) -> Option<DecompTree> {
    if a == 0 {
        return identity_tree(sig, b);
    }
    if b == 0 {
        return identity_tree(sig, a);
    }
    let swap = sig.id_of("swap").expect("generator table");
    if a == 1 && b == 1 {
        return Some(DecompTree::Leaf(swap));
    }
    if a == 1 {
        // (swap (x) id_{b-1}) ; (id (x) sym_{1,b-1})
        let top = match identity_tree(sig, b - 1) {
            Some(id) => DecompTree::tensor(DecompTree::Leaf(swap), id),
            None => DecompTree::Leaf(swap),
        };
        let rest = symmetry_tree(sig, 1, b - 1).expect("b - 1 >= 1");
        let bottom = DecompTree::tensor(identity_tree(sig, 1).unwrap(), rest);
        return Some(DecompTree::compose(top, 1 + b, bottom));
    }
    // (id_{a-1} (x) sym_{1,b}) ; (sym_{a-1,b} (x) id_1)
    let top = DecompTree::tensor(
        identity_tree(sig, a - 1).unwrap(),
        symmetry_tree(sig, 1, b).unwrap(),
    );
    let bottom = DecompTree::tensor(
        symmetry_tree(sig, a - 1, b).unwrap(),
        identity_tree(sig, 1).unwrap(),
    );
    Some(DecompTree::compose(top, a + b, bottom))
}

/// Generator-level decomposition of the `1 x 1` matrix `[k]`: the zero scalar
/// is `delete ; zero`, one is the identity wire, and larger scalars are the
/// copy/add ladder of width 2.
pub fn scalar_decomposition(
    sig: &mut WeightedSignature<NatMatrix>,
    k: &BigUint,
) -> Result<DecompTree> {
    let leaf = |sig: &mut WeightedSignature<NatMatrix>, n: &str| -> Result<DecompTree> {
        Ok(DecompTree::Leaf(sig.id_of(n)?))
    };
    if k.is_zero() {
        return Ok(DecompTree::compose(leaf(sig, "delete")?, 0, leaf(sig, "zero")?));
    }
    let mut tree = leaf(sig, "id")?;
    let mut i = BigUint::one();
    while i < *k {
        let inner = DecompTree::tensor(leaf(sig, "id")?, tree);
        tree = DecompTree::compose(
            leaf(sig, "cp")?,
            2,
            DecompTree::compose(inner, 2, leaf(sig, "add")?),
        );
        i += 1u32;
    }
    Ok(tree)
}

/// Decomposition of the zero matrix `m x n` out of discard and create wires;
/// width 1 in all shapes.
pub fn zero_matrix_tree(sig: &mut WeightedSignature<NatMatrix>, m: usize, n: usize) -> DecompTree {
    let delete = DecompTree::Leaf(sig.id_of("delete").expect("generator table"));
    let zero = DecompTree::Leaf(sig.id_of("zero").expect("generator table"));
    match (n, m) {
        (0, 0) => DecompTree::compose(zero, 1, delete),
        (_, 0) => DecompTree::tensor_all(vec![delete; n]).unwrap(),
        (0, _) => DecompTree::tensor_all(vec![zero; m]).unwrap(),
        _ => DecompTree::compose(
            DecompTree::tensor_all(vec![delete; n]).unwrap(),
            0,
            DecompTree::tensor_all(vec![zero; m]).unwrap(),
        ),
    }
}

/// Recursive construction bounding width by `min(m, n) + 1`: copy the inputs,
/// peel one output at a time, and bottom out at scalars and generator folds.
pub fn boundary_bounded(
    sig: &mut WeightedSignature<NatMatrix>,
    a: &NatMatrix,
) -> Result<DecompTree> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 || m == 0 {
        return Ok(zero_matrix_tree(sig, m, n));
    }
    if m == 1 && n == 1 {
        return scalar_decomposition(sig, a.get(0, 0));
    }
    if n > m {
        let t = boundary_bounded(sig, &a.transpose())?;
        return dualize(sig, &t);
    }
    // n <= m and m >= 2: peel the last output.
    let rows: Vec<usize> = (0..m).collect();
    let cols: Vec<usize> = (0..n).collect();
    let last_row = a.submatrix(&[m - 1], &cols);
    let head_rows = a.submatrix(&rows[..m - 1], &cols);
    let d_last = boundary_bounded(sig, &last_row)?;
    let d_head = boundary_bounded(sig, &head_rows)?;
    // gamma over all n input wires computes x -> (h1 x, x); a symmetry then
    // reorders to (x, h1 x) so the remaining rows can be applied on top.
    let gamma = copy_decompose(&BialgAlgebra, sig, &d_last, &vec![1; n], 0, 0)?;
    let left = DecompTree::compose(gamma, 1 + n, symmetry_tree(sig, 1, n).expect("n >= 1"));
    let right = DecompTree::tensor(d_head, identity_tree(sig, 1).unwrap());
    Ok(DecompTree::compose(left, n + 1, right))
}

/// Transposes a decomposition: the matrix prop coincides with its opposite
/// under `cp <-> add`, `delete <-> zero` and reversal of composition.
pub fn dualize(sig: &WeightedSignature<NatMatrix>, tree: &DecompTree) -> Result<DecompTree> {
    Ok(match tree {
        DecompTree::Leaf(id) => {
            let dual = match sig.name(*id)? {
                "cp" => "add",
                "add" => "cp",
                "delete" => "zero",
                "zero" => "delete",
                other => other,
            };
            DecompTree::Leaf(sig.id_of(dual)?)
        }
        DecompTree::Tensor(l, r) => DecompTree::tensor(dualize(sig, l)?, dualize(sig, r)?),
        DecompTree::Compose { cut, left, right } => {
            DecompTree::compose(dualize(sig, right)?, *cut, dualize(sig, left)?)
        }
    })
}

/// A constructed decomposition together with the factorization evidence
/// behind its width claim.
#[derive(Debug, Clone)]
pub struct RankBased {
    pub tree: DecompTree,
    pub inner_dim: usize,
    pub field_rank: usize,
    /// False when the natural-number factorization could not realise the
    /// field rank (or gave up at its cap); the honest width bound is then
    /// `inner_dim + 1` rather than `field_rank + 1`.
    pub exact_over_naturals: bool,
}

/// Factor `A = C * B` through a minimal natural inner dimension and join the
/// boundary-bounded decompositions of the factors along that cut; width at
/// most `inner_dim + 1`.
pub fn rank_based(sig: &mut WeightedSignature<NatMatrix>, a: &NatMatrix) -> Result<RankBased> {
    let (m, n) = (a.rows(), a.cols());
    let bound = a.max_entry().max(BigUint::one());
    let f = nat_rank_factorize(a, &bound, m.min(n));
    if f.inner_dim == 0 {
        return Ok(RankBased {
            tree: zero_matrix_tree(sig, m, n),
            inner_dim: 0,
            field_rank: f.field_rank,
            exact_over_naturals: f.exact_over_naturals,
        });
    }
    let d_right = boundary_bounded(sig, &f.right)?;
    let d_left = boundary_bounded(sig, &f.left)?;
    Ok(RankBased {
        tree: DecompTree::compose(d_right, f.inner_dim, d_left),
        inner_dim: f.inner_dim,
        field_rank: f.field_rank,
        exact_over_naturals: f.exact_over_naturals,
    })
}

#[derive(Debug, Clone)]
pub struct MatrixUpper {
    pub tree: DecompTree,
    /// `max_i rank(A_i)` over the finest block split: a lower bound on the
    /// width of any decomposition of the matrix.
    pub lower_bound: usize,
    pub exact_over_naturals: bool,
}

/// Split into finest diagonal blocks, decompose each through its rank, and
/// fold with tensor nodes; width at most `max block inner dim + 1`.
pub fn monoidal_upper(sig: &mut WeightedSignature<NatMatrix>, a: &NatMatrix) -> Result<MatrixUpper> {
    let blocks = a.block_split();
    if blocks.is_empty() {
        return Ok(MatrixUpper {
            tree: zero_matrix_tree(sig, 0, 0),
            lower_bound: 0,
            exact_over_naturals: true,
        });
    }
    let mut trees = Vec::with_capacity(blocks.len());
    let mut lower = 0;
    let mut exact = true;
    for b in &blocks {
        let rb = rank_based(sig, b)?;
        lower = lower.max(rb.field_rank);
        exact &= rb.exact_over_naturals;
        trees.push(rb.tree);
    }
    Ok(MatrixUpper {
        tree: DecompTree::tensor_all(trees).unwrap(),
        lower_bound: lower,
        exact_over_naturals: exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Absorbs `f ; (id (x) delete_k)` (or `(id (x) zero_k) ; f` on the left)
/// into the decomposition without increasing its width.
pub fn discard_absorb(
    sig: &mut WeightedSignature<NatMatrix>,
    d: &DecompTree,
    side: Side,
    k: usize,
) -> Result<DecompTree> {
    let (n, m) = type_of(d, &BialgAlgebra, sig)?;
    let total = match side {
        Side::Right => m,
        Side::Left => n,
    };
    if k > total {
        return Err(Error::OutOfRange(format!(
            "cannot absorb {k} wires on a boundary of {total}"
        )));
    }
    let mut mask = vec![false; total];
    for slot in mask.iter_mut().rev().take(k) {
        *slot = true;
    }
    match side {
        Side::Right => absorb_delete_outputs(sig, d, &mask),
        Side::Left => absorb_zero_inputs(sig, d, &mask),
    }
}

/// Structural recursion absorbing deletions of the masked output wires.
pub fn absorb_delete_outputs(
    sig: &mut WeightedSignature<NatMatrix>,
    d: &DecompTree,
    mask: &[bool],
) -> Result<DecompTree> {
    if mask.iter().all(|&b| !b) {
        return Ok(d.clone());
    }
    match d {
        DecompTree::Leaf(id) => {
            let name = sig.name(*id)?.to_owned();
            let leaf = |sig: &mut WeightedSignature<NatMatrix>, n: &str| -> Result<DecompTree> {
                Ok(DecompTree::Leaf(sig.id_of(n)?))
            };
            match (name.as_str(), mask) {
                ("id", [true]) => leaf(sig, "delete"),
                ("cp", [true, false]) | ("cp", [false, true]) => leaf(sig, "id"),
                ("cp", [true, true]) => leaf(sig, "delete"),
                ("add", [true]) => {
                    Ok(DecompTree::tensor(leaf(sig, "delete")?, leaf(sig, "delete")?))
                }
                ("zero", [true]) => {
                    Ok(DecompTree::compose(leaf(sig, "zero")?, 1, leaf(sig, "delete")?))
                }
                ("swap", [true, false]) => {
                    Ok(DecompTree::tensor(leaf(sig, "id")?, leaf(sig, "delete")?))
                }
                ("swap", [false, true]) => {
                    Ok(DecompTree::tensor(leaf(sig, "delete")?, leaf(sig, "id")?))
                }
                ("swap", [true, true]) => {
                    Ok(DecompTree::tensor(leaf(sig, "delete")?, leaf(sig, "delete")?))
                }
                _ => Err(Error::InvalidDecomposition(format!(
                    "mask {mask:?} does not fit atom `{name}`"
                ))),
            }
        }
        DecompTree::Compose { cut, left, right } => Ok(DecompTree::compose(
            (**left).clone(),
            *cut,
            absorb_delete_outputs(sig, right, mask)?,
        )),
        DecompTree::Tensor(l, r) => {
            let (_, ml) = type_of(l, &BialgAlgebra, sig)?;
            let (lm, rm) = mask.split_at(ml);
            Ok(DecompTree::tensor(
                absorb_delete_outputs(sig, l, lm)?,
                absorb_delete_outputs(sig, r, rm)?,
            ))
        }
    }
}

/// Dual absorption: plugs created-zero wires into the masked input positions.
pub fn absorb_zero_inputs(
    sig: &mut WeightedSignature<NatMatrix>,
    d: &DecompTree,
    mask: &[bool],
) -> Result<DecompTree> {
    let dual = dualize(sig, d)?;
    let absorbed = absorb_delete_outputs(sig, &dual, mask)?;
    dualize(sig, &absorbed)
}

#[derive(Debug, Clone)]
pub struct TensorPriority {
    pub tree: DecompTree,
    /// False when the matrix has no nontrivial block split and the input
    /// decomposition is returned unchanged.
    pub rewritten: bool,
    pub exact_over_naturals: bool,
}

/// Rewrites a composition-rooted decomposition of a block-decomposable matrix
/// into a tensor-rooted one of no greater width. Blocks of positive rank are
/// rebuilt through their rank; when only one block carries rank the original
/// decomposition is kept and the other blocks are absorbed away.
pub fn tensor_priority(
    sig: &mut WeightedSignature<NatMatrix>,
    d: &DecompTree,
    a: &NatMatrix,
) -> Result<TensorPriority> {
    let is_compose_root = matches!(d, DecompTree::Compose { .. });
    let blocks = a.block_split();
    if blocks.len() <= 1 || !is_compose_root {
        return Ok(TensorPriority {
            tree: d.clone(),
            rewritten: false,
            exact_over_naturals: true,
        });
    }
    let ranks: Vec<usize> = blocks.iter().map(|b| b.rank(Field::Rationals)).collect();
    let positive = ranks.iter().filter(|&&r| r > 0).count();
    let mut exact = true;
    let mut trees = Vec::with_capacity(blocks.len());
    if positive == 1 {
        // Keep the given decomposition for the ranked block, absorbing the
        // zero blocks' wires; rebuilding it through its rank could cost more
        // than the decomposition already in hand.
        let j = ranks.iter().position(|&r| r > 0).unwrap();
        let mut row_lo = 0;
        let mut col_lo = 0;
        for b in &blocks[..j] {
            row_lo += b.rows();
            col_lo += b.cols();
        }
        let (bm, bn) = (blocks[j].rows(), blocks[j].cols());
        let out_mask: Vec<bool> = (0..a.rows())
            .map(|i| i < row_lo || i >= row_lo + bm)
            .collect();
        let in_mask: Vec<bool> = (0..a.cols())
            .map(|c| c < col_lo || c >= col_lo + bn)
            .collect();
        let kept = absorb_delete_outputs(sig, d, &out_mask)?;
        let kept = absorb_zero_inputs(sig, &kept, &in_mask)?;
        for (i, b) in blocks.iter().enumerate() {
            if i == j {
                trees.push(kept.clone());
            } else {
                trees.push(zero_matrix_tree(sig, b.rows(), b.cols()));
            }
        }
    } else {
        for b in &blocks {
            let rb = rank_based(sig, b)?;
            exact &= rb.exact_over_naturals;
            trees.push(rb.tree);
        }
    }
    Ok(TensorPriority {
        tree: DecompTree::tensor_all(trees).unwrap(),
        rewritten: true,
        exact_over_naturals: exact,
    })
}
