//! Decomposition trees, weight functions and width.
//!
//! A decomposition is a binary syntax tree: leaves name atoms from a weighted
//! signature, internal nodes are monoidal products or compositions, and each
//! composition node carries the object it cuts along. Width never needs to
//! evaluate the tree — cut objects are stored on the nodes — while evaluation
//! folds an algebra's compose/tensor over the tree and validates every stored
//! cut against the actual boundaries.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Object of the ambient monoidal category, encoded as a natural number: the
/// wire count in a prop, the boundary-set size in the cospan category. Weights
/// of objects are additive under the monoidal product with `w(0) = 0`.
pub type ObjectLabel = usize;

/// Identifier of an atom within a [`WeightedSignature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompTree {
    Leaf(AtomId),
    Tensor(Box<DecompTree>, Box<DecompTree>),
    Compose {
        cut: ObjectLabel,
        left: Box<DecompTree>,
        right: Box<DecompTree>,
    },
}

impl DecompTree {
    pub fn tensor(left: DecompTree, right: DecompTree) -> DecompTree {
        DecompTree::Tensor(Box::new(left), Box::new(right))
    }

    pub fn compose(left: DecompTree, cut: ObjectLabel, right: DecompTree) -> DecompTree {
        DecompTree::Compose {
            cut,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Right fold of a nonempty list of trees under tensor.
    pub fn tensor_all(mut trees: Vec<DecompTree>) -> Option<DecompTree> {
        let mut acc = trees.pop()?;
        while let Some(t) = trees.pop() {
            acc = DecompTree::tensor(t, acc);
        }
        Some(acc)
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            DecompTree::Leaf(_) => 1,
            DecompTree::Tensor(l, r) | DecompTree::Compose { left: l, right: r, .. } => {
                l.leaf_count() + r.leaf_count()
            }
        }
    }
}

struct AtomEntry<M> {
    name: String,
    morphism: M,
    weight: usize,
}

/// Atom table plus object-weight function. Atoms are identified by id, not by
/// structural equality of their morphisms: different algebras choose
/// different atom sets for the same underlying category.
pub struct WeightedSignature<M> {
    atoms: Vec<AtomEntry<M>>,
    index: HashMap<String, AtomId>,
    object_weight: fn(ObjectLabel) -> usize,
}

impl<M> Default for WeightedSignature<M> {
    fn default() -> Self {
        Self::new()
    }
}

impl<M> WeightedSignature<M> {
    pub fn new() -> Self {
        WeightedSignature {
            atoms: Vec::new(),
            index: HashMap::new(),
            object_weight: |n| n,
        }
    }

    pub fn with_object_weight(object_weight: fn(ObjectLabel) -> usize) -> Self {
        WeightedSignature {
            atoms: Vec::new(),
            index: HashMap::new(),
            object_weight,
        }
    }

    /// Registers an atom under a stable name, returning the existing id if the
    /// name is already taken.
    pub fn intern(&mut self, name: impl Into<String>, morphism: M, weight: usize) -> AtomId {
        let name = name.into();
        if let Some(&id) = self.index.get(&name) {
            return id;
        }
        let id = AtomId(self.atoms.len());
        self.index.insert(name.clone(), id);
        self.atoms.push(AtomEntry { name, morphism, weight });
        id
    }

    pub fn id_of(&self, name: &str) -> Result<AtomId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownAtom(name.to_owned()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, id: AtomId) -> Result<&str> {
        self.atoms
            .get(id.0)
            .map(|a| a.name.as_str())
            .ok_or_else(|| Error::UnknownAtom(format!("#{}", id.0)))
    }

    pub fn morphism(&self, id: AtomId) -> Result<&M> {
        self.atoms
            .get(id.0)
            .map(|a| &a.morphism)
            .ok_or_else(|| Error::UnknownAtom(format!("#{}", id.0)))
    }

    pub fn weight(&self, id: AtomId) -> Result<usize> {
        self.atoms
            .get(id.0)
            .map(|a| a.weight)
            .ok_or_else(|| Error::UnknownAtom(format!("#{}", id.0)))
    }

    pub fn object_weight(&self, x: ObjectLabel) -> usize {
        (self.object_weight)(x)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Operations a concrete categorical algebra exposes to the generic layer.
/// `compose` is diagrammatic: `compose(f, g)` is defined exactly when
/// `codomain(f) = domain(g)`. Equality is the category's semantic one,
/// possibly up to isomorphism.
pub trait MonoidalAlgebra {
    type Morphism: Clone;

    fn domain(&self, m: &Self::Morphism) -> ObjectLabel;
    fn codomain(&self, m: &Self::Morphism) -> ObjectLabel;
    fn compose(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<Self::Morphism>;
    fn tensor(&self, f: &Self::Morphism, g: &Self::Morphism) -> Self::Morphism;
    fn equal(&self, f: &Self::Morphism, g: &Self::Morphism) -> Result<bool>;
}

/// Structural material for the copy construction: identities, single-object
/// copies and symmetries, both as decomposition trees over the signature and
/// as semantic morphisms. Tree hooks must respect the weight discipline
/// `width(id_X) <= w(X)`, `width(cp_X) <= 2 w(X)`, `width(sym_{X,Y}) <= w(X) + w(Y)`;
/// a `None` tree stands for the empty object.
pub trait CopyableAlgebra: MonoidalAlgebra {
    fn copiable(&self, x: ObjectLabel) -> bool;

    fn identity_tree(
        &self,
        sig: &mut WeightedSignature<Self::Morphism>,
        x: ObjectLabel,
    ) -> Option<DecompTree>;
    fn copy_tree(
        &self,
        sig: &mut WeightedSignature<Self::Morphism>,
        x: ObjectLabel,
    ) -> Result<DecompTree>;
    fn symmetry_tree(
        &self,
        sig: &mut WeightedSignature<Self::Morphism>,
        x: ObjectLabel,
        y: ObjectLabel,
    ) -> Option<DecompTree>;

    fn identity_morphism(&self, x: ObjectLabel) -> Self::Morphism;
    fn copy_morphism(&self, x: ObjectLabel) -> Self::Morphism;
    fn symmetry_morphism(&self, x: ObjectLabel, y: ObjectLabel) -> Self::Morphism;
}

/// Width of a decomposition: the maximum over leaf weights and cut-object
/// weights. Tensor nodes are free.
pub fn width<M>(tree: &DecompTree, sig: &WeightedSignature<M>) -> Result<usize> {
    match tree {
        DecompTree::Leaf(id) => sig.weight(*id),
        DecompTree::Tensor(l, r) => Ok(width(l, sig)?.max(width(r, sig)?)),
        DecompTree::Compose { cut, left, right } => Ok(width(left, sig)?
            .max(sig.object_weight(*cut))
            .max(width(right, sig)?)),
    }
}

/// Domain and codomain of the tree's evaluation, computed from leaf types
/// alone (no boundary validation).
pub fn type_of<A: MonoidalAlgebra>(
    tree: &DecompTree,
    alg: &A,
    sig: &WeightedSignature<A::Morphism>,
) -> Result<(ObjectLabel, ObjectLabel)> {
    match tree {
        DecompTree::Leaf(id) => {
            let m = sig.morphism(*id)?;
            Ok((alg.domain(m), alg.codomain(m)))
        }
        DecompTree::Tensor(l, r) => {
            let (ld, lc) = type_of(l, alg, sig)?;
            let (rd, rc) = type_of(r, alg, sig)?;
            Ok((ld + rd, lc + rc))
        }
        DecompTree::Compose { left, right, .. } => {
            let (ld, _) = type_of(left, alg, sig)?;
            let (_, rc) = type_of(right, alg, sig)?;
            Ok((ld, rc))
        }
    }
}

/// Folds the algebra over the tree. Every stored cut is validated against the
/// actual boundaries; a mismatch reports the node path (`root`, `root.left`,
/// ...).
pub fn evaluate<A: MonoidalAlgebra>(
    tree: &DecompTree,
    alg: &A,
    sig: &WeightedSignature<A::Morphism>,
) -> Result<A::Morphism> {
    fn go<A: MonoidalAlgebra>(
        tree: &DecompTree,
        alg: &A,
        sig: &WeightedSignature<A::Morphism>,
        path: &mut String,
    ) -> Result<A::Morphism> {
        match tree {
            DecompTree::Leaf(id) => Ok(sig.morphism(*id)?.clone()),
            DecompTree::Tensor(l, r) => {
                let len = path.len();
                path.push_str(".left");
                let lm = go(l, alg, sig, path)?;
                path.truncate(len);
                path.push_str(".right");
                let rm = go(r, alg, sig, path)?;
                path.truncate(len);
                Ok(alg.tensor(&lm, &rm))
            }
            DecompTree::Compose { cut, left, right } => {
                let len = path.len();
                path.push_str(".left");
                let lm = go(left, alg, sig, path)?;
                path.truncate(len);
                path.push_str(".right");
                let rm = go(right, alg, sig, path)?;
                path.truncate(len);
                let (lc, rd) = (alg.codomain(&lm), alg.domain(&rm));
                if lc != *cut || rd != *cut {
                    return Err(Error::BoundaryMismatch {
                        path: path.clone(),
                        left_codomain: lc,
                        cut: *cut,
                        right_domain: rd,
                    });
                }
                alg.compose(&lm, &rm)
            }
        }
    }
    let mut path = String::from("root");
    go(tree, alg, sig, &mut path)
}

/// The morphism `gamma_X(f) = (id_Y (x) cp_X (x) id_Z) ; (id (x) sym) ; (f (x) id_X)`
/// built directly from the algebra's operations; the reference point for
/// [`copy_decompose`].
pub fn copy_direct<A: CopyableAlgebra>(
    alg: &A,
    f: &A::Morphism,
    copy_objects: &[ObjectLabel],
    y: ObjectLabel,
    z: ObjectLabel,
) -> Result<A::Morphism> {
    let xbar: ObjectLabel = copy_objects.iter().sum();
    let mut cp = alg.identity_morphism(0);
    for &x in copy_objects {
        // Coherence: cp_{A (x) B} = (cp_A (x) cp_B) ; (id (x) sym_{A,B} (x) id).
        let prev: ObjectLabel = alg.domain(&cp);
        let both = alg.tensor(&cp, &alg.copy_morphism(x));
        let fix = alg.tensor(
            &alg.identity_morphism(prev),
            &alg.tensor(
                &alg.symmetry_morphism(prev, x),
                &alg.identity_morphism(x),
            ),
        );
        cp = alg.compose(&both, &fix)?;
    }
    let first = alg.tensor(
        &alg.identity_morphism(y),
        &alg.tensor(&cp, &alg.identity_morphism(z)),
    );
    let second = alg.tensor(
        &alg.identity_morphism(y + xbar),
        &alg.symmetry_morphism(xbar, z),
    );
    let third = alg.tensor(f, &alg.identity_morphism(xbar));
    alg.compose(&alg.compose(&first, &second)?, &third)
}

/// Given a decomposition `d` of `f : Y (x) X1 (x) ... (x) Xn (x) Z -> W`,
/// builds a decomposition of `gamma_X(f)` (copy the `Xi`, swap the copies past
/// `Z`, then run `f`) of width at most
/// `max(width(d), w(Y) + w(Z) + (n + 1) * max_i w(Xi))`, copying one object at
/// a time from the innermost.
pub fn copy_decompose<A: CopyableAlgebra>(
    alg: &A,
    sig: &mut WeightedSignature<A::Morphism>,
    d: &DecompTree,
    copy_objects: &[ObjectLabel],
    y: ObjectLabel,
    z: ObjectLabel,
) -> Result<DecompTree> {
    for &x in copy_objects {
        if !alg.copiable(x) {
            return Err(Error::NotCopiable(x));
        }
    }
    let Some((&x, rest)) = copy_objects.split_last() else {
        return Ok(d.clone());
    };
    let inner = copy_decompose(alg, sig, d, rest, y, x + z)?;
    let xbar_rest: ObjectLabel = rest.iter().sum();

    // Left factor: id_{Y (x) Xbar'} (x) ((cp_x (x) id_Z) ; (id_x (x) sym_{x,Z})).
    let mid = if z == 0 {
        alg.copy_tree(sig, x)?
    } else {
        let top = match alg.identity_tree(sig, z) {
            Some(idz) => DecompTree::tensor(alg.copy_tree(sig, x)?, idz),
            None => alg.copy_tree(sig, x)?,
        };
        let swap = alg
            .symmetry_tree(sig, x, z)
            .expect("x + z > 0 so the symmetry is nonempty");
        let bottom = match alg.identity_tree(sig, x) {
            Some(idx) => DecompTree::tensor(idx, swap),
            None => swap,
        };
        DecompTree::compose(top, 2 * x + z, bottom)
    };
    let left = match alg.identity_tree(sig, y + xbar_rest) {
        Some(id) => DecompTree::tensor(id, mid),
        None => mid,
    };

    let right = match alg.identity_tree(sig, x) {
        Some(idx) => DecompTree::tensor(inner, idx),
        None => inner,
    };
    Ok(DecompTree::compose(left, y + xbar_rest + x + z + x, right))
}

// --- serialization ----------------------------------------------------------

/// JSON form of a tree over a signature:
/// `{"leaf": name} | {"tensor": [t1, t2]} | {"compose": {"cut": n, "left": t1, "right": t2}}`.
pub fn tree_to_json<M>(tree: &DecompTree, sig: &WeightedSignature<M>) -> Result<Value> {
    Ok(match tree {
        DecompTree::Leaf(id) => json!({ "leaf": sig.name(*id)? }),
        DecompTree::Tensor(l, r) => {
            json!({ "tensor": [tree_to_json(l, sig)?, tree_to_json(r, sig)?] })
        }
        DecompTree::Compose { cut, left, right } => json!({
            "compose": { "cut": cut, "left": tree_to_json(left, sig)?, "right": tree_to_json(right, sig)? }
        }),
    })
}

pub fn tree_from_json<M>(value: &Value, sig: &WeightedSignature<M>) -> Result<DecompTree> {
    let bad = || Error::InvalidDecomposition(format!("unrecognised tree node: {value}"));
    let obj = value.as_object().ok_or_else(bad)?;
    if let Some(leaf) = obj.get("leaf") {
        let name = leaf.as_str().ok_or_else(bad)?;
        return Ok(DecompTree::Leaf(sig.id_of(name)?));
    }
    if let Some(t) = obj.get("tensor") {
        let arr = t.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        return Ok(DecompTree::tensor(
            tree_from_json(&arr[0], sig)?,
            tree_from_json(&arr[1], sig)?,
        ));
    }
    if let Some(c) = obj.get("compose") {
        let cut = c.get("cut").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let left = c.get("left").ok_or_else(bad)?;
        let right = c.get("right").ok_or_else(bad)?;
        return Ok(DecompTree::compose(
            tree_from_json(left, sig)?,
            cut,
            tree_from_json(right, sig)?,
        ));
    }
    Err(bad())
}

/// DOT rendering of the annotated tree; compose nodes show their cut object
/// with a thick border.
pub fn tree_to_dot<M>(tree: &DecompTree, sig: &WeightedSignature<M>) -> Result<String> {
    fn go<M>(
        tree: &DecompTree,
        sig: &WeightedSignature<M>,
        out: &mut String,
        next: &mut usize,
    ) -> Result<usize> {
        let id = *next;
        *next += 1;
        match tree {
            DecompTree::Leaf(a) => {
                writeln!(
                    out,
                    "  n{id} [shape=box, label=\"{} (w={})\"];",
                    sig.name(*a)?,
                    sig.weight(*a)?
                )
                .unwrap();
            }
            DecompTree::Tensor(l, r) => {
                writeln!(out, "  n{id} [label=\"(x)\"];").unwrap();
                let lid = go(l, sig, out, next)?;
                let rid = go(r, sig, out, next)?;
                writeln!(out, "  n{id} -> n{lid};\n  n{id} -> n{rid};").unwrap();
            }
            DecompTree::Compose { cut, left, right } => {
                writeln!(
                    out,
                    "  n{id} [label=\"; cut={cut}\", style=bold, penwidth=2];"
                )
                .unwrap();
                let lid = go(left, sig, out, next)?;
                let rid = go(right, sig, out, next)?;
                writeln!(out, "  n{id} -> n{lid};\n  n{id} -> n{rid};").unwrap();
            }
        }
        Ok(id)
    }
    let mut out = String::from("digraph decomposition {\n");
    let mut next = 0;
    go(tree, sig, &mut out, &mut next)?;
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    // A stub algebra whose morphisms are just (domain, codomain) pairs.
    struct Shapes;
    impl MonoidalAlgebra for Shapes {
        type Morphism = (usize, usize);
        fn domain(&self, m: &(usize, usize)) -> usize {
            m.0
        }
        fn codomain(&self, m: &(usize, usize)) -> usize {
            m.1
        }
        fn compose(&self, f: &(usize, usize), g: &(usize, usize)) -> Result<(usize, usize)> {
            if f.1 != g.0 {
                return Err(Error::DimensionMismatch {
                    context: "shape composition",
                    expected: f.1.to_string(),
                    found: g.0.to_string(),
                });
            }
            Ok((f.0, g.1))
        }
        fn tensor(&self, f: &(usize, usize), g: &(usize, usize)) -> (usize, usize) {
            (f.0 + g.0, f.1 + g.1)
        }
        fn equal(&self, f: &(usize, usize), g: &(usize, usize)) -> Result<bool> {
            Ok(f == g)
        }
    }

    fn example_signature() -> WeightedSignature<(usize, usize)> {
        let mut sig = WeightedSignature::new();
        sig.intern("f", (1, 2), 2);
        sig.intern("g", (2, 1), 2);
        sig
    }

    /// The two-layer decomposition f ; ((f;g) (x) (f;g)) ; g with all cuts
    /// along 2.
    fn example_tree(sig: &WeightedSignature<(usize, usize)>) -> DecompTree {
        let f = DecompTree::Leaf(sig.id_of("f").unwrap());
        let g = DecompTree::Leaf(sig.id_of("g").unwrap());
        let fg = DecompTree::compose(f.clone(), 2, g.clone());
        let middle = DecompTree::tensor(fg.clone(), fg);
        DecompTree::compose(f, 2, DecompTree::compose(middle, 2, g))
    }

    #[test]
    fn width_of_worked_example_is_two() {
        let sig = example_signature();
        let tree = example_tree(&sig);
        assert_eq!(width(&tree, &sig).unwrap(), 2);
    }

    #[test]
    fn width_of_single_leaf_is_its_weight() {
        let mut sig = WeightedSignature::new();
        sig.intern("f", (1usize, 1usize), 5);
        let tree = DecompTree::Leaf(sig.id_of("f").unwrap());
        assert_eq!(width(&tree, &sig).unwrap(), 5);
    }

    #[test]
    fn nested_composition_keeps_width_two() {
        // h0 = f;g, h_{n+1} = f ; (h_n (x) h_n) ; g: width stays 2 at any depth.
        let sig = example_signature();
        let f = DecompTree::Leaf(sig.id_of("f").unwrap());
        let g = DecompTree::Leaf(sig.id_of("g").unwrap());
        let mut h = DecompTree::compose(f.clone(), 2, g.clone());
        for _ in 0..4 {
            let pair = DecompTree::tensor(h.clone(), h);
            h = DecompTree::compose(f.clone(), 2, DecompTree::compose(pair, 2, g.clone()));
        }
        assert_eq!(width(&h, &sig).unwrap(), 2);
        assert_eq!(evaluate(&h, &Shapes, &sig).unwrap(), (1, 1));
    }

    #[test]
    fn evaluate_folds_the_algebra() {
        let sig = example_signature();
        let tree = example_tree(&sig);
        assert_eq!(evaluate(&tree, &Shapes, &sig).unwrap(), (1, 1));
    }

    #[test]
    fn evaluate_reports_bad_cut_with_path() {
        let sig = example_signature();
        let f = DecompTree::Leaf(sig.id_of("f").unwrap());
        let g = DecompTree::Leaf(sig.id_of("g").unwrap());
        let bad = DecompTree::tensor(f.clone(), DecompTree::compose(f, 3, g));
        match evaluate(&bad, &Shapes, &sig) {
            Err(Error::BoundaryMismatch { path, .. }) => assert_eq!(path, "root.right"),
            other => panic!("expected boundary mismatch, got {other:?}"),
        }
    }

    #[test]
    fn unknown_atom_is_reported() {
        let sig = example_signature();
        let tree = DecompTree::Leaf(AtomId(99));
        assert!(matches!(width(&tree, &sig), Err(Error::UnknownAtom(_))));
    }

    #[test]
    fn width_matches_its_closed_form() {
        // Independent oracle: collect every leaf weight and cut weight in
        // the tree and take the maximum.
        fn closed_form(
            tree: &DecompTree,
            sig: &WeightedSignature<(usize, usize)>,
            acc: &mut Vec<usize>,
        ) {
            match tree {
                DecompTree::Leaf(id) => acc.push(sig.weight(*id).unwrap()),
                DecompTree::Tensor(l, r) => {
                    closed_form(l, sig, acc);
                    closed_form(r, sig, acc);
                }
                DecompTree::Compose { cut, left, right } => {
                    acc.push(sig.object_weight(*cut));
                    closed_form(left, sig, acc);
                    closed_form(right, sig, acc);
                }
            }
        }
        let sig = example_signature();
        let tree = example_tree(&sig);
        let mut weights = Vec::new();
        closed_form(&tree, &sig, &mut weights);
        assert_eq!(
            width(&tree, &sig).unwrap(),
            weights.into_iter().max().unwrap()
        );
    }

    #[test]
    fn json_round_trip() {
        let sig = example_signature();
        let tree = example_tree(&sig);
        let value = tree_to_json(&tree, &sig).unwrap();
        let back = tree_from_json(&value, &sig).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn dot_mentions_cut_labels() {
        let sig = example_signature();
        let tree = example_tree(&sig);
        let dot = tree_to_dot(&tree, &sig).unwrap();
        assert!(dot.contains("cut=2"));
        assert!(dot.contains("f (w=2)"));
    }
}
