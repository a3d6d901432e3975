//! File formats: graph ingestion (edge lists or hypergraph JSON), matrices,
//! and the self-contained decomposition files `check` can re-verify.

use std::collections::BTreeMap;
use std::path::Path;

use monoidal_width::bialg;
use monoidal_width::boundary::{boundary_weight, GraphWithBoundaries};
use monoidal_width::cospan::{CospanHG, Hypergraph};
use monoidal_width::decomp::{tree_from_json, tree_to_json, DecompTree, WeightedSignature};
use monoidal_width::matrix::NatMatrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algebra {
    Matrix,
    Cospan,
    Boundary,
}

impl std::fmt::Display for Algebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Algebra::Matrix => "matrix",
            Algebra::Cospan => "cospan",
            Algebra::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Graphs come as JSON hypergraphs (`{"vertices": k, "edges": [[..], ..]}`)
/// or as plain text edge lists, one `u v` pair per line.
pub fn read_graph(path: &Path) -> Result<Hypergraph, CliError> {
    let text = read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("json")
        || text.trim_start().starts_with('{')
    {
        return serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())));
    }
    let mut edges = Vec::new();
    let mut max_vertex = None::<usize>;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize, CliError> {
            tok.ok_or_else(|| {
                CliError::Parse(format!("{}:{}: expected `u v`", path.display(), lineno + 1))
            })?
            .parse()
            .map_err(|e| CliError::Parse(format!("{}:{}: {e}", path.display(), lineno + 1)))
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(CliError::Parse(format!(
                "{}:{}: trailing tokens after `u v`",
                path.display(),
                lineno + 1
            )));
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push(vec![u, v]);
    }
    let vertices = max_vertex.map_or(0, |m| m + 1);
    Hypergraph::new(vertices, edges).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<NatMatrix, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Parse(format!("serialisation: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}

/// Self-contained decomposition file: the algebra, the atom table, and the
/// tree over it.
#[derive(Serialize, Deserialize)]
pub struct DecompositionFile {
    pub algebra: String,
    pub atoms: BTreeMap<String, AtomEntry>,
    pub tree: Value,
}

#[derive(Serialize, Deserialize)]
pub struct AtomEntry {
    pub weight: usize,
    pub morphism: Value,
}

pub fn decomposition_file<M: Serialize>(
    algebra: Algebra,
    tree: &DecompTree,
    sig: &WeightedSignature<M>,
) -> Result<DecompositionFile, CliError> {
    let mut atoms = BTreeMap::new();
    for i in 0..sig.len() {
        let id = monoidal_width::decomp::AtomId(i);
        let name = sig.name(id).map_err(core_err)?.to_owned();
        let morphism = serde_json::to_value(sig.morphism(id).map_err(core_err)?)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        atoms.insert(
            name,
            AtomEntry {
                weight: sig.weight(id).map_err(core_err)?,
                morphism,
            },
        );
    }
    Ok(DecompositionFile {
        algebra: algebra.to_string(),
        atoms,
        tree: tree_to_json(tree, sig).map_err(core_err)?,
    })
}

pub fn core_err(e: monoidal_width::Error) -> CliError {
    CliError::from(e)
}

/// Rebuilds a signature from a decomposition file, checking each stored
/// weight against the algebra's weight function.
pub enum LoadedDecomposition {
    Matrix(WeightedSignature<NatMatrix>, DecompTree),
    Cospan(WeightedSignature<CospanHG>, DecompTree),
    Boundary(WeightedSignature<GraphWithBoundaries>, DecompTree),
}

pub fn load_decomposition(file: &DecompositionFile) -> Result<LoadedDecomposition, CliError> {
    match file.algebra.as_str() {
        "matrix" => {
            let mut sig = WeightedSignature::new();
            for (name, entry) in &file.atoms {
                let m: NatMatrix = serde_json::from_value(entry.morphism.clone())
                    .map_err(|e| CliError::Parse(format!("atom `{name}`: {e}")))?;
                let expected = bialg::generator_matrix(name).map_err(|_| {
                    CliError::Validation(format!("unknown atom `{name}` for the matrix algebra"))
                })?;
                if m != expected {
                    return Err(CliError::Validation(format!(
                        "atom `{name}` does not match its generator"
                    )));
                }
                sig.intern(name.clone(), m, entry.weight);
            }
            let reference = bialg::signature();
            for (name, entry) in &file.atoms {
                let id = reference.id_of(name).map_err(core_err)?;
                if reference.weight(id).map_err(core_err)? != entry.weight {
                    return Err(CliError::Validation(format!(
                        "atom `{name}` carries the wrong weight"
                    )));
                }
            }
            let tree = tree_from_json(&file.tree, &sig).map_err(core_err)?;
            Ok(LoadedDecomposition::Matrix(sig, tree))
        }
        "cospan" => {
            let mut sig = WeightedSignature::new();
            for (name, entry) in &file.atoms {
                let c: CospanHG = serde_json::from_value(entry.morphism.clone())
                    .map_err(|e| CliError::Parse(format!("atom `{name}`: {e}")))?;
                if c.weight() != entry.weight {
                    return Err(CliError::Validation(format!(
                        "atom `{name}`: weight {} but the apex has {} vertices",
                        entry.weight,
                        c.weight()
                    )));
                }
                sig.intern(name.clone(), c, entry.weight);
            }
            let tree = tree_from_json(&file.tree, &sig).map_err(core_err)?;
            Ok(LoadedDecomposition::Cospan(sig, tree))
        }
        "boundary" => {
            let mut sig = WeightedSignature::new();
            for (name, entry) in &file.atoms {
                let g: GraphWithBoundaries = serde_json::from_value(entry.morphism.clone())
                    .map_err(|e| CliError::Parse(format!("atom `{name}`: {e}")))?;
                if boundary_weight(&g) != entry.weight {
                    return Err(CliError::Validation(format!(
                        "atom `{name}`: weight {} but the graph has {} vertices",
                        entry.weight,
                        boundary_weight(&g)
                    )));
                }
                sig.intern(name.clone(), g, entry.weight);
            }
            let tree = tree_from_json(&file.tree, &sig).map_err(core_err)?;
            Ok(LoadedDecomposition::Boundary(sig, tree))
        }
        other => Err(CliError::Parse(format!("unknown algebra `{other}`"))),
    }
}

/// FNV-1a digest of the input bytes, for report provenance.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}
