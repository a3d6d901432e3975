//! Command-line front door: width oracles, decomposition pipelines,
//! decomposition-file checking and format conversion.
//!
//! Exit codes: 0 success, 2 validation failure, 3 budget refusal, 4 parse
//! error.

mod formats;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use formats::{Algebra, LoadedDecomposition};
use monoidal_width::bialg::{self, BialgAlgebra};
use monoidal_width::boundary::{
    adjacency_from_edges, equal_up_to_permutation, from_inductive_rank, inductive_rank_width,
    rank_to_monoidal, rank_width_of, to_inductive_rank, validate_inductive_rank, BoundaryAlgebra,
    DanglingGraph, GraphWithBoundaries, InductiveRankDec, RankDec,
};
use monoidal_width::branch::{
    branch_to_monoidal, branch_width_of, from_inductive_branch, to_inductive_branch,
    validate_inductive_branch, BranchDec, InductiveBranchDec,
};
use monoidal_width::cospan::{cospan_iso, CospanAlgebra, CospanHG, Hypergraph, HypergraphWithSources};
use monoidal_width::decomp::{evaluate, tree_to_dot, width};
use monoidal_width::matrix::Field;
use monoidal_width::oracle::{
    exact_branch_width, exact_matrix_mwd, exact_rank_width, exact_tree_width, OracleBudget,
};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Budget(String),
}

impl From<monoidal_width::Error> for CliError {
    fn from(e: monoidal_width::Error) -> Self {
        use monoidal_width::Error::*;
        match e {
            BudgetExceeded(m) | UndecidedAtCap(m) => CliError::Budget(m),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Parse(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Budget(_) => "budget",
            CliError::Parse(_) => "parse",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Validation(m) | CliError::Budget(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Q,
    Gf2,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Q => Field::Rationals,
            FieldArg::Gf2 => Field::Gf2,
        }
    }
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Edge cap for the exact branch-width oracle.
    #[arg(long, default_value_t = 10)]
    budget_edges: usize,
    /// Vertex cap for the exact rank/tree-width oracles.
    #[arg(long, default_value_t = 8)]
    budget_vertices: usize,
    /// Entry cap for the exact matrix-width oracle.
    #[arg(long, default_value_t = 2)]
    budget_entry: u64,
    /// Dimension cap for the exact matrix-width oracle.
    #[arg(long, default_value_t = 4)]
    budget_matrix_dim: usize,
    /// Inner-dimension cap for factorization searches.
    #[arg(long, default_value_t = 5)]
    budget_inner_dim: usize,
    /// Time cap in milliseconds for oracle searches.
    #[arg(long, default_value_t = 60_000)]
    budget_time_ms: u64,
}

impl BudgetArgs {
    fn budget(&self) -> OracleBudget {
        OracleBudget {
            max_edges: self.budget_edges,
            max_vertices: self.budget_vertices,
            max_entry: self.budget_entry,
            max_matrix_dim: self.budget_matrix_dim,
            max_inner_dim: self.budget_inner_dim,
            time_limit_ms: self.budget_time_ms,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mwd", about = "Decomposition widths for matrices, hypergraphs and graphs")]
struct Cli {
    /// Seed recorded in reports; all built-in pipelines are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit the report as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact branch width of a hypergraph (edge list or JSON).
    BranchWidth {
        input: PathBuf,
        /// Where to write the witness decomposition.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exact rank width of a simple graph.
    RankWidth {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FieldArg::Q)]
        field: FieldArg,
        /// Where to write the witness decomposition.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Exact tree width (maximum bag size convention).
    TreeWidth {
        input: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Construct a decomposition witnessing an upper width bound and write
    /// it as a self-contained file.
    MwdUpper {
        input: PathBuf,
        #[arg(long, value_enum)]
        algebra: Algebra,
        /// Where to write the decomposition file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Where to write a DOT rendering of the tree.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Re-validate a decomposition file against the original morphism.
    Check {
        /// Decomposition file produced by mwd-upper.
        decomposition: PathBuf,
        /// The original morphism: a matrix (matrix algebra) or a graph.
        morphism: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Convert between classical and inductive decompositions.
    Convert {
        #[arg(long, value_enum)]
        kind: ConvertKind,
        /// The decomposition to convert.
        input: PathBuf,
        /// Graph the decomposition belongs to (required towards inductive).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Comma-separated source vertices (branch side).
        #[arg(long)]
        sources: Option<String>,
        /// Boundary matrix file (rank side).
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConvertKind {
    BranchToInductive,
    InductiveToBranch,
    RankToInductive,
    InductiveToRank,
}

#[derive(Serialize)]
struct RunReport {
    operation: String,
    input_digest: String,
    seed: u64,
    widths: Value,
    bounds: Vec<BoundLine>,
    certificates: Value,
    timing_ms: u128,
}

#[derive(Serialize)]
struct BoundLine {
    claim: String,
    holds: bool,
}

impl RunReport {
    fn print(&self, as_json: bool) -> Result<(), CliError> {
        if as_json {
            println!(
                "{}",
                serde_json::to_string_pretty(self).map_err(|e| CliError::Parse(e.to_string()))?
            );
        } else {
            println!("operation: {}", self.operation);
            println!("input digest: {}", self.input_digest);
            println!("widths: {}", self.widths);
            for b in &self.bounds {
                println!(
                    "bound: {} -> {}",
                    b.claim,
                    if b.holds { "holds" } else { "VIOLATED" }
                );
            }
            if !self.certificates.is_null() {
                println!("certificates: {}", self.certificates);
            }
            println!("timing: {} ms", self.timing_ms);
        }
        if self.bounds.iter().any(|b| !b.holds) {
            return Err(CliError::Validation("a reported bound is violated".into()));
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwd: {} error: {}", e.kind(), e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::BranchWidth { input, output, budget } => {
            let start = Instant::now();
            let g = formats::read_graph(input)?;
            let digest = formats::digest(formats::read_to_string(input)?.as_bytes());
            let (w, dec) = exact_branch_width(&g, &budget.budget())?;
            let achieved = branch_width_of(&dec, &g).map_err(formats::core_err)?;
            if let Some(path) = output {
                formats::write_json(path, &dec)?;
            }
            RunReport {
                operation: "branch-width".into(),
                input_digest: digest,
                seed: cli.seed,
                widths: json!({ "oracle": w, "witness": achieved }),
                bounds: vec![BoundLine {
                    claim: "witness decomposition attains the oracle width".into(),
                    holds: achieved == w,
                }],
                certificates: Value::Null,
                timing_ms: start.elapsed().as_millis(),
            }
            .print(cli.json)
        }
        Command::RankWidth {
            input,
            field,
            output,
            budget,
        } => {
            let start = Instant::now();
            let g = formats::read_graph(input)?;
            let digest = formats::digest(formats::read_to_string(input)?.as_bytes());
            let adj = adjacency_of(&g)?;
            let (w, dec) = exact_rank_width(&adj, (*field).into(), &budget.budget())?;
            let achieved =
                rank_width_of(&dec, &adj, (*field).into()).map_err(formats::core_err)?;
            if let Some(path) = output {
                formats::write_json(path, &dec)?;
            }
            RunReport {
                operation: "rank-width".into(),
                input_digest: digest,
                seed: cli.seed,
                widths: json!({ "oracle": w, "witness": achieved, "field": format!("{field:?}") }),
                bounds: vec![BoundLine {
                    claim: "witness decomposition attains the oracle width".into(),
                    holds: achieved == w,
                }],
                certificates: Value::Null,
                timing_ms: start.elapsed().as_millis(),
            }
            .print(cli.json)
        }
        Command::TreeWidth { input, budget } => {
            let start = Instant::now();
            let g = formats::read_graph(input)?;
            let digest = formats::digest(formats::read_to_string(input)?.as_bytes());
            let w = exact_tree_width(&g, &budget.budget())?;
            RunReport {
                operation: "tree-width".into(),
                input_digest: digest,
                seed: cli.seed,
                widths: json!({ "oracle": w, "convention": "maximum bag size" }),
                bounds: vec![],
                certificates: Value::Null,
                timing_ms: start.elapsed().as_millis(),
            }
            .print(cli.json)
        }
        Command::MwdUpper {
            input,
            algebra,
            output,
            dot,
            budget,
        } => mwd_upper(cli, input, *algebra, output.as_deref(), dot.as_deref(), budget),
        Command::Check {
            decomposition,
            morphism,
            budget,
        } => check(cli, decomposition, morphism, budget),
        Command::Convert {
            kind,
            input,
            graph,
            sources,
            boundary,
            output,
        } => convert(
            cli,
            *kind,
            input,
            graph.as_deref(),
            sources.as_deref(),
            boundary.as_deref(),
            output.as_deref(),
        ),
    }
}

fn adjacency_of(g: &Hypergraph) -> Result<monoidal_width::matrix::NatMatrix, CliError> {
    let mut edges = Vec::new();
    for e in &g.edges {
        match e.as_slice() {
            [u, v] => edges.push((*u, *v)),
            [u] => edges.push((*u, *u)),
            _ => {
                return Err(CliError::Parse(
                    "rank and tree pipelines need edges of size at most 2".into(),
                ))
            }
        }
    }
    adjacency_from_edges(g.vertices, &edges).map_err(formats::core_err)
}

/// Deterministic fallback decomposition shape when the instance is beyond
/// the exact oracle's budget: a caterpillar over the leaf set. Returns
/// (node count, tree edges, leaf assignments).
fn caterpillar(leaves: usize) -> (usize, Vec<(usize, usize)>, Vec<(usize, usize)>) {
    if leaves == 1 {
        return (1, vec![], vec![(0, 0)]);
    }
    let spine = leaves - 1;
    let mut tree_edges = Vec::new();
    let mut assignment = Vec::new();
    for s in 0..spine - 1 {
        tree_edges.push((s, s + 1));
    }
    for v in 0..leaves {
        let leaf = spine + v;
        let attach = if v < spine { v } else { spine - 1 };
        tree_edges.push((attach, leaf));
        assignment.push((leaf, v));
    }
    (spine + leaves, tree_edges, assignment)
}

fn caterpillar_branch_dec(edge_count: usize) -> BranchDec {
    let (node_count, tree_edges, assignment) = caterpillar(edge_count);
    BranchDec {
        node_count,
        tree_edges,
        leaf_to_edge: assignment.into_iter().collect(),
    }
}

fn caterpillar_rank_dec(vertex_count: usize) -> RankDec {
    let (node_count, tree_edges, assignment) = caterpillar(vertex_count);
    RankDec {
        node_count,
        tree_edges,
        leaf_to_vertex: assignment.into_iter().collect(),
    }
}

fn mwd_upper(
    cli: &Cli,
    input: &std::path::Path,
    algebra: Algebra,
    output: Option<&std::path::Path>,
    dot: Option<&std::path::Path>,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    let start = Instant::now();
    let digest = formats::digest(formats::read_to_string(input)?.as_bytes());
    let oracle_budget = budget.budget();
    let (report, file, dot_text) = match algebra {
        Algebra::Matrix => {
            let a = formats::read_matrix(input)?;
            let mut sig = bialg::signature();
            let up = bialg::monoidal_upper(&mut sig, &a).map_err(formats::core_err)?;
            let w = width(&up.tree, &sig).map_err(formats::core_err)?;
            let value = evaluate(&up.tree, &BialgAlgebra, &sig).map_err(formats::core_err)?;
            let evaluates = value == a;
            let oracle = match exact_matrix_mwd(&a, &oracle_budget) {
                Ok(w) => Some(w),
                Err(monoidal_width::Error::BudgetExceeded(_)) => None,
                Err(e) => return Err(formats::core_err(e)),
            };
            let mut bounds = vec![
                BoundLine {
                    claim: format!(
                        "width(tree) <= max_block_rank + 1 = {}",
                        up.lower_bound + 1
                    ),
                    holds: !up.exact_over_naturals || w <= up.lower_bound + 1,
                },
                BoundLine {
                    claim: "evaluate(tree) = input matrix".into(),
                    holds: evaluates,
                },
            ];
            if let Some(o) = oracle {
                bounds.push(BoundLine {
                    claim: format!(
                        "max_block_rank <= exact_width <= max_block_rank + 1 ({} <= {} <= {})",
                        up.lower_bound,
                        o,
                        up.lower_bound + 1
                    ),
                    holds: o >= up.lower_bound && o <= up.lower_bound + 1,
                });
            }
            let file = formats::decomposition_file(Algebra::Matrix, &up.tree, &sig)?;
            let dot_text = tree_to_dot(&up.tree, &sig).map_err(formats::core_err)?;
            (
                RunReport {
                    operation: "mwd-upper --algebra matrix".into(),
                    input_digest: digest,
                    seed: cli.seed,
                    widths: json!({
                        "constructed": w,
                        "lower_bound": up.lower_bound,
                        "oracle": oracle,
                    }),
                    bounds,
                    certificates: json!({ "exact_over_naturals": up.exact_over_naturals }),
                    timing_ms: start.elapsed().as_millis(),
                },
                file,
                dot_text,
            )
        }
        Algebra::Cospan => {
            let g = formats::read_graph(input)?;
            let gamma = HypergraphWithSources::new(g.clone(), BTreeSet::new())
                .map_err(formats::core_err)?;
            let (oracle_width, dec, used_oracle) = match exact_branch_width(&g, &oracle_budget) {
                Ok((w, dec)) => (Some(w), dec, true),
                Err(monoidal_width::Error::BudgetExceeded(_)) => {
                    (None, caterpillar_branch_dec(g.edges.len()), false)
                }
                Err(e) => return Err(formats::core_err(e)),
            };
            let t = to_inductive_branch(&dec, &gamma).map_err(formats::core_err)?;
            let cd = branch_to_monoidal(&t, &gamma).map_err(formats::core_err)?;
            let w = width(&cd.tree, &cd.signature).map_err(formats::core_err)?;
            let alg = CospanAlgebra {
                iso_cap: g.vertices.max(16),
            };
            let value = evaluate(&cd.tree, &alg, &cd.signature).map_err(formats::core_err)?;
            let expect = CospanHG::from_sources(&gamma);
            let evaluates = cospan_iso(&value, &expect, alg.iso_cap).map_err(formats::core_err)?;
            let bw = branch_width_of(&dec, &g).map_err(formats::core_err)?;
            let bound = (bw + 1).max(g.hyperedge_size());
            let mut bounds = vec![
                BoundLine {
                    claim: format!(
                        "width(tree) <= max(branch_width + 1, hyperedge_size) = {bound}"
                    ),
                    holds: w <= bound,
                },
                BoundLine {
                    claim: "evaluate(tree) isomorphic to the closed cospan".into(),
                    holds: evaluates,
                },
            ];
            if let Some(bw) = oracle_width {
                bounds.push(BoundLine {
                    claim: format!("decomposition source is oracle-optimal (branch width {bw})"),
                    holds: true,
                });
            }
            let file = formats::decomposition_file(Algebra::Cospan, &cd.tree, &cd.signature)?;
            let dot_text = tree_to_dot(&cd.tree, &cd.signature).map_err(formats::core_err)?;
            (
                RunReport {
                    operation: "mwd-upper --algebra cospan".into(),
                    input_digest: digest,
                    seed: cli.seed,
                    widths: json!({
                        "constructed": w,
                        "branch_width": oracle_width,
                        "source": if used_oracle { "oracle" } else { "caterpillar" },
                    }),
                    bounds,
                    certificates: Value::Null,
                    timing_ms: start.elapsed().as_millis(),
                },
                file,
                dot_text,
            )
        }
        Algebra::Boundary => {
            let g = formats::read_graph(input)?;
            let adj = adjacency_of(&g)?;
            let gamma = DanglingGraph::closed(adj.clone()).map_err(formats::core_err)?;
            let (oracle_width, dec, used_oracle) =
                match exact_rank_width(&adj, Field::Rationals, &oracle_budget) {
                    Ok((w, dec)) => (Some(w), dec, true),
                    Err(monoidal_width::Error::BudgetExceeded(_)) => {
                        (None, caterpillar_rank_dec(adj.rows()), false)
                    }
                    Err(e) => return Err(formats::core_err(e)),
                };
            let t = to_inductive_rank(&dec, &gamma).map_err(formats::core_err)?;
            let ird_width = inductive_rank_width(&t, Field::Rationals);
            let bd = rank_to_monoidal(&t).map_err(formats::core_err)?;
            let w = width(&bd.tree, &bd.signature).map_err(formats::core_err)?;
            let evaluates = if adj.rows() <= 10 {
                let alg = BoundaryAlgebra::default();
                let value = evaluate(&bd.tree, &alg, &bd.signature).map_err(formats::core_err)?;
                let expect = GraphWithBoundaries::from_dangling(&gamma);
                Some(equal_up_to_permutation(&value, &expect, 10).map_err(formats::core_err)?)
            } else {
                None
            };
            let mut bounds = vec![BoundLine {
                claim: format!("width(tree) <= 2 * inductive_rank_width = {}", 2 * ird_width),
                holds: !bd.exact_over_naturals || w <= 2 * ird_width,
            }];
            if let Some(ok) = evaluates {
                bounds.push(BoundLine {
                    claim: "evaluate(tree) equals the input graph up to permutation".into(),
                    holds: ok,
                });
            }
            let file = formats::decomposition_file(Algebra::Boundary, &bd.tree, &bd.signature)?;
            let dot_text = tree_to_dot(&bd.tree, &bd.signature).map_err(formats::core_err)?;
            (
                RunReport {
                    operation: "mwd-upper --algebra boundary".into(),
                    input_digest: digest,
                    seed: cli.seed,
                    widths: json!({
                        "constructed": w,
                        "rank_width": oracle_width,
                        "inductive_width": ird_width,
                        "source": if used_oracle { "oracle" } else { "caterpillar" },
                    }),
                    bounds,
                    certificates: json!({
                        "exact_over_naturals": bd.exact_over_naturals,
                        "max_inner_dim": bd.max_inner_dim,
                    }),
                    timing_ms: start.elapsed().as_millis(),
                },
                file,
                dot_text,
            )
        }
    };
    if let Some(path) = output {
        formats::write_json(path, &file)?;
    }
    if let Some(path) = dot {
        std::fs::write(path, dot_text)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))?;
    }
    report.print(cli.json)
}

fn check(
    cli: &Cli,
    decomposition: &std::path::Path,
    morphism: &std::path::Path,
    budget: &BudgetArgs,
) -> Result<(), CliError> {
    let start = Instant::now();
    let file: formats::DecompositionFile = formats::read_json(decomposition)?;
    let digest = formats::digest(formats::read_to_string(decomposition)?.as_bytes());
    let loaded = formats::load_decomposition(&file)?;
    let mut bounds = Vec::new();
    let widths = match loaded {
        LoadedDecomposition::Matrix(sig, tree) => {
            let expected = formats::read_matrix(morphism)?;
            let w = width(&tree, &sig).map_err(formats::core_err)?;
            let value = evaluate(&tree, &BialgAlgebra, &sig).map_err(formats::core_err)?;
            bounds.push(BoundLine {
                claim: "evaluate(tree) = morphism".into(),
                holds: value == expected,
            });
            json!({ "width": w })
        }
        LoadedDecomposition::Cospan(sig, tree) => {
            let g = formats::read_graph(morphism)?;
            let gamma =
                HypergraphWithSources::new(g, BTreeSet::new()).map_err(formats::core_err)?;
            let expected = CospanHG::from_sources(&gamma);
            let w = width(&tree, &sig).map_err(formats::core_err)?;
            let alg = CospanAlgebra {
                iso_cap: expected.apex.vertices.max(budget.budget_vertices).max(16),
            };
            let value = evaluate(&tree, &alg, &sig).map_err(formats::core_err)?;
            bounds.push(BoundLine {
                claim: "evaluate(tree) isomorphic to the closed cospan".into(),
                holds: cospan_iso(&value, &expected, alg.iso_cap).map_err(formats::core_err)?,
            });
            json!({ "width": w })
        }
        LoadedDecomposition::Boundary(sig, tree) => {
            let g = formats::read_graph(morphism)?;
            let adj = adjacency_of(&g)?;
            let gamma = DanglingGraph::closed(adj).map_err(formats::core_err)?;
            let expected = GraphWithBoundaries::from_dangling(&gamma);
            let w = width(&tree, &sig).map_err(formats::core_err)?;
            let alg = BoundaryAlgebra::default();
            let value = evaluate(&tree, &alg, &sig).map_err(formats::core_err)?;
            bounds.push(BoundLine {
                claim: "evaluate(tree) equals the morphism up to permutation".into(),
                holds: equal_up_to_permutation(&value, &expected, 10.max(budget.budget_vertices))
                    .map_err(formats::core_err)?,
            });
            json!({ "width": w })
        }
    };
    RunReport {
        operation: "check".into(),
        input_digest: digest,
        seed: cli.seed,
        widths,
        bounds,
        certificates: Value::Null,
        timing_ms: start.elapsed().as_millis(),
    }
    .print(cli.json)
}

fn parse_sources(sources: Option<&str>) -> Result<BTreeSet<usize>, CliError> {
    let mut out = BTreeSet::new();
    if let Some(s) = sources {
        for tok in s.split(',').filter(|t| !t.trim().is_empty()) {
            out.insert(
                tok.trim()
                    .parse()
                    .map_err(|e| CliError::Parse(format!("bad source `{tok}`: {e}")))?,
            );
        }
    }
    Ok(out)
}

fn convert(
    cli: &Cli,
    kind: ConvertKind,
    input: &std::path::Path,
    graph: Option<&std::path::Path>,
    sources: Option<&str>,
    boundary: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let start = Instant::now();
    let digest = formats::digest(formats::read_to_string(input)?.as_bytes());
    let need_graph = || -> Result<Hypergraph, CliError> {
        graph
            .ok_or_else(|| CliError::Parse("--graph is required for this conversion".into()))
            .and_then(formats::read_graph)
    };
    let (widths, bounds, out_value): (Value, Vec<BoundLine>, Value) = match kind {
        ConvertKind::BranchToInductive => {
            let g = need_graph()?;
            let dec: BranchDec = formats::read_json(input)?;
            let gamma = HypergraphWithSources::new(g.clone(), parse_sources(sources)?)
                .map_err(formats::core_err)?;
            let t = to_inductive_branch(&dec, &gamma).map_err(formats::core_err)?;
            validate_inductive_branch(&t, &gamma).map_err(formats::core_err)?;
            let bw = branch_width_of(&dec, &g).map_err(formats::core_err)?;
            let bounds = vec![BoundLine {
                claim: format!(
                    "inductive width <= branch width + |sources| = {}",
                    bw + gamma.sources.len()
                ),
                holds: t.width() <= bw + gamma.sources.len(),
            }];
            (
                json!({ "branch_width": bw, "inductive_width": t.width() }),
                bounds,
                serde_json::to_value(&t).map_err(|e| CliError::Parse(e.to_string()))?,
            )
        }
        ConvertKind::InductiveToBranch => {
            let t: InductiveBranchDec = formats::read_json(input)?;
            let dec = from_inductive_branch(&t).map_err(formats::core_err)?;
            let mut bounds = Vec::new();
            let mut widths = json!({ "inductive_width": t.width() });
            if let Some(gpath) = graph {
                let g = formats::read_graph(gpath)?;
                let bw = branch_width_of(&dec, &g).map_err(formats::core_err)?;
                widths = json!({ "inductive_width": t.width(), "branch_width": bw });
                bounds.push(BoundLine {
                    claim: format!("branch width <= inductive width = {}", t.width()),
                    holds: bw <= t.width(),
                });
            }
            (
                widths,
                bounds,
                serde_json::to_value(&dec).map_err(|e| CliError::Parse(e.to_string()))?,
            )
        }
        ConvertKind::RankToInductive => {
            let g = need_graph()?;
            let adj = adjacency_of(&g)?;
            let dec: RankDec = formats::read_json(input)?;
            let b = match boundary {
                Some(path) => formats::read_matrix(path)?,
                None => monoidal_width::matrix::NatMatrix::zero(adj.rows(), 0),
            };
            let rank_b = b.rank(Field::Rationals);
            let gamma = DanglingGraph::new(adj.clone(), b).map_err(formats::core_err)?;
            let t = to_inductive_rank(&dec, &gamma).map_err(formats::core_err)?;
            validate_inductive_rank(&t, &gamma).map_err(formats::core_err)?;
            let rw = rank_width_of(&dec, &adj, Field::Rationals).map_err(formats::core_err)?;
            let iw = inductive_rank_width(&t, Field::Rationals);
            let bounds = vec![BoundLine {
                claim: format!("inductive width <= rank width + rank(B) = {}", rw + rank_b),
                holds: iw <= rw + rank_b,
            }];
            (
                json!({ "rank_width": rw, "inductive_width": iw, "rank_b": rank_b }),
                bounds,
                serde_json::to_value(&t).map_err(|e| CliError::Parse(e.to_string()))?,
            )
        }
        ConvertKind::InductiveToRank => {
            let t: InductiveRankDec = formats::read_json(input)?;
            let dec = from_inductive_rank(&t).map_err(formats::core_err)?;
            let iw = inductive_rank_width(&t, Field::Rationals);
            let mut bounds = Vec::new();
            let mut widths = json!({ "inductive_width": iw });
            if let Some(gpath) = graph {
                let g = formats::read_graph(gpath)?;
                let adj = adjacency_of(&g)?;
                let rw = rank_width_of(&dec, &adj, Field::Rationals).map_err(formats::core_err)?;
                widths = json!({ "inductive_width": iw, "rank_width": rw });
                bounds.push(BoundLine {
                    claim: format!("rank width <= inductive width = {iw}"),
                    holds: rw <= iw,
                });
            }
            (
                widths,
                bounds,
                serde_json::to_value(&dec).map_err(|e| CliError::Parse(e.to_string()))?,
            )
        }
    };
    if let Some(path) = output {
        formats::write_json(path, &out_value)?;
    }
    RunReport {
        operation: format!("convert --kind {kind:?}"),
        input_digest: digest,
        seed: cli.seed,
        widths,
        bounds,
        certificates: Value::Null,
        timing_ms: start.elapsed().as_millis(),
    }
    .print(cli.json)
}
