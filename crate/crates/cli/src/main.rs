//! `nomlet`: nominal letrec unification and matching from the command line.
//!
//! Exit status is 0 when the problem is solvable (or the expressions are
//! equivalent), 1 when it is not, and 2 on usage, input or resource errors.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nomlet::gen::{example3_family, rng};
use nomlet::oracle::{
    brute_solve, encode_graph_iso, encode_hamiltonian, has_hamiltonian_cycle, isomorphic, random_graph,
    random_regular_graph, BruteProblem, Graph, GroundEnumConfig,
};
use nomlet::problem::Problem;
use nomlet::{
    alpha::alpha_witness, letrec_dag_match, letrec_env_match, letrec_match, unify, Atom, Expr, FunSym, MatchConfig,
    MatchEquation, Mode, UnifyConfig,
};
use rand::seq::SliceRandom;
use report::SolveReport;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nomlet", version, about = "Nominal unification and matching for lambda expressions with letrec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct SolveOpts {
    /// Problem file, or `-` for standard input.
    file: PathBuf,
    /// Enumerate the complete solution set instead of stopping at the first.
    #[arg(long)]
    collect: bool,
    /// Stop after this many solutions (implies --collect).
    #[arg(long, value_name = "N")]
    max_solutions: Option<usize>,
    /// Include the rule trace.
    #[arg(long)]
    trace: bool,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Abort after this many rule applications (branch points for matching).
    #[arg(long, default_value_t = 1_000_000, value_name = "N")]
    step_limit: usize,
}

impl SolveOpts {
    fn mode(&self) -> Mode {
        if self.collect || self.max_solutions.is_some() {
            Mode::Collect
        } else {
            Mode::Decide
        }
    }

    fn match_config(&self) -> MatchConfig {
        MatchConfig { mode: self.mode(), max_solutions: self.max_solutions, step_limit: self.step_limit, trace: self.trace }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a unification problem (`s = t` and `a # e` lines).
    Unify {
        #[command(flatten)]
        opts: SolveOpts,
        /// Keep every fixpoint equation. The count can grow exponentially.
        #[arg(long, requires = "unsafe_exponential")]
        no_elimfp: bool,
        /// Acknowledges the cost of --no-elimfp.
        #[arg(long)]
        unsafe_exponential: bool,
    },
    /// Solve a matching problem (`s <= t` lines with ground right sides).
    Match {
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Solve a dag-compressed matching problem (`node N = e` lines).
    DagMatch {
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Solve a matching problem with environment variables on the left.
    EnvMatch {
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Decide alpha-equivalence of two ground expressions.
    AlphaEq {
        /// File with two expressions, optionally separated by `=`.
        file: PathBuf,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Emit generated problem files.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Brute-force reference solvers.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Hamiltonian cycle encoding of a random regular graph.
    Ham {
        n: usize,
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Graph isomorphism encoding. PAIR is `G1,G2` with graph names
    /// (`K4`, `C6`, `2xC3`, `petersen`), `random:N` for a random graph and
    /// a relabelled copy, or `random-pair:N` for two independent graphs.
    Gi {
        pair: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The fixpoint blow-up family of size N.
    Example3 { n: usize },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// All ground solutions within the bounds, as JSON.
    Solve {
        file: PathBuf,
        /// Number of atoms: those of the problem, padded with fresh ones.
        #[arg(long, default_value_t = 3)]
        atoms: usize,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        /// Largest letrec environment in candidate values.
        #[arg(long, default_value_t = 1)]
        env: usize,
    },
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Problem> {
    let text = read_input(path)?;
    Problem::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn matching_input(p: &Problem) -> Result<Vec<MatchEquation>> {
    if !p.freshness.is_empty() {
        bail!("freshness constraints are not supported by matching");
    }
    Ok(p.match_equations())
}

fn finish(report: SolveReport, json: bool) -> u8 {
    print!("{}", report.render(json));
    u8::from(!report.is_solvable())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Unify { opts, no_elimfp, .. } => {
            let problem = load(&opts.file)?.unify_problem();
            let cfg = UnifyConfig {
                mode: opts.mode(),
                max_solutions: opts.max_solutions,
                elimfp: !no_elimfp,
                step_limit: opts.step_limit,
                trace: opts.trace,
            };
            Ok(finish(SolveReport::from_unify(unify(&problem, &cfg)?), opts.json))
        }
        Command::Match { opts } => {
            let eqs = matching_input(&load(&opts.file)?)?;
            Ok(finish(SolveReport::from_match(letrec_match(&eqs, &opts.match_config())?), opts.json))
        }
        Command::EnvMatch { opts } => {
            let eqs = matching_input(&load(&opts.file)?)?;
            Ok(finish(SolveReport::from_match(letrec_env_match(&eqs, &opts.match_config())?), opts.json))
        }
        Command::DagMatch { opts } => {
            let p = load(&opts.file)?;
            matching_input(&p)?;
            Ok(finish(SolveReport::from_dag(letrec_dag_match(&p.dag_problem(), &opts.match_config())?), opts.json))
        }
        Command::AlphaEq { file, json } => alpha_eq_cmd(&file, json),
        Command::Gen { what } => {
            print!("{}", gen_cmd(what)?);
            Ok(0)
        }
        Command::Oracle { what: OracleCommand::Solve { file, atoms, depth, env } } => oracle_cmd(&file, atoms, depth, env),
    }
}

#[derive(Serialize)]
struct AlphaReport {
    status: &'static str,
    witness: Vec<[String; 2]>,
}

fn alpha_eq_cmd(path: &Path, json: bool) -> Result<u8> {
    let text = read_input(path)?;
    let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n");
    let mut arities = nomlet::ArityTable::new();
    let mut parser = nomlet::term::Parser::new(&body, &mut arities)?;
    let e1 = parser.expr()?;
    let _ = parser.expect_sym("=");
    let e2 = parser.expr()?;
    parser.expect_end()?;
    let witness = alpha_witness(&e1, &e2)?;
    let report = AlphaReport {
        status: if witness.is_some() { "equivalent" } else { "inequivalent" },
        witness: witness.iter().flatten().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{}", report.status);
        for [a, b] in &report.witness {
            println!("binder {a} ~ {b}");
        }
    }
    Ok(u8::from(witness.is_none()))
}

fn edge_text(g: &Graph) -> String {
    g.edges().map(|(u, v)| format!("{}-{}", u + 1, v + 1)).collect::<Vec<_>>().join(" ")
}

fn gen_cmd(what: GenCommand) -> Result<String> {
    match what {
        GenCommand::Ham { n, degree, seed } => {
            let Some(g) = random_regular_graph(n, degree, &mut rng(seed)) else {
                bail!("no {degree}-regular graph on {n} vertices");
            };
            let eq = encode_hamiltonian(&g)?;
            let mut out = format!(
                "# Hamiltonian cycle encoding of a random {degree}-regular graph on {n} vertices (seed {seed})\n\
                 # edges: {}\n\
                 # every edge is bound in both orientations, so the pattern carries 2|E| - n = {} dummy bindings\n",
                edge_text(&g),
                2 * g.edge_count() - n
            );
            if n <= 12 {
                out.push_str(&format!("# hamiltonian (brute force): {}\n", has_hamiltonian_cycle(&g)));
            }
            out.push_str(&Problem::from_matches(&[eq]).to_text());
            Ok(out)
        }
        GenCommand::Gi { pair, seed } => {
            let (g1, g2) = gi_graphs(&pair, seed)?;
            let eq = encode_graph_iso(&g1, &g2)?;
            let mut out = format!("# graph isomorphism encoding for {pair} (seed {seed})\n");
            out.push_str(&format!("# target edges: {}\n# pattern edges: {}\n", edge_text(&g1), edge_text(&g2)));
            if g1.vertex_count() <= 9 {
                out.push_str(&format!("# isomorphic (brute force): {}\n", isomorphic(&g1, &g2)));
            }
            out.push_str(&Problem::from_matches(&[eq]).to_text());
            Ok(out)
        }
        GenCommand::Example3 { n } => {
            if n == 0 {
                bail!("the family starts at n = 1");
            }
            let fam = example3_family(n);
            let mut out = format!("# fixpoint blow-up family of size {n}: {} fixpoint equations on X1 without ElimFP\n", 1u64 << (n - 1).min(63));
            out.push_str(&Problem::from_unify(&fam.problem).to_text());
            Ok(out)
        }
    }
}

fn gi_graphs(pair: &str, seed: u64) -> Result<(Graph, Graph)> {
    let mut r = rng(seed);
    if let Some(n) = pair.strip_prefix("random:") {
        let n: usize = n.parse().context("vertex count")?;
        let g1 = random_graph(n, 0.5, &mut r);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let g2 = Graph::new(n, g1.edges().map(|(u, v)| (perm[u], perm[v])))?;
        return Ok((g1, g2));
    }
    if let Some(n) = pair.strip_prefix("random-pair:") {
        let n: usize = n.parse().context("vertex count")?;
        return Ok((random_graph(n, 0.5, &mut r), random_graph(n, 0.5, &mut r)));
    }
    let Some((a, b)) = pair.split_once(',') else {
        bail!("expected `G1,G2`, `random:N` or `random-pair:N`");
    };
    Ok((Graph::from_name(a.trim())?, Graph::from_name(b.trim())?))
}

const ORACLE_MAX_ASSIGNMENTS: f64 = 1e7;

#[derive(Serialize)]
struct OracleReport {
    status: &'static str,
    count: usize,
    solutions: Vec<Vec<[String; 2]>>,
}

fn oracle_cmd(path: &Path, atoms: usize, depth: usize, env: usize) -> Result<u8> {
    let p = load(path)?;
    let up = p.unify_problem();
    let mut names: Vec<Atom> = up.atoms().into_iter().collect();
    let mut k = 0;
    while names.len() < atoms {
        let a = Atom::new(&format!("_a{k}"));
        k += 1;
        if !names.contains(&a) {
            names.push(a);
        }
    }
    let mut funsyms: BTreeMap<FunSym, usize> = BTreeMap::new();
    for eq in &up.equations {
        eq.lhs.fun_syms(&mut funsyms);
        eq.rhs.fun_syms(&mut funsyms);
    }
    let pair = GroundEnumConfig { atoms: names, funsyms: funsyms.into_iter().collect(), max_depth: depth, max_env: env };
    let vars: BTreeSet<_> = up.vars();
    let space = (pair.count() as f64).powi(vars.len() as i32);
    if space > ORACLE_MAX_ASSIGNMENTS {
        bail!("{space:.3e} candidate assignments; lower --atoms, --depth or --env");
    }
    let brute = BruteProblem { equations: up.equations.clone(), freshness: up.freshness.clone() };
    let sols = brute_solve(&brute, &pair);
    let report = OracleReport {
        status: if sols.is_empty() { "unsolvable" } else { "solvable" },
        count: sols.len(),
        solutions: sols
            .iter()
            .map(|rho| rho.iter().map(|(x, e): (_, &Expr)| [x.to_string(), e.to_string()]).collect())
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(u8::from(sols.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
