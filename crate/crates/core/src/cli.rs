//! The `hyperperc` command line.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::harris::{
    counterexample, harris_check, harris_check_with_exponent, harris_exponent, harris_stress, FinitePoset,
    PosetMeasure, ProductUpset,
};
use crate::hypermap::{builtin, find_self_duality, LatticeSpec, PeriodicMap, BUILTIN_NAMES};
use crate::ncpart::{enumerate_nc, vectors_from_json, NCPartition, ProbabilityVector};
use crate::percsim::{cluster_survey, thread_pool, threshold_scan, BoundaryMode, Direction, Window};
use crate::szgen::{connection_vector, find_roots, realizability_check, selfdual_equation, Generator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NO_ROOT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hyperperc", version, about = "Hyperlattice percolation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List non-crossing partitions of k points with their duals.
    Partitions {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Exact connection vector, self-duality equation and critical point of a generator.
    Solve {
        #[arg(long)]
        generator: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Crossing probabilities over a parameter grid and several window sizes.
    Scan {
        #[command(flatten)]
        model: Model,
        /// Grid `start:stop:step`, inclusive.
        #[arg(long = "param-grid", default_value = "0.4:0.6:0.02")]
        param_grid: String,
        /// Square sizes in cells.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
        /// Rectangle height over width.
        #[arg(long, default_value_t = 1.0)]
        aspect: f64,
        #[arg(long, value_enum, default_value_t = Dir::Horizontal)]
        direction: Dir,
        #[command(flatten)]
        run: Run,
        #[command(flatten)]
        out: Output,
    },
    /// Cluster radius tail of a reference vertex.
    Survey {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        param: f64,
        /// Radii in cells.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        radii: Vec<f64>,
        /// Window side in cells (centred on the reference vertex).
        #[arg(long, default_value_t = 48)]
        size: i32,
        #[command(flatten)]
        run: Run,
        #[command(flatten)]
        out: Output,
    },
    /// Validate probability vectors on a lattice and test self-duality.
    Check {
        #[arg(long, default_value = "tri")]
        lattice: String,
        /// JSON file with one vector or an array indexed by orbit slot.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        param: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Correlation inequality checks on small posets.
    Harris {
        #[arg(long, value_enum, default_value_t = PosetChoice::Nc3)]
        poset: PosetChoice,
        /// Mass of the greatest element (counterexample poset only).
        #[arg(long, default_value_t = 0.2)]
        p0: f64,
        /// Number of product coordinates; 1 is exhaustive, larger samples.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Args)]
pub struct Model {
    /// Built-in lattice name or lattice JSON file.
    #[arg(long, default_value = "tri")]
    pub lattice: String,
    #[arg(long, value_enum, default_value_t = Family::Competition)]
    pub family: Family,
    /// Generator file for `--family generator`.
    #[arg(long)]
    pub generator: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Run {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Base seed; a time-based seed is drawn and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "HYPERPERC_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dir {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PosetChoice {
    /// Non-crossing partitions of 3 points, uniform measure.
    Nc3,
    /// Three-element fan where the bound with exponent 1 fails.
    Counterexample,
}

/// One-parameter families of hyperedge vectors, applied to every orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Triangle hyperedges: none (1-p)^3, one pair p(1-p) each, all p^3.
    Competition,
    /// Two-vertex bonds open with probability p.
    Bond,
    /// Connection vector of `--generator` at p.
    Generator,
    /// Every hyperedge fully connected.
    Top,
    /// Every hyperedge disconnected.
    Bottom,
    /// Triangle hyperedges always joining their first two vertices.
    PairAb,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => EXIT_CAPACITY,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad grid '{text}'"))))
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else {
        return Err(Error::invalid(format!("grid '{text}' must be start:stop:step")));
    };
    if !(step > 0.0) || b < a {
        return Err(Error::invalid(format!("grid '{text}' needs start <= stop and step > 0")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Error::capacity("parameter grid has more than 100000 points"));
    }
    // drop accumulated float noise so printed parameters stay clean
    Ok((0..=n).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect())
}

pub fn load_lattice(name: &str) -> Result<PeriodicMap> {
    if BUILTIN_NAMES.contains(&name) {
        return builtin(name);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Error::invalid(format!(
            "'{name}' is neither a built-in lattice ({}) nor a file",
            BUILTIN_NAMES.join(", ")
        )));
    }
    LatticeSpec::from_json(&std::fs::read_to_string(path)?)?.build()
}

fn family_vector(family: Family, k: usize, p: f64, generator: Option<&Generator>) -> Result<ProbabilityVector> {
    let need = |want: usize| {
        if k == want {
            Ok(())
        } else {
            Err(Error::invalid(format!("family {family:?} needs hyperedges of size {want}, found {k}")))
        }
    };
    match family {
        Family::Competition => {
            need(3)?;
            ProbabilityVector::competition(p)
        }
        Family::Bond => {
            need(2)?;
            ProbabilityVector::bond(p)
        }
        Family::Generator => {
            let g = generator.ok_or_else(|| Error::invalid("--family generator needs --generator"))?;
            need(g.terminals().len())?;
            connection_vector(g)?.evaluate(p)
        }
        Family::Top => Ok(ProbabilityVector::point_mass(NCPartition::top(k))),
        Family::Bottom => Ok(ProbabilityVector::point_mass(NCPartition::bottom(k))),
        Family::PairAb => {
            need(3)?;
            Ok(ProbabilityVector::point_mass(NCPartition::new(3, vec![vec![0, 1], vec![2]])?))
        }
    }
}

/// Vectors for every orbit slot of a lattice at parameter `p`.
pub fn family_vectors(lattice: &PeriodicMap, family: Family, p: f64, generator: Option<&Generator>) -> Result<Vec<ProbabilityVector>> {
    let view = lattice.hyper_view();
    let mut arity = vec![None; view.orbit_count()];
    for e in &view.hyperedges {
        let k = e.incidences.len();
        match arity[e.orbit] {
            Some(existing) if existing != k => {
                return Err(Error::invalid(format!("orbit {} mixes hyperedge sizes", e.orbit)));
            }
            _ => arity[e.orbit] = Some(k),
        }
    }
    arity
        .into_iter()
        .map(|k| family_vector(family, k.unwrap_or(2), p, generator))
        .collect()
}

fn auto_seed() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos() as u64).unwrap_or(0)
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialise");
    s.push('\n');
    s
}

fn load_generator(path: Option<&PathBuf>) -> Result<Option<Generator>> {
    path.map(|p| Generator::from_json(&std::fs::read_to_string(p)?)).transpose()
}

pub fn cmd_partitions(k: usize, out: &Output) -> Result<i32> {
    let parts = enumerate_nc(k)?;
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = format!("# k={k} count={}\nindex,partition,blocks,letters,dual,dual_letters\n", parts.len());
            for (i, pi) in parts.iter().enumerate() {
                let d = pi.dual();
                let dual_letters = if k == 3 { d.triangle_edge_letters().unwrap_or_default() } else { d.letters(true) };
                s.push_str(&format!(
                    "{i},\"{pi}\",{},{},\"{d}\",{}\n",
                    pi.num_blocks(),
                    display_letters(&pi.letters(false)),
                    display_letters(&dual_letters)
                ));
            }
            s
        }
        Format::Json => pretty(&json!({
            "k": k,
            "count": parts.len(),
            "partitions": parts.iter().map(|pi| {
                let d = pi.dual();
                json!({
                    "blocks": pi.blocks(),
                    "letters": pi.letters(false),
                    "dual": d.blocks(),
                    "dual_letters": if k == 3 { d.triangle_edge_letters().unwrap_or_default() } else { d.letters(true) },
                })
            }).collect::<Vec<_>>(),
        })),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn display_letters(s: &str) -> String {
    if s.is_empty() {
        "∅".to_string()
    } else {
        s.to_string()
    }
}

pub fn cmd_solve(path: &Path, out: &Output) -> Result<i32> {
    let g = Generator::from_json(&std::fs::read_to_string(path)?)?;
    let cv = connection_vector(&g)?;
    let system = selfdual_equation(&cv)?;
    let report = if cv.k() <= 3 { Some(find_roots(&system.equations[0].1)) } else { None };
    let entries: Vec<_> = cv
        .entries()
        .iter()
        .map(|(blocks, poly)| json!({"blocks": blocks, "poly": poly.coeff_strings(), "display": poly.to_string()}))
        .collect();
    let equations: Vec<_> = system
        .equations
        .iter()
        .map(|(name, poly)| json!({"name": name, "poly": poly.coeff_strings(), "display": poly.to_string()}))
        .collect();
    let mut doc = json!({
        "terminals": cv.k(),
        "total": cv.total().coeff_strings(),
        "connection_vector": entries,
        "equations": equations,
        "convention_dependent": system.convention_dependent,
    });
    let mut code = EXIT_OK;
    if let Some(r) = &report {
        doc["brackets"] = json!(r.brackets);
        doc["roots"] = json!(r.roots);
        doc["identically_zero"] = json!(r.identically_zero);
        match r.root() {
            Some(x) => doc["root"] = json!(x),
            None => {
                doc["root"] = serde_json::Value::Null;
                doc["status"] = json!("no root");
                code = EXIT_NO_ROOT;
            }
        }
    }
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&doc),
        Format::Csv => {
            let mut s = "root\n".to_string();
            for x in report.iter().flat_map(|r| r.roots.iter()) {
                s.push_str(&format!("{x:.12}\n"));
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(code)
}

fn direction(d: Dir) -> Direction {
    match d {
        Dir::Horizontal => Direction::Horizontal,
        Dir::Vertical => Direction::Vertical,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_scan(model: &Model, grid: &str, sizes: &[usize], aspect: f64, dir: Dir, run: &Run, out: &Output) -> Result<i32> {
    let lattice = load_lattice(&model.lattice)?;
    let generator = load_generator(model.generator.as_ref())?;
    let grid = parse_grid(grid)?;
    let seed = run.seed.unwrap_or_else(auto_seed);
    if sizes.is_empty() {
        return Err(Error::invalid("--sizes must list at least one size"));
    }
    let family = |p: f64| family_vectors(&lattice, model.family, p, generator.as_ref());
    let pool = thread_pool(run.threads)?;
    let table = pool.install(|| threshold_scan(&lattice, sizes, &family, aspect, &grid, direction(dir), run.trials, seed))?;
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv(),
        Format::Json => pretty(&serde_json::to_value(&table)?),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_survey(model: &Model, param: f64, radii: &[f64], size: i32, run: &Run, out: &Output) -> Result<i32> {
    let lattice = load_lattice(&model.lattice)?;
    let generator = load_generator(model.generator.as_ref())?;
    let vectors = family_vectors(&lattice, model.family, param, generator.as_ref())?;
    let seed = run.seed.unwrap_or_else(auto_seed);
    let half = size / 2;
    let window = Window::new(&lattice, (-half, size - half), (-half, size - half), BoundaryMode::Open)?;
    let pool = thread_pool(run.threads)?;
    let result = pool.install(|| cluster_survey(&window, &vectors, radii, run.trials, seed))?;
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => result.to_csv(),
        Format::Json => pretty(&serde_json::to_value(&result)?),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn read_vectors(path: &Path) -> Result<Vec<ProbabilityVector>> {
    vectors_from_json(&std::fs::read_to_string(path)?)
}

pub fn cmd_check(lattice: &str, vectors: Option<&Path>, family: Option<Family>, param: Option<f64>, out: &Output) -> Result<i32> {
    let map = load_lattice(lattice)?;
    let vectors = match (vectors, family) {
        (Some(path), None) => read_vectors(path)?,
        (None, Some(f)) => family_vectors(&map, f, param.unwrap_or(0.5), None)?,
        _ => return Err(Error::invalid("give exactly one of --vectors or --family")),
    };
    let witness = find_self_duality(&map, &vectors)?;
    let per_vector: Vec<_> = vectors
        .iter()
        .map(|v| {
            let mut entry = json!({
                "k": v.k(),
                "nondegenerate": v.is_nondegenerate(),
                "malleable": v.is_malleable(),
            });
            if v.k() == 3 {
                if let Ok(r) = realizability_check(v) {
                    entry["realizability_consistent"] = json!(r.consistent);
                    entry["failed_inequalities"] =
                        json!(r.checks.iter().filter(|c| !c.holds).map(|c| json!({"name": c.name, "lhs": c.lhs, "rhs": c.rhs})).collect::<Vec<_>>());
                }
            }
            entry
        })
        .collect();
    let doc = json!({
        "nondegenerate": vectors.iter().all(ProbabilityVector::is_nondegenerate),
        "malleable": vectors.iter().all(ProbabilityVector::is_malleable),
        "self_dual": witness.is_some(),
        "duality_linear_part": witness.as_ref().map(|w| w.linear),
        "vectors": per_vector,
    });
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&doc),
        Format::Csv => format!(
            "nondegenerate,malleable,self_dual\n{},{},{}\n",
            doc["nondegenerate"], doc["malleable"], doc["self_dual"]
        ),
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_harris(poset: PosetChoice, p0: f64, n: usize, trials: usize, seed: Option<u64>, out: &Output) -> Result<i32> {
    let mut rows = Vec::new();
    let mut summary = json!({});
    match poset {
        PosetChoice::Counterexample => {
            let (measure, a, b) = counterexample(p0)?;
            let c = harris_exponent(p0);
            for exponent in [1, c] {
                let r = harris_check_with_exponent(&measure, 1, &a, &b, exponent)?;
                rows.push(json!({"exponent": exponent, "pr_a": r.pr_a, "pr_b": r.pr_b, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds}));
            }
            summary = json!({"poset": "counterexample", "p0": p0, "harris_exponent": c});
        }
        PosetChoice::Nc3 => {
            let (poset, _) = FinitePoset::noncrossing(3)?;
            let measure = PosetMeasure::uniform(poset);
            let p0 = measure.greatest_mass().unwrap_or(0.0);
            if n == 1 {
                let upsets = measure.poset().enumerate_upsets()?;
                let sets: Vec<ProductUpset> = upsets
                    .into_iter()
                    .map(|m| ProductUpset::explicit(measure.poset(), 1, m))
                    .collect::<Result<_>>()?;
                let mut failures = 0;
                for a in &sets {
                    for b in &sets {
                        let r = harris_check(&measure, 1, a, b)?;
                        failures += usize::from(!r.holds);
                        rows.push(json!({"exponent": r.exponent, "pr_a": r.pr_a, "pr_b": r.pr_b, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds}));
                    }
                }
                summary = json!({"poset": "nc3", "n": 1, "p0": p0, "pairs": rows.len(), "failures": failures});
            } else {
                let seed = seed.unwrap_or_else(auto_seed);
                let r = harris_stress(&measure, n, trials, seed)?;
                summary = json!({"poset": "nc3", "n": n, "p0": p0, "seed": seed, "pairs": r.pairs,
                    "exponent": r.exponent, "failures": r.failures, "min_margin": r.min_margin});
            }
        }
    }
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&json!({"summary": summary, "rows": rows})),
        Format::Csv => {
            let mut s = format!("# {summary}\nexponent,pr_a,pr_b,lhs,rhs,holds\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},{},{}\n", r["exponent"], r["pr_a"], r["pr_b"], r["lhs"], r["rhs"], r["holds"]));
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Partitions { k, out } => cmd_partitions(*k, out),
        Command::Solve { generator, out } => cmd_solve(generator, out),
        Command::Scan { model, param_grid, sizes, aspect, direction, run, out } => {
            cmd_scan(model, param_grid, sizes, *aspect, *direction, run, out)
        }
        Command::Survey { model, param, radii, size, run, out } => cmd_survey(model, *param, radii, *size, run, out),
        Command::Check { lattice, vectors, family, param, out } => {
            cmd_check(lattice, vectors.as_deref(), *family, *param, out)
        }
        Command::Harris { poset, p0, n, trials, seed, out } => cmd_harris(*poset, *p0, *n, *trials, *seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
