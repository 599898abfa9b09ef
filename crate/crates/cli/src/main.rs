//! Command-line front end: abstraction, canonical forms, dependence
//! graphs, axiom audits, enumeration, and formula evaluation over finite
//! universes of arbitrary objects.
//!
//! Exit codes: 0 on success (all checks pass, formula true, systems
//! equal), 1 on a failed check or false verdict, 2 on usage or input
//! errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use arbobj_core::enumerate::{
    count_raw_blueprints, count_systems, diagonal_system, enumerate_systems, saturate,
    EnumerateOptions, Strategy,
};
use arbobj_core::logic::{self, Env};
use arbobj_core::verify;
use arbobj_core::{io, Atom, Bounds, ParticularObjectSystem, SystemId, Universe};

#[derive(Parser)]
#[command(
    name = "arbobj",
    version,
    about = "Finite-model toolkit for systems of arbitrary objects"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Abstract a blueprint file into its canonical system and state map
    Abstract {
        /// Input system, JSON or CSV
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove duplicate columns from a blueprint
    Collapse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the canonical matrix of a blueprint
    Canon {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two blueprints abstract to the same system
    Equal { a: PathBuf, b: PathBuf },
    /// Emit the dependence graph of a blueprint's abstraction
    Deps {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
    },
    /// Audit a universe file against the axioms and laws
    Check {
        #[arg(long)]
        universe: PathBuf,
        /// Override the universe's comprehension bounds
        #[arg(long)]
        max_objects: Option<usize>,
        #[arg(long)]
        max_states: Option<usize>,
        /// Saturate the universe to the bounds before checking
        #[arg(long)]
        saturate: bool,
        #[arg(long)]
        json: bool,
    },
    /// List all canonical systems within bounds
    Enumerate {
        /// Number of particulars, named 0..p-1
        #[arg(long, conflicts_with = "particulars")]
        p: Option<usize>,
        /// Comma-separated particular tokens
        #[arg(long)]
        particulars: Option<String>,
        #[arg(long)]
        max_objects: usize,
        #[arg(long)]
        max_states: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
    },
    /// Count canonical systems with at most n objects, for n = 1..=N
    Count {
        #[arg(long, conflicts_with = "particulars")]
        p: Option<usize>,
        #[arg(long)]
        particulars: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Add a wall-time column (breaks byte-for-byte reproducibility)
        #[arg(long)]
        timings: bool,
        /// Add the raw blueprint count (no canonical identification)
        #[arg(long)]
        raw: bool,
    },
    /// Evaluate formulas over a universe file
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// A single formula
        #[arg(long, conflicts_with = "formulas")]
        formula: Option<String>,
        /// A file of formulas, one per line; blank lines and lines starting
        /// with # are skipped
        #[arg(long)]
        formulas: Option<PathBuf>,
        /// Print a counterexample assignment for false universal formulas
        #[arg(long)]
        witness: bool,
    },
    /// Demonstrate the failure of generic attribution on a worked example
    DemoPga {
        /// Universe file (defaults to the built-in two-state example)
        #[arg(long)]
        universe: Option<PathBuf>,
        /// A formula with one free particular variable
        #[arg(long, default_value = "z = p1")]
        phi: String,
    },
    /// Build and abstract the k×k identity-pattern system
    DemoDiagonal { k: usize },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_system(path: &Path) -> Result<(ParticularObjectSystem, Vec<Atom>)> {
    let text = read_to_string(path)?;
    io::system_from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_universe(path: &Path) -> Result<Universe> {
    let text = read_to_string(path)?;
    io::universe_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn particulars_set(p: Option<usize>, particulars: Option<&str>) -> Result<BTreeSet<Atom>> {
    let atoms: Vec<Atom> = match (p, particulars) {
        (Some(count), None) => {
            if count == 0 {
                bail!("--p must be at least 1");
            }
            (0..count)
                .map(|n| Atom::new(n.to_string()).expect("digits are valid tokens"))
                .collect()
        }
        (None, Some(list)) => list
            .split(',')
            .map(|token| Atom::new(token.trim()).map_err(|e| anyhow!(e)))
            .collect::<Result<_>>()?,
        _ => bail!("give exactly one of --p or --particulars"),
    };
    Ok(atoms.into_iter().collect())
}

fn universe_for(system: &ParticularObjectSystem, values: &[Atom]) -> Result<Universe> {
    let mut all: BTreeSet<Atom> = values.iter().cloned().collect();
    all.extend(system.atoms());
    Ok(Universe::new(all)?)
}

fn rows_text(matrix: &arbobj_core::CanonicalMatrix) -> String {
    let rows: Vec<String> = matrix
        .rows()
        .iter()
        .map(|row| {
            row.entries()
                .iter()
                .map(Atom::as_str)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    rows.join(";")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Abstract { input, out } => {
            let (system, values) = load_system(&input)?;
            let mut universe = universe_for(&system, &values)?;
            let abstraction = universe.abstract_system(&system)?;
            let json = io::abstraction_to_json(&universe, &abstraction);
            emit(out.as_deref(), &format!("{:#}\n", json))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Collapse { input, out } => {
            let (system, values) = load_system(&input)?;
            let collapsed = arbobj_core::collapse(&system);
            let json = io::system_to_json(&collapsed, &values);
            emit(out.as_deref(), &format!("{:#}\n", json))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Canon { input, out } => {
            let (system, _) = load_system(&input)?;
            let matrix = arbobj_core::canonical_form(&system);
            let mut json = io::canonical_matrix_to_json(&matrix, None);
            json["format"] = serde_json::json!(io::FORMAT_VERSION);
            json["canonical_id"] = serde_json::json!(matrix.id().as_str());
            emit(out.as_deref(), &format!("{:#}\n", json))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Equal { a, b } => {
            let (system_a, _) = load_system(&a)?;
            let (system_b, _) = load_system(&b)?;
            if arbobj_core::systems_equal(&system_a, &system_b) {
                println!("true");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("false");
                Ok(ExitCode::from(1))
            }
        }
        Command::Deps { input, format } => {
            let (system, values) = load_system(&input)?;
            let mut universe = universe_for(&system, &values)?;
            let abstraction = universe.abstract_system(&system)?;
            let graph = arbobj_core::dependence::dependence_graph(&universe, &abstraction.system_id)?;
            match format {
                GraphFormat::Dot => print!("{}", graph.to_dot()),
                GraphFormat::Json => println!("{:#}", graph.to_json()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            universe,
            max_objects,
            max_states,
            saturate: saturate_first,
            json,
        } => {
            let mut u = load_universe(&universe)?;
            if let (Some(m), Some(r)) = (max_objects, max_states) {
                u.set_bounds(Bounds::new(m, r));
            } else if max_objects.is_some() || max_states.is_some() {
                bail!("--max-objects and --max-states go together");
            }
            if saturate_first {
                let bounds = u.bounds();
                if bounds.is_vacuous() {
                    bail!("--saturate needs bounds (from the file or the flags)");
                }
                saturate(&mut u, bounds, &EnumerateOptions::default())?;
            }
            let reports = verify::run_standard_checks(&u);
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if json {
                println!("{:#}", serde_json::to_value(&reports)?);
            } else {
                for report in &reports {
                    let verdict = if report.passed() { "PASS" } else { "FAIL" };
                    let mut line = format!("{verdict}  {}", report.check_name);
                    if let Some(witness) = &report.witness {
                        write!(line, " — {}", witness.detail)?;
                    }
                    println!("{line}");
                }
                println!(
                    "{} checks, {} failed",
                    reports.len(),
                    failed
                );
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Enumerate {
            p,
            particulars,
            max_objects,
            max_states,
            jobs,
            json,
        } => {
            let atoms = particulars_set(p, particulars.as_deref())?;
            let options = EnumerateOptions {
                strategy: if jobs > 1 {
                    Strategy::GenerateDedup
                } else {
                    Strategy::Orderly
                },
                jobs,
                ..Default::default()
            };
            let found = enumerate_systems(&atoms, max_objects, max_states, &options)?;
            if json {
                let systems: Vec<serde_json::Value> = found
                    .iter()
                    .map(|m| {
                        serde_json::json!({
                            "canonical_id": m.id().as_str(),
                            "rows": m.rows(),
                        })
                    })
                    .collect();
                println!(
                    "{:#}",
                    serde_json::json!({ "format": io::FORMAT_VERSION, "systems": systems })
                );
            } else {
                for matrix in &found {
                    println!("{} {}", matrix.id(), rows_text(matrix));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Count {
            p,
            particulars,
            n,
            jobs,
            timings,
            raw,
        } => {
            let atoms = particulars_set(p, particulars.as_deref())?;
            if n == 0 {
                bail!("--n must be at least 1");
            }
            let options = EnumerateOptions {
                jobs,
                ..Default::default()
            };
            let mut header = String::from("n,count");
            if raw {
                header.push_str(",raw_blueprints");
            }
            if timings {
                header.push_str(",wall_ms");
            }
            println!("{header}");
            for bound in 1..=n {
                let start = Instant::now();
                let count = count_systems(&atoms, bound, &options)?;
                let elapsed = start.elapsed();
                let mut line = format!("{bound},{count}");
                if raw {
                    write!(line, ",{}", count_raw_blueprints(&atoms, bound)?)?;
                }
                if timings {
                    write!(line, ",{}", elapsed.as_millis())?;
                }
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            model,
            formula,
            formulas,
            witness,
        } => {
            let universe = load_universe(&model)?;
            let mut texts: Vec<String> = Vec::new();
            match (formula, formulas) {
                (Some(text), None) => texts.push(text),
                (None, Some(path)) => {
                    for line in read_to_string(&path)?.lines() {
                        let line = line.trim();
                        if !line.is_empty() && !line.starts_with('#') {
                            texts.push(line.to_string());
                        }
                    }
                }
                _ => bail!("give exactly one of --formula or --formulas"),
            }
            let env = Env::new();
            let mut any_false = false;
            for text in &texts {
                let parsed = logic::parse(text).with_context(|| format!("parsing {text:?}"))?;
                let verdict = logic::eval(&universe, &parsed, &env)
                    .with_context(|| format!("evaluating {text:?}"))?;
                println!("{verdict}\t{parsed}");
                if !verdict {
                    any_false = true;
                    if witness {
                        if let Some(assignment) =
                            logic::find_counterexample(&universe, &parsed, &env)?
                        {
                            let parts: Vec<String> = assignment
                                .iter()
                                .map(|(name, element)| {
                                    format!("{name} = {}", element.label(&universe))
                                })
                                .collect();
                            println!("\tcounterexample: {}", parts.join(", "));
                        }
                    }
                }
            }
            Ok(if any_false {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::DemoPga { universe, phi } => {
            let (u, system_id) = match universe {
                Some(path) => {
                    let u = load_universe(&path)?;
                    let id: SystemId = u
                        .systems()
                        .first()
                        .map(|s| s.canonical_id().clone())
                        .ok_or_else(|| anyhow!("the universe has no systems"))?;
                    (u, id)
                }
                None => built_in_demo_universe()?,
            };
            let parsed = logic::parse(&phi).with_context(|| format!("parsing {phi:?}"))?;
            let report = logic::check_pga(&u, &system_id, &parsed)?;
            println!("φ: {}", report.phi);
            println!("free particular variable: {}", report.free_variable);
            println!(
                "naive attribution φ(a1@{}): rejected — {}",
                system_id.short(),
                report.naive_substitution_error
            );
            for object in &report.objects {
                println!(
                    "{}: holds in every state: {}; holds of the value range: {}; agree: {}",
                    object.object,
                    object.holds_in_every_state,
                    object.holds_of_value_range,
                    object.surrogates_agree
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DemoDiagonal { k } => {
            if k == 0 {
                bail!("k must be at least 1");
            }
            let system = diagonal_system(k);
            let mut u = Universe::new([
                Atom::new("0").expect("valid token"),
                Atom::new("1").expect("valid token"),
            ])?;
            let abstraction = u.abstract_system(&system)?;
            let registered = u
                .system(&abstraction.system_id)
                .expect("abstraction registers its system");
            println!("canonical_id: {}", abstraction.system_id);
            println!("objects: {}", registered.object_count());
            println!("states: {}", registered.state_count());
            println!("rows: {}", rows_text(registered.matrix()));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn built_in_demo_universe() -> Result<(Universe, SystemId)> {
    let tokens = ["p1", "p2", "p3"];
    let mut u = Universe::new(
        tokens
            .iter()
            .map(|t| Atom::new(*t).expect("valid token")),
    )?;
    let rows = [["p1", "p2"], ["p2", "p3"]].map(|pair| {
        pair.iter()
            .map(|t| Atom::new(*t).expect("valid token"))
            .collect::<arbobj_core::Row>()
    });
    let system = ParticularObjectSystem::new(rows)?;
    let abstraction = u.abstract_system(&system)?;
    let id = abstraction.system_id;
    Ok((u, id))
}

