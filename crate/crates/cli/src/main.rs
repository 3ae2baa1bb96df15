//! `ellis`: orbits, ω-limits, p-iterates, continuity and the semigroup of
//! a map on a countable ordinal space, with deterministic JSON/CSV reports.

use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ellis_core::continuity::{dichotomy_scan, ContinuityContext, ContinuityVerdict};
use ellis_core::dynamics::{omega_limit, orbit_analyze, OrbitRecord, DEFAULT_BUDGET};
use ellis_core::fixtures::{fixture_by_name, load_dynmap, Fixture, FIXTURE_NAMES};
use ellis_core::iterates::{p_iterate_point, p_iterate_table, semigroup_table, IterateTable};
use ellis_core::ordinal::Point;
use ellis_core::repro::{dichotomy_samples, repro};
use ellis_core::ultrafilter::{crt_solve, CongruenceConstraintSet, CrtOutcome, ResidueSystem};

#[derive(Parser)]
#[command(
    name = "ellis",
    version,
    about = "Ultrafilter iterates of maps on countable ordinals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the orbit of a point.
    Orbit {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        run: RunOpts,
    },
    /// The ω-limit set of a point.
    Omega {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        run: RunOpts,
    },
    /// `f^p` at one point, or as a table on a truncation.
    Piterate {
        #[command(flatten)]
        source: Source,
        #[arg(long = "ultrafilter", required = true)]
        ultrafilters: Vec<String>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 6)]
        truncation: u64,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Continuity verdicts of `f^p` at a point, or at every limit point of
    /// a truncation.
    Continuity {
        #[command(flatten)]
        source: Source,
        #[arg(long = "ultrafilter", required = true)]
        ultrafilters: Vec<String>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 3)]
        truncation: u64,
        #[arg(long, default_value_t = 50)]
        depth: u64,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Cross-sample consistency of continuity verdicts; exits 1 on any
    /// falsification.
    Dichotomy {
        #[command(flatten)]
        source: Source,
        /// Defaults to 20 systems drawn from `--seed`.
        #[arg(long = "ultrafilter")]
        ultrafilters: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        truncation: u64,
        #[arg(long, default_value_t = 50)]
        depth: u64,
        #[command(flatten)]
        run: RunOpts,
    },
    /// The restriction of the iterate semigroup to a truncation.
    Semigroup {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 5)]
        truncation: u64,
        /// Largest period admitted on the truncation.
        #[arg(long, default_value_t = 64)]
        moduli_bound: u64,
        #[command(flatten)]
        run: RunOpts,
    },
    /// Solve a system of congruences `m:r,…`.
    Crt {
        #[arg(long)]
        constraints: String,
        #[command(flatten)]
        out: OutOpts,
    },
    /// Run an acceptance suite: `example-omega2` (A1–A7), `all`, or one id.
    Repro {
        #[arg(default_value = "example-omega2")]
        suite: String,
        #[arg(long, default_value_t = 20)]
        seed: u64,
        #[command(flatten)]
        out: OutOpts,
    },
}

#[derive(Args)]
struct Source {
    /// A `.dynmap` file.
    #[arg(long, conflicts_with = "fixture")]
    map: Option<PathBuf>,
    /// A built-in fixture (default `example-omega2`).
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long, default_value_t = DEFAULT_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Args)]
struct OutOpts {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    /// Bad input: exit 2 with usage.
    Config(String),
    /// The analysis itself failed: exit 1.
    Analysis(String),
}

fn config(e: impl Display) -> Failure {
    Failure::Config(e.to_string())
}

fn analysis(e: impl Display) -> Failure {
    Failure::Analysis(e.to_string())
}

/// A finished report: the rendered text and whether it records a failure.
struct Report {
    text: String,
    failed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}\n\n{}", Cli::command().render_usage());
            ExitCode::from(2)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether the report records a failure.
fn run(command: Command) -> Result<bool, Failure> {
    let (report, out) = match command {
        Command::Orbit { source, point, run } => {
            let fx = source.load()?;
            let x = parse_point(&fx, &point)?;
            let rec = orbit_analyze(&fx.map, &x, run.budget).map_err(analysis)?;
            (orbit_report(&fx, &x, &rec, run.out.format)?, run.out)
        }
        Command::Omega { source, point, run } => {
            let fx = source.load()?;
            let x = parse_point(&fx, &point)?;
            let set = omega_limit(&fx.map, &x, run.budget).map_err(analysis)?;
            let report = match run.out.format {
                Format::Json => json(&serde_json::json!({
                    "fixture": fx.name,
                    "point": x,
                    "omega_limit": set,
                }))?,
                Format::Csv => csv(["point"], set.iter().map(|y| [y.to_string()]))?,
            };
            (report, run.out)
        }
        Command::Piterate {
            source,
            ultrafilters,
            point,
            truncation,
            run,
        } => {
            let fx = source.load()?;
            let ps = parse_ultrafilters(&ultrafilters)?;
            let tables = match point {
                Some(point) => {
                    let x = parse_point(&fx, &point)?;
                    ps.iter()
                        .map(|p| {
                            let v =
                                p_iterate_point(&fx.map, p, &x, run.budget).map_err(analysis)?;
                            Ok(IterateTable::new(format!("p = {p}"), vec![(x.clone(), v)]))
                        })
                        .collect::<Result<Vec<_>, Failure>>()?
                }
                None => {
                    let dom = fx.truncation(truncation);
                    ps.iter()
                        .map(|p| p_iterate_table(&fx.map, p, &dom, run.budget).map_err(analysis))
                        .collect::<Result<Vec<_>, Failure>>()?
                }
            };
            let report = match run.out.format {
                Format::Json => json(&serde_json::json!({ "fixture": fx.name, "tables": tables }))?,
                Format::Csv => csv(
                    ["function", "point", "value"],
                    tables.iter().flat_map(|t| {
                        t.entries()
                            .map(|(x, v)| [t.provenance.clone(), x.to_string(), v.to_string()])
                    }),
                )?,
            };
            (report, run.out)
        }
        Command::Continuity {
            source,
            ultrafilters,
            point,
            truncation,
            depth,
            run,
        } => {
            let fx = source.load()?;
            let ps = parse_ultrafilters(&ultrafilters)?;
            let points = match point {
                Some(point) => vec![parse_point(&fx, &point)?],
                None => fx.space().limit_points(truncation),
            };
            let ctx = ContinuityContext::for_fixture(&fx, run.budget);
            let mut verdicts: Vec<ContinuityVerdict> = Vec::new();
            for x in &points {
                for p in &ps {
                    verdicts.push(ctx.continuity_at(p, x, depth).map_err(analysis)?);
                }
            }
            let report = match run.out.format {
                Format::Json => json(&serde_json::json!({
                    "fixture": fx.name,
                    "depth": depth,
                    "verdicts": verdicts,
                }))?,
                Format::Csv => csv(
                    ["point", "function", "status"],
                    verdicts.iter().map(|v| {
                        [
                            v.point.to_string(),
                            v.function.clone(),
                            v.status.kind().to_string(),
                        ]
                    }),
                )?,
            };
            (report, run.out)
        }
        Command::Dichotomy {
            source,
            ultrafilters,
            seed,
            samples,
            truncation,
            depth,
            run,
        } => {
            let fx = source.load()?;
            let ps = if ultrafilters.is_empty() {
                dichotomy_samples(seed, samples)
            } else {
                parse_ultrafilters(&ultrafilters)?
            };
            let ctx = ContinuityContext::for_fixture(&fx, run.budget).with_seed(seed);
            let rep = dichotomy_scan(&ctx, &fx.meta, &fx.name, &ps, truncation, depth)
                .map_err(analysis)?;
            let failed = !rep.falsifications.is_empty();
            for f in &rep.falsifications {
                eprintln!("falsified {}: {}", f.property, f.detail);
            }
            let mut report = match run.out.format {
                Format::Json => json(&rep)?,
                Format::Csv => csv(
                    ["point", "ultrafilter", "status", "classification"],
                    rep.points.iter().flat_map(|pt| {
                        pt.statuses.iter().map(move |s| {
                            [
                                pt.point.to_string(),
                                s.ultrafilter.clone(),
                                s.status.to_string(),
                                pt.classification.to_string(),
                            ]
                        })
                    }),
                )?,
            };
            report.failed = failed;
            (report, run.out)
        }
        Command::Semigroup {
            source,
            truncation,
            moduli_bound,
            run,
        } => {
            let fx = source.load()?;
            let dom = fx.truncation(truncation);
            let rep = semigroup_table(&fx.map, &dom, moduli_bound, run.budget).map_err(analysis)?;
            let report = match run.out.format {
                Format::Json => json(&rep)?,
                Format::Csv => csv(
                    ["element", "residues", "point", "value"],
                    rep.elements.iter().flat_map(|e| {
                        let residues = e
                            .residues
                            .iter()
                            .map(u64::to_string)
                            .collect::<Vec<_>>()
                            .join(" ");
                        e.table.entries().map(move |(x, v)| {
                            [
                                e.index.to_string(),
                                residues.clone(),
                                x.to_string(),
                                v.to_string(),
                            ]
                        })
                    }),
                )?,
            };
            (report, run.out)
        }
        Command::Crt { constraints, out } => {
            let set: CongruenceConstraintSet = constraints.parse().map_err(config)?;
            if set.constraints.is_empty() {
                return Err(Failure::Config("no constraints given".into()));
            }
            let outcome = crt_solve(&set).map_err(analysis)?;
            let report = match out.format {
                Format::Json => {
                    json(&serde_json::json!({ "constraints": set, "result": outcome }))?
                }
                Format::Csv => {
                    let row = match &outcome {
                        CrtOutcome::Progression { modulus, residue } => [
                            "progression".into(),
                            modulus.to_string(),
                            residue.to_string(),
                            String::new(),
                        ],
                        CrtOutcome::Inconsistent { first, second } => [
                            "inconsistent".into(),
                            String::new(),
                            first.to_string(),
                            second.to_string(),
                        ],
                    };
                    csv(["outcome", "modulus", "residue_or_first", "second"], [row])?
                }
            };
            (report, out)
        }
        Command::Repro { suite, seed, out } => {
            let rep = repro(&suite, seed).ok_or_else(|| {
                Failure::Config(format!(
                    "unknown suite `{suite}` (example-omega2, all, A1–A9)"
                ))
            })?;
            for c in &rep.criteria {
                eprintln!("{}", c.line());
            }
            let mut report = match out.format {
                Format::Json => json(&rep)?,
                Format::Csv => csv(
                    ["criterion", "title", "passed", "summary"],
                    rep.criteria.iter().map(|c| {
                        [
                            c.id.clone(),
                            c.title.clone(),
                            c.passed.to_string(),
                            c.summary.clone(),
                        ]
                    }),
                )?,
            };
            report.failed = !rep.passed;
            (report, out)
        }
    };
    emit(&report, &out)?;
    Ok(report.failed)
}

impl Source {
    fn load(&self) -> Result<Fixture, Failure> {
        match (&self.map, &self.fixture) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| config(format!("{}: {e}", path.display())))?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "map".into());
                load_dynmap(&text, &name).map_err(config)
            }
            (None, Some(name)) => fixture_by_name(name)
                .map_err(|e| config(format!("{e}; known fixtures: {}", FIXTURE_NAMES.join(", ")))),
            (None, None) => fixture_by_name("example-omega2").map_err(config),
        }
    }
}

fn parse_point(fx: &Fixture, s: &str) -> Result<Point, Failure> {
    let x: Point = s.parse().map_err(|e| config(format!("point `{s}`: {e}")))?;
    fx.space().check(&x).map_err(config)?;
    Ok(x)
}

fn parse_ultrafilters(specs: &[String]) -> Result<Vec<ResidueSystem>, Failure> {
    specs
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|e| config(format!("ultrafilter `{s}`: {e}")))
        })
        .collect()
}

fn orbit_report(
    fx: &Fixture,
    x: &Point,
    rec: &OrbitRecord,
    format: Format,
) -> Result<Report, Failure> {
    match format {
        Format::Json => json(&serde_json::json!({ "fixture": fx.name, "point": x, "record": rec })),
        Format::Csv => {
            let rows: Vec<[String; 2]> = match rec {
                OrbitRecord::EventuallyPeriodic { listing, .. } => listing
                    .iter()
                    .enumerate()
                    .map(|(i, y)| [i.to_string(), y.to_string()])
                    .collect(),
                OrbitRecord::ConvergesToCycle { cycle, .. } => cycle
                    .iter()
                    .enumerate()
                    .map(|(i, y)| [format!("cycle {i}"), y.to_string()])
                    .collect(),
                OrbitRecord::Unresolved { .. } => Vec::new(),
            };
            csv(["step", "point"], rows)
        }
    }
}

fn json(value: &impl Serialize) -> Result<Report, Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(analysis)?;
    text.push('\n');
    Ok(Report {
        text,
        failed: false,
    })
}

fn csv<const N: usize>(
    header: [&str; N],
    rows: impl IntoIterator<Item = [String; N]>,
) -> Result<Report, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(analysis)?;
    for row in rows {
        w.write_record(&row).map_err(analysis)?;
    }
    let bytes = w.into_inner().map_err(analysis)?;
    let text = String::from_utf8(bytes).map_err(analysis)?;
    Ok(Report {
        text,
        failed: false,
    })
}

fn emit(report: &Report, out: &OutOpts) -> Result<(), Failure> {
    match &out.out {
        Some(path) => {
            fs::write(path, &report.text).map_err(|e| config(format!("{}: {e}", path.display())))
        }
        None => match io::stdout().lock().write_all(report.text.as_bytes()) {
            // A closed pipe (`ellis … | head`) is not an error.
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(analysis(e)),
            _ => Ok(()),
        },
    }
}
