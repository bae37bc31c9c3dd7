//! Command-line front end. [`run`] returns the process exit code:
//! 0 success, 1 bad input, 2 search limit reached, 3 a bound's
//! precondition does not hold, 4 verification found a violation.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchItem, BenchOptions, Mode};
use crate::bnb::{solve, BnbConfig, BoundMode};
use crate::bounds::{diag_dom_bounds, eig_bounds, eig_bounds_scaled, near_aligned_bounds, prob_bound};
use crate::error::Error;
use crate::generate::{self, generate, instance_id, read_ensemble, EnsembleSpec};
use crate::instance::Instance;
use crate::verify::{check_relaxation, relax, run_battery, Fault, Which, VERIFY_MAX_N};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_LIMIT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sparse-ellipsoid", version, about = "Sparsest point in an ellipsoid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundArg {
    None,
    Cont,
    Diag,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WhichArg {
    Cont,
    Diag,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ratios,
    Bnb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundsArg {
    Eig,
    Dd,
    Naa,
    Prob,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    BnbOffByOne,
    KOverShort,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance exactly by branch and bound.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "diag")]
        bound: BoundArg,
        #[arg(long, default_value_t = 20)]
        relax_min_dim: usize,
        #[arg(long)]
        node_limit: Option<usize>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower bound from one relaxation, with a checkable certificate.
    Relax {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        which: WhichArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio or node-count benchmark over an ensemble.
    Bench {
        /// Ensemble spec as JSON text, a spec file, or a manifest file.
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value = "ratios")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        with_bb: bool,
        #[arg(long, default_value_t = 20)]
        relax_min_dim: usize,
        #[arg(long)]
        node_limit: Option<usize>,
    },
    /// Closed-form bounds on the largest feasible zero count.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        which: BoundsArg,
        /// JSON array of positive scale factors.
        #[arg(long)]
        scale: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Cross-check every solver against brute force on small instances.
    Verify {
        #[arg(long)]
        spec: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Write an ensemble and its manifest to a directory.
    Generate {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotDiagonallyDominant { .. } | Error::AlignmentTooWeak { .. } => EXIT_PRECONDITION,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

/// What a `--spec` argument resolved to.
enum SpecSource {
    Spec(EnsembleSpec),
    Manifest(EnsembleSpec, Vec<Instance>),
}

fn load_spec(arg: &str) -> Result<SpecSource, Failure> {
    let path = Path::new(arg);
    let text = if path.is_file() { std::fs::read_to_string(path).map_err(|e| input(e.to_string()))? } else { arg.to_string() };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| input(format!("spec: {e}")))?;
    if value.get("files").is_some() {
        let (manifest, instances) = read_ensemble(path)?;
        return Ok(SpecSource::Manifest(manifest.spec, instances));
    }
    let spec: EnsembleSpec = serde_json::from_value(value).map_err(|e| input(format!("spec: {e}")))?;
    Ok(SpecSource::Spec(spec))
}

fn items_from(source: SpecSource) -> Result<Vec<BenchItem>, Failure> {
    let (spec, instances) = match source {
        SpecSource::Spec(s) => {
            let inst = generate(&s)?;
            (s, inst)
        }
        SpecSource::Manifest(s, inst) => (s, inst),
    };
    Ok(instances
        .into_iter()
        .enumerate()
        .map(|(i, instance)| BenchItem {
            id: instance_id(&spec, i),
            class: spec.class.name().to_string(),
            parameter: spec.parameter(),
            instance,
        })
        .collect())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| input(e.to_string())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn execute(cmd: Command) -> Result<i32, Failure> {
    match cmd {
        Command::Solve { instance, bound, relax_min_dim, node_limit, time_limit, out } => {
            let inst = Instance::load(&instance)?;
            let mode = match bound {
                BoundArg::None => BoundMode::None,
                BoundArg::Cont => BoundMode::Cont,
                BoundArg::Diag => BoundMode::Diag,
            };
            let cfg = BnbConfig {
                relax_min_dim,
                node_limit,
                time_limit: time_limit.map(Duration::from_secs_f64),
                ..BnbConfig::with_bound(mode)
            };
            let report = solve(&inst, &cfg)?;
            emit(out.as_deref(), &json(&report))?;
            Ok(if report.proven_optimal { EXIT_OK } else { EXIT_LIMIT })
        }
        Command::Relax { instance, which, out } => {
            let inst = Instance::load(&instance)?;
            let which = match which {
                WhichArg::Cont => Which::Cont,
                WhichArg::Diag => Which::Diag,
            };
            let result = relax(&inst, which)?;
            let rechecked = check_relaxation(&inst, &result)?;
            if rechecked != result.lower_bound {
                return Err(Failure {
                    code: EXIT_VERIFY,
                    message: format!("certificate gives {rechecked}, reported {}", result.lower_bound),
                });
            }
            emit(out.as_deref(), &json(&result))?;
            Ok(EXIT_OK)
        }
        Command::Bench { spec, mode, out, with_bb, relax_min_dim, node_limit } => {
            let items = items_from(load_spec(&spec)?)?;
            let opts = BenchOptions {
                mode: match mode {
                    ModeArg::Ratios => Mode::Ratios,
                    ModeArg::Bnb => Mode::Bnb,
                },
                with_plain_bb: with_bb,
                relax_min_dim,
                node_limit,
                time_limit: None,
            };
            let mut records = Vec::new();
            let mut failed = false;
            for r in bench::run(&items, &opts) {
                match r {
                    Ok(rec) => records.push(rec),
                    Err((id, e)) => {
                        failed = true;
                        eprintln!("failed: {id}: {e}");
                    }
                }
            }
            let mut buf = Vec::new();
            bench::write_csv(&records, &mut buf)?;
            match out {
                Some(p) => std::fs::write(&p, &buf).map_err(|e| input(e.to_string()))?,
                None => std::io::stdout().write_all(&buf).map_err(|e| input(e.to_string()))?,
            }
            Ok(if failed { EXIT_INPUT } else { EXIT_OK })
        }
        Command::Bounds { instance, which, scale, epsilon } => {
            let inst = Instance::load(&instance)?;
            let text = match which {
                BoundsArg::Eig => match scale {
                    Some(p) => {
                        let s: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&p).map_err(|e| input(e.to_string()))?)
                            .map_err(|e| input(format!("scale: {e}")))?;
                        json(&eig_bounds_scaled(&inst, &s)?)
                    }
                    None => json(&eig_bounds(&inst)?),
                },
                BoundsArg::Dd => json(&diag_dom_bounds(&inst)?),
                BoundsArg::Naa => json(&near_aligned_bounds(&inst, None)?),
                BoundsArg::Prob => json(&prob_bound(&inst, epsilon)?),
            };
            emit(None, &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify { spec, trials, inject_fault } => {
            let items = match load_spec(&spec)? {
                SpecSource::Spec(s) => {
                    if s.n > VERIFY_MAX_N {
                        return Err(input(format!("verify supports n <= {VERIFY_MAX_N}, got {}", s.n)));
                    }
                    generate(&EnsembleSpec { count: trials, ..s })?
                }
                SpecSource::Manifest(_, inst) => inst.into_iter().take(trials).collect(),
            };
            let fault = inject_fault.map(|f| match f {
                FaultArg::BnbOffByOne => Fault::BnbOffByOne,
                FaultArg::KOverShort => Fault::KOverShort,
            });
            let report = run_battery(&items, fault)?;
            for v in &report.violations {
                eprintln!("violation: {v}");
            }
            println!("{} instances, {} checks, {} violations", report.instances, report.checks, report.violations.len());
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Generate { spec, out_dir } => {
            let spec = match load_spec(&spec)? {
                SpecSource::Spec(s) => s,
                SpecSource::Manifest(s, _) => s,
            };
            let manifest = generate::write_ensemble(&spec, &out_dir)?;
            println!("wrote {} instances to {}", manifest.files.len(), out_dir.display());
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
