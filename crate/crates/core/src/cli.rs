//! Command-line front end. `run` parses arguments, dispatches to the solvers
//! and returns the process exit code.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bubble::{bubble_residual, eval_bubble, make_bubble, BubbleParams};
use crate::config::{ExponentConfig, RunConfig};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, RadialGrid};
use crate::moving_plane::{
    critical_plane_scan, default_lambdas, exceedance_sets, greens_reflection_identity, reflection_inequality_check,
    CartesianSampler, PlaneParam, DEFAULT_IDENTITY_BUDGET,
};
use crate::ode::Tolerances;
use crate::potential::{
    hls_functional, newton_potential_radial, picard_iterate, KernelSpec, PicardState, PICARD_MAX_STEPS, PICARD_TOL,
};
use crate::shooting::{
    check_integral_identity, classify, sweep_with, ShootInput, DEFAULT_SWEEP_RATIOS,
};
use crate::verify::{run_criterion, criterion_ids, VerifyOptions, DEFAULT_SEED, PROPERTY_CASES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "boundstate", version, about = "Radial solver and verifier for critical Schrödinger systems")]
struct Cli {
    /// JSON run configuration (n, alpha, beta, grid)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; a manifest is written next to it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (falls back to BV_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integration / iteration tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Evaluate the bubble family
    #[command(subcommand)]
    Bubble(BubbleCmd),
    /// Integrate and classify one trajectory
    Shoot {
        #[arg(long)]
        u0: f64,
        #[arg(long)]
        v0: f64,
        #[arg(long, default_value_t = 1e4)]
        rmax: f64,
    },
    /// Classify (base, ratio·base) for each ratio
    Sweep {
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        base: f64,
    },
    /// Check the radial integral identity on a shot profile
    Identity {
        #[arg(long, default_value_t = 1.0)]
        u0: f64,
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        radii: Vec<f64>,
    },
    /// Newtonian potential of a radial source
    #[command(subcommand)]
    Potential(PotentialCmd),
    /// Picard iteration of the integral system
    Picard {
        #[arg(long, value_enum, default_value_t = PicardInit::Bubble)]
        init: PicardInit,
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = PICARD_MAX_STEPS)]
        max_steps: usize,
    },
    /// HLS ratio on the bubble source family
    Hls {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.2)]
        rexp: f64,
        #[arg(long, default_value_t = 1.2)]
        sexp: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = crate::potential::DEFAULT_ANGULAR_NODES)]
        angular: usize,
    },
    /// Moving-plane scans and checks
    #[command(subcommand)]
    Mp(MpCmd),
    /// Run every acceptance check and print a summary table
    VerifyAll {
        /// Restrict to these criterion ids
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u32>>,
        #[arg(long, default_value_t = PROPERTY_CASES)]
        cases: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BubbleCmd {
    /// Value at a point, or the radial profile with --out
    Eval {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Finite-difference residual on the configured grid
    Residual {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PotentialCmd {
    /// Apply the potential to a CSV source (r,value), or to the bubble source
    Apply {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PicardInit {
    Bubble,
    Zero,
}

#[derive(Debug, Args, Serialize)]
struct FieldArgs {
    /// Bubble centre (comma separated); defaults to the origin
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Debug, Args, Serialize)]
struct SamplerArgs {
    #[arg(long, default_value_t = 8.0)]
    half_width: f64,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Full Cartesian grid instead of the axisymmetric one
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MpCmd {
    /// Sweep planes x₁ = λ and report the critical position
    Scan {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambdas: Option<Vec<f64>>,
    },
    /// Exceedance sets and reflection estimates at one plane
    Check {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        /// Write the exceedance nodes of u as CSV
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Both sides of the reflected Green representation at x
    Identity {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[command(flatten)]
        field: FieldArgs,
    },
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: Option<String>,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub outputs: Vec<String>,
    pub seed: u64,
    pub version: String,
}

impl RunManifest {
    /// `<out>.manifest.json`
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}

struct Context {
    run: RunConfig,
    config: ExponentConfig,
    out: Option<PathBuf>,
    seed: u64,
    tol: Option<f64>,
    extra_outputs: Vec<PathBuf>,
}

impl Context {
    fn grid(&self) -> Result<RadialGrid> {
        self.run.radial_grid()
    }

    fn tolerances(&self) -> Tolerances {
        self.tol.map_or_else(Tolerances::default, |t| Tolerances { abs: t, rel: t })
    }

    /// Write `body` to `--out` when given, else to stdout.
    fn emit(&self, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match &self.out {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                body(&mut w)?;
                w.flush()?;
                Ok(())
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock)?;
                lock.flush()?;
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit(|w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

enum Status {
    Ok,
    AssertionFailed,
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::AssertionFailed) => EXIT_ASSERTION,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn configure_threads(requested: Option<usize>) -> Result<()> {
    let threads = match requested {
        Some(n) => Some(n),
        None => match std::env::var("BV_THREADS") {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("BV_THREADS = {s:?} is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        // a pool built earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<Status> {
    configure_threads(cli.threads)?;
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("--tol must be positive (got {t})")));
        }
    }
    let run = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = run.exponents()?;
    let mut ctx = Context {
        run,
        config,
        out: cli.out.clone(),
        seed: cli.seed,
        tol: cli.tol,
        extra_outputs: Vec::new(),
    };
    let status = dispatch(&cli.command, &mut ctx)?;
    if let Some(out) = &cli.out {
        let mut outputs = vec![out.display().to_string()];
        outputs.extend(ctx.extra_outputs.iter().map(|p| p.display().to_string()));
        let manifest = RunManifest {
            config: cli.config.as_ref().map(|p| p.display().to_string()),
            subcommand: subcommand_name(&cli.command).to_string(),
            parameters: serde_json::json!({
                "command": serde_json::to_value(&cli.command)?,
                "run_config": serde_json::to_value(&ctx.run)?,
                "tol": cli.tol,
                "threads": cli.threads,
            }),
            outputs,
            seed: cli.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let file = File::create(RunManifest::path_for(out))?;
        serde_json::to_writer_pretty(file, &manifest)?;
    }
    Ok(status)
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Bubble(_) => "bubble",
        Command::Shoot { .. } => "shoot",
        Command::Sweep { .. } => "sweep",
        Command::Identity { .. } => "identity",
        Command::Potential(_) => "potential",
        Command::Picard { .. } => "picard",
        Command::Hls { .. } => "hls",
        Command::Mp(_) => "mp",
        Command::VerifyAll { .. } => "verify-all",
    }
}

fn write_series(w: &mut dyn Write, header: [&str; 2], r: &[f64], values: &[f64]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for (ri, vi) in r.iter().zip(values) {
        csv.write_record([fmt_f64(*ri), fmt_f64(*vi)])?;
    }
    csv.flush()?;
    Ok(())
}

fn bubble_of(ctx: &Context, field: &FieldArgs) -> Result<BubbleParams> {
    let n = ctx.config.n();
    let center = field.center.clone().unwrap_or_else(|| vec![0.0; n]);
    make_bubble(&ctx.config, &center, field.t)
}

fn sampler_of(ctx: &Context, args: &SamplerArgs) -> Result<CartesianSampler> {
    let n = ctx.config.n();
    if args.full {
        CartesianSampler::full(n, args.half_width, args.nodes)
    } else {
        CartesianSampler::axisymmetric(n, args.half_width, args.nodes)
    }
}

fn dispatch(cmd: &Command, ctx: &mut Context) -> Result<Status> {
    match cmd {
        Command::Bubble(BubbleCmd::Eval { t, x }) => {
            let b = BubbleParams::centered(&ctx.config, *t)?;
            match x {
                Some(x) => {
                    if x.len() != ctx.config.n() {
                        return Err(Error::LengthMismatch {
                            expected: ctx.config.n(),
                            got: x.len(),
                        });
                    }
                    let value = eval_bubble(&b, x);
                    ctx.emit(|w| Ok(writeln!(w, "{}", fmt_f64(value))?))?;
                }
                None => {
                    let grid = ctx.grid()?;
                    ctx.emit(|w| b.write_csv(&grid, w))?;
                }
            }
        }
        Command::Bubble(BubbleCmd::Residual { t }) => {
            let b = BubbleParams::centered(&ctx.config, *t)?;
            let residual = bubble_residual(&b, &ctx.config, &ctx.grid()?)?;
            ctx.emit_json(&serde_json::json!({ "t": t, "c": b.c(), "residual": residual }))?;
        }
        Command::Shoot { u0, v0, rmax } => {
            let input = ShootInput::new(ctx.config, *u0, *v0)?
                .with_r_max(*rmax)?
                .with_tolerances(ctx.tolerances())?;
            let outcome = classify(&input)?;
            let summary = serde_json::json!({
                "kind": outcome.kind,
                "crossing": outcome.crossing,
                "diagnostics": outcome.diagnostics,
            });
            ctx.emit(|w| outcome.profile.write_csv(w))?;
            if ctx.out.is_some() {
                println!("{}", serde_json::to_string(&summary)?);
            } else {
                eprintln!("{}", serde_json::to_string(&summary)?);
            }
        }
        Command::Sweep { ratios, base } => {
            let ratios = ratios.clone().unwrap_or_else(|| DEFAULT_SWEEP_RATIOS.to_vec());
            let tol = ctx.tolerances();
            let table = sweep_with(&ctx.config, &ratios, *base, |input| {
                input.with_tolerances(tol).expect("tolerances validated")
            })?;
            ctx.emit(|w| table.write_csv(w))?;
            let bad = table.violations();
            if !bad.is_empty() {
                eprintln!("bound-state assertion failed at ratios {bad:?}");
                return Ok(Status::AssertionFailed);
            }
        }
        Command::Identity { u0, v0, radii } => {
            let input = ShootInput::new(ctx.config, *u0, *v0)?.with_tolerances(ctx.tolerances())?;
            let outcome = classify(&input)?;
            let report = check_integral_identity(&outcome.profile, &ctx.config, radii)?;
            ctx.emit_json(&report)?;
        }
        Command::Potential(PotentialCmd::Apply { input, t }) => {
            let n = ctx.config.n();
            let (grid, f) = match input {
                Some(path) => read_series(path)?,
                None => {
                    let grid = ctx.grid()?;
                    let b = BubbleParams::centered(&ctx.config, *t)?;
                    let p = ctx.config.critical_exponent();
                    let f = grid.nodes().iter().map(|&r| b.radial(r).powf(p)).collect();
                    (grid, f)
                }
            };
            let u = newton_potential_radial(&f, &grid, n)?;
            ctx.emit(|w| write_series(w, ["r", "value"], grid.nodes(), &u))?;
        }
        Command::Picard {
            init,
            perturb,
            t,
            max_steps,
        } => {
            let grid = ctx.grid()?;
            let mut pair = BubbleParams::centered(&ctx.config, *t)?.sample_pair(&grid);
            let scale = match init {
                PicardInit::Bubble => 1.0 + perturb,
                PicardInit::Zero => 0.0,
            };
            for x in pair.u.iter_mut().chain(pair.v.iter_mut()) {
                *x *= scale;
            }
            for x in pair.du.iter_mut().chain(pair.dv.iter_mut()) {
                *x *= scale;
            }
            let tol = ctx.tol.unwrap_or(PICARD_TOL);
            let mut lines = Vec::new();
            let run = picard_iterate(PicardState::new(pair), &ctx.config, *max_steps, tol, |s| {
                lines.push(serde_json::json!({
                    "step": s.step,
                    "residual": s.residual,
                    "degenerate": s.degenerate,
                }));
            });
            // diagnostics are written even when the iteration fails
            ctx.emit(|w| {
                for line in &lines {
                    writeln!(w, "{}", serde_json::to_string(line)?)?;
                }
                Ok(())
            })?;
            let run = run?;
            log::info!("picard: {} steps, converged = {}", run.residuals.len(), run.converged);
        }
        Command::Hls {
            lambda,
            rexp,
            sexp,
            t,
            angular,
        } => {
            let n = ctx.config.n();
            let grid = ctx.grid()?;
            let kernel = KernelSpec::new(n, *lambda)?.with_angular_nodes(*angular)?;
            let b = BubbleParams::centered(&ctx.config, *t)?;
            let p = ctx.config.critical_exponent();
            let f: Vec<f64> = grid.nodes().iter().map(|&r| b.radial(r).powf(p)).collect();
            let ratio = hls_functional(&f, &f, &grid, &kernel, *rexp, *sexp)?;
            ctx.emit_json(&serde_json::json!({
                "n": n, "lambda": lambda, "rexp": rexp, "sexp": sexp, "t": t, "ratio": ratio,
            }))?;
        }
        Command::Mp(MpCmd::Scan {
            field,
            sampler,
            lambdas,
        }) => {
            let b = bubble_of(ctx, field)?;
            let s = sampler_of(ctx, sampler)?;
            let lambdas = lambdas.clone().unwrap_or_else(|| default_lambdas(&s));
            let f = |x: &[f64]| eval_bubble(&b, x);
            let scan = critical_plane_scan(&f, &f, &s, &lambdas)?;
            ctx.emit_json(&scan)?;
        }
        Command::Mp(MpCmd::Check {
            lambda,
            field,
            sampler,
            dump,
        }) => {
            let b = bubble_of(ctx, field)?;
            let s = sampler_of(ctx, sampler)?;
            let plane = PlaneParam::along_e1(ctx.config.n(), *lambda)?;
            let f = |x: &[f64]| eval_bubble(&b, x);
            let report = reflection_inequality_check(&f, &f, &plane, &ctx.config, &s)?;
            if let Some(path) = dump {
                let set = exceedance_sets(&f, &plane, &s)?;
                let mut csv = csv::Writer::from_path(path)?;
                let header: Vec<String> = (1..=ctx.config.n()).map(|i| format!("x{i}")).collect();
                csv.write_record(&header)?;
                for x in &set.nodes {
                    csv.write_record(x.iter().map(|v| fmt_f64(*v)))?;
                }
                csv.flush()?;
                ctx.extra_outputs.push(path.clone());
            }
            ctx.emit_json(&report)?;
        }
        Command::Mp(MpCmd::Identity { lambda, x, field }) => {
            let b = bubble_of(ctx, field)?;
            let plane = PlaneParam::along_e1(ctx.config.n(), *lambda)?;
            let sides = greens_reflection_identity(&b, &plane, x, &ctx.config, DEFAULT_IDENTITY_BUDGET)?;
            ctx.emit_json(&serde_json::json!({
                "lhs": sides.lhs,
                "rhs": sides.rhs,
                "relative_gap": sides.relative_gap(),
                "nodes": sides.nodes,
            }))?;
        }
        Command::VerifyAll { only, cases } => {
            let opts = VerifyOptions {
                seed: ctx.seed,
                property_cases: *cases,
            };
            let ids = only.clone().unwrap_or_else(criterion_ids);
            let mut reports = Vec::new();
            for id in ids {
                let report = run_criterion(id, &opts)?;
                eprintln!(
                    "{} {:>2} {:<26} {:>8.3}s  {}",
                    if report.passed { "PASS" } else { "FAIL" },
                    report.id,
                    report.name,
                    report.seconds,
                    report.detail
                );
                reports.push(report);
            }
            let all = reports.iter().all(|r| r.passed);
            let summary: BTreeMap<String, bool> = reports.iter().map(|r| (r.id.to_string(), r.passed)).collect();
            ctx.emit_json(&serde_json::json!({ "passed": all, "criteria": summary, "reports": reports }))?;
            if !all {
                return Ok(Status::AssertionFailed);
            }
        }
    }
    Ok(Status::Ok)
}

/// Two-column CSV with header (r, value).
fn read_series(path: &Path) -> Result<(RadialGrid, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut r = Vec::new();
    let mut f = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::Parse(format!("{}: expected columns r,value", path.display())));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("{}: bad number {s:?}", path.display())))
        };
        r.push(parse(&record[0])?);
        f.push(parse(&record[1])?);
    }
    Ok((RadialGrid::new(r)?, f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(["boundstate", "shoot", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(["boundstate"]), EXIT_USAGE);
        let help = Cli::try_parse_from(["boundstate", "--help"]).unwrap_err();
        assert!(!help.use_stderr());
    }

    #[test]
    fn manifest_path_sits_next_to_output() {
        assert_eq!(
            RunManifest::path_for(Path::new("/tmp/a/profile.csv")),
            PathBuf::from("/tmp/a/profile.csv.manifest.json")
        );
    }

    #[test]
    fn bad_inputs_map_to_exit_codes() {
        assert_eq!(run(["boundstate", "shoot", "--u0", "-1", "--v0", "1"]), EXIT_USAGE);
        assert_eq!(run(["boundstate", "--tol", "0", "bubble", "residual"]), EXIT_USAGE);
    }
}
