use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mml::spec_file::{load_spec, parse_coords, DeformKind, DeformationFile, RepSpec};
use mml::sweep::{random_tangent, SweepConfig, DEFAULT_SEED};
use mml::{census, exit, parallel, report, terms};
use mml_core::identity::{margulis_residual_imported, mcshane_sum_imported};
use mml_core::representation::{attach_deformation, build_rep, DEFAULT_PATH_STEP};
use mml_core::{EngineConfig, HoledTorusRep, SeriesReport};

/// Numerical verification of the McShane identity and the Margulis-invariant
/// identity on one-holed tori.
#[derive(Parser)]
#[command(name = "mml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum the gap function over simple closed curves and compare with ℓ(∂).
    VerifyMcshane(VerifyArgs),
    /// Check (1 − ΣH)α(∂) = ΣK(α₁ + α₂) for an affine deformation.
    VerifyMargulis(VerifyArgs),
    /// List simple closed curves by length bin.
    Census(CensusArgs),
    /// Run verify-margulis over a seeded grid of surfaces and deformations.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Deform {
    Path,
    Tangent,
    Zero,
}

#[derive(Args)]
struct RepArgs {
    /// Trace coordinates x,y,z.
    #[arg(long, conflicts_with = "spec")]
    coords: Option<String>,
    /// Representation spec file (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Deformation for --coords; `path` is t ↦ (x + t, y + t, z + t).
    #[arg(long, value_enum, conflicts_with = "spec")]
    deform: Option<Deform>,
    /// Central-difference step for path deformations.
    #[arg(long, default_value_t = DEFAULT_PATH_STEP)]
    h: f64,
    /// Seed for --deform tangent.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct EngineArgs {
    /// Tail tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Largest bin index the truncation may reach.
    #[arg(long, default_value_t = 200)]
    n_ceiling: u32,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    rep: RepArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Imported pants list (CSV) instead of an enumerated torus.
    #[arg(long, conflicts_with_all = ["coords", "spec"], requires = "ell_boundary")]
    terms: Option<PathBuf>,
    /// Boundary length for --terms.
    #[arg(long)]
    ell_boundary: Option<f64>,
    /// Boundary Margulis invariant for --terms.
    #[arg(long, default_value_t = 0.0)]
    alpha_boundary: f64,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    rep: RepArgs,
    /// Last bin to list.
    #[arg(long, default_value_t = 20)]
    n_max: u32,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of random trace triples.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Random tangent deformations per triple.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Residual floor; a cell passes when |residual| ≤ max(floor, tail bound).
    #[arg(long, default_value_t = 1e-5)]
    floor: f64,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    out: OutArgs,
}

impl EngineArgs {
    fn config(&self) -> anyhow::Result<EngineConfig> {
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        if self.n_ceiling < 1 {
            bail!("--n-ceiling must be at least 1");
        }
        Ok(EngineConfig {
            tail_tolerance: self.tol,
            n_ceiling: self.n_ceiling,
            ..EngineConfig::default()
        })
    }
}

impl RepArgs {
    fn load(&self, default: Deform) -> anyhow::Result<HoledTorusRep> {
        if let Some(p) = &self.spec {
            return load_spec(p)?.build();
        }
        let Some(c) = &self.coords else {
            bail!("one of --coords or --spec is required");
        };
        let c = parse_coords(c)?;
        let kind = self.deform.unwrap_or(default);
        if let Deform::Tangent = kind {
            let rep = build_rep(c)?;
            return Ok(attach_deformation(&rep, &random_tangent(&rep, self.seed))?);
        }
        let spec = RepSpec {
            x: c.x,
            y: c.y,
            z: c.z,
            deformation: Some(DeformationFile {
                kind: match kind {
                    Deform::Zero => DeformKind::Zero,
                    _ => DeformKind::Path,
                },
                path_coeffs: Some(vec![[1.0; 3]]),
                tangent_matrices: None,
                h: Some(self.h),
            }),
        };
        spec.build()
    }
}

impl OutArgs {
    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => File::create(p)
                .and_then(|mut f| f.write_all(text.as_bytes()))
                .with_context(|| format!("cannot write {}", p.display())),
            None => Ok(std::io::stdout().write_all(text.as_bytes())?),
        }
    }
}

fn emit_report(r: &SeriesReport, out: &OutArgs) -> anyhow::Result<i32> {
    let text = match out.format.unwrap_or(Format::Json) {
        Format::Json => report::to_json(r),
        Format::Csv => report::to_csv(r)?,
    };
    out.write(&text)?;
    eprintln!(
        "{}: residual {:.3e}, bound {:.3e}, n_max {}",
        if r.passed { "pass" } else { "FAIL" },
        r.residual,
        r.tail_bound.max(r.tolerance),
        r.n_max
    );
    Ok(if r.passed {
        exit::PASS
    } else {
        exit::RESIDUAL_OUT_OF_BOUND
    })
}

fn verify(a: &VerifyArgs, margulis: bool, pool: &rayon::ThreadPool) -> anyhow::Result<i32> {
    let cfg = a.engine.config()?;
    let r = if let Some(p) = &a.terms {
        let f = File::open(p).with_context(|| format!("cannot read {}", p.display()))?;
        let t = terms::read_terms(f)?;
        let lb = a.ell_boundary.context("--terms needs --ell-boundary")?;
        if !(lb > 0.0) {
            bail!("--ell-boundary must be positive");
        }
        if margulis {
            margulis_residual_imported(lb, a.alpha_boundary, &t, cfg.tail_tolerance)
        } else {
            mcshane_sum_imported(lb, &t, cfg.tail_tolerance)
        }
    } else if margulis {
        let rep = a.rep.load(Deform::Path)?;
        pool.install(|| parallel::margulis_residual(&rep, &cfg))?
    } else {
        let rep = a.rep.load(Deform::Zero)?;
        pool.install(|| parallel::mcshane_sum(&rep, &cfg))?
    };
    emit_report(&r, &a.out)
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let pool = parallel::pool()?;
    match cli.command {
        Command::VerifyMcshane(a) => verify(&a, false, &pool),
        Command::VerifyMargulis(a) => verify(&a, true, &pool),
        Command::Census(a) => {
            let rep = a.rep.load(Deform::Zero)?;
            let c = census::census(&rep, a.n_max)?;
            let text = match a.out.format.unwrap_or(Format::Csv) {
                Format::Csv => c.to_csv()?,
                Format::Json => c.to_json(),
            };
            a.out.write(&text)?;
            Ok(exit::PASS)
        }
        Command::Sweep(a) => {
            let cfg = SweepConfig {
                grid: a.grid,
                seeds: a.seeds,
                seed: a.seed,
                engine: a.engine.config()?,
                residual_floor: a.floor,
            };
            let r = pool.install(|| mml::sweep::sweep(&cfg));
            let text = match a.out.format.unwrap_or(Format::Json) {
                Format::Json => r.to_json(),
                Format::Csv => r.to_csv()?,
            };
            a.out.write(&text)?;
            eprintln!(
                "{}/{} cells passed; all interior α above tail in {}, α(∂) ≤ 0 in {}",
                r.passed, r.total, r.positivity_applicable, r.positivity_violations
            );
            Ok(if r.all_passed() && r.positivity_violations == 0 {
                exit::PASS
            } else {
                exit::RESIDUAL_OUT_OF_BOUND
            })
        }
    }
}

fn main() -> ExitCode {
    // usage errors are invalid input, not clap's default status 2
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::INVALID_INPUT as u8
            } else {
                0
            });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        exit::for_error(&e)
    });
    ExitCode::from(code as u8)
}
