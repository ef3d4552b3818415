use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eo_core::arith::{sieve, IntPolynomial};
use eo_core::averaging::{system_avg_sweep, AverageSpec, IndexSet};
use eo_core::dynsys::{rotation_samples, FiniteSystem, Observable, RotationOrbit};
use eo_core::maximal::{hl_window_max, hopf_weak_type};
use eo_core::oscillation::{oscillation_sum, oscillation_sum_system, BlockPartition, SystemVariant};
use eo_core::report::tightest;
use eo_core::signal::Signal;
use eo_core::spectral::{kernel_tail_sweep, kernel_tail_values, periodogram};
use eo_core::transference::{
    orbit_strong_constant, orbit_weak_constant, transfer_bilinear_check, transfer_weak_type_check,
};
use eo_core::arith::lacunary;
use eo_core::InequalityReport;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{GoldenMode, Overrides, RunConfig, SEED_ENV};
use crate::error::{usage, CliError, CliResult};
use crate::golden::Goldens;
use crate::inputs::{parse_observable, parse_signal, parse_system, random_values, rng_for};
use crate::output::{emit, fmt_f64};
use crate::suite::{run_suite, shift_maximal_upper, GoldenStore, GOLDEN_RTOL, KERNEL_CEILING, KERNEL_GRID};

pub const DEFAULT_GOLDENS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/goldens/core.golden");

#[derive(Debug, Parser)]
#[command(name = "eo", version, about = "Ergodic averages, maximal functions and their inequalities")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Lacunary ratio ρ > 1.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// DFT grid size (a power of two).
    #[arg(long, global = true)]
    pub grid_size: Option<usize>,
    /// Base directory for relative `--out` paths.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Golden handling: write, check or off.
    #[arg(long, global = true)]
    pub golden: Option<String>,
    /// Golden file.
    #[arg(long, global = true, default_value = DEFAULT_GOLDENS)]
    pub goldens: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ergodic averages on a finite system as CSV `N,x,re,im`.
    Avg(AvgArgs),
    /// Ensemble check of a maximal inequality, as a JSON report.
    Maximal(MaximalArgs),
    /// Oscillation sum over a block partition, as JSON.
    Oscillation(OscillationArgs),
    /// Kernel sweeps and periodograms as CSV `theta,value`.
    Spectral(SpectralArgs),
    /// Transference check on a finite system, as a JSON report.
    Transfer(TransferArgs),
    /// Runs an acceptance suite and prints a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexKind {
    Full,
    Lacunary,
    Primes,
}

#[derive(Debug, Args)]
pub struct AvgArgs {
    /// cyclic:<m>, identity:<m>, random:<m>[:<seed>] or csv:<path>.
    #[arg(long, default_value = "cyclic:6")]
    pub system: String,
    /// random, const:<c> or list:<values>.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, default_value = "random")]
    pub g: String,
    /// A point of the system, or `all`.
    #[arg(long, default_value = "0")]
    pub x: String,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value = "mono:[0,1]")]
    pub poly_p: String,
    /// Second polynomial; makes the average bilinear.
    #[arg(long)]
    pub poly_q: Option<String>,
    #[arg(long, value_enum, default_value_t = IndexKind::Full)]
    pub index: IndexKind,
    /// Modulation angle θ for the factor e^{iR(n)θ}.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Modulation polynomial R; defaults to n when θ is given.
    #[arg(long)]
    pub poly_r: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaximalCheck {
    /// Window maximal inequality on nonnegative sequences.
    Hl,
    /// Shift maximal inequality on ℤ.
    Shift,
    /// Weak-type inequality on random finite systems.
    Hopf,
}

#[derive(Debug, Args)]
pub struct MaximalArgs {
    #[arg(long, value_enum)]
    pub check: MaximalCheck,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Longest sequence or support length.
    #[arg(long, default_value_t = 256)]
    pub len_max: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantKind {
    Linear,
    Bilinear,
    Prime,
}

#[derive(Debug, Args)]
pub struct OscillationArgs {
    /// Cuts `N_1,N_2,...` or `auto:<ratio>^<K>`.
    #[arg(long)]
    pub blocks: String,
    /// random:<len>, delta:<k> or list:<values>; ignored with --system.
    #[arg(long, default_value = "random:128")]
    pub signal: String,
    /// Run on a finite system instead of a signal.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, value_enum, default_value_t = VariantKind::Linear)]
    pub variant: VariantKind,
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, default_value = "random")]
    pub g: String,
    #[arg(long, default_value = "mono:[0,1]")]
    pub poly_p: String,
    #[arg(long, default_value = "mono:[0,-1]")]
    pub poly_q: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectralMode {
    /// Lacunary kernel tail sum on the grid.
    Kernel,
    /// Periodogram of a rotation orbit.
    Periodogram,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long, value_enum)]
    pub mode: SpectralMode,
    #[arg(long, default_value_t = KERNEL_CEILING)]
    pub ceiling: u64,
    /// Grid size; defaults to 1000003 for kernels and the configured size
    /// for periodograms.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2 - 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub k: i64,
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub k_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[arg(long, default_value = "random:16")]
    pub system: String,
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long, default_value = "random")]
    pub g: String,
    #[arg(long, default_value_t = 8)]
    pub n_bar: u64,
    /// Truncation length; defaults to 8·N̄.
    #[arg(long)]
    pub j: Option<u64>,
    /// Level for the weak-type check; strong type when absent.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// ℤ-side constant; measured on the truncated orbits when absent.
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "core")]
    pub suite: String,
    /// Record wall-clock seconds per criterion.
    #[arg(long)]
    pub timings: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs a parsed command line. `Ok(false)` means a check failed.
pub fn execute(cli: Cli, env_seed: Option<&str>) -> CliResult<bool> {
    let overrides = Overrides {
        seed: cli.seed,
        rho: cli.rho,
        grid_size: cli.grid_size,
        output_dir: cli.output_dir.clone(),
        golden_mode: cli.golden.as_deref().map(str::parse).transpose()?,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides, env_seed)?;
    let out = |p: &Option<PathBuf>| p.as_ref().map(|p| cfg.resolve(p));
    match &cli.command {
        Command::Avg(a) => avg(&cfg, a, out(&a.out).as_deref()),
        Command::Maximal(a) => maximal(&cfg, a, out(&a.out).as_deref()),
        Command::Oscillation(a) => oscillation(&cfg, a, out(&a.out).as_deref()),
        Command::Spectral(a) => spectral(&cfg, a, &cli.goldens, out(&a.out).as_deref()),
        Command::Transfer(a) => transfer(&cfg, a, out(&a.out).as_deref()),
        Command::Verify(a) => verify(&cfg, a, &cli.goldens, out(&a.out).as_deref()),
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(cli, env_seed.as_deref()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_poly(s: &str) -> CliResult<IntPolynomial> {
    s.parse().map_err(|e: eo_core::Error| CliError::Usage(e.to_string()))
}

fn json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Failure(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn observables(
    cfg: &RunConfig,
    sys: &FiniteSystem,
    from_csv: Option<Observable>,
    f: Option<&str>,
    g: &str,
) -> CliResult<(Observable, Observable)> {
    let mut rng = rng_for(cfg.seed, 0);
    let f = match (f, from_csv) {
        (Some(spec), _) => parse_observable(spec, sys.size(), &mut rng)?,
        (None, Some(obs)) => obs,
        (None, None) => parse_observable("random", sys.size(), &mut rng)?,
    };
    let g = parse_observable(g, sys.size(), &mut rng)?;
    Ok((f, g))
}

fn avg(cfg: &RunConfig, a: &AvgArgs, out: Option<&Path>) -> CliResult<bool> {
    if a.n == 0 {
        return usage("--n must be >= 1");
    }
    let (sys, csv_f) = parse_system(&a.system, cfg.seed)?;
    let (f, g) = observables(cfg, &sys, csv_f, a.f.as_deref(), &a.g)?;
    let p = parse_poly(&a.poly_p)?;
    let mut spec = match &a.poly_q {
        Some(q) => AverageSpec::bilinear(p, parse_poly(q)?),
        None => AverageSpec::linear(p),
    };
    spec = match a.index {
        IndexKind::Full => spec,
        IndexKind::Lacunary => spec.with_index(IndexSet::Lacunary(cfg.rho)),
        IndexKind::Primes => spec.with_index(IndexSet::Primes(Arc::new(sieve(a.n.max(2))?))),
    };
    if let Some(theta) = a.theta {
        let r = match &a.poly_r {
            Some(r) => parse_poly(r)?,
            None => IntPolynomial::identity(),
        };
        spec = spec.with_modulation(r, theta);
    } else if a.poly_r.is_some() {
        return usage("--poly-r needs --theta");
    }
    let points: Vec<usize> = if a.x == "all" {
        (0..sys.size()).collect()
    } else {
        let x: usize = a.x.parse().map_err(|_| CliError::Usage(format!("bad point {:?}", a.x)))?;
        if x >= sys.size() {
            return usage(format!("point {x} outside system of size {}", sys.size()));
        }
        vec![x]
    };
    let second = spec.q.as_ref().map(|_| &g);
    let sweeps = points
        .par_iter()
        .map(|&x| system_avg_sweep(&sys, &f, second, x, a.n, &spec))
        .collect::<eo_core::Result<Vec<_>>>()?;
    let mut text = String::from("N,x,re,im\n");
    for (x, sweep) in points.iter().zip(&sweeps) {
        for (i, v) in sweep.iter().enumerate() {
            let n = i as u64 + 1;
            if !spec.index.admits(n) {
                continue;
            }
            if let Some(v) = v {
                text.push_str(&format!("{n},{x},{},{}\n", fmt_f64(v.re), fmt_f64(v.im)));
            }
        }
    }
    emit(out, &text)?;
    Ok(true)
}

fn maximal(cfg: &RunConfig, a: &MaximalArgs, out: Option<&Path>) -> CliResult<bool> {
    if a.trials == 0 || a.len_max == 0 {
        return usage("--trials and --len-max must be positive");
    }
    if !(a.r > 1.0) {
        return usage(format!("--r must exceed 1, got {}", a.r));
    }
    let mut rng = rng_for(cfg.seed, 100);
    let report = match a.check {
        MaximalCheck::Hl => {
            let seqs: Vec<Vec<f64>> = (0..a.trials)
                .map(|_| {
                    let j = rng.gen_range(1..=a.len_max);
                    (0..j).map(|_| rng.gen_range(0.0..1.0)).collect()
                })
                .collect();
            let reports = seqs
                .par_iter()
                .map(|s| hl_window_max(s, a.r))
                .collect::<eo_core::Result<Vec<_>>>()?;
            tightest("hl_window_max", reports)
        }
        MaximalCheck::Shift => {
            let sigs: Vec<Signal> = (0..a.trials)
                .map(|_| {
                    let len = rng.gen_range(1..=a.len_max);
                    Signal::new(0, random_values(&mut rng, len))
                })
                .collect();
            let n_max = 512;
            let reports = sigs
                .par_iter()
                .map(|s| {
                    let (window, upper) = shift_maximal_upper(s, a.r, n_max)?;
                    let c = 2f64.powf(1.0 / a.r) * a.r / (a.r - 1.0);
                    Ok(InequalityReport::new("shift_maximal", upper, c * s.norm(a.r)?, c)
                        .with_param("window_norm", window))
                })
                .collect::<eo_core::Result<Vec<_>>>()?;
            tightest("shift_maximal", reports)
        }
        MaximalCheck::Hopf => {
            let inputs = (0..a.trials)
                .map(|_| {
                    let m = rng.gen_range(1..=a.len_max.min(256));
                    let sys = FiniteSystem::random_with(m, &mut rng)?;
                    let f = Observable::new(random_values(&mut rng, m));
                    Ok((sys, f))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let reports = inputs
                .par_iter()
                .map(|(sys, f)| hopf_weak_type(sys, f, a.lambda))
                .collect::<eo_core::Result<Vec<_>>>()?;
            tightest("hopf_weak_type", reports)
        }
    };
    let report = report.with_param("r", a.r).with_param("seed", cfg.seed);
    emit(out, &json(&report)?)?;
    Ok(report.pass)
}

fn oscillation(cfg: &RunConfig, a: &OscillationArgs, out: Option<&Path>) -> CliResult<bool> {
    let blocks: BlockPartition = a.blocks.parse().map_err(|e: eo_core::Error| CliError::Usage(e.to_string()))?;
    let report = match &a.system {
        None => {
            let mut rng = rng_for(cfg.seed, 0);
            let s = parse_signal(&a.signal, &mut rng)?;
            oscillation_sum(&s, &blocks, cfg.rho)?
        }
        Some(spec) => {
            let (sys, csv_f) = parse_system(spec, cfg.seed)?;
            let (f, g) = observables(cfg, &sys, csv_f, a.f.as_deref(), &a.g)?;
            let variant = match a.variant {
                VariantKind::Linear => SystemVariant::Linear(parse_poly(&a.poly_p)?),
                VariantKind::Bilinear => SystemVariant::Bilinear {
                    p: parse_poly(&a.poly_p)?,
                    q: parse_poly(&a.poly_q)?,
                    g: &g,
                },
                VariantKind::Prime => SystemVariant::Prime {
                    q: parse_poly(&a.poly_p)?,
                    table: Arc::new(sieve(blocks.top().max(2))?),
                },
            };
            oscillation_sum_system(&sys, &f, &blocks, cfg.rho, &variant)?
        }
    };
    emit(out, &json(&report)?)?;
    Ok(true)
}

fn spectral(cfg: &RunConfig, a: &SpectralArgs, goldens: &Path, out: Option<&Path>) -> CliResult<bool> {
    let mut text = String::from("theta,value\n");
    let mut ok = true;
    match a.mode {
        SpectralMode::Kernel => {
            let grid = a.grid.unwrap_or(KERNEL_GRID);
            let sweep = kernel_tail_sweep(cfg.rho, a.ceiling, grid)?;
            let set = lacunary(cfg.rho, a.ceiling)?;
            let values = kernel_tail_values(&set, grid);
            for (j, v) in values.iter().enumerate() {
                text.push_str(&format!("{},{}\n", fmt_f64(eo_core::signal::node(grid, j)), fmt_f64(*v)));
            }
            let key = format!("kernel_tail_sup.rho={}", cfg.rho);
            let standard = a.ceiling == KERNEL_CEILING && grid == KERNEL_GRID;
            let mut golden = serde_json::Value::Null;
            match (cfg.golden_mode, standard) {
                (GoldenMode::Write, true) => {
                    let mut g = Goldens::load(goldens)?.unwrap_or_else(|| Goldens::fresh(goldens));
                    g.set(&key, sweep.sup);
                    g.save()?;
                    golden = "written".into();
                }
                (GoldenMode::Check, true) => match Goldens::load(goldens)?.and_then(|g| g.get(&key)) {
                    Some(v) => {
                        ok = (sweep.sup - v).abs() <= GOLDEN_RTOL * v.abs();
                        golden = v.into();
                    }
                    None => eprintln!("note: no golden recorded for {key}"),
                },
                _ => {}
            }
            let summary = serde_json::json!({
                "rho": cfg.rho,
                "ceiling": a.ceiling,
                "grid": grid,
                "sup": sweep.sup,
                "argmax": sweep.argmax,
                "evenness_residual": sweep.evenness_residual,
                "value_at_zero": sweep.value_at_zero,
                "golden": golden,
                "pass": ok,
            });
            eprintln!("{summary}");
        }
        SpectralMode::Periodogram => {
            let grid = a.grid.unwrap_or(cfg.grid_size);
            let orbit = RotationOrbit::new(a.alpha, 0.0, a.n + 1)?;
            let s = rotation_samples(&orbit, a.k);
            let est = periodogram(&s, a.n, grid, a.k_max.min(a.n.saturating_sub(1)))?;
            for (j, v) in est.grid.samples().iter().enumerate() {
                text.push_str(&format!("{},{}\n", fmt_f64(est.grid.node(j)), fmt_f64(v.re)));
            }
            let mass = est.mass_residual();
            let herglotz = est.herglotz_residual();
            ok = mass <= cfg.tolerances.parseval && herglotz <= cfg.tolerances.quadrature;
            let summary = serde_json::json!({
                "n": a.n,
                "grid": grid,
                "mass_residual": mass,
                "herglotz_residual": herglotz,
                "pass": ok,
            });
            eprintln!("{summary}");
        }
    }
    emit(out, &text)?;
    Ok(ok)
}

fn transfer(cfg: &RunConfig, a: &TransferArgs, out: Option<&Path>) -> CliResult<bool> {
    let (sys, csv_f) = parse_system(&a.system, cfg.seed)?;
    let (f, g) = observables(cfg, &sys, csv_f, a.f.as_deref(), &a.g)?;
    let j = a.j.unwrap_or(8 * a.n_bar);
    let report = match a.lambda {
        None => {
            let c = match a.constant {
                Some(c) => c,
                None => orbit_strong_constant(&sys, &f, &g, j, a.n_bar, None)?,
            };
            transfer_bilinear_check(&sys, &f, &g, j, a.n_bar, c)?
        }
        Some(l) => {
            let c = match a.constant {
                Some(c) => c,
                None => orbit_weak_constant(&sys, &f, &g, l, j, a.n_bar, None)?,
            };
            transfer_weak_type_check(&sys, &f, &g, l, j, a.n_bar, c)?
        }
    };
    let report = report.with_param("constant_source", if a.constant.is_some() { "flag" } else { "orbits" });
    emit(out, &json(&report)?)?;
    Ok(report.pass)
}

fn verify(cfg: &RunConfig, a: &VerifyArgs, goldens: &Path, out: Option<&Path>) -> CliResult<bool> {
    let mut store = if a.suite == "empty" {
        GoldenStore::off()
    } else {
        GoldenStore::open(cfg.golden_mode, goldens)?
    };
    let results = run_suite(&a.suite, cfg, &mut store, a.timings)?;
    store.save()?;
    emit(out, &json(&results)?)?;
    for r in &results {
        let name = r.params.get("name").and_then(|v| v.as_str()).unwrap_or("");
        eprintln!(
            "criterion {:>2} {:<26} {}",
            r.criterion,
            name,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(results.iter().all(|r| r.pass))
}
