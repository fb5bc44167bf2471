//! `mlh` -- batch driver for the multilayer heat toolkit.
//!
//! Subcommands map one-to-one onto the library routes:
//!
//! * `kernel`    closed-form transition densities on a grid (CSV)
//! * `expand`    small-time expansion coefficients and partial sums (CSV)
//! * `simulate`  Monte Carlo estimate of E[h(Y_t)] (JSON summary,
//!               optional path dump)
//! * `solve-pde` finite-volume solution profile (CSV)
//! * `compare`   cross-route residual report (JSON, exit 1 on tolerance
//!               failure)
//!
//! All inputs come from a JSON job config (`--config`); outputs are pure
//! functions of (config, seed), so re-running a command reproduces its
//! output byte for byte. Exit codes: 0 success, 1 tolerance failure,
//! 2 usage or validation error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mlh_core::expansion::{self, PiecewiseInitialData};
use mlh_core::kernels::{self, KernelForm};
use mlh_core::medium::PhysicalMedium;
use mlh_core::montecarlo::{self, SamplerConfig};
use mlh_core::pde;
use mlh_core::quad::integrate_with_breaks;

#[derive(Parser)]
#[command(name = "mlh", version, about = "multilayer heat: kernels, expansions, sampling, PDE")]
struct Cli {
    /// Path to the JSON job configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress warnings and progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form transition density over a (t, x, y) grid.
    Kernel,
    /// Small-time expansion coefficients b_k and partial sums.
    Expand,
    /// Monte Carlo estimate of E[h(Y_t)] with optional path dump.
    Simulate,
    /// Finite-volume solution profile at one horizon.
    SolvePde,
    /// Cross-route comparison report with pass/fail tolerances.
    Compare,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobConfig {
    medium: PhysicalMedium,
    #[serde(default)]
    initial_data: Option<InitialDataConfig>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    kernel: Option<KernelConfig>,
    #[serde(default)]
    expand: Option<ExpandConfig>,
    #[serde(default)]
    simulate: Option<SimulateConfig>,
    #[serde(default)]
    solve_pde: Option<SolvePdeConfig>,
    #[serde(default)]
    compare: Option<CompareConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDataConfig {
    pieces: [Vec<f64>; 3],
    order: usize,
    #[serde(default)]
    clamp: Option<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelConfig {
    form: String,
    times: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpandConfig {
    x: Vec<f64>,
    times: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    x0: f64,
    t: f64,
    n_paths: usize,
    #[serde(default = "default_dt_max")]
    dt_max: f64,
    #[serde(default = "default_coupling_eps")]
    coupling_eps: f64,
    #[serde(default)]
    dump_paths: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolvePdeConfig {
    t: f64,
    n_cells: usize,
    dt: f64,
    #[serde(default)]
    domain: Option<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareConfig {
    x: Vec<f64>,
    t: f64,
    #[serde(default = "default_n_paths")]
    n_paths: usize,
    #[serde(default = "default_dx")]
    dx: f64,
    #[serde(default = "default_compare_dt")]
    dt: f64,
    #[serde(default = "default_mc_sigmas")]
    mc_sigmas: f64,
    #[serde(default = "default_dt_max")]
    dt_max: f64,
    #[serde(default = "default_coupling_eps")]
    coupling_eps: f64,
}

fn default_dt_max() -> f64 {
    1e-3
}
fn default_coupling_eps() -> f64 {
    1e-8
}
fn default_n_paths() -> usize {
    100_000
}
fn default_dx() -> f64 {
    1e-3
}
fn default_compare_dt() -> f64 {
    2e-5
}
fn default_mc_sigmas() -> f64 {
    3.0
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
    fn tolerance(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
}

impl From<mlh_core::Error> for Failure {
    fn from(e: mlh_core::Error) -> Failure {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::usage(format!("I/O error: {e}"))
    }
}

struct Job {
    config: JobConfig,
    config_sha256: String,
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Job {
    fn initial_data(&self) -> Result<PiecewiseInitialData, Failure> {
        let spec = self
            .config
            .initial_data
            .as_ref()
            .ok_or_else(|| Failure::usage("config is missing the `initial_data` section"))?;
        Ok(PiecewiseInitialData::from_polynomials(
            spec.pieces.clone(),
            spec.order,
            spec.clamp,
        )?)
    }

    fn metadata_line(&self) -> String {
        format!(
            "# mlh {} config_sha256={} seed={}",
            env!("CARGO_PKG_VERSION"),
            self.config_sha256,
            self.seed
        )
    }

    fn write_output(&self, content: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, content)?,
            None => write_stdout(content)?,
        }
        Ok(())
    }

    fn write_sibling(&self, suffix: &str, content: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
                let sibling = path.with_file_name(format!("{stem}.{suffix}"));
                std::fs::write(sibling, content)?;
            }
            None => write_stdout(content)?,
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Ok(threads) = std::env::var("MLH_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| Failure::usage(format!("MLH_THREADS must be an integer, got `{threads}`")))?;
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::usage("--config <path> is required"))?;
    let raw = std::fs::read(config_path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", config_path.display())))?;
    let config: JobConfig = serde_json::from_slice(&raw)
        .map_err(|e| Failure::usage(format!("config parse error: {e}")))?;
    config.medium.validate()?;
    let config_sha256 = hex_digest(&raw);
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let job = Job { config, config_sha256, seed, out: cli.out, quiet: cli.quiet };
    match cli.command {
        Command::Kernel => cmd_kernel(&job),
        Command::Expand => cmd_expand(&job),
        Command::Simulate => cmd_simulate(&job),
        Command::SolvePde => cmd_solve_pde(&job),
        Command::Compare => cmd_compare(&job),
    }
}

/// Write to stdout, treating a closed pipe as a clean stop.
fn write_stdout(content: &str) -> std::io::Result<()> {
    use std::io::Write;
    match std::io::stdout().write_all(content.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => other,
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

fn cmd_kernel(job: &Job) -> Result<(), Failure> {
    let spec = job
        .config
        .kernel
        .as_ref()
        .ok_or_else(|| Failure::usage("config is missing the `kernel` section"))?;
    let form: KernelForm = spec.form.parse().map_err(Failure::usage)?;
    let medium = &job.config.medium;
    let params = medium.to_sde_params();
    let mut csv = String::new();
    let _ = writeln!(csv, "{}", job.metadata_line());
    let _ = writeln!(csv, "t,x,y,density,form");
    for &t in &spec.times {
        for &x in &spec.x {
            for &y in &spec.y {
                let eval = match form {
                    KernelForm::SkewBm => {
                        kernels::skew_bm_density(params.gamma_at_zero(), t, x, y)?
                    }
                    KernelForm::SingleAt0 => kernels::kernel_single_0(&params, t, x, y)?,
                    KernelForm::SingleAtA => kernels::kernel_single_a(&params, t, x, y)?,
                    KernelForm::TwoInterfaceSpecial => {
                        kernels::kernel_two_interface(&params, t, x, y)?
                    }
                    KernelForm::MSymmetric => kernels::kernel_m_symmetric(medium, t, x, y)?,
                };
                let _ = writeln!(csv, "{t},{x},{y},{},{}", eval.value, eval.form.as_str());
            }
        }
    }
    job.write_output(&csv)
}

fn cmd_expand(job: &Job) -> Result<(), Failure> {
    let spec = job
        .config
        .expand
        .as_ref()
        .ok_or_else(|| Failure::usage("config is missing the `expand` section"))?;
    let h = job.initial_data()?;
    let params = job.config.medium.to_sde_params();

    let mut coeffs = String::new();
    let _ = writeln!(coeffs, "{}", job.metadata_line());
    let _ = writeln!(coeffs, "x,k,b_k,branch");
    let mut partials = String::new();
    let _ = writeln!(partials, "{}", job.metadata_line());
    let _ = writeln!(partials, "x,t,partial_sum");
    for &x in &spec.x {
        // evaluate once; the coefficients do not depend on t
        let result = expansion::expand_u(&params, &h, x, 1.0)?;
        for (k, b) in result.coefficients.iter().enumerate() {
            let _ = writeln!(coeffs, "{x},{k},{b},{}", result.branch.as_str());
        }
        for &t in &spec.times {
            let _ = writeln!(partials, "{x},{t},{}", result.partial_sum_at(t));
        }
    }
    job.write_output(&coeffs)?;
    job.write_sibling("partial.csv", &partials)
}

#[derive(Serialize)]
struct SimulateSummary {
    estimate: f64,
    std_error: f64,
    n_paths: usize,
    seed: u64,
    t: f64,
    x0: f64,
    config_sha256: String,
    version: String,
}

fn cmd_simulate(job: &Job) -> Result<(), Failure> {
    let spec = job
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| Failure::usage("config is missing the `simulate` section"))?;
    let h = job.initial_data()?;
    let params = job.config.medium.to_sde_params();
    let cfg = SamplerConfig {
        dt_max: spec.dt_max,
        coupling_eps: spec.coupling_eps,
        n_paths: spec.n_paths,
        seed: job.seed,
    };
    let summary = montecarlo::estimate_expectation(&params, &h, spec.x0, spec.t, &cfg)?;
    let out = SimulateSummary {
        estimate: summary.estimate,
        std_error: summary.std_error,
        n_paths: summary.n_paths,
        seed: summary.seed,
        t: spec.t,
        x0: spec.x0,
        config_sha256: job.config_sha256.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("summary serializes");
    text.push('\n');
    job.write_output(&text)?;
    if spec.dump_paths > 0 {
        let mut csv = String::new();
        let _ = writeln!(csv, "{}", job.metadata_line());
        let _ = writeln!(csv, "path_id,t,x,scheme");
        for i in 0..spec.dump_paths.min(spec.n_paths) {
            let path = montecarlo::simulate_path_stream(&params, spec.x0, spec.t, &cfg, i as u64)?;
            let _ = writeln!(csv, "{i},0,{},init", path.states[0]);
            for (step, scheme) in path.schemes.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{i},{},{},{}",
                    path.times[step + 1],
                    path.states[step + 1],
                    scheme.as_str()
                );
            }
        }
        job.write_sibling("paths.csv", &csv)?;
    }
    Ok(())
}

fn cmd_solve_pde(job: &Job) -> Result<(), Failure> {
    let spec = job
        .config
        .solve_pde
        .as_ref()
        .ok_or_else(|| Failure::usage("config is missing the `solve_pde` section"))?;
    let h = job.initial_data()?;
    let medium = &job.config.medium;
    let grid = match spec.domain {
        Some((lo, hi)) => {
            let dx = (hi - lo) / spec.n_cells as f64;
            pde::Grid::build(medium, lo, hi, dx)?
        }
        None => {
            let margin = 12.0
                * (medium.layers.iter().map(|l| l.diffusivity).fold(f64::MIN, f64::max) * spec.t)
                    .sqrt();
            let (lo, hi) = (-margin, medium.a + margin);
            let dx = (hi - lo) / spec.n_cells as f64;
            pde::Grid::build(medium, lo, hi, dx)?
        }
    };
    let field = pde::solve(medium, &h, spec.t, &grid, spec.dt)?;
    let deviation = pde::boundary_deviation(medium, &grid, &field, &h);
    if deviation > 1e-10 && !job.quiet {
        eprintln!(
            "warning: boundary influence {deviation:.2e} detected at the domain edge; \
             the domain may be too small for t = {}",
            spec.t
        );
    }
    let mut csv = String::new();
    let _ = writeln!(csv, "{}", job.metadata_line());
    let _ = writeln!(csv, "x,u");
    for (c, u) in grid.centers().iter().zip(&field.values) {
        let _ = writeln!(csv, "{c},{u}");
    }
    job.write_output(&csv)
}

#[derive(Serialize)]
struct CompareCase {
    x: f64,
    u_expansion: f64,
    u_mc: f64,
    mc_std_error: f64,
    u_pde: f64,
    pde_error_bound: f64,
    residual_expansion_mc: f64,
    residual_expansion_pde: f64,
    residual_mc_pde: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct KernelRouteCase {
    x: f64,
    u_kernel: f64,
    u_pde: f64,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct CompareReport {
    version: String,
    config_sha256: String,
    seed: u64,
    t: f64,
    dx: f64,
    dt: f64,
    n_paths: usize,
    mc_sigmas: f64,
    cases: Vec<CompareCase>,
    kernel_route: Option<Vec<KernelRouteCase>>,
    all_pass: bool,
}

fn cmd_compare(job: &Job) -> Result<(), Failure> {
    let spec = job
        .config
        .compare
        .as_ref()
        .ok_or_else(|| Failure::usage("config is missing the `compare` section"))?;
    let h = job.initial_data()?;
    let medium = &job.config.medium;
    let params = medium.to_sde_params();

    let grid_fine = pde::Grid::for_problem(medium, &spec.x, spec.t, spec.dx)?;
    let field_fine = pde::solve(medium, &h, spec.t, &grid_fine, spec.dt)?;
    let grid_coarse = pde::Grid::for_problem(medium, &spec.x, spec.t, 2.0 * spec.dx)?;
    let field_coarse = pde::solve(medium, &h, spec.t, &grid_coarse, 4.0 * spec.dt)?;

    let cfg = SamplerConfig {
        dt_max: spec.dt_max,
        coupling_eps: spec.coupling_eps,
        n_paths: spec.n_paths,
        seed: job.seed,
    };

    let mut cases = Vec::with_capacity(spec.x.len());
    let mut all_pass = true;
    for &x in &spec.x {
        let u_pde = pde::eval_at(medium, &grid_fine, &field_fine, x);
        let pde_error_bound =
            (pde::eval_at(medium, &grid_coarse, &field_coarse, x) - u_pde).abs() + 1e-8;
        let u_expansion = expansion::expand_u(&params, &h, x, spec.t)?.partial_sum;
        let mc = montecarlo::estimate_expectation(&params, &h, x, spec.t, &cfg)?;
        let tolerance = (spec.mc_sigmas * mc.std_error).max(pde_error_bound);
        let residual_expansion_mc = (u_expansion - mc.estimate).abs();
        let residual_expansion_pde = (u_expansion - u_pde).abs();
        let residual_mc_pde = (mc.estimate - u_pde).abs();
        let pass = residual_expansion_mc <= tolerance
            && residual_expansion_pde <= tolerance
            && residual_mc_pde <= tolerance;
        all_pass &= pass;
        cases.push(CompareCase {
            x,
            u_expansion,
            u_mc: mc.estimate,
            mc_std_error: mc.std_error,
            u_pde,
            pde_error_bound,
            residual_expansion_mc,
            residual_expansion_pde,
            residual_mc_pde,
            tolerance,
            pass,
        });
    }

    // fourth route when the medium admits the closed form
    let kernel_route = if medium.is_beta_matched() {
        let mut rows = Vec::with_capacity(spec.x.len());
        for (&x, case) in spec.x.iter().zip(&cases) {
            let (lo, hi) = kernels::integration_window_with_images(&params, x, spec.t);
            let u_kernel = integrate_with_breaks(
                &|y| {
                    h.eval(medium.a, y)
                        * kernels::kernel_two_interface(&params, spec.t, x, y).unwrap().value
                },
                lo - 0.1,
                hi + 0.1,
                &[0.0, medium.a],
                1e-10,
            );
            let residual = (u_kernel - case.u_pde).abs();
            let tolerance = case.pde_error_bound;
            let pass = residual <= tolerance;
            all_pass &= pass;
            rows.push(KernelRouteCase { x, u_kernel, u_pde: case.u_pde, residual, tolerance, pass });
        }
        Some(rows)
    } else {
        None
    };

    let report = CompareReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: job.config_sha256.clone(),
        seed: job.seed,
        t: spec.t,
        dx: spec.dx,
        dt: spec.dt,
        n_paths: spec.n_paths,
        mc_sigmas: spec.mc_sigmas,
        cases,
        kernel_route,
        all_pass,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    job.write_output(&text)?;
    if !all_pass {
        return Err(Failure::tolerance("comparison residuals exceed tolerances (see report)"));
    }
    if !job.quiet {
        eprintln!("compare: all residuals within tolerance");
    }
    Ok(())
}
