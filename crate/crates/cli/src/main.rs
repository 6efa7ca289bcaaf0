//! Batch front end: scenario files in, optimization/sweep/simulation
//! artifacts out.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure, 3 invariant
//! failure (from `check`).

use clap::{Args, Parser, Subcommand};
use jointwave_core::design::{design_link, DesignOptions, LinkDesign};
use jointwave_core::link::{assemble, LinkError};
use jointwave_core::random::{random_scenario, random_tx_spectrum};
use jointwave_core::receiver::{mse_matrix, mse_scalar_from_s, wl_objective};
use jointwave_core::scenario::{Scenario, ScenarioConfig, ScenarioError, SourceConfig};
use jointwave_core::simulate::{grid_spectrum_value, run_link, SimConfig, SimError};
use jointwave_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "jointwave", version, about = "Joint transmit/receive waveform design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Override the scenario's bins per half interval.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Relative tolerance of the power-budget match.
    #[arg(long, default_value_t = 1e-9)]
    tol_power: f64,
    /// Relative stationarity tolerance of the optimality certificate.
    #[arg(long, default_value_t = 1e-8)]
    tol_kkt: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Design the optimal waveforms for one scenario.
    Optimize {
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Also evaluate the block-matrix MSE as a cross-check.
        #[arg(long)]
        matrix_mse: bool,
    },
    /// Sweep an axis and tabulate the achieved MSE.
    Sweep {
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep axis: symbol energy over noise in dB, or impropriety.
        #[arg(long, value_parser = ["esn0", "k"])]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Add seeded Monte Carlo columns.
        #[arg(long)]
        simulate: bool,
        /// Monte Carlo symbols per point.
        #[arg(long, default_value_t = 100_000)]
        symbols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo validation of the designed link.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100_000)]
        symbols: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        oversampling: usize,
        #[arg(long, default_value_t = 256)]
        burn_in: usize,
    },
    /// Run the invariant suite on given or random scenarios.
    Check {
        /// Scenario files to check.
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        /// Also check this many seeded random scenarios.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LinkError> for CliError {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::Scenario(inner) => CliError::Input(inner.to_string()),
            LinkError::Spectra(inner) => CliError::Input(inner.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::Input(m),
            SimError::UnsupportedSource => CliError::Input(e.to_string()),
            SimError::TailEnergyExceeded { .. } => CliError::Numerical(e.to_string()),
            SimError::Link(inner) => CliError::from(inner),
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    subcommand: String,
    scenario: Option<String>,
    scenario_sha256: Option<String>,
    grid_n_override: Option<usize>,
    tolerances: Tolerances,
    seed: Option<u64>,
    outputs: Vec<String>,
    wall_clock_ms: u128,
    version: String,
}

#[derive(Serialize)]
struct Tolerances {
    power: f64,
    kkt: f64,
}

struct Loaded {
    scenario: Scenario,
    config: ScenarioConfig,
    sha256: String,
}

fn load_scenario(path: &Path, common: &CommonArgs) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let sha256 = hex_digest(text.as_bytes());
    let mut config = ScenarioConfig::from_json(&text)?;
    if let Some(n) = common.grid_n {
        config.grid.n = n;
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = |rel: &str| -> Result<String, String> {
        std::fs::read_to_string(base.join(rel)).map_err(|e| format!("cannot read {rel}: {e}"))
    };
    let scenario = config.into_scenario(&mut reader)?;
    Ok(Loaded { scenario, config, sha256 })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    dir: &Path,
    subcommand: &str,
    loaded: Option<&Loaded>,
    scenario_path: Option<&Path>,
    common: &CommonArgs,
    seed: Option<u64>,
    outputs: &[&str],
    started: Instant,
) -> Result<(), CliError> {
    let manifest = Manifest {
        subcommand: subcommand.into(),
        scenario: scenario_path.map(|p| p.display().to_string()),
        scenario_sha256: loaded.map(|l| l.sha256.clone()),
        grid_n_override: common.grid_n,
        tolerances: Tolerances { power: common.tol_power, kkt: common.tol_kkt },
        seed,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        wall_clock_ms: started.elapsed().as_millis(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Optimize { scenario, common, matrix_mse } => {
            cmd_optimize(&scenario, &common, matrix_mse)
        }
        Command::Sweep { scenario, common, axis, values, simulate, symbols, seed } => {
            cmd_sweep(&scenario, &common, &axis, &values, simulate, symbols, seed)
        }
        Command::Simulate { scenario, common, symbols, seed, oversampling, burn_in } => {
            cmd_simulate(&scenario, &common, symbols, seed, oversampling, burn_in)
        }
        Command::Check { scenarios, common, random, seed } => {
            cmd_check(&scenarios, &common, random, seed)
        }
    }
}

fn cmd_optimize(path: &Path, common: &CommonArgs, matrix_mse: bool) -> Result<i32, CliError> {
    let started = Instant::now();
    let loaded = load_scenario(path, common)?;
    let options = DesignOptions { power_tol: common.tol_power, with_matrix_mse: matrix_mse };
    let design = design_link(&loaded.scenario, &options)?;

    std::fs::create_dir_all(&common.out_dir)?;
    let summary = design.summary();
    std::fs::write(
        common.out_dir.join("solution.json"),
        serde_json::to_string_pretty(&summary).unwrap() + "\n",
    )?;
    write_spectra_csv(&common.out_dir.join("spectra.csv"), &loaded.scenario, &design)?;
    write_manifest(
        &common.out_dir,
        "optimize",
        Some(&loaded),
        Some(path),
        common,
        None,
        &["solution.json", "spectra.csv"],
        started,
    )?;
    println!(
        "mse {:.9e}  nu {:.9e}  power residual {:.2e}  stationarity {:.2e}",
        summary.analytic_mse, summary.nu, summary.power_residual_rel, summary.kkt.stationarity_rel
    );
    Ok(0)
}

/// Densely sampled squared magnitudes of the designed spectra plus the
/// interference power spectrum, over the observed band.
fn write_spectra_csv(path: &Path, scenario: &Scenario, design: &LinkDesign) -> Result<(), CliError> {
    let b = scenario.grid.bandwidth;
    let t = scenario.grid.symbol_period;
    let points = 2048usize;
    let w1: Vec<(Vec<C64>, Vec<C64>)> =
        design.rx.bins.iter().map(|x| (x.w1_pos.clone(), x.w1_neg.clone())).collect();
    let w2: Vec<(Vec<C64>, Vec<C64>)> =
        design.rx.bins.iter().map(|x| (x.w2_pos.clone(), x.w2_neg.clone())).collect();
    let mut out = String::from("xi_hz,S_sq,W1_sq,W2_sq,interference_psd\n");
    for i in 0..points {
        let xi = -b + 2.0 * b * (i as f64 + 0.5) / points as f64;
        let s = grid_spectrum_value(&design.model.grid, &design.tx.spectrum.pairs, xi);
        let w1v = grid_spectrum_value(&design.model.grid, &w1, xi);
        let w2v = grid_spectrum_value(&design.model.grid, &w2, xi);
        let interference: f64 = scenario
            .noise
            .interferers
            .iter()
            .map(|intf| {
                intf.symbol_level * intf.rate_divisor as f64 / t * intf.pulse.eval(xi).norm_sqr()
            })
            .sum();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(xi),
            num(s.norm_sqr()),
            num(w1v.norm_sqr()),
            num(w2v.norm_sqr()),
            num(interference)
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_sweep(
    path: &Path,
    common: &CommonArgs,
    axis: &str,
    values: &[f64],
    with_mc: bool,
    symbols: usize,
    seed: u64,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let loaded = load_scenario(path, common)?;
    if values.is_empty() {
        return Err(CliError::Input("sweep needs at least one value".into()));
    }
    let mut rows = Vec::new();
    for &value in values {
        let mut config = loaded.config.clone();
        match axis {
            "esn0" => {
                config.noise.n0 = None;
                config.noise.source_esn0_db = Some(value);
            }
            "k" => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(CliError::Input(format!(
                        "impropriety values must lie in [0,1], got {value}"
                    )));
                }
                let es = match &config.source {
                    SourceConfig::UnbalancedQam { var_i, var_q } => var_i + var_q,
                    SourceConfig::Impropriety { .. } => 1.0,
                    SourceConfig::Tabulated { .. } => {
                        return Err(CliError::Input(
                            "impropriety sweeps need a flat source".into(),
                        ))
                    }
                };
                config.source = SourceConfig::UnbalancedQam {
                    var_i: 0.5 * es * (1.0 + value),
                    var_q: 0.5 * es * (1.0 - value),
                };
            }
            _ => unreachable!("clap restricts the axis"),
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut reader = |rel: &str| -> Result<String, String> {
            std::fs::read_to_string(base.join(rel)).map_err(|e| format!("cannot read {rel}: {e}"))
        };
        let scenario = config.into_scenario(&mut reader)?;
        let options = DesignOptions { power_tol: common.tol_power, with_matrix_mse: false };
        let design = design_link(&scenario, &options)?;
        if with_mc {
            let cfg =
                SimConfig { num_symbols: symbols, rng_seed: seed, ..SimConfig::default() };
            let report = run_link(
                &scenario,
                &design.model,
                &design.tx.spectrum,
                &design.rx,
                design.tx.analytic_mse,
                &cfg,
            )?;
            rows.push(format!(
                "{},{},{},{},{}",
                num(value),
                num(design.tx.analytic_mse),
                num(report.empirical_mse),
                num(report.std_err),
                num(report.empirical_power)
            ));
        } else {
            rows.push(format!("{},{}", num(value), num(design.tx.analytic_mse)));
        }
    }

    std::fs::create_dir_all(&common.out_dir)?;
    let header = if with_mc {
        "axis_value,analytic_mse,empirical_mse,std_err,empirical_power"
    } else {
        "axis_value,analytic_mse"
    };
    let mut csv = String::from(header);
    csv.push('\n');
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    std::fs::write(common.out_dir.join("mse_curve.csv"), csv)?;
    write_manifest(
        &common.out_dir,
        "sweep",
        Some(&loaded),
        Some(path),
        common,
        Some(seed),
        &["mse_curve.csv"],
        started,
    )?;
    println!("swept {} values of {axis}", values.len());
    Ok(0)
}

fn cmd_simulate(
    path: &Path,
    common: &CommonArgs,
    symbols: usize,
    seed: u64,
    oversampling: usize,
    burn_in: usize,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let loaded = load_scenario(path, common)?;
    let options = DesignOptions { power_tol: common.tol_power, with_matrix_mse: false };
    let design = design_link(&loaded.scenario, &options)?;
    let cfg = SimConfig {
        oversampling,
        num_symbols: symbols,
        burn_in,
        rng_seed: seed,
        ..SimConfig::default()
    };
    let report = run_link(
        &loaded.scenario,
        &design.model,
        &design.tx.spectrum,
        &design.rx,
        design.tx.analytic_mse,
        &cfg,
    )?;
    std::fs::create_dir_all(&common.out_dir)?;
    std::fs::write(
        common.out_dir.join("sim_report.json"),
        serde_json::to_string_pretty(&report).unwrap() + "\n",
    )?;
    write_manifest(
        &common.out_dir,
        "simulate",
        Some(&loaded),
        Some(path),
        common,
        Some(seed),
        &["sim_report.json"],
        started,
    )?;
    println!(
        "empirical mse {:.6e} (se {:.2e})  analytic {:.6e}  power {:.6e}",
        report.empirical_mse, report.std_err, report.analytic_mse, report.empirical_power
    );
    Ok(0)
}

#[derive(Serialize)]
struct CheckRecord {
    check: String,
    subject: String,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

fn check_scenario(
    scenario: &Scenario,
    subject: &str,
    common: &CommonArgs,
    rng: &mut ChaCha8Rng,
    records: &mut Vec<CheckRecord>,
) -> Result<(), CliError> {
    let push = |check: &str, residual: f64, tolerance: f64, records: &mut Vec<CheckRecord>| {
        records.push(CheckRecord {
            check: check.into(),
            subject: subject.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        });
    };

    // the two MSE evaluators must agree on a random transmit spectrum
    let model = assemble(scenario)?;
    let s = random_tx_spectrum(rng, &model, 1.0);
    let matrix = mse_matrix(&model, &s)?;
    let scalar = mse_scalar_from_s(&model, &s)?;
    let equiv = (matrix.total - scalar.total).abs() / (1.0 + matrix.total);
    push("mse-equivalence", equiv, 1e-10, records);

    // full design: optimality certificate and budget match
    let options = DesignOptions { power_tol: common.tol_power, with_matrix_mse: true };
    let design = design_link(scenario, &options)?;
    let kkt = &design.tx.kkt;
    push("kkt-stationarity", kkt.stationarity_rel, common.tol_kkt, records);
    push("kkt-dual-feasibility", (-kkt.dual_min_rel).max(0.0), 1e-12, records);
    push("kkt-complementary-slackness", kkt.comp_slack, 1e-10, records);
    push("power-budget", kkt.power_rel, common.tol_power, records);
    let cross = (design.matrix_mse.unwrap() - design.tx.analytic_mse).abs()
        / (1.0 + design.tx.analytic_mse);
    push("mse-cross-check", cross, 1e-9, records);

    // receiver perturbations must never help
    let base = wl_objective(&model, &design.tx.spectrum, &design.rx)?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut w = design.rx.clone();
        for bin in &mut w.bins {
            for vec in [&mut bin.w1_pos, &mut bin.w2_pos, &mut bin.w1_neg, &mut bin.w2_neg] {
                let norm: f64 = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let scale = 1e-3 * (norm + 1e-9);
                for z in vec.iter_mut() {
                    *z += C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * scale;
                }
            }
        }
        let perturbed = wl_objective(&model, &design.tx.spectrum, &w)?;
        worst = worst.max(base - perturbed);
    }
    push("receiver-optimality", worst, 1e-12, records);

    // a proper source must leave the conjugate branch silent
    if model.bins.iter().all(|b| b.k == 0.0) {
        push("proper-conjugate-branch", design.rx.max_w2(), 1e-12, records);
    }
    Ok(())
}

fn cmd_check(
    scenarios: &[PathBuf],
    common: &CommonArgs,
    random: usize,
    seed: u64,
) -> Result<i32, CliError> {
    let started = Instant::now();
    let mut records = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for path in scenarios {
        let loaded = load_scenario(path, common)?;
        check_scenario(
            &loaded.scenario,
            &path.display().to_string(),
            common,
            &mut rng,
            &mut records,
        )?;
    }
    for i in 0..random {
        let scenario = random_scenario(&mut rng);
        check_scenario(&scenario, &format!("random-{i}"), common, &mut rng, &mut records)?;
    }

    std::fs::create_dir_all(&common.out_dir)?;
    std::fs::write(
        common.out_dir.join("check_report.json"),
        serde_json::to_string_pretty(&records).unwrap() + "\n",
    )?;
    write_manifest(
        &common.out_dir,
        "check",
        None,
        None,
        common,
        Some(seed),
        &["check_report.json"],
        started,
    )?;

    let mut failures = 0usize;
    for r in &records {
        let verdict = if r.pass { "pass" } else { "FAIL" };
        println!(
            "{verdict}  {:32} {:16} residual {:.3e} (tol {:.1e})",
            r.check, r.subject, r.residual, r.tolerance
        );
        if !r.pass {
            failures += 1;
        }
    }
    println!("{} checks, {} failures", records.len(), failures);
    Ok(if failures > 0 { 3 } else { 0 })
}
