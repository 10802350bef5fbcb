//! Command-line front end: `model`, `simulate`, `estimate`, `modes`,
//! `compare`, and `case`.
//!
//! Exit status is 0 on success, 1 on a domain error (a JSON record with the
//! error kind goes to stderr), and 2 on a usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{estimate_from_trajectory, read_matrix_csv, write_matrix_csv, EstimatorConfig, Normalization};
use crate::fixtures::{
    build_fixture, noise_seed, run_case, truth_modes, truth_state_space, Case, CaseOptions, ExperimentReport,
    FIXTURE_NAMES,
};
use crate::modal::{
    eigen_modes, match_modes, write_modes_csv, write_participation_csv, write_shapes_csv, ModeComparison, ModeSet,
    ModeSource,
};
use crate::netmodel::{Coords, SystemModel};
use crate::sim::{
    add_measurement_noise, read_trajectory, simulate_nonlinear, write_trajectory, NoiseChannel, NoiseSpec, Scheme,
    SimConfig, TrajectoryMeta,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "VSC_AMBIENT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "vsc-ambient", version, about = "Ambient-data estimation of power-system state matrices with VSC feedback")]
struct Cli {
    /// Emit structured JSON on stdout instead of human-readable tables.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for relative output paths (default: $VSC_AMBIENT_OUT_DIR or ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a bundled fixture model or check a model file.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Simulate an ambient record from a model.
    Simulate(SimulateArgs),
    /// Estimate the closed-loop state matrix from a trajectory.
    Estimate(EstimateArgs),
    /// List the oscillatory modes of a state matrix.
    Modes(ModesArgs),
    /// Compare an estimated state matrix with a model's true modes.
    Compare(CompareArgs),
    /// Run a scripted experiment over several seeds.
    Case(CaseArgs),
}

#[derive(Debug, Subcommand)]
enum ModelCommand {
    /// Write a bundled fixture as a model JSON file.
    Build {
        /// Fixture name.
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a model and report its equilibrium and modes.
    Check {
        /// Model JSON path or fixture name.
        model: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchemeArg {
    EulerMaruyama,
    Heun,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ChannelArg {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CoordsArg {
    Reduced,
    Full,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Model JSON path or fixture name.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    /// Override every machine's fluctuation intensity.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 20.0)]
    burn_in: f64,
    #[arg(long, default_value_t = 4)]
    substeps: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::Heun)]
    scheme: SchemeArg,
    #[arg(long, value_enum, default_value_t = ChannelArg::Additive)]
    channel: ChannelArg,
    /// Measurement-noise standard deviation on angles (rad).
    #[arg(long, default_value_t = 0.0)]
    noise_delta: f64,
    /// Measurement-noise standard deviation on speeds (pu).
    #[arg(long, default_value_t = 0.0)]
    noise_omega: f64,
    #[arg(short, long, default_value = "traj.csv")]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    traj: PathBuf,
    /// Lag in samples.
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, value_enum, default_value_t = CoordsArg::Reduced)]
    coords: CoordsArg,
    /// Reference machine (1-based) for reduced coordinates.
    #[arg(long = "ref", default_value_t = 1)]
    reference: usize,
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Divide lag sums by N - tau instead of N.
    #[arg(long)]
    unbiased: bool,
    /// Remove a linear trend per channel instead of the mean.
    #[arg(long)]
    detrend: bool,
    #[arg(short, long, default_value = "ahat.csv")]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ModesArgs {
    /// State-matrix CSV, optionally with a label header row.
    #[arg(long)]
    matrix: PathBuf,
    /// Mode table CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Mode-shape CSV.
    #[arg(long)]
    shapes: Option<PathBuf>,
    /// Participation-factor CSV.
    #[arg(long)]
    participation: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CompareArgs {
    /// Model JSON path or fixture name providing the true matrix.
    #[arg(long)]
    truth: String,
    /// Estimated state-matrix CSV with a label header row.
    #[arg(long)]
    est: PathBuf,
    /// Error table CSV (mode, f_a, f_e, f_err_pct, zeta_a, zeta_e, zeta_err_pct).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CaseArgs {
    /// I, II, or noise.
    case: String,
    #[arg(long, default_value = "ninebus_1vsc")]
    fixture: String,
    /// Seeds as a list and/or ranges, e.g. `1-10` or `1,4,7`.
    #[arg(long, default_value = "1-10")]
    seeds: String,
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.02)]
    dt: f64,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    /// Report JSON; the median error table is written next to it as CSV.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Reproducibility record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub output_dir: String,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.manifest.json"))
}

struct Ctx {
    json: bool,
    out_dir: PathBuf,
}

impl Ctx {
    fn output(&self, path: &Path) -> Result<PathBuf> {
        let full = if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        };
        if let Some(parent) = full.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        Ok(full)
    }

    fn manifest<C: Serialize>(
        &self,
        command: &str,
        inputs: &[&str],
        config: &C,
        outputs: &[&Path],
        seed: Option<u64>,
    ) -> Result<()> {
        let Some(first) = outputs.first() else { return Ok(()) };
        let manifest = RunManifest {
            command: command.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            config: serde_json::to_value(config)?,
            output_dir: self.out_dir.display().to_string(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        write_json(&manifest_path(first), &manifest)
    }

    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) -> Result<()> {
        let mut out = std::io::stdout().lock();
        if self.json {
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        } else {
            write!(out, "{}", human())?;
        }
        Ok(())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Load a model JSON file, or build a fixture when the argument names one.
pub fn resolve_model(arg: &str) -> Result<SystemModel> {
    let path = Path::new(arg);
    if path.exists() {
        SystemModel::load(path)
    } else if FIXTURE_NAMES.contains(&arg) {
        Ok(build_fixture(arg)?.model)
    } else {
        Err(Error::Config(format!(
            "'{arg}' is neither a model file nor a fixture ({})",
            FIXTURE_NAMES.join(", ")
        )))
    }
}

/// Parse `1-10`, `1,4,7`, or a mix such as `1-3,8`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("invalid seed list '{text}'"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                if b < a {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

/// Parse `argv` (program name first), run the command, and return the exit
/// status.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Ctx {
        json: cli.json,
        out_dir,
    };
    match run(&ctx, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            let record = ErrorRecord {
                error: e.kind(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&record).unwrap_or_else(|_| e.to_string()));
            1
        }
    }
}

fn run(ctx: &Ctx, command: Command) -> Result<()> {
    match command {
        Command::Model(ModelCommand::Build { name, output }) => model_build(ctx, &name, output),
        Command::Model(ModelCommand::Check { model }) => model_check(ctx, &model),
        Command::Simulate(args) => simulate(ctx, &args),
        Command::Estimate(args) => estimate(ctx, &args),
        Command::Modes(args) => modes(ctx, &args),
        Command::Compare(args) => compare(ctx, &args),
        Command::Case(args) => case(ctx, &args),
    }
}

fn model_build(ctx: &Ctx, name: &str, output: Option<PathBuf>) -> Result<()> {
    let fixture = build_fixture(name)?;
    let out = ctx.output(&output.unwrap_or_else(|| PathBuf::from(format!("{name}.json"))))?;
    fixture.model.save(&out)?;
    ctx.manifest("model build", &[name], &serde_json::json!({ "fixture": name }), &[&out], None)?;
    #[derive(Serialize)]
    struct Built {
        fixture: String,
        path: String,
        hash: String,
    }
    let built = Built {
        fixture: name.to_string(),
        path: out.display().to_string(),
        hash: fixture.model.content_hash(),
    };
    ctx.emit(&built, || format!("wrote {} ({})\n", built.path, fixture.notes))
}

#[derive(Serialize)]
struct ModelReport {
    name: Option<String>,
    n_gen: usize,
    n_vsc: usize,
    hash: String,
    delta0: Vec<f64>,
    p_e0: Vec<f64>,
    hurwitz: bool,
    modes: Vec<ModeRow>,
    real_eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
struct ModeRow {
    mode: usize,
    freq_hz: f64,
    damping_pct: f64,
    re: f64,
    im: f64,
}

fn mode_rows(set: &ModeSet) -> Vec<ModeRow> {
    set.modes
        .iter()
        .enumerate()
        .map(|(i, m)| ModeRow {
            mode: i + 1,
            freq_hz: m.freq,
            damping_pct: m.damping_percent(),
            re: m.lambda.re,
            im: m.lambda.im,
        })
        .collect()
}

fn mode_table(rows: &[ModeRow]) -> String {
    let mut s = format!("{:>4} {:>10} {:>10} {:>12} {:>12}\n", "mode", "f (Hz)", "zeta (%)", "Re", "Im");
    for r in rows {
        s += &format!(
            "{:>4} {:>10.4} {:>10.3} {:>12.5} {:>12.5}\n",
            r.mode, r.freq_hz, r.damping_pct, r.re, r.im
        );
    }
    s
}

fn model_check(ctx: &Ctx, arg: &str) -> Result<()> {
    let model = resolve_model(arg)?;
    let lin = model.linearize()?;
    let ss = lin.reduced(0)?;
    let set = truth_modes(&ss)?;
    let hurwitz = set.real_eigenvalues.iter().all(|&r| r < 0.0) && set.modes.iter().all(|m| m.lambda.re < 0.0);
    let report = ModelReport {
        name: model.name.clone(),
        n_gen: model.n_gen(),
        n_vsc: model.n_vsc(),
        hash: model.content_hash(),
        delta0: lin.point.delta0.clone(),
        p_e0: lin.point.p_e0.clone(),
        hurwitz,
        modes: mode_rows(&set),
        real_eigenvalues: set.real_eigenvalues.clone(),
    };
    ctx.emit(&report, || {
        format!(
            "model {} : {} machines, {} VSCs, reduced A_c {}\n{}",
            report.name.as_deref().unwrap_or("(unnamed)"),
            report.n_gen,
            report.n_vsc,
            if hurwitz { "Hurwitz" } else { "NOT Hurwitz" },
            mode_table(&report.modes)
        )
    })
}

fn simulate(ctx: &Ctx, args: &SimulateArgs) -> Result<()> {
    let mut model = resolve_model(&args.model)?;
    if let Some(sigma) = args.sigma {
        model = model.with_sigma(sigma);
    }
    let cfg = SimConfig {
        dt: args.dt,
        duration: args.duration,
        seed: args.seed,
        burn_in: args.burn_in,
        substeps: args.substeps,
        scheme: match args.scheme {
            SchemeArg::EulerMaruyama => Scheme::EulerMaruyama,
            SchemeArg::Heun => Scheme::Heun,
        },
        channel: match args.channel {
            ChannelArg::Additive => NoiseChannel::Additive,
            ChannelArg::Multiplicative => NoiseChannel::Multiplicative,
        },
    };
    let mut traj = simulate_nonlinear(&model, &cfg)?;
    let mut meta = TrajectoryMeta::for_trajectory(&traj);
    meta.seed = Some(args.seed);
    meta.model_hash = Some(model.content_hash());
    if args.noise_delta > 0.0 || args.noise_omega > 0.0 {
        let spec = NoiseSpec {
            std_delta: args.noise_delta,
            std_omega: args.noise_omega,
            seed: noise_seed(args.seed),
        };
        traj = add_measurement_noise(&traj, &spec)?;
        meta.measurement_noise = Some(spec);
    }
    let out = ctx.output(&args.output)?;
    write_trajectory(&out, &traj, &meta)?;
    let sidecar = crate::sim::sidecar_path(&out);
    ctx.manifest("simulate", &[&args.model], args, &[&out, &sidecar], Some(args.seed))?;
    ctx.emit(&meta, || {
        format!(
            "wrote {} ({} samples, {} machines, dt {} s)\n",
            out.display(),
            traj.n_samples(),
            traj.n_gen(),
            traj.dt
        )
    })
}

fn estimate(ctx: &Ctx, args: &EstimateArgs) -> Result<()> {
    let (traj, meta) = read_trajectory(&args.traj)?;
    let coords = match args.coords {
        CoordsArg::Full => Coords::Full,
        CoordsArg::Reduced => {
            if args.reference == 0 {
                return Err(Error::Config("--ref is 1-based".into()));
            }
            Coords::ReferenceReduced(args.reference - 1)
        }
    };
    let cfg = EstimatorConfig {
        tau_steps: args.tau,
        ridge: args.ridge,
        coords,
        normalization: if args.unbiased {
            Normalization::Unbiased
        } else {
            Normalization::Biased
        },
        detrend: args.detrend,
    };
    let est = estimate_from_trajectory(&traj, &cfg)?;
    let out = ctx.output(&args.output)?;
    write_matrix_csv(&out, &est.a_hat, &est.labels)?;
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let diag_path = out.with_file_name(format!("{stem}.diagnostics.json"));
    write_json(&diag_path, &est.diagnostics)?;
    let traj_arg = args.traj.display().to_string();
    ctx.manifest("estimate", &[&traj_arg], args, &[&out, &diag_path], meta.and_then(|m| m.seed))?;
    let d = &est.diagnostics;
    ctx.emit(d, || {
        format!(
            "wrote {} ({}x{}); cond(C) {:.3e}, spectral radius {:.6}, imaginary residual {:.2e}{}\n",
            out.display(),
            est.a_hat.nrows(),
            est.a_hat.ncols(),
            d.cond_c,
            d.spectral_radius,
            d.imag_residual,
            if d.nonstationary { " (nonstationary)" } else { "" }
        )
    })
}

fn read_labeled(path: &Path) -> Result<(nalgebra::DMatrix<f64>, Vec<String>)> {
    let (a, labels) = read_matrix_csv(path)?;
    let n = a.nrows();
    let labels = labels.unwrap_or_else(|| (1..=n).map(|i| format!("x{i}")).collect());
    Ok((a, labels))
}

fn modes(ctx: &Ctx, args: &ModesArgs) -> Result<()> {
    let (a, labels) = read_labeled(&args.matrix)?;
    let set = eigen_modes(&a, &labels, ModeSource::Estimated)?;
    let mut outputs = Vec::new();
    if let Some(p) = &args.output {
        let p = ctx.output(p)?;
        write_modes_csv(&set, std::fs::File::create(&p)?)?;
        outputs.push(p);
    }
    if let Some(p) = &args.shapes {
        let p = ctx.output(p)?;
        write_shapes_csv(&set, std::fs::File::create(&p)?)?;
        outputs.push(p);
    }
    if let Some(p) = &args.participation {
        let p = ctx.output(p)?;
        write_participation_csv(&set, std::fs::File::create(&p)?)?;
        outputs.push(p);
    }
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    let input = args.matrix.display().to_string();
    ctx.manifest("modes", &[&input], args, &refs, None)?;
    let rows = mode_rows(&set);
    ctx.emit(&rows, || mode_table(&rows))
}

/// Truth-versus-estimate table for an estimated matrix with labelled states.
pub fn compare_matrices(model: &SystemModel, a_hat: &nalgebra::DMatrix<f64>, labels: &[String]) -> Result<ModeComparison> {
    let (coords, n_gen) = Coords::from_labels(labels)
        .ok_or_else(|| Error::Format("estimate header does not name a known coordinate set".into()))?;
    if n_gen != model.n_gen() {
        return Err(Error::Dimension(format!(
            "estimate has {n_gen} machines, model has {}",
            model.n_gen()
        )));
    }
    let truth = truth_state_space(model, coords)?;
    let truth_set = truth_modes(&truth)?;
    let est_set = eigen_modes(a_hat, labels, ModeSource::Estimated)?;
    Ok(match_modes(&truth_set, &est_set))
}

fn comparison_table(cmp: &ModeComparison) -> String {
    let mut s = format!(
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
        "mode", "f_a", "f_e", "err %", "zeta_a", "zeta_e", "err %"
    );
    for p in &cmp.pairs {
        s += &format!(
            "{:>4} {:>9.4} {:>9.4} {:>9.3} {:>9.3} {:>9.3} {:>9.3}\n",
            p.mode, p.f_truth, p.f_est, p.f_err_pct, p.zeta_truth, p.zeta_est, p.zeta_err_pct
        );
    }
    if !cmp.unmatched_truth.is_empty() {
        s += &format!("unmatched truth modes: {:?}\n", cmp.unmatched_truth.iter().map(|i| i + 1).collect::<Vec<_>>());
    }
    if !cmp.unmatched_estimate.is_empty() {
        s += &format!(
            "unmatched estimated modes: {:?}\n",
            cmp.unmatched_estimate.iter().map(|i| i + 1).collect::<Vec<_>>()
        );
    }
    s
}

fn compare(ctx: &Ctx, args: &CompareArgs) -> Result<()> {
    let model = resolve_model(&args.truth)?;
    let (a_hat, labels) = read_matrix_csv(&args.est)?;
    let labels = labels.ok_or_else(|| Error::Format("estimate CSV needs a label header row".into()))?;
    let cmp = compare_matrices(&model, &a_hat, &labels)?;
    if let Some(p) = &args.output {
        let p = ctx.output(p)?;
        cmp.write_csv(std::fs::File::create(&p)?)?;
        let est = args.est.display().to_string();
        ctx.manifest("compare", &[&args.truth, &est], args, &[&p], None)?;
    }
    ctx.emit(&cmp, || comparison_table(&cmp))
}

fn case(ctx: &Ctx, args: &CaseArgs) -> Result<()> {
    let case: Case = args.case.parse()?;
    let fixture = build_fixture(&args.fixture)?;
    let seeds = parse_seeds(&args.seeds)?;
    let mut opts = CaseOptions::default();
    opts.sim.duration = args.duration;
    opts.sim.dt = args.dt;
    opts.estimator.tau_steps = args.tau;
    let report = run_case(&fixture, case, &seeds, &opts)?;
    if let Some(p) = &args.output {
        let p = ctx.output(p)?;
        write_json(&p, &report)?;
        let table = p.with_extension("csv");
        report.median_table().write_csv(std::fs::File::create(&table)?)?;
        let mut config = BTreeMap::new();
        config.insert("args", serde_json::to_value(args)?);
        config.insert("options", serde_json::to_value(&opts)?);
        ctx.manifest("case", &[&args.fixture], &config, &[&p, &table], seeds.first().copied())?;
    }
    ctx.emit(&report, || case_summary(&report))
}

fn case_summary(report: &ExperimentReport) -> String {
    let mut s = format!(
        "case {} on {} over {} seeds\n",
        report.case,
        report.fixture,
        report.seeds.len()
    );
    if let Some(d) = &report.design {
        s += &format!(
            "feedback: VSC {} gain {:+} on {} / {:+} on {}; target mode {} ({:.3} Hz) zeta {:.3}% -> {:.3}%\n",
            d.vsc + 1,
            d.gain,
            d.machine_names.0,
            -d.gain,
            d.machine_names.1,
            d.target_mode,
            d.target_freq,
            d.zeta_before,
            d.zeta_after
        );
    }
    s += &comparison_table(&report.median_table());
    for c in &report.checks {
        s += &format!(
            "[{}] {}: {:.4} (limit {})\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1-3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("1,4, 7").unwrap(), vec![1, 4, 7]);
        assert_eq!(parse_seeds("1-2,9").unwrap(), vec![1, 2, 9]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/traj.csv")), PathBuf::from("out/traj.manifest.json"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(dispatch(["vsc-ambient", "bogus"]), 2);
        assert_eq!(dispatch(["vsc-ambient", "simulate"]), 2);
        assert_eq!(dispatch(["vsc-ambient", "--help"]), 0);
    }
}
