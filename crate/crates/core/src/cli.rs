//! Command-line front end: named presets, config-driven runs with CSV
//! artifacts and a manifest, the eta sweep, and the fractional-derivative
//! validation report.

use std::ffi::OsStr;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::analysis::{
    default_fit_window, energy_csv_row, fit_decay, snapshot_csv, DecayFit, ENERGY_CSV_HEADER,
};
use crate::fractional::{caputo_convolution_oracle, diffusive_scalar_driver};
use crate::model::{
    config_to_text, read_config, validate, ConfigParseError, ForceEvaluation, FractionalParams,
    IcKind, IcSpec, OutputParams, PhysicalParams, QuadParams, QuadratureGrid, SimConfig,
    SpaceParams, TimeParams, DEFAULT_IC_EPSILON, DEFAULT_NEWMARK_BETA, DEFAULT_NEWMARK_GAMMA,
};
use crate::stepper::{run, RunError, RunObserver, RunSummary};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "FRACWAVE_OUT_DIR";

/// The named configurations shipped with the binary.
pub const PRESET_NAMES: [&str; 4] = ["example1", "example1_desk", "example2", "example2_desk"];

/// Front-end errors, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(#[from] ConfigParseError),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 2 for input parse problems, 3 for validation
    /// failures, 4 for runtime blow-ups, 1 for I/O trouble.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

fn io_err(context: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{context} {}: {e}", path.display()))
}

fn map_run_error(e: RunError) -> CliError {
    match e {
        RunError::Invalid(v) => CliError::Validation(v.to_string()),
        RunError::InitialCondition(m) => CliError::Parse(ConfigParseError { message: m }),
        RunError::Step(s) => CliError::Runtime(s.to_string()),
    }
}

/// Builds one of the named presets. The two full-scale configurations match
/// the reference experiments; the `_desk` variants shrink the grids to
/// test-suite scale while keeping the same physics.
pub fn preset_config(name: &str) -> Result<SimConfig, CliError> {
    let (eta, kind, half_count, mode_count, t_final, steps, energy_stride, snapshot_stride) =
        match name {
            "example1" => (1.0, IcKind::Example1, 500, 10_000, 1.0, 500, 1, 50),
            "example1_desk" => (1.0, IcKind::Example1, 100, 200, 1.0, 1000, 1, 50),
            "example2" => (0.0, IcKind::Example2, 500, 10_000, 10_000.0, 100_000, 10, 10_000),
            "example2_desk" => (0.0, IcKind::Example2, 100, 500, 2000.0, 20_000, 1, 2000),
            other => {
                return Err(CliError::Validation(format!(
                    "unknown preset '{other}' (known presets: {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
    Ok(SimConfig {
        physical: PhysicalParams {
            rho1: 1.0,
            rho2: 1.0,
            k1: 10.0,
            k2: 2.0,
            half_length: 1.0,
        },
        fractional: FractionalParams {
            alpha: 0.5,
            eta,
            damping_enabled: true,
        },
        space: SpaceParams { half_count },
        quad: QuadParams {
            radius: 10.0,
            mode_count,
        },
        time: TimeParams {
            t_final,
            steps,
            newmark_beta: DEFAULT_NEWMARK_BETA,
            newmark_gamma: DEFAULT_NEWMARK_GAMMA,
        },
        ic: IcSpec {
            kind,
            epsilon: DEFAULT_IC_EPSILON,
        },
        output: OutputParams {
            energy_stride,
            snapshot_stride: Some(snapshot_stride),
            dir: PathBuf::from("fracwave_out").join(name),
        },
        force_evaluation: ForceEvaluation::HalfStep,
    })
}

fn resolved_out_dir(config: &SimConfig, env_override: Option<&OsStr>) -> PathBuf {
    match env_override {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.output.dir.clone(),
    }
}

/// Output directory after applying the `FRACWAVE_OUT_DIR` override.
#[must_use]
pub fn effective_out_dir(config: &SimConfig) -> PathBuf {
    resolved_out_dir(config, std::env::var_os(OUT_DIR_ENV).as_deref())
}

struct ArtifactWriter {
    grid: crate::model::SpatialGrid,
    out_dir: PathBuf,
    energy: std::io::BufWriter<fs::File>,
    snapshots: usize,
    failure: Option<CliError>,
}

impl ArtifactWriter {
    fn create(config: &SimConfig, out_dir: &Path) -> Result<Self, CliError> {
        let energy_path = out_dir.join("energy.csv");
        let file = fs::File::create(&energy_path)
            .map_err(|e| io_err("cannot create", &energy_path, e))?;
        let mut energy = std::io::BufWriter::new(file);
        writeln!(energy, "{ENERGY_CSV_HEADER}")
            .map_err(|e| io_err("cannot write", &energy_path, e))?;
        Ok(ArtifactWriter {
            grid: config.spatial_grid(),
            out_dir: out_dir.to_path_buf(),
            energy,
            snapshots: 0,
            failure: None,
        })
    }

    fn finish(mut self) -> Result<usize, CliError> {
        if let Some(e) = self.failure.take() {
            return Err(e);
        }
        self.energy
            .flush()
            .map_err(|e| io_err("cannot flush", &self.out_dir.join("energy.csv"), e))?;
        Ok(self.snapshots)
    }
}

impl RunObserver for ArtifactWriter {
    fn on_energy(&mut self, record: &crate::analysis::EnergyRecord) {
        if self.failure.is_some() {
            return;
        }
        if let Err(e) = writeln!(self.energy, "{}", energy_csv_row(record)) {
            self.failure = Some(io_err("cannot write", &self.out_dir.join("energy.csv"), e));
        }
    }

    fn on_snapshot(&mut self, state: &crate::model::SimState) {
        if self.failure.is_some() {
            return;
        }
        let path = self.out_dir.join(format!("snapshot_{:06}.csv", state.n));
        if let Err(e) = fs::write(&path, snapshot_csv(state, &self.grid)) {
            self.failure = Some(io_err("cannot write", &path, e));
        } else {
            self.snapshots += 1;
        }
    }
}

/// What a completed run left on disk, plus headline numbers for the console.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub records: usize,
    pub snapshots: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub fit: Option<DecayFit>,
    pub duration: Duration,
}

fn write_manifest(
    out_dir: &Path,
    config: &SimConfig,
    status: &str,
    duration: Duration,
    records: usize,
    snapshots: usize,
) -> Result<(), CliError> {
    let path = out_dir.join("manifest.txt");
    let echo = config_to_text(config).map_err(CliError::Runtime)?;
    let mut text = String::new();
    let _ = writeln!(text, "# fracwave run manifest");
    let _ = writeln!(text, "# status = {status}");
    let _ = writeln!(text, "# duration_seconds = {:.3}", duration.as_secs_f64());
    let _ = writeln!(text, "# records = {records}");
    let _ = writeln!(text, "# snapshots = {snapshots}");
    let _ = writeln!(text, "# the echo below reparses as a runnable config");
    text.push_str(&echo);
    fs::write(&path, text).map_err(|e| io_err("cannot write", &path, e))
}

/// Runs a validated config and writes every artifact into `out_dir`:
/// `energy.csv`, numbered snapshot CSVs, `decay.txt`, and `manifest.txt`.
/// The manifest is written for completed and for aborted runs alike.
pub fn run_to_dir(config: &SimConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| io_err("cannot create", out_dir, e))?;
    let mut writer = ArtifactWriter::create(config, out_dir)?;
    let started = Instant::now();
    let result = run(config, &mut writer);
    let duration = started.elapsed();
    let snapshots = writer.finish()?;
    let summary: RunSummary = match result {
        Ok(summary) => summary,
        Err(e) => {
            write_manifest(out_dir, config, &format!("failed: {e}"), duration, 0, snapshots)?;
            return Err(map_run_error(e));
        }
    };

    let fit = fit_decay(&summary.energy, default_fit_window(config.time.t_final));
    let decay_path = out_dir.join("decay.txt");
    let decay_text = match &fit {
        Ok(f) => f.report(),
        Err(e) => format!("decay fit unavailable: {e}"),
    };
    fs::write(&decay_path, format!("{decay_text}\n"))
        .map_err(|e| io_err("cannot write", &decay_path, e))?;

    write_manifest(
        out_dir,
        config,
        "completed",
        duration,
        summary.energy.len(),
        snapshots,
    )?;

    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        records: summary.energy.len(),
        snapshots,
        initial_energy: summary.energy.first().map_or(0.0, |r| r.e_raw),
        final_energy: summary.energy.last().map_or(0.0, |r| r.e_raw),
        fit: fit.ok(),
        duration,
    })
}

/// `run <config>`: parse, validate, simulate, write artifacts.
pub fn cmd_run(config_path: &Path) -> Result<RunReport, CliError> {
    let config = read_config(config_path)?;
    validate(&config).map_err(|e| CliError::Validation(e.to_string()))?;
    let out_dir = effective_out_dir(&config);
    let mut effective = config;
    effective.output.dir = out_dir.clone();
    run_to_dir(&effective, &out_dir)
}

/// One line of the sweep table.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eta: f64,
    pub slope: f64,
    pub c: f64,
    pub rms: f64,
    pub final_energy: f64,
    pub error: Option<String>,
}

/// Result of an eta sweep: per-value rows plus the combined table path.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub out_dir: PathBuf,
    pub table_path: PathBuf,
    pub rows: Vec<SweepRow>,
}

fn dedupe_preserving_order(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn sweep_one(eta: f64, config: &SimConfig, dir: &Path) -> SweepRow {
    match run_to_dir(config, dir) {
        Ok(report) => match report.fit {
            Some(fit) => SweepRow {
                eta,
                slope: fit.slope,
                c: fit.c,
                rms: fit.rms,
                final_energy: report.final_energy,
                error: None,
            },
            None => SweepRow {
                eta,
                slope: f64::NAN,
                c: f64::NAN,
                rms: f64::NAN,
                final_energy: report.final_energy,
                error: Some("decay fit unavailable".to_string()),
            },
        },
        Err(e) => SweepRow {
            eta,
            slope: f64::NAN,
            c: f64::NAN,
            rms: f64::NAN,
            final_energy: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

/// `sweep <config> --eta v1,v2,...`: one run per distinct eta value, each in
/// its own subdirectory, plus the combined `sweep.csv` table. Individual run
/// failures are recorded as NaN rows and do not stop the sweep.
pub fn cmd_sweep(config_path: &Path, etas: &[f64], parallel: bool) -> Result<SweepReport, CliError> {
    let base = read_config(config_path)?;
    validate(&base).map_err(|e| CliError::Validation(e.to_string()))?;
    let etas = dedupe_preserving_order(etas);
    if etas.is_empty() {
        return Err(CliError::Validation(
            "eta sweep requires at least one value".to_string(),
        ));
    }
    let out_root = effective_out_dir(&base);
    fs::create_dir_all(&out_root).map_err(|e| io_err("cannot create", &out_root, e))?;

    let jobs: Vec<(f64, SimConfig, PathBuf)> = etas
        .iter()
        .map(|&eta| {
            let dir = out_root.join(format!("eta_{eta}"));
            let mut config = base.clone();
            config.fractional.eta = eta;
            config.output.dir = dir.clone();
            (eta, config, dir)
        })
        .collect();

    let rows: Vec<SweepRow> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .iter()
                .map(|(eta, config, dir)| scope.spawn(move || sweep_one(*eta, config, dir)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        jobs.iter()
            .map(|(eta, config, dir)| sweep_one(*eta, config, dir))
            .collect()
    };

    let table_path = out_root.join("sweep.csv");
    let mut table = String::from("eta,slope,C,rms\n");
    for row in &rows {
        let _ = writeln!(
            table,
            "{},{:.16e},{:.16e},{:.16e}",
            row.eta, row.slope, row.c, row.rms
        );
    }
    fs::write(&table_path, table).map_err(|e| io_err("cannot write", &table_path, e))?;

    Ok(SweepReport {
        out_dir: out_root,
        table_path,
        rows,
    })
}

/// Closed form of the generalized Caputo derivative of f(t) = t for
/// alpha = 1/2: sqrt(t)/Gamma(3/2) when eta = 0, erf(sqrt(eta t))/sqrt(eta)
/// otherwise.
fn linear_closed_form(eta: f64, t: f64) -> f64 {
    if eta == 0.0 {
        t.sqrt() / libm::tgamma(1.5)
    } else {
        libm::erf((eta * t).sqrt()) / eta.sqrt()
    }
}

/// `validate-fractional`: exercises the diffusive realization against the
/// convolution oracle and the closed forms for f(t) = t, and reports the
/// observed errors. Report only; never fails.
#[must_use]
pub fn cmd_validate_fractional() -> String {
    let alpha = 0.5;
    let dt = 0.005;
    let steps = 1000;
    let f_dot = vec![1.0; steps + 1];
    let mut report = String::new();
    let _ = writeln!(
        report,
        "diffusive driver vs closed form, f(t) = t, alpha = {alpha}, t in [0.5, 5]:"
    );
    for &(eta, radius, modes) in &[
        (1.0, 10.0, 10_000usize),
        (0.0, 10.0, 10_000),
        (1.0, 100.0, 100_000),
        (0.0, 100.0, 100_000),
    ] {
        let quad = QuadratureGrid::build(radius, modes, alpha, eta);
        let series = diffusive_scalar_driver(&f_dot, &quad, dt);
        let mut worst = 0.0f64;
        for (n, value) in series.iter().enumerate() {
            let t = n as f64 * dt;
            if t < 0.5 {
                continue;
            }
            let exact = linear_closed_form(eta, t);
            worst = worst.max((value - exact).abs() / exact);
        }
        let _ = writeln!(
            report,
            "  eta={eta} R={radius} M={modes}: max rel err = {worst:.3e}"
        );
    }

    let _ = writeln!(
        report,
        "convolution oracle vs closed form, f(t) = t, alpha = {alpha}, t = 1:"
    );
    let samples: Vec<f64> = (0..=200).map(|i| i as f64 * dt).collect();
    for eta in [0.0, 1.0] {
        let oracle = caputo_convolution_oracle(&samples, alpha, eta, dt).unwrap();
        let exact = linear_closed_form(eta, 1.0);
        let _ = writeln!(
            report,
            "  eta={eta}: rel err = {:.3e}",
            (oracle - exact).abs() / exact
        );
    }

    let quad = QuadratureGrid::build(10.0, 1000, alpha, 1.0);
    let zero_series = diffusive_scalar_driver(&vec![0.0; 201], &quad, dt);
    let zero_driver = zero_series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let const_oracle = caputo_convolution_oracle(&vec![1.0; 201], alpha, 1.0, dt).unwrap();
    let _ = writeln!(
        report,
        "constant f: driver max |output| = {zero_driver:e}, oracle = {const_oracle:e}"
    );
    report
}

/// Where `preset` delivered its config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresetOutput {
    Stdout(String),
    File(PathBuf),
}

/// `preset <name> [--out <dir>]`: materialize a named preset config, either
/// to stdout or as `<dir>/<name>.txt`.
pub fn cmd_preset(name: &str, out: Option<&Path>) -> Result<PresetOutput, CliError> {
    let config = preset_config(name)?;
    let text = config_to_text(&config).map_err(CliError::Runtime)?;
    match out {
        None => Ok(PresetOutput::Stdout(text)),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err("cannot create", dir, e))?;
            let path = dir.join(format!("{name}.txt"));
            fs::write(&path, text).map_err(|e| io_err("cannot write", &path, e))?;
            Ok(PresetOutput::File(path))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_config;

    #[test]
    fn presets_validate_and_are_pure() {
        for name in PRESET_NAMES {
            let a = preset_config(name).unwrap();
            let b = preset_config(name).unwrap();
            assert_eq!(a, b, "preset {name} not deterministic");
            assert!(validate(&a).is_ok(), "preset {name} invalid");
        }
    }

    #[test]
    fn unknown_preset_is_a_validation_error() {
        let err = preset_config("example3").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("example3"));
    }

    #[test]
    fn preset_text_round_trips() {
        let config = preset_config("example1_desk").unwrap();
        let text = config_to_text(&config).unwrap();
        assert_eq!(parse_config(&text, None).unwrap(), config);
    }

    #[test]
    fn desk_presets_shrink_the_grids() {
        let full = preset_config("example1").unwrap();
        let desk = preset_config("example1_desk").unwrap();
        assert_eq!(full.space.half_count, 500);
        assert_eq!(full.quad.mode_count, 10_000);
        assert_eq!(desk.space.half_count, 100);
        assert_eq!(desk.quad.mode_count, 200);
        assert_eq!(full.fractional.eta, desk.fractional.eta);
    }

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(
            CliError::Parse(ConfigParseError {
                message: String::new()
            })
            .exit_code(),
            2
        );
        assert_eq!(CliError::Validation(String::new()).exit_code(), 3);
        assert_eq!(CliError::Runtime(String::new()).exit_code(), 4);
        assert_eq!(CliError::Io(String::new()).exit_code(), 1);
    }

    #[test]
    fn dedupe_keeps_first_occurrence_order() {
        let out = dedupe_preserving_order(&[0.0003, 0.0005, 0.0003, 0.0, 0.0005]);
        assert_eq!(out, vec![0.0003, 0.0005, 0.0]);
    }

    #[test]
    fn out_dir_override_applies_only_when_nonempty() {
        let config = preset_config("example1_desk").unwrap();
        assert_eq!(
            resolved_out_dir(&config, None),
            PathBuf::from("fracwave_out/example1_desk")
        );
        assert_eq!(
            resolved_out_dir(&config, Some(OsStr::new(""))),
            PathBuf::from("fracwave_out/example1_desk")
        );
        assert_eq!(
            resolved_out_dir(&config, Some(OsStr::new("/tmp/elsewhere"))),
            PathBuf::from("/tmp/elsewhere")
        );
    }

    #[test]
    fn missing_config_is_a_parse_error() {
        let err = cmd_run(Path::new("/nonexistent/config.txt")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("/nonexistent/config.txt"));
    }

    fn quick_config(dir: &Path) -> SimConfig {
        let mut config = preset_config("example1_desk").unwrap();
        config.space.half_count = 20;
        config.quad.mode_count = 30;
        config.time.steps = 100;
        config.time.t_final = 0.5;
        config.output.snapshot_stride = Some(50);
        config.output.dir = dir.join("out");
        config
    }

    #[test]
    fn run_to_dir_writes_every_artifact() {
        let tmp = tempfile::tempdir().unwrap();
        let config = quick_config(tmp.path());
        let report = run_to_dir(&config, &config.output.dir.clone()).unwrap();
        assert_eq!(report.records, 101);
        assert_eq!(report.snapshots, 3);
        assert!(report.final_energy < report.initial_energy);

        let energy = fs::read_to_string(config.output.dir.join("energy.csv")).unwrap();
        assert_eq!(energy.lines().count(), 102);
        assert!(energy.starts_with("n,t,E_raw,E_phys,D,residual\n"));

        assert!(config.output.dir.join("snapshot_000000.csv").exists());
        assert!(config.output.dir.join("snapshot_000100.csv").exists());
        assert!(config.output.dir.join("decay.txt").exists());

        let manifest = config.output.dir.join("manifest.txt");
        let reparsed = read_config(&manifest).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn failed_runs_still_write_a_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = quick_config(tmp.path());
        config.fractional.damping_enabled = false;
        config.physical.k1 = 1e4;
        config.physical.k2 = 1e4;
        config.time.newmark_beta = 0.0;
        config.time.t_final = 100.0;
        config.time.steps = 500;
        let err = run_to_dir(&config, &config.output.dir.clone()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
        let manifest = fs::read_to_string(config.output.dir.join("manifest.txt")).unwrap();
        assert!(manifest.contains("# status = failed: non-finite state"));
    }

    #[test]
    fn sweep_runs_each_distinct_eta_and_tabulates() {
        let tmp = tempfile::tempdir().unwrap();
        let mut config = quick_config(tmp.path());
        config.ic.kind = IcKind::Example2;
        config.time.t_final = 20.0;
        config.time.steps = 400;
        let config_path = tmp.path().join("base.txt");
        fs::write(&config_path, config_to_text(&config).unwrap()).unwrap();

        let report = cmd_sweep(&config_path, &[0.0, 0.01, 0.0], false).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.error.is_none()));
        assert!(report.out_dir.join("eta_0/energy.csv").exists());
        assert!(report.out_dir.join("eta_0.01/energy.csv").exists());

        let table = fs::read_to_string(&report.table_path).unwrap();
        assert!(table.starts_with("eta,slope,C,rms\n"));
        assert_eq!(table.lines().count(), 3);

        let parallel_root = tmp.path().join("par");
        let mut par_config = config.clone();
        par_config.output.dir = parallel_root.clone();
        let par_path = tmp.path().join("par.txt");
        fs::write(&par_path, config_to_text(&par_config).unwrap()).unwrap();
        let par_report = cmd_sweep(&par_path, &[0.0, 0.01], true).unwrap();
        let seq_table = fs::read_to_string(&report.table_path).unwrap();
        let par_table = fs::read_to_string(&par_report.table_path).unwrap();
        assert_eq!(seq_table, par_table);
    }

    #[test]
    fn sweep_without_values_is_a_validation_error() {
        let tmp = tempfile::tempdir().unwrap();
        let config = quick_config(tmp.path());
        let config_path = tmp.path().join("base.txt");
        fs::write(&config_path, config_to_text(&config).unwrap()).unwrap();
        let err = cmd_sweep(&config_path, &[], false).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn preset_command_writes_named_file() {
        let tmp = tempfile::tempdir().unwrap();
        let out = cmd_preset("example2_desk", Some(tmp.path())).unwrap();
        let PresetOutput::File(path) = out else {
            panic!("expected file output");
        };
        assert_eq!(path, tmp.path().join("example2_desk.txt"));
        let config = read_config(&path).unwrap();
        assert_eq!(config, preset_config("example2_desk").unwrap());
    }

    #[test]
    fn preset_command_prints_without_out_dir() {
        let out = cmd_preset("example1_desk", None).unwrap();
        let PresetOutput::Stdout(text) = out else {
            panic!("expected stdout output");
        };
        assert!(text.contains("space.J = 100"));
    }

    #[test]
    fn validation_report_covers_the_battery() {
        let report = cmd_validate_fractional();
        assert!(report.contains("diffusive driver vs closed form"));
        assert!(report.contains("eta=1 R=10 M=10000"));
        assert!(report.contains("eta=0 R=100 M=100000"));
        assert!(report.contains("convolution oracle vs closed form"));
        assert!(report.contains("constant f: driver max |output| = 0e0"));
    }
}
