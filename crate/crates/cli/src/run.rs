//! Task execution: sweeps through the core crate, CSV and SVG output.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use optosqueeze_core::spectra::{default_frequency_grid, s_limit, squeeze_spectrum};
use optosqueeze_core::stability::{sweep_detuning, threshold_linear_routh, threshold_small_detuning};
use optosqueeze_core::{Error as CoreError, Threshold};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, Scale, Task, DEFAULT_STABILITY_GRID};
use crate::svg::{self, Plot, Series};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration error [{code}]: {0}", code = .0.code())]
    Config(#[from] ConfigError),

    #[error("{context}: {source}")]
    Numerical { context: String, source: CoreError },

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Process exit status: 1 for configuration and I/O problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Numerical { source, .. } => match source {
                CoreError::Singular { .. } | CoreError::NoConvergence { .. } => 2,
                _ => 1,
            },
        }
    }
}

fn numerical(context: &str) -> impl FnOnce(CoreError) -> RunError + '_ {
    move |source| RunError::Numerical { context: context.to_string(), source }
}

/// Files written and text for standard output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub stdout: String,
}

/// Twelve significant digits.
fn num(v: f64) -> String {
    format!("{v:.11e}")
}

fn metadata(config: &RunConfig, extra: &[String]) -> String {
    let mut out = format!("# optosqueeze {}\n", config.task);
    for line in config.serialize_for_metadata().lines().filter(|l| !l.is_empty()) {
        let _ = writeln!(out, "# {line}");
    }
    for line in extra {
        let _ = writeln!(out, "# {line}");
    }
    out
}

/// Metadata comment block followed by a header row and `rows`.
fn csv_document<R>(metadata: String, header: &[&str], rows: impl IntoIterator<Item = R>) -> String
where
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_writer(metadata.into_bytes());
    // Writing into memory cannot fail.
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    match config.task {
        Task::Spectrum => run_spectrum(config),
        Task::Stability => run_stability(config),
        Task::Threshold => run_threshold(config),
    }
}

fn prepare_dir(config: &RunConfig) -> Result<(), RunError> {
    fs::create_dir_all(&config.output.dir).map_err(|source| RunError::Io { path: config.output.dir.clone(), source })
}

fn output_path(config: &RunConfig, suffix: &str) -> PathBuf {
    config.output.dir.join(format!("{}_{suffix}", config.output.prefix))
}

fn run_spectrum(config: &RunConfig) -> Result<RunSummary, RunError> {
    let params = &config.params;
    let steady = config.steady_state().map_err(numerical("steady state"))?;
    let grid = match &config.grid {
        Some(g) => g.values(),
        None => default_frequency_grid(params),
    };
    let thetas = [0.0, 0.5 * std::f64::consts::PI];
    let spec = squeeze_spectrum(params, &steady, config.coupling_kind, config.model, &grid, &thetas)
        .map_err(numerical("spectrum sweep"))?;

    let csv = csv_document(
        metadata(config, &[format!("validated = {}", spec.validated)]),
        &["omega_over_omega_m", "s_min", "theta_opt", "s_zz_theta0", "s_zz_theta90", "n_ba_like", "s_limit"],
        (0..grid.len()).map(|i| {
            [
                spec.grid[i],
                spec.s_min[i],
                spec.theta_opt[i],
                spec.s_zz[0][i],
                spec.s_zz[1][i],
                spec.n_ba_like[i],
                s_limit(spec.n_ba_like[i], params.n_th),
            ]
            .map(num)
        }),
    );

    prepare_dir(config)?;
    let mut summary = RunSummary::default();
    let path = output_path(config, "spectrum.csv");
    write_file(&path, &csv)?;
    summary.files.push(path);

    if config.output.svg {
        let plot = Plot {
            title: format!("Minimised squeezing spectrum ({}, {})", config.coupling_kind, config.model.as_str()),
            x_label: "omega / omega_m".into(),
            y_label: "S_min".into(),
            x_log: config.grid.is_some_and(|g| g.scale == Scale::Log),
            y_log: false,
            series: vec![Series { label: "s_min".into(), points: grid.iter().copied().zip(spec.s_min.iter().copied()).collect() }],
        };
        let path = output_path(config, "spectrum.svg");
        write_file(&path, &svg::render(&plot))?;
        summary.files.push(path);
    }
    Ok(summary)
}

fn run_stability(config: &RunConfig) -> Result<RunSummary, RunError> {
    let grid = config.grid.unwrap_or(DEFAULT_STABILITY_GRID);
    if grid.scale == Scale::Log {
        return Err(ConfigError::InvalidGrid("detuning sweeps use a linear grid".into()).into());
    }
    let steady = config.steady_state().map_err(numerical("steady state"))?;
    let sweep = sweep_detuning(&config.params, &steady, config.coupling_kind, (grid.min, grid.max), grid.points)
        .map_err(numerical("detuning sweep"))?;
    let disagreements = sweep.disagreements().count();
    let marginal = sweep.points.iter().filter(|p| p.report.marginal).count();

    let extra = [format!("method_disagreements = {disagreements}"), format!("marginal_points = {marginal}")];
    let csv = csv_document(
        metadata(config, &extra),
        &["delta_over_omega_m", "rh_stable", "max_re_eig_over_omega_m"],
        sweep.points.iter().map(|p| [num(p.delta), p.report.rh_stable.to_string(), num(p.report.max_re_eig)]),
    );
    let intervals = csv_document(
        metadata(config, &extra),
        &["lower_over_omega_m", "upper_over_omega_m", "lower_refined", "upper_refined"],
        sweep.intervals.iter().map(|iv| {
            [num(iv.lower), num(iv.upper), iv.lower_refined.to_string(), iv.upper_refined.to_string()]
        }),
    );

    prepare_dir(config)?;
    let mut summary = RunSummary::default();
    for (suffix, contents) in [("stability.csv", &csv), ("intervals.csv", &intervals)] {
        let path = output_path(config, suffix);
        write_file(&path, contents)?;
        summary.files.push(path);
    }
    if config.output.svg {
        let plot = Plot {
            title: format!("Dominant eigenvalue ({})", config.coupling_kind),
            x_label: "delta / omega_m".into(),
            y_label: "max Re(lambda) / omega_m".into(),
            x_log: false,
            y_log: false,
            series: vec![Series {
                label: "max_re_eig".into(),
                points: sweep.points.iter().map(|p| (p.delta, p.report.max_re_eig)).collect(),
            }],
        };
        let path = output_path(config, "stability.svg");
        write_file(&path, &svg::render(&plot))?;
        summary.files.push(path);
    }
    if disagreements > 0 {
        summary.stdout = format!("warning: the two stability channels disagree at {disagreements} points\n");
    }
    Ok(summary)
}

fn run_threshold(config: &RunConfig) -> Result<RunSummary, RunError> {
    let steady = config.steady_state().map_err(numerical("steady state"))?;
    let kind = config.coupling_kind;
    let closed = threshold_small_detuning(&config.params, &steady, kind).map_err(numerical("threshold"))?;
    let routh = threshold_linear_routh(&config.params, &steady, kind).map_err(numerical("threshold"))?;
    let mut stdout = String::new();
    match (closed, routh) {
        (Threshold::Critical(c), Threshold::Critical(r)) => {
            let _ = writeln!(stdout, "delta_crit_over_omega_m = {}", num(c));
            let _ = writeln!(stdout, "delta_crit_rad_per_s = {}", num(c * config.omega_m));
            let _ = writeln!(stdout, "delta_linear_routh_over_omega_m = {}", num(r));
        }
        _ => {
            let _ = writeln!(stdout, "delta_crit_over_omega_m = none (stable for all small detunings)");
        }
    }
    Ok(RunSummary { files: Vec::new(), stdout })
}
