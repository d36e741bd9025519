//! Parameter sweeps over `(lambda, lambda0)` and file output.
//!
//! Every sweep point is independent: it builds its own Hamiltonian, initial
//! state and evolver, and writes its own files. Points run concurrently on a
//! dedicated thread pool; output names depend only on the parameters, so the
//! tree is identical for any thread count or list order.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, OutputFormat};
use crate::dynamics::{uniform_grid, Evolver, Trajectory};
use crate::linalg::ComplexMatrix;
use crate::model::{bath1_factor, bath2_factor, build_total, ModelParams};
use crate::states::{
    assemble_initial, gibbs_state, make_system_state, system_state_vector, ThermalSpec,
};
use crate::zeno::{run_zeno, ZenoResult, ZenoTarget};

pub const TRAJECTORY_HEADER: &str = "t,concurrence,purity,trace_error";
pub const ZENO_HEADER: &str = "step,t,step_probability,survival,amplitude_product,trace_diagnostic";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed at lambda = {lambda}, lambda0 = {lambda0}: {source}")]
    Computation {
        lambda: f64,
        lambda0: f64,
        source: crate::Error,
    },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl SweepError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Computation { .. } => 2,
            Self::Io { .. } => 3,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    /// Written files in sweep order.
    pub files: Vec<PathBuf>,
}

/// Everything needed to simulate one sweep point.
#[derive(Debug, Clone)]
pub struct PointSetup {
    pub params: ModelParams,
    pub evolver: Evolver,
    pub rho0: ComplexMatrix,
    pub target: ZenoTarget,
}

pub fn prepare_point(
    cfg: &ExperimentConfig,
    lambda: f64,
    lambda0: f64,
) -> crate::Result<PointSetup> {
    let params = cfg.params(lambda, lambda0);
    params.validate()?;
    let register = params.register()?;
    let h = build_total(&params, &cfg.topology(), &register)?;
    let thermal = ThermalSpec {
        temperature: params.temperature,
    };
    let g1 = gibbs_state(&bath1_factor(&params)?, thermal)?;
    let g2 = gibbs_state(&bath2_factor(&params)?, thermal)?;
    let rho0 = assemble_initial(&make_system_state(&cfg.state)?, &g1.density, &g2.density)?;
    let target = ZenoTarget::new(system_state_vector(&cfg.state)?, &g1, &g2)?;
    Ok(PointSetup {
        params,
        evolver: Evolver::new(h, register)?,
        rho0,
        target,
    })
}

/// Results for one `(lambda, lambda0)` pair.
#[derive(Debug, Clone)]
pub struct PointOutput {
    pub lambda: f64,
    pub lambda0: f64,
    pub trajectory: Trajectory,
    /// `(N, result)` for each requested measurement count.
    pub zeno: Vec<(usize, ZenoResult)>,
}

pub fn simulate_point(
    cfg: &ExperimentConfig,
    lambda: f64,
    lambda0: f64,
) -> crate::Result<PointOutput> {
    let setup = prepare_point(cfg, lambda, lambda0)?;
    let times = uniform_grid(cfg.t_max, cfg.dt)?;
    let trajectory = setup.evolver.run_trajectory(&setup.rho0, &times)?;
    let zeno = match &cfg.zeno {
        Some(z) => {
            z.n.iter()
                .map(|&n| {
                    let schedule = z.schedule(n, lambda0)?;
                    Ok((
                        n,
                        run_zeno(&setup.rho0, &setup.evolver, &schedule, &setup.target)?,
                    ))
                })
                .collect::<crate::Result<_>>()?
        }
        None => Vec::new(),
    };
    Ok(PointOutput {
        lambda,
        lambda0,
        trajectory,
        zeno,
    })
}

/// Shortest decimal string that parses back to `x`. Very large or small
/// magnitudes switch to exponent notation.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn trajectory_file_name(lambda: f64, lambda0: f64, format: OutputFormat) -> String {
    format!(
        "traj_lam{}_l0{}.{}",
        format_number(lambda),
        format_number(lambda0),
        format.extension()
    )
}

pub fn zeno_file_name(lambda: f64, lambda0: f64, n: usize, format: OutputFormat) -> String {
    format!(
        "zeno_lam{}_l0{}_n{n}.{}",
        format_number(lambda),
        format_number(lambda0),
        format.extension()
    )
}

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub concurrence: f64,
    pub purity: f64,
    pub trace_error: f64,
}

pub fn trajectory_records(tr: &Trajectory) -> Vec<TrajectoryRecord> {
    let errors = tr.trace_errors();
    (0..tr.len())
        .map(|i| TrajectoryRecord {
            t: tr.times[i],
            concurrence: tr.concurrences[i],
            purity: tr.reduced_purities[i],
            trace_error: errors[i],
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoRecord {
    pub step: usize,
    pub t: f64,
    pub step_probability: f64,
    pub survival: f64,
    pub amplitude_product: f64,
    pub trace_diagnostic: f64,
}

pub fn zeno_records(z: &ZenoResult) -> Vec<ZenoRecord> {
    (0..z.times.len())
        .map(|i| ZenoRecord {
            step: i + 1,
            t: z.times[i],
            step_probability: z.step_probabilities[i],
            survival: z.survival_probabilities[i],
            amplitude_product: z.amplitude_product[i],
            trace_diagnostic: z.trace_diagnostic[i],
        })
        .collect()
}

/// Writes `tr` to `sink` in the requested format.
pub fn emit_trajectory(
    tr: &Trajectory,
    sink: &mut impl io::Write,
    format: OutputFormat,
) -> io::Result<()> {
    sink.write_all(render_trajectory(tr, format).as_bytes())
}

pub fn render_trajectory(tr: &Trajectory, format: OutputFormat) -> String {
    let records = trajectory_records(tr);
    match format {
        OutputFormat::Csv => {
            let mut out = String::with_capacity(64 * (records.len() + 1));
            out.push_str(TRAJECTORY_HEADER);
            out.push('\n');
            for r in &records {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    format_number(r.t),
                    format_number(r.concurrence),
                    format_number(r.purity),
                    format_number(r.trace_error)
                );
            }
            out
        }
        OutputFormat::Json => json(&records),
    }
}

pub fn render_zeno(z: &ZenoResult, format: OutputFormat) -> String {
    let records = zeno_records(z);
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(ZENO_HEADER);
            out.push('\n');
            for r in &records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.step,
                    format_number(r.t),
                    format_number(r.step_probability),
                    format_number(r.survival),
                    format_number(r.amplitude_product),
                    format_number(r.trace_diagnostic)
                );
            }
            out
        }
        OutputFormat::Json => json(&records),
    }
}

fn json<T: Serialize>(records: &[T]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records contain only finite numbers");
    s.push('\n');
    s
}

/// Parses a trajectory file produced by [`render_trajectory`].
pub fn parse_trajectory(text: &str, format: OutputFormat) -> Result<Vec<TrajectoryRecord>, String> {
    match format {
        OutputFormat::Json => serde_json::from_str(text).map_err(|e| e.to_string()),
        OutputFormat::Csv => {
            let mut lines = text.lines();
            if lines.next() != Some(TRAJECTORY_HEADER) {
                return Err("missing or wrong header".into());
            }
            lines
                .enumerate()
                .map(|(i, line)| {
                    let v: Vec<f64> = line
                        .split(',')
                        .map(|f| f.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| format!("row {}: {e}", i + 1))?;
                    match v[..] {
                        [t, concurrence, purity, trace_error] => Ok(TrajectoryRecord {
                            t,
                            concurrence,
                            purity,
                            trace_error,
                        }),
                        _ => Err(format!(
                            "row {}: expected 4 fields, found {}",
                            i + 1,
                            v.len()
                        )),
                    }
                })
                .collect()
        }
    }
}

/// Parses a Zeno file produced by [`render_zeno`].
pub fn parse_zeno(text: &str, format: OutputFormat) -> Result<Vec<ZenoRecord>, String> {
    match format {
        OutputFormat::Json => serde_json::from_str(text).map_err(|e| e.to_string()),
        OutputFormat::Csv => {
            let mut lines = text.lines();
            if lines.next() != Some(ZENO_HEADER) {
                return Err("missing or wrong header".into());
            }
            lines
                .enumerate()
                .map(|(i, line)| {
                    let fields: Vec<&str> = line.split(',').collect();
                    let [step, rest @ ..] = &fields[..] else {
                        unreachable!("split yields at least one field")
                    };
                    let step = step
                        .parse::<usize>()
                        .map_err(|e| format!("row {}: {e}", i + 1))?;
                    let v: Vec<f64> = rest
                        .iter()
                        .map(|f| f.parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| format!("row {}: {e}", i + 1))?;
                    match v[..] {
                        [t, step_probability, survival, amplitude_product, trace_diagnostic] => {
                            Ok(ZenoRecord {
                                step,
                                t,
                                step_probability,
                                survival,
                                amplitude_product,
                                trace_diagnostic,
                            })
                        }
                        _ => Err(format!(
                            "row {}: expected 6 fields, found {}",
                            i + 1,
                            fields.len()
                        )),
                    }
                })
                .collect()
        }
    }
}

// Writes `text` and checks that reading it back yields `expected`.
fn write_checked<T: PartialEq>(
    path: &Path,
    text: &str,
    expected: &[T],
    parse: impl Fn(&str) -> Result<Vec<T>, String>,
) -> Result<(), SweepError> {
    fs::write(path, text).map_err(|e| SweepError::io(path, e))?;
    let back = fs::read_to_string(path).map_err(|e| SweepError::io(path, e))?;
    match parse(&back) {
        Ok(records) if records == expected => Ok(()),
        Ok(_) => Err(SweepError::io(
            path,
            io::Error::new(io::ErrorKind::InvalidData, "read-back mismatch"),
        )),
        Err(msg) => Err(SweepError::io(
            path,
            io::Error::new(io::ErrorKind::InvalidData, msg),
        )),
    }
}

/// Writes the files for one point into `dir` and returns their paths.
pub fn write_point(
    out: &PointOutput,
    dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, SweepError> {
    let mut files = Vec::with_capacity(1 + out.zeno.len());
    let path = dir.join(trajectory_file_name(out.lambda, out.lambda0, format));
    let records = trajectory_records(&out.trajectory);
    write_checked(
        &path,
        &render_trajectory(&out.trajectory, format),
        &records,
        |s| parse_trajectory(s, format),
    )?;
    files.push(path);
    for (n, z) in &out.zeno {
        let path = dir.join(zeno_file_name(out.lambda, out.lambda0, *n, format));
        write_checked(&path, &render_zeno(z, format), &zeno_records(z), |s| {
            parse_zeno(s, format)
        })?;
        files.push(path);
    }
    Ok(files)
}

/// Runs every `(lambda, lambda0)` pair of `cfg` and writes the output tree.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &SweepOptions) -> Result<SweepReport, SweepError> {
    cfg.validate()?;
    if opts.threads == Some(0) {
        return Err(ConfigError::Range("thread count must be positive".into()).into());
    }
    let dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| cfg.output.dir.clone());
    let format = opts.format.unwrap_or(cfg.output.format);
    fs::create_dir_all(&dir).map_err(|e| SweepError::io(&dir, e))?;

    let pairs: Vec<(f64, f64)> = cfg
        .lambda0
        .iter()
        .flat_map(|&l0| cfg.lambda.iter().map(move |&l| (l, l0)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| SweepError::io(&dir, io::Error::other(e.to_string())))?;

    let written: Vec<Vec<PathBuf>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(lambda, lambda0)| {
                let out = simulate_point(cfg, lambda, lambda0).map_err(|source| {
                    SweepError::Computation {
                        lambda,
                        lambda0,
                        source,
                    }
                })?;
                write_point(&out, &dir, format)
            })
            .collect::<Result<_, _>>()
    })?;
    Ok(SweepReport {
        files: written.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_is_minimal() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(10.0), "10");
        assert_eq!(format_number(0.1), "0.1");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1e-12), "1e-12");
        assert_eq!(format_number(2.5e20), "2.5e20");
        for x in [
            0.1 + 0.2,
            std::f64::consts::PI,
            1.0 / 3.0,
            3.3e-7,
            6.02e23,
            -1e-300,
        ] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn file_names() {
        assert_eq!(
            trajectory_file_name(10.0, 0.1, OutputFormat::Csv),
            "traj_lam10_l00.1.csv"
        );
        assert_eq!(
            trajectory_file_name(-1.5, 1.0, OutputFormat::Json),
            "traj_lam-1.5_l01.json"
        );
        assert_eq!(
            zeno_file_name(0.0, 1.0, 32, OutputFormat::Csv),
            "zeno_lam0_l01_n32.csv"
        );
    }

    fn bell_point() -> Trajectory {
        let cfg = ExperimentConfig::default();
        let setup = prepare_point(&cfg, 0.0, 0.1).unwrap();
        setup.evolver.run_trajectory(&setup.rho0, &[0.0]).unwrap()
    }

    #[test]
    fn single_point_csv_row() {
        let text = render_trajectory(&bell_point(), OutputFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        let v: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 1.0).abs() <= 1e-10);
        assert!((v[2] - 1.0).abs() <= 1e-10);
        assert!(v[3] <= 1e-12);
    }

    #[test]
    fn emitted_text_round_trips() {
        let tr = bell_point();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let mut buf = Vec::new();
            emit_trajectory(&tr, &mut buf, format).unwrap();
            let back = parse_trajectory(std::str::from_utf8(&buf).unwrap(), format).unwrap();
            assert_eq!(back, trajectory_records(&tr));
        }
    }

    #[test]
    fn csv_parser_rejects_malformed_input() {
        assert!(parse_trajectory("t,c\n0,1\n", OutputFormat::Csv).is_err());
        assert!(
            parse_trajectory(&format!("{TRAJECTORY_HEADER}\n0,1,1\n"), OutputFormat::Csv).is_err()
        );
        assert!(parse_trajectory(
            &format!("{TRAJECTORY_HEADER}\n0,x,1,0\n"),
            OutputFormat::Csv
        )
        .is_err());
        assert!(parse_zeno(
            &format!("{ZENO_HEADER}\n1.5,0,1,1,1,1\n"),
            OutputFormat::Csv
        )
        .is_err());
    }

    #[test]
    fn error_exit_codes() {
        let cfg = SweepError::Config(ConfigError::Range("x".into()));
        let comp = SweepError::Computation {
            lambda: 0.0,
            lambda0: 0.0,
            source: crate::Error::NoConvergence,
        };
        let io = SweepError::io(Path::new("x"), io::Error::other("x"));
        assert_eq!(
            (cfg.exit_code(), comp.exit_code(), io.exit_code()),
            (1, 2, 3)
        );
    }

    #[test]
    fn zero_threads_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SweepOptions {
            out_dir: Some(dir.path().into()),
            threads: Some(0),
            ..SweepOptions::default()
        };
        assert_eq!(
            run_sweep(&ExperimentConfig::default(), &opts)
                .unwrap_err()
                .exit_code(),
            1
        );
    }
}
