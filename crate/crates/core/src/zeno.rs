//! Repeated projective measurements onto the initial system state.
//!
//! A run alternates free evolution for one interval with a selective
//! measurement that keeps only the "still in the initial state" branch. The
//! cumulative survival probability after `m` steps is the product of the
//! first `m` branch probabilities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::Evolver;
use crate::linalg::{kron_all, trace, ComplexMatrix};
use crate::model::lift;
use crate::register::{SiteRole, SpinRegister};
use crate::states::GibbsState;
use crate::{Error, Result, C64};

/// Step probabilities below this are treated as extinction.
pub const EXTINCTION_THRESHOLD: f64 = 1e-14;

/// Tolerance for accepting an operator as an orthogonal projector.
pub const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorScope {
    /// `|psi0><psi0| ⊗ I_bath`.
    #[default]
    SystemReduced,
    /// `|Psi0><Psi0|` for the purified full-space initial state.
    FullState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoSchedule {
    pub n_measurements: usize,
    /// Free-evolution time between measurements.
    pub interval: f64,
    pub scope: ProjectorScope,
    /// Keep the post-measurement density matrix of every step.
    pub record_states: bool,
}

impl ZenoSchedule {
    pub fn new(n_measurements: usize, interval: f64, scope: ProjectorScope) -> Result<Self> {
        let s = Self {
            n_measurements,
            interval,
            scope,
            record_states: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// Splits `total_time` into `n_measurements` equal intervals.
    pub fn over_total_time(
        n_measurements: usize,
        total_time: f64,
        scope: ProjectorScope,
    ) -> Result<Self> {
        if n_measurements == 0 {
            return Err(Error::InvalidParameter(
                "at least one measurement is required".into(),
            ));
        }
        Self::new(n_measurements, total_time / n_measurements as f64, scope)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_measurements == 0 {
            return Err(Error::InvalidParameter(
                "at least one measurement is required".into(),
            ));
        }
        if self.interval < 0.0 || !self.total_time().is_finite() {
            return Err(Error::InvalidParameter(format!(
                "measurement interval must be finite and non-negative (got {})",
                self.interval
            )));
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.n_measurements as f64 * self.interval
    }
}

/// `2 pi / lambda0`, the natural period of the system-bath coupling.
pub fn coupling_period(lambda0: f64) -> Result<f64> {
    if lambda0 == 0.0 || !lambda0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coupling period needs a finite non-zero lambda0 (got {lambda0})"
        )));
    }
    Ok(TAU / lambda0.abs())
}

/// Initial state to be protected, on the system alone and lifted to the full
/// space with each bath replaced by its ground state.
#[derive(Debug, Clone)]
pub struct ZenoTarget {
    pub system: Vec<C64>,
    pub full: Vec<C64>,
}

impl ZenoTarget {
    pub fn new(system: Vec<C64>, bath1: &GibbsState, bath2: &GibbsState) -> Result<Self> {
        let full = kron_all([
            &column(&system)?,
            &column(&bath1.dominant_eigenvector())?,
            &column(&bath2.dominant_eigenvector())?,
        ])?;
        // a column vector stored as the first column of a square matrix
        let n = full.dim();
        let full = (0..n).map(|i| full[(i, 0)]).collect();
        Ok(Self { system, full })
    }
}

// Pads a vector into the first column of a square matrix so that Kronecker
// products of columns stay columns.
fn column(v: &[C64]) -> Result<ComplexMatrix> {
    let n = v.len();
    ComplexMatrix::from_fn(n, |i, j| if j == 0 { v[i] } else { C64::new(0.0, 0.0) })
}

/// `|psi><psi| ⊗ I` on the full register.
pub fn system_projector(psi: &[C64], register: &SpinRegister) -> Result<ComplexMatrix> {
    lift(&ComplexMatrix::outer(psi), SiteRole::System, register)
}

pub fn projector_for(
    scope: ProjectorScope,
    target: &ZenoTarget,
    register: &SpinRegister,
) -> Result<ComplexMatrix> {
    match scope {
        ProjectorScope::SystemReduced => system_projector(&target.system, register),
        ProjectorScope::FullState => {
            if target.full.len() != register.dim() {
                return Err(Error::DimensionMismatch(
                    "target does not match the register".into(),
                ));
            }
            Ok(ComplexMatrix::outer(&target.full))
        }
    }
}

/// `||P^2 - P||_F` and `||P - P^dagger||_F` within [`PROJECTOR_TOL`].
pub fn check_projector(p: &ComplexMatrix) -> Result<()> {
    let idem = (&(p * p) - p).frobenius_norm();
    let herm = p.hermiticity_residual() * p.frobenius_norm();
    if idem > PROJECTOR_TOL || herm > PROJECTOR_TOL {
        return Err(Error::InvalidProjector(format!(
            "idempotency residual {idem:e}, Hermiticity residual {herm:e}"
        )));
    }
    Ok(())
}

/// Selective measurement: returns `(P rho P / p, p)` with `p = Tr(P rho P)`.
/// Fails with [`Error::Extinction`] when `p` is below [`EXTINCTION_THRESHOLD`].
pub fn projective_channel(
    rho: &ComplexMatrix,
    projector: &ComplexMatrix,
) -> Result<(ComplexMatrix, f64)> {
    if rho.dim() != projector.dim() {
        return Err(Error::DimensionMismatch(
            "state and projector dimensions differ".into(),
        ));
    }
    check_projector(projector)?;
    let kept = &(projector * rho) * projector;
    let probability = trace(&kept).re;
    if probability < EXTINCTION_THRESHOLD {
        return Err(Error::Extinction {
            probability: probability.max(0.0),
        });
    }
    Ok((kept.scale_real(1.0 / probability), probability.min(1.0)))
}

/// `|prod_k <Psi0| U(t_k) |Psi0>|^2` for the purified full-space state.
pub fn survival_amplitude_product(
    psi0_full: &[C64],
    evolver: &Evolver,
    schedule: &ZenoSchedule,
) -> Result<f64> {
    schedule.validate()?;
    let amp = evolver.return_amplitude(psi0_full, schedule.interval);
    Ok(amp.norm_sqr().powi(schedule.n_measurements as i32).min(1.0))
}

#[derive(Debug, Clone, Default)]
pub struct ZenoResult {
    /// Time of each measurement.
    pub times: Vec<f64>,
    /// Branch probability of each individual measurement.
    pub step_probabilities: Vec<f64>,
    /// Cumulative survival probability after each measurement.
    pub survival_probabilities: Vec<f64>,
    /// Running `|prod <Psi0|U|Psi0>|^2` for the purified initial state.
    pub amplitude_product: Vec<f64>,
    /// `|Tr(U(t_k) rho)|^2` with `rho` the state entering each step.
    pub trace_diagnostic: Vec<f64>,
    /// Step (1-based) at which the survival branch vanished.
    pub extinct_at: Option<usize>,
    pub post_measurement_states: Option<Vec<ComplexMatrix>>,
}

impl ZenoResult {
    pub fn final_survival(&self) -> f64 {
        self.survival_probabilities.last().copied().unwrap_or(1.0)
    }
}

/// Alternates evolution over `schedule.interval` with the selective
/// measurement chosen by `schedule.scope`.
pub fn run_zeno(
    rho0: &ComplexMatrix,
    evolver: &Evolver,
    schedule: &ZenoSchedule,
    target: &ZenoTarget,
) -> Result<ZenoResult> {
    schedule.validate()?;
    let register = evolver.register();
    if rho0.dim() != register.dim() {
        return Err(Error::DimensionMismatch(
            "initial state does not match the register".into(),
        ));
    }
    let projector = projector_for(schedule.scope, target, register)?;
    check_projector(&projector)?;

    let u = evolver.propagator(schedule.interval);
    let u_dag = crate::linalg::dagger(&u);
    let step_amp = evolver.return_amplitude(&target.full, schedule.interval);

    let mut out = ZenoResult {
        post_measurement_states: schedule.record_states.then(Vec::new),
        ..ZenoResult::default()
    };
    let mut state = rho0.clone();
    let mut survival = 1.0;
    let mut amp = C64::new(1.0, 0.0);
    for k in 1..=schedule.n_measurements {
        out.times.push(k as f64 * schedule.interval);
        out.trace_diagnostic.push(trace(&(&u * &state)).norm_sqr());
        amp *= step_amp;
        out.amplitude_product.push(amp.norm_sqr().min(1.0));

        if out.extinct_at.is_some() {
            out.step_probabilities.push(0.0);
            out.survival_probabilities.push(0.0);
            continue;
        }
        let evolved = &(&u * &state) * &u_dag;
        match projective_channel(&evolved, &projector) {
            Ok((next, p)) => {
                survival *= p;
                out.step_probabilities.push(p);
                out.survival_probabilities.push(survival);
                if let Some(states) = out.post_measurement_states.as_mut() {
                    states.push(next.clone());
                }
                state = next;
            }
            Err(Error::Extinction { probability }) => {
                out.extinct_at = Some(k);
                out.step_probabilities.push(probability);
                out.survival_probabilities.push(0.0);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
