//! Initial states: pure two-spin system states and Gibbs bath states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::linalg::{herm_eig, kron_all, validate_density, ComplexMatrix, HermEigDecomp};
use crate::{Error, Result, C64};

/// Tolerance used when validating density-matrix factors.
pub const DENSITY_TOL: f64 = 1e-12;

/// Default perturbation amplitude for the perturbed partial state.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemStateKind {
    /// `(|00> + |11>)/sqrt(2)`.
    Bell,
    /// `(sqrt(3)/2) e^{-i pi/8}|00> + (1/2) e^{i pi/8}|11>`.
    Partial,
    /// The partial state plus `epsilon |01>`, renormalized.
    PartialPerturbed,
    /// Explicit amplitudes over `|00>, |01>, |10>, |11>`.
    Custom,
}

/// Description of the pure initial system state
/// `e^{-i delta/2} cos(alpha/2)|00> + e^{i delta/2} sin(alpha/2)|11>`
/// (plus the optional perturbation or explicit amplitudes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemStateSpec {
    pub kind: SystemStateKind,
    /// Overrides the preset mixing angle of the chosen kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Overrides the preset relative phase of the chosen kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<[C64; 4]>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl Default for SystemStateSpec {
    fn default() -> Self {
        Self::new(SystemStateKind::Bell)
    }
}

impl SystemStateSpec {
    pub fn new(kind: SystemStateKind) -> Self {
        Self {
            kind,
            alpha: None,
            delta: None,
            epsilon: DEFAULT_EPSILON,
            amplitudes: None,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn custom(amplitudes: [C64; 4]) -> Self {
        Self {
            amplitudes: Some(amplitudes),
            ..Self::new(SystemStateKind::Custom)
        }
    }

    /// `(alpha, delta)` after applying the preset of the kind.
    pub fn angles(&self) -> (f64, f64) {
        let (a, d) = match self.kind {
            SystemStateKind::Bell => (FRAC_PI_2, 0.0),
            _ => (FRAC_PI_3, FRAC_PI_4),
        };
        (self.alpha.unwrap_or(a), self.delta.unwrap_or(d))
    }

    pub fn validate(&self) -> Result<()> {
        let (a, d) = self.angles();
        if !a.is_finite() || !d.is_finite() || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(
                "state angles and epsilon must be finite".into(),
            ));
        }
        match (self.kind, &self.amplitudes) {
            (SystemStateKind::Custom, None) => Err(Error::InvalidParameter(
                "custom state requires amplitudes".into(),
            )),
            (SystemStateKind::Custom, Some(amps)) => {
                if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "custom amplitudes must be finite".into(),
                    ));
                }
                Ok(())
            }
            (_, Some(_)) => Err(Error::InvalidParameter(
                "amplitudes are only accepted for the custom kind".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Normalized state vector over `|00>, |01>, |10>, |11>`.
pub fn system_state_vector(spec: &SystemStateSpec) -> Result<Vec<C64>> {
    spec.validate()?;
    let zero = C64::new(0.0, 0.0);
    let raw = match spec.kind {
        SystemStateKind::Custom => spec.amplitudes.expect("validated").to_vec(),
        kind => {
            let (alpha, delta) = spec.angles();
            let a = C64::from_polar((alpha / 2.0).cos(), -delta / 2.0);
            let d = C64::from_polar((alpha / 2.0).sin(), delta / 2.0);
            let eps = if kind == SystemStateKind::PartialPerturbed {
                spec.epsilon
            } else {
                0.0
            };
            vec![a, C64::new(eps, 0.0), zero, d]
        }
    };
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-300 || !norm.is_finite() {
        return Err(Error::InvalidParameter(
            "state amplitudes have zero norm".into(),
        ));
    }
    Ok(raw.into_iter().map(|z| z / norm).collect())
}

/// `|psi><psi|` for the configured system state.
pub fn make_system_state(spec: &SystemStateSpec) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::outer(&system_state_vector(spec)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    /// k_B T.
    pub temperature: f64,
}

/// Gibbs state together with its spectral data.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub density: ComplexMatrix,
    /// Eigen-decomposition of the Hamiltonian the state was built from.
    pub decomposition: HermEigDecomp,
    /// Occupation of each energy eigenstate, ascending energy.
    pub populations: Vec<f64>,
    /// Natural log of each population. Finite even where the population
    /// itself underflows.
    pub log_populations: Vec<f64>,
}

impl GibbsState {
    /// Most populated eigenvector (the ground state).
    pub fn dominant_eigenvector(&self) -> Vec<C64> {
        self.decomposition.eigenvector(0)
    }
}

/// `exp(-h/kT) / Tr exp(-h/kT)`, evaluated with the spectrum shifted to its
/// minimum so that no exponent is positive.
pub fn gibbs_state(h: &ComplexMatrix, spec: ThermalSpec) -> Result<GibbsState> {
    let kt = spec.temperature;
    if kt <= 0.0 || !kt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive (got {kt})"
        )));
    }
    let decomposition = herm_eig(h)?;
    let e_min = decomposition.eigenvalues[0];
    let exponents: Vec<f64> = decomposition
        .eigenvalues
        .iter()
        .map(|&e| -(e - e_min) / kt)
        .collect();
    let weights: Vec<f64> = exponents.iter().map(|x| x.exp()).collect();
    // the ground-state weight is exactly 1, so z >= 1
    let z: f64 = weights.iter().sum();
    let log_z = z.ln();
    let populations: Vec<f64> = weights.iter().map(|w| w / z).collect();
    let log_populations = exponents.iter().map(|x| x - log_z).collect();
    let diag: Vec<C64> = populations.iter().map(|&p| C64::new(p, 0.0)).collect();
    let density = decomposition.compose(&diag);
    Ok(GibbsState {
        density,
        decomposition,
        populations,
        log_populations,
    })
}

pub fn thermal_state(h: &ComplexMatrix, spec: ThermalSpec) -> Result<ComplexMatrix> {
    Ok(gibbs_state(h, spec)?.density)
}

/// `rho_s ⊗ rho_b1 ⊗ rho_b2`, validating each factor first.
pub fn assemble_initial(
    rho_s: &ComplexMatrix,
    rho_b1: &ComplexMatrix,
    rho_b2: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if rho_s.dim() != 4 {
        return Err(Error::DimensionMismatch("system factor must be 4x4".into()));
    }
    for (name, f) in [("system", rho_s), ("bath 1", rho_b1), ("bath 2", rho_b2)] {
        validate_density(f, DENSITY_TOL)
            .map_err(|e| Error::InvalidDensity(format!("{name} factor: {e}")))?;
    }
    kron_all([rho_s, rho_b1, rho_b2])
}
