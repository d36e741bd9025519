//! Unitary evolution of the full density matrix under a constant Hamiltonian.
//!
//! The Hamiltonian is diagonalized once when the [`Evolver`] is built. Each
//! propagator `U(t) = V exp(-i Λ t) V^dagger` is then assembled directly from
//! the cached decomposition, so no error accumulates along the time grid.

use rayon::prelude::*;

use crate::entanglement::concurrence;
use crate::linalg::{
    dagger, herm_eig, partial_trace, trace, validate_density, ComplexMatrix, HermEigDecomp,
};
use crate::register::SpinRegister;
use crate::{Error, Result, C64};

/// Tolerance applied to every reduced state along a trajectory.
pub const REDUCED_STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Evolver {
    hamiltonian: ComplexMatrix,
    decomp: HermEigDecomp,
    register: SpinRegister,
}

impl Evolver {
    pub fn new(hamiltonian: ComplexMatrix, register: SpinRegister) -> Result<Self> {
        if hamiltonian.dim() != register.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian dimension {} does not match register dimension {}",
                hamiltonian.dim(),
                register.dim()
            )));
        }
        let decomp = herm_eig(&hamiltonian)?;
        Ok(Self {
            hamiltonian,
            decomp,
            register,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn decomposition(&self) -> &HermEigDecomp {
        &self.decomp
    }

    pub fn register(&self) -> &SpinRegister {
        &self.register
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.decomp.apply_fn(|e| C64::from_polar(1.0, -e * t))
    }

    /// `U(t) rho0 U(t)^dagger`.
    pub fn evolve(&self, rho0: &ComplexMatrix, t: f64) -> ComplexMatrix {
        let u = self.propagator(t);
        &(&u * rho0) * &dagger(&u)
    }

    /// `<psi| exp(-i H t) |psi>` summed over the spectrum.
    pub fn return_amplitude(&self, psi: &[C64], t: f64) -> C64 {
        let n = self.decomp.dim();
        let v = &self.decomp.eigenvectors;
        (0..n)
            .map(|k| {
                let overlap: C64 = (0..n).map(|i| v[(i, k)].conj() * psi[i]).sum();
                overlap.norm_sqr() * C64::from_polar(1.0, -self.decomp.eigenvalues[k] * t)
            })
            .sum()
    }

    /// Evolves `rho0` over an ascending time grid, recording the reduced
    /// system state and its concurrence at every point. Grid points are
    /// evaluated in parallel; the result is identical to sequential order.
    pub fn run_trajectory(&self, rho0: &ComplexMatrix, times: &[f64]) -> Result<Trajectory> {
        if rho0.dim() != self.register.dim() {
            return Err(Error::DimensionMismatch(
                "initial state does not match the register".into(),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTimeGrid);
        }
        let keep = self.register.system_sites();
        let points: Vec<Point> = times
            .par_iter()
            .map(|&t| self.point(rho0, t, &keep))
            .collect::<Result<_>>()?;

        let mut tr = Trajectory {
            times: times.to_vec(),
            ..Trajectory::default()
        };
        for p in points {
            tr.reduced_states.push(p.reduced);
            tr.concurrences.push(p.concurrence);
            tr.reduced_purities.push(p.reduced_purity);
            tr.min_reduced_eigenvalues.push(p.min_reduced_eigenvalue);
            tr.full_traces.push(p.full_trace);
            tr.full_purities.push(p.full_purity);
            tr.energies.push(p.energy);
        }
        Ok(tr)
    }

    fn point(&self, rho0: &ComplexMatrix, t: f64, keep: &[usize]) -> Result<Point> {
        let rho = self.evolve(rho0, t);
        let reduced = partial_trace(&rho, &self.register, keep)?;
        validate_density(&reduced, REDUCED_STATE_TOL)
            .map_err(|e| Error::InvalidDensity(format!("reduced state at t = {t}: {e}")))?;
        let min_reduced_eigenvalue = herm_eig(&reduced)?.eigenvalues[0];
        Ok(Point {
            concurrence: concurrence(&reduced)?.value,
            reduced_purity: purity(&reduced),
            min_reduced_eigenvalue,
            full_trace: trace(&rho).re,
            full_purity: purity(&rho),
            energy: expectation(&self.hamiltonian, &rho),
            reduced,
        })
    }
}

struct Point {
    reduced: ComplexMatrix,
    concurrence: f64,
    reduced_purity: f64,
    min_reduced_eigenvalue: f64,
    full_trace: f64,
    full_purity: f64,
    energy: f64,
}

/// `Tr(rho^2)` for Hermitian `rho`.
pub fn purity(rho: &ComplexMatrix) -> f64 {
    rho.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `Re Tr(op rho)`.
pub fn expectation(op: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    let n = op.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += op[(i, j)] * rho[(j, i)];
        }
    }
    acc.re
}

/// Per-time data along an evolution.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Reduced two-spin states.
    pub reduced_states: Vec<ComplexMatrix>,
    pub concurrences: Vec<f64>,
    pub reduced_purities: Vec<f64>,
    pub min_reduced_eigenvalues: Vec<f64>,
    /// Trace of the full density matrix.
    pub full_traces: Vec<f64>,
    pub full_purities: Vec<f64>,
    /// `Tr(H rho(t))`.
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `|Tr rho(t) - 1|` at each point.
    pub fn trace_errors(&self) -> Vec<f64> {
        self.full_traces.iter().map(|t| (t - 1.0).abs()).collect()
    }

    pub fn min_concurrence(&self) -> Option<f64> {
        self.concurrences.iter().copied().reduce(f64::min)
    }
}

/// Uniform grid `0, dt, 2 dt, ...` up to and including `t_max` (within
/// round-off).
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if dt <= 0.0 || t_max < 0.0 || !t_max.is_finite() || !dt.is_finite() {
        return Err(Error::InvalidTimeGrid);
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}
