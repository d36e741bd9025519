//! Wootters concurrence of two-qubit density matrices.

use std::sync::OnceLock;

use crate::linalg::{dagger, herm_eig, kron, validate_density, ComplexMatrix};
use crate::{Error, Result, C64};

/// Negative eigenvalues of `rho * rho_tilde` down to this size are treated
/// as round-off and clamped to zero.
pub const CLAMP_TOL: f64 = 1e-10;

/// Eigenvalues of a unit-trace operator smaller than this are round-off and
/// are set to zero before any square root is taken. Without this, a pure
/// state's null space contributes `sqrt(1e-17) ~ 3e-9` noise.
pub const NOISE_FLOOR: f64 = 1e-14;

fn floor_sqrt(x: f64) -> f64 {
    if x <= NOISE_FLOOR {
        0.0
    } else {
        x.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Square roots of the eigenvalues of `rho * rho_tilde`, descending.
    pub sqrt_eigenvalues: [f64; 4],
}

fn yy() -> &'static ComplexMatrix {
    static YY: OnceLock<ComplexMatrix> = OnceLock::new();
    YY.get_or_init(|| kron(&ComplexMatrix::pauli_y(), &ComplexMatrix::pauli_y()).expect("4x4"))
}

fn check_two_qubit(rho: &ComplexMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 4x4 density matrix, got {0}x{0}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `(sigma_y ⊗ sigma_y) conj(rho) (sigma_y ⊗ sigma_y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_two_qubit(rho)?;
    let yy = yy();
    Ok(&(yy * &rho.conj()) * yy)
}

/// Concurrence `max(0, s1 - s2 - s3 - s4)`.
///
/// The `s_i` are obtained from the Hermitian matrix
/// `sqrt(rho) rho_tilde sqrt(rho)`, which shares its spectrum with
/// `rho rho_tilde`.
pub fn concurrence(rho: &ComplexMatrix) -> Result<ConcurrenceResult> {
    check_two_qubit(rho)?;
    validate_density(rho, CLAMP_TOL)?;
    let flipped = spin_flip(rho)?;
    let sqrt_rho = herm_eig(rho)?.apply_fn(|x| C64::new(floor_sqrt(x), 0.0));
    let r = &(&sqrt_rho * &flipped) * &sqrt_rho;
    // Hermitian in exact arithmetic; for product states it is pure round-off,
    // which the relative Hermiticity check in herm_eig would reject.
    let r = (&r + &dagger(&r)).scale_real(0.5);
    let eigenvalues = herm_eig(&r)?.eigenvalues;

    let mut s = [0.0; 4];
    for (dst, &ev) in s.iter_mut().zip(eigenvalues.iter().rev()) {
        if ev < -CLAMP_TOL {
            return Err(Error::InvalidDensity(format!(
                "rho * rho_tilde has negative eigenvalue {ev:e}"
            )));
        }
        *dst = floor_sqrt(ev);
    }
    let value = (s[0] - s[1] - s[2] - s[3]).max(0.0);
    Ok(ConcurrenceResult {
        value,
        sqrt_eigenvalues: s,
    })
}
