//! Dense complex linear algebra on small square matrices.
//!
//! Everything in the simulator is a [`ComplexMatrix`]: Pauli operators,
//! Hamiltonians, propagators and density matrices. Dimensions stay at or
//! below a few thousand, so storage is a flat row-major `Vec`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::register::SpinRegister;
use crate::{Error, Result, C64};

/// Largest matrix dimension any Kronecker product may produce (12 qubits).
pub const DEFAULT_MAX_DIM: usize = 1 << 12;

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch(
                "matrix dimension must be positive".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from a list of rows.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch(
                    "rows must form a square matrix".into(),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&diag)
    }

    /// `|psi><psi|` for a column vector `psi`.
    pub fn outer(psi: &[C64]) -> Self {
        let n = psi.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self {
            dim: 2,
            data: vec![ZERO, ONE, ONE, ZERO],
        }
    }

    pub fn pauli_y() -> Self {
        Self {
            dim: 2,
            data: vec![ZERO, -I, I, ZERO],
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            dim: 2,
            data: vec![ONE, ZERO, ZERO, -ONE],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - other||_F`; panics on dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||A - A^dagger||_F / ||A||_F`, or the absolute residual for a zero matrix.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.data[i * n + j] - self.data[j * n + i].conj()).norm_sqr();
            }
        }
        let norm = self.frobenius_norm();
        if norm > 0.0 {
            acc.sqrt() / norm
        } else {
            acc.sqrt()
        }
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_residual() <= rel_tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<u| self |v>`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.apply(v);
        u.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.dim && j < self.dim, "index out of range");
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Matrix product; panics on dimension mismatch. See [`mat_mul`] for the
/// fallible form.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        matmul_kernel(self, rhs)
    }
}

fn matmul_kernel(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim;
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik == ZERO {
                continue;
            }
            let b_row = &b.data[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
    ComplexMatrix { dim: n, data: out }
}

/// Kronecker product `a ⊗ b`, capped at [`DEFAULT_MAX_DIM`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_capped(a, b, DEFAULT_MAX_DIM)
}

/// Kronecker product with an explicit dimension cap.
pub fn kron_capped(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let dim =
        a.dim
            .checked_mul(b.dim)
            .filter(|&d| d <= max_dim)
            .ok_or(Error::DimensionOverflow {
                dim: a.dim.saturating_mul(b.dim),
                max: max_dim,
            })?;
    let (na, nb) = (a.dim, b.dim);
    let mut data = vec![ZERO; dim * dim];
    for i in 0..na {
        for j in 0..na {
            let aij = a.data[i * na + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                let row = (i * nb + k) * dim + j * nb;
                for l in 0..nb {
                    data[row + l] = aij * b.data[k * nb + l];
                }
            }
        }
    }
    Ok(ComplexMatrix { dim, data })
}

/// Kronecker product of a non-empty sequence of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty Kronecker product".into()))?
        .clone();
    iter.try_fold(first, |acc, f| kron(&acc, f))
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim;
    let mut data = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = a.data[j * n + i].conj();
        }
    }
    ComplexMatrix { dim: n, data }
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {0}x{0} by {1}x{1}",
            a.dim, b.dim
        )));
    }
    Ok(matmul_kernel(a, b))
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    (0..a.dim).map(|i| a.data[i * a.dim + i]).sum()
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

/// Reduced matrix on the sites listed in `keep` (1-based site ids), tracing
/// out every other site. Kept sites appear in register order.
pub fn partial_trace(
    rho: &ComplexMatrix,
    register: &SpinRegister,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidSites("keep set is empty".into()));
    }
    if rho.dim != register.dim() {
        return Err(Error::DimensionMismatch(format!(
            "matrix dimension {} does not match register dimension {}",
            rho.dim,
            register.dim()
        )));
    }
    let dims = register.site_dims();
    let mut kept = vec![false; dims.len()];
    for &id in keep {
        kept[register.position(id)?] = true;
    }

    // stride of each site in the flattened index
    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let offsets = |want: bool| -> Vec<usize> {
        let mut offs = vec![0usize];
        for s in (0..dims.len()).filter(|&s| kept[s] == want) {
            let (d, stride) = (dims[s], strides[s]);
            offs = offs
                .iter()
                .flat_map(|&o| (0..d).map(move |k| o + k * stride))
                .collect();
        }
        offs
    };
    let kept_offsets = offsets(true);
    let traced_offsets = offsets(false);

    let n = rho.dim;
    let m = kept_offsets.len();
    let mut data = vec![ZERO; m * m];
    for (a, &ka) in kept_offsets.iter().enumerate() {
        for (b, &kb) in kept_offsets.iter().enumerate() {
            data[a * m + b] = traced_offsets
                .iter()
                .map(|&t| rho.data[(ka + t) * n + kb + t])
                .sum();
        }
    }
    Ok(ComplexMatrix { dim: m, data })
}

/// Spectral decomposition `A = V diag(eigenvalues) V^dagger` of a Hermitian
/// matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermEigDecomp {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: ComplexMatrix,
}

impl HermEigDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `V f(Λ) V^dagger`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let fvals: Vec<C64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.compose(&fvals)
    }

    /// `V diag(values) V^dagger` for values given per eigenvector column.
    pub fn compose(&self, fvals: &[C64]) -> ComplexMatrix {
        let n = self.dim();
        assert_eq!(fvals.len(), n, "dimension mismatch");
        let v = &self.eigenvectors.data;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let vik = v[i * n + k] * fvals[k];
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += vik * v[j * n + k].conj();
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| C64::new(x, 0.0))
    }

    /// Expresses `a` in the eigenbasis: `V^dagger a V`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&dagger(&self.eigenvectors) * a) * &self.eigenvectors
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.eigenvectors * a) * &dagger(&self.eigenvectors)
    }
}

/// Diagonalizes a Hermitian matrix.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEigDecomp> {
    let residual = a.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.dim;
    // Symmetrize away the round-off the tolerance allowed through.
    let sym = (&a.to_nalgebra() + a.to_nalgebra().adjoint()) * C64::new(0.5, 0.0);
    let eig =
        nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence);
    }
    let mut data = vec![ZERO; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            data[i * n + new_col] = eig.eigenvectors[(i, old_col)];
        }
    }
    Ok(HermEigDecomp {
        eigenvalues,
        eigenvectors: ComplexMatrix { dim: n, data },
    })
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
pub fn func_hermitian(a: &ComplexMatrix, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
    Ok(herm_eig(a)?.apply_fn(f))
}

/// Checks that `rho` is Hermitian, positive semidefinite and unit-trace.
pub fn validate_density(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    let residual = rho.hermiticity_residual();
    if residual > HERMITIAN_TOL.max(tol) {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (residual {residual:e})"
        )));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let min = herm_eig(rho)?.eigenvalues[0];
    if min < -tol {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap()
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        (&a + &dagger(&a)).scale_real(0.5)
    }

    fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        let p = &a * &dagger(&a);
        let t = trace(&p).re;
        p.scale_real(1.0 / t)
    }

    fn naive_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let n = a.dim();
        ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![ONE; 3]).is_err());
        let err = ComplexMatrix::new(2, vec![ONE, c(f64::NAN, 0.0), ONE, ONE]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 1 }));
        assert!(ComplexMatrix::new(1, vec![c(0.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn kron_identity_and_pauli() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4));
        let zi = kron(&ComplexMatrix::pauli_z(), &i2).unwrap();
        assert_eq!(zi, ComplexMatrix::from_real_diag(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_xx_matches_index_formula() {
        let x = ComplexMatrix::pauli_x();
        let xx = kron(&x, &x).unwrap();
        let mut checked = 0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(xx[(i * 2 + k, j * 2 + l)], x[(i, j)] * x[(k, l)]);
                        checked += 1;
                    }
                }
            }
        }
        assert_eq!(checked, 16);
    }

    #[test]
    fn kron_respects_cap() {
        let a = ComplexMatrix::identity(64);
        assert!(matches!(
            kron_capped(&a, &a, 1024),
            Err(Error::DimensionOverflow {
                dim: 4096,
                max: 1024
            })
        ));
        assert!(kron(&a, &a).is_ok());
        let b = ComplexMatrix::identity(128);
        assert!(kron(&b, &a).is_err());
    }

    #[test]
    fn dagger_cases() {
        assert_eq!(
            dagger(&ComplexMatrix::identity(3)),
            ComplexMatrix::identity(3)
        );
        assert_eq!(dagger(&ComplexMatrix::pauli_y()), ComplexMatrix::pauli_y());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 5;
        let re: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let im: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = ComplexMatrix::from_fn(n, |i, j| c(re[i * n + j], im[i * n + j])).unwrap();
        let d = dagger(&a);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d[(i, j)], c(re[j * n + i], -im[j * n + i]));
            }
        }
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (
            ComplexMatrix::pauli_x(),
            ComplexMatrix::pauli_y(),
            ComplexMatrix::pauli_z(),
        );
        assert_eq!(mat_mul(&x, &x).unwrap(), ComplexMatrix::identity(2));
        assert_eq!(mat_mul(&x, &y).unwrap(), z.scale(I));
        assert!(matches!(
            mat_mul(&x, &ComplexMatrix::identity(4)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(&mut rng, 8);
        let b = random_matrix(&mut rng, 8);
        assert!(mat_mul(&a, &b).unwrap().max_abs_diff(&naive_matmul(&a, &b)) <= 1e-12);
    }

    #[test]
    fn trace_cases() {
        assert_eq!(trace(&ComplexMatrix::identity(4)), c(4.0, 0.0));
        assert_eq!(trace(&ComplexMatrix::pauli_z()), ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let lhs = trace(&kron(&a, &b).unwrap());
            assert!((lhs - trace(&a) * trace(&b)).norm() <= 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ra = random_density(&mut rng, 2);
        let rb = random_density(&mut rng, 4);
        let reg = SpinRegister::qubits(3).unwrap();
        let joint = kron(&ra, &rb).unwrap();
        assert!(partial_trace(&joint, &reg, &[1]).unwrap().max_abs_diff(&ra) <= 1e-12);
        assert!(
            partial_trace(&joint, &reg, &[2, 3])
                .unwrap()
                .max_abs_diff(&rb)
                <= 1e-12
        );
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let reg = SpinRegister::default();
        let rho = ComplexMatrix::identity(32).scale_real(1.0 / 32.0);
        for site in 1..=5 {
            let red = partial_trace(&rho, &reg, &[site]).unwrap();
            assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) <= 1e-15);
        }
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reg = SpinRegister::qubits(3).unwrap();
        let rho = random_density(&mut rng, 8);
        let got = partial_trace(&rho, &reg, &[1, 3]).unwrap();
        // rho[(a1 b a3), (c1 b c3)] summed over the middle bit b
        let expected = ComplexMatrix::from_fn(4, |r, s| {
            let (a1, a3) = (r >> 1, r & 1);
            let (c1, c3) = (s >> 1, s & 1);
            (0..2)
                .map(|b| rho[(a1 * 4 + b * 2 + a3, c1 * 4 + b * 2 + c3)])
                .sum()
        })
        .unwrap();
        assert!(got.max_abs_diff(&expected) <= 1e-12);
        assert!((trace(&got) - trace(&rho)).norm() <= 1e-12);
    }

    #[test]
    fn partial_trace_errors() {
        let reg = SpinRegister::qubits(3).unwrap();
        let rho = ComplexMatrix::identity(8);
        assert!(matches!(
            partial_trace(&rho, &reg, &[]),
            Err(Error::InvalidSites(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &reg, &[4]),
            Err(Error::InvalidSites(_))
        ));
        assert!(partial_trace(&ComplexMatrix::identity(4), &reg, &[1]).is_err());
    }

    #[test]
    fn herm_eig_paulis() {
        let ez = herm_eig(&ComplexMatrix::pauli_z()).unwrap();
        assert!((ez.eigenvalues[0] + 1.0).abs() < 1e-14 && (ez.eigenvalues[1] - 1.0).abs() < 1e-14);

        let ex = herm_eig(&ComplexMatrix::pauli_x()).unwrap();
        assert!((ex.eigenvalues[0] + 1.0).abs() < 1e-14 && (ex.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = [c(s, 0.0), c(-s, 0.0)];
        let plus = [c(s, 0.0), c(s, 0.0)];
        let overlap = |v: &[C64], w: &[C64]| -> f64 {
            v.iter()
                .zip(w)
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
                .norm()
        };
        assert!((overlap(&ex.eigenvector(0), &minus) - 1.0).abs() < 1e-12);
        assert!((overlap(&ex.eigenvector(1), &plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_rows(&[[ONE, ONE], [ZERO, ONE]]).unwrap();
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn herm_eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_hermitian(&mut rng, 8);
        let d = herm_eig(&a).unwrap();
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!(d.reconstruct().distance(&a) <= 1e-10 * a.frobenius_norm());
        let vtv = &dagger(&d.eigenvectors) * &d.eigenvectors;
        assert!(vtv.distance(&ComplexMatrix::identity(8)) <= 1e-10 * 8.0);
    }

    #[test]
    fn func_hermitian_cases() {
        let zero = ComplexMatrix::zeros(4);
        let e = func_hermitian(&zero, |x| c(x.exp(), 0.0)).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let t = 0.83;
        let u = func_hermitian(&ComplexMatrix::pauli_z(), |x| (-I * x * t).exp()).unwrap();
        let expected = ComplexMatrix::from_diag(&[(-I * t).exp(), (I * t).exp()]);
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn exponential_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(&mut rng, 8);
        let delta = 0.01;
        let u = func_hermitian(&h, |x| (-I * x * delta).exp()).unwrap();

        let gen = h.scale(-I * delta);
        let mut term = ComplexMatrix::identity(8);
        let mut sum = term.clone();
        for k in 1..=20 {
            term = (&term * &gen).scale_real(1.0 / k as f64);
            sum += &term;
        }
        assert!(u.max_abs_diff(&sum) <= 1e-10);
    }

    #[test]
    fn density_validation() {
        assert!(validate_density(&ComplexMatrix::identity(2).scale_real(0.5), 1e-12).is_ok());
        assert!(validate_density(&ComplexMatrix::identity(2), 1e-12).is_err());
        assert!(validate_density(&ComplexMatrix::from_real_diag(&[1.5, -0.5]), 1e-12).is_err());
    }

    fn matrix_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            ComplexMatrix::new(n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        matrix_strategy(n).prop_map(|a| (&a + &dagger(&a)).scale_real(0.5))
    }

    fn density_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        matrix_strategy(n).prop_filter_map("degenerate", |a| {
            let p = &a * &dagger(&a);
            let t = trace(&p).re;
            (t > 1e-6).then(|| p.scale_real(1.0 / t))
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in matrix_strategy(2), b in matrix_strategy(3), c3 in matrix_strategy(2)) {
            let left = kron(&kron(&a, &b).unwrap(), &c3).unwrap();
            let right = kron(&a, &kron(&b, &c3).unwrap()).unwrap();
            prop_assert!(left.distance(&right) <= 1e-12);
        }

        #[test]
        fn kron_mixed_product(a in matrix_strategy(2), b in matrix_strategy(2), c2 in matrix_strategy(2), d in matrix_strategy(2)) {
            let lhs = &kron(&a, &b).unwrap() * &kron(&c2, &d).unwrap();
            let rhs = kron(&(&a * &c2), &(&b * &d)).unwrap();
            prop_assert!(lhs.distance(&rhs) <= 1e-12);
        }

        #[test]
        fn partial_trace_linear_and_trace_preserving(r1 in density_strategy(8), r2 in density_strategy(8), w in 0.0f64..1.0) {
            let reg = SpinRegister::qubits(3).unwrap();
            let mix = &r1.scale_real(w) + &r2.scale_real(1.0 - w);
            for keep in [&[1usize][..], &[2], &[1, 3], &[2, 3]] {
                let lhs = partial_trace(&mix, &reg, keep).unwrap();
                let rhs = &partial_trace(&r1, &reg, keep).unwrap().scale_real(w)
                    + &partial_trace(&r2, &reg, keep).unwrap().scale_real(1.0 - w);
                prop_assert!(lhs.distance(&rhs) <= 1e-12);
                prop_assert!((trace(&lhs) - ONE).norm() <= 1e-12);
            }
        }

        #[test]
        fn identity_function_returns_input(h in hermitian_strategy(6)) {
            let back = func_hermitian(&h, |x| c(x, 0.0)).unwrap();
            prop_assert!(back.distance(&h) <= 1e-10 * h.frobenius_norm().max(1.0));
        }

        #[test]
        fn propagator_is_unitary(h in hermitian_strategy(8), t in 0.0f64..100.0) {
            let u = func_hermitian(&h, |x| (-I * x * t).exp()).unwrap();
            let utu = &dagger(&u) * &u;
            prop_assert!(utu.distance(&ComplexMatrix::identity(8)) <= 1e-10);
        }
    }
}
