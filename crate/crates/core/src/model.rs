//! Hamiltonians of the central-spin model.
//!
//! Every operator is assembled on the full register in canonical site order.
//! The bath Hamiltonians are also available on their own factor space, which
//! is what the Gibbs-state constructor consumes.

use serde::{Deserialize, Serialize};

use crate::linalg::{kron, kron_all, ComplexMatrix};
use crate::register::{SiteRole, SpinRegister, SITE_DIM};
use crate::{Error, Result};

/// How the two single-spin system terms are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemHamiltonianForm {
    /// `h_1 ⊗ I + I ⊗ h_2`.
    #[default]
    Sum,
    /// `h_1 ⊗ h_2`.
    LiteralProduct,
}

/// Scalar parameters of the model (natural units, hbar = k_B = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega_s: f64,
    /// One frequency per bath-1 site.
    pub omega_b1: Vec<f64>,
    /// One frequency per bath-2 site.
    pub omega_b2: Vec<f64>,
    /// Transverse field applied to every spin.
    pub beta_field: f64,
    /// Intra-bath coupling; positive is antiferromagnetic, negative ferromagnetic.
    pub lambda_intra: f64,
    /// System-bath coupling.
    pub lambda_sb: f64,
    /// k_B T.
    pub temperature: f64,
    pub system_form: SystemHamiltonianForm,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_s: 0.7,
            omega_b1: vec![1.0, 1.0],
            omega_b2: vec![1.0],
            beta_field: 0.01,
            lambda_intra: 0.0,
            lambda_sb: 0.1,
            temperature: 0.02,
            system_form: SystemHamiltonianForm::Sum,
        }
    }
}

/// Sign regime of the intra-bath coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Ferromagnetic,
    Uncoupled,
    Antiferromagnetic,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("omega_s", self.omega_s),
            ("beta_field", self.beta_field),
            ("lambda_intra", self.lambda_intra),
            ("lambda_sb", self.lambda_sb),
            ("temperature", self.temperature),
        ];
        let freqs = self
            .omega_b1
            .iter()
            .chain(&self.omega_b2)
            .map(|&w| ("bath frequency", w));
        for (name, v) in scalars.into_iter().chain(freqs) {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite (got {v})"
                )));
            }
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive (got {})",
                self.temperature
            )));
        }
        if self.omega_b1.is_empty() || self.omega_b2.is_empty() {
            return Err(Error::InvalidParameter(
                "each bath needs at least one frequency".into(),
            ));
        }
        Ok(())
    }

    pub fn regime(&self) -> CouplingRegime {
        if self.lambda_intra > 0.0 {
            CouplingRegime::Antiferromagnetic
        } else if self.lambda_intra < 0.0 {
            CouplingRegime::Ferromagnetic
        } else {
            CouplingRegime::Uncoupled
        }
    }

    /// Register matching the number of bath frequencies.
    pub fn register(&self) -> Result<SpinRegister> {
        SpinRegister::new(self.omega_b1.len(), self.omega_b2.len())
    }

    fn check_register(&self, register: &SpinRegister) -> Result<()> {
        self.validate()?;
        if register.bath1_sites().len() != self.omega_b1.len()
            || register.bath2_sites().len() != self.omega_b2.len()
            || register.system_sites().len() != 2
        {
            return Err(Error::InvalidParameter(
                "bath frequency lists do not match the register layout".into(),
            ));
        }
        Ok(())
    }
}

/// System-bath edges `(system site, bath site)`, each weighted by `lambda_sb`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingTopology {
    pub edges: Vec<(usize, usize)>,
}

impl Default for CouplingTopology {
    /// System spin 1 couples to both bath-1 spins, system spin 2 to the
    /// bath-2 spin.
    fn default() -> Self {
        Self {
            edges: vec![(1, 3), (1, 4), (2, 5)],
        }
    }
}

impl CouplingTopology {
    pub fn validate(&self, register: &SpinRegister) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidParameter(
                "coupling topology has no edges".into(),
            ));
        }
        for &(s, b) in &self.edges {
            let (rs, rb) = (register.role(s)?, register.role(b)?);
            if rs != SiteRole::System || rb == SiteRole::System {
                return Err(Error::InvalidParameter(format!(
                    "edge ({s}, {b}) must join a system site to a bath site"
                )));
            }
        }
        Ok(())
    }
}

/// Lifts a single-site operator to the full register.
pub fn embed(
    site_op: &ComplexMatrix,
    site: usize,
    register: &SpinRegister,
) -> Result<ComplexMatrix> {
    if site_op.dim() != SITE_DIM {
        return Err(Error::DimensionMismatch("site operator must be 2x2".into()));
    }
    let pos = register.position(site)?;
    let id = ComplexMatrix::identity(SITE_DIM);
    let factors: Vec<&ComplexMatrix> = (0..register.len())
        .map(|k| if k == pos { site_op } else { &id })
        .collect();
    kron_all(factors)
}

/// Lifts an operator acting on the contiguous block of sites with `role` to
/// the full register.
pub fn lift(
    factor: &ComplexMatrix,
    role: SiteRole,
    register: &SpinRegister,
) -> Result<ComplexMatrix> {
    let ids = register.ids_with_role(role);
    let block_dim = register.role_dim(role);
    if factor.dim() != block_dim || ids.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "factor dimension {} does not match the {role:?} block dimension {block_dim}",
            factor.dim()
        )));
    }
    let first = register.position(ids[0])?;
    let before = SITE_DIM.pow(first as u32);
    let after = register.dim() / (before * block_dim);
    let left = kron(&ComplexMatrix::identity(before), factor)?;
    kron(&left, &ComplexMatrix::identity(after))
}

/// `(omega/2) sigma_z + beta sigma_x`.
pub fn single_spin_hamiltonian(omega: f64, beta: f64) -> ComplexMatrix {
    &ComplexMatrix::pauli_z().scale_real(omega / 2.0) + &ComplexMatrix::pauli_x().scale_real(beta)
}

/// Two-spin system Hamiltonian on its own 4-dimensional factor.
pub fn system_factor(p: &ModelParams) -> Result<ComplexMatrix> {
    let h = single_spin_hamiltonian(p.omega_s, p.beta_field);
    match p.system_form {
        SystemHamiltonianForm::Sum => {
            let id = ComplexMatrix::identity(2);
            Ok(&kron(&h, &id)? + &kron(&id, &h)?)
        }
        SystemHamiltonianForm::LiteralProduct => kron(&h, &h),
    }
}

/// Bath Hamiltonian on its own factor: single-spin terms plus one
/// `lambda sigma_x sigma_x` term per unordered pair of sites.
pub fn bath_factor(omegas: &[f64], beta: f64, lambda: f64) -> Result<ComplexMatrix> {
    let local = SpinRegister::qubits(omegas.len())?;
    let mut h = ComplexMatrix::zeros(local.dim());
    let x = ComplexMatrix::pauli_x();
    let xs: Vec<ComplexMatrix> = (1..=omegas.len())
        .map(|site| embed(&x, site, &local))
        .collect::<Result<_>>()?;
    for (site, &w) in omegas.iter().enumerate() {
        h += &embed(&single_spin_hamiltonian(w, beta), site + 1, &local)?;
    }
    if lambda != 0.0 {
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                h += &(&xs[i] * &xs[j]).scale_real(lambda);
            }
        }
    }
    Ok(h)
}

pub fn bath1_factor(p: &ModelParams) -> Result<ComplexMatrix> {
    bath_factor(&p.omega_b1, p.beta_field, p.lambda_intra)
}

pub fn bath2_factor(p: &ModelParams) -> Result<ComplexMatrix> {
    bath_factor(&p.omega_b2, p.beta_field, p.lambda_intra)
}

pub fn build_system_hamiltonian(p: &ModelParams, register: &SpinRegister) -> Result<ComplexMatrix> {
    p.check_register(register)?;
    lift(&system_factor(p)?, SiteRole::System, register)
}

pub fn build_bath1_hamiltonian(p: &ModelParams, register: &SpinRegister) -> Result<ComplexMatrix> {
    p.check_register(register)?;
    lift(&bath1_factor(p)?, SiteRole::Bath1, register)
}

pub fn build_bath2_hamiltonian(p: &ModelParams, register: &SpinRegister) -> Result<ComplexMatrix> {
    p.check_register(register)?;
    lift(&bath2_factor(p)?, SiteRole::Bath2, register)
}

/// `lambda_sb * sum over edges of sigma_x^s sigma_x^b`.
pub fn build_interaction(
    p: &ModelParams,
    topology: &CouplingTopology,
    register: &SpinRegister,
) -> Result<ComplexMatrix> {
    p.check_register(register)?;
    topology.validate(register)?;
    let x = ComplexMatrix::pauli_x();
    let mut h = ComplexMatrix::zeros(register.dim());
    for &(s, b) in &topology.edges {
        h += &(&embed(&x, s, register)? * &embed(&x, b, register)?);
    }
    Ok(h.scale_real(p.lambda_sb))
}

/// `H_S + H_B1 + H_B2 + H_SB`.
pub fn build_total(
    p: &ModelParams,
    topology: &CouplingTopology,
    register: &SpinRegister,
) -> Result<ComplexMatrix> {
    let mut h = build_system_hamiltonian(p, register)?;
    h += &build_bath1_hamiltonian(p, register)?;
    h += &build_bath2_hamiltonian(p, register)?;
    h += &build_interaction(p, topology, register)?;
    Ok(h)
}
