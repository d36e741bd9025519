//! Site bookkeeping for the spin register.
//!
//! Sites are numbered from 1 in canonical tensor order: the two system spins
//! first, then the first bath, then the second bath. Site 1 is the leftmost
//! (most significant) factor of every Kronecker product.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Local Hilbert-space dimension of every site (spin-1/2).
pub const SITE_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteRole {
    System,
    Bath1,
    Bath2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub id: usize,
    pub role: SiteRole,
}

/// Ordered list of spin-1/2 sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinRegister {
    sites: Vec<Site>,
}

impl SpinRegister {
    /// Two system sites followed by `bath1` and `bath2` bath sites.
    pub fn new(bath1: usize, bath2: usize) -> Result<Self> {
        if bath1 == 0 || bath2 == 0 {
            return Err(Error::InvalidSites(format!(
                "each bath needs at least one site (got {bath1} and {bath2})"
            )));
        }
        let roles = std::iter::repeat_n(SiteRole::System, 2)
            .chain(std::iter::repeat_n(SiteRole::Bath1, bath1))
            .chain(std::iter::repeat_n(SiteRole::Bath2, bath2));
        let sites = roles
            .enumerate()
            .map(|(i, role)| Site { id: i + 1, role })
            .collect();
        Ok(Self { sites })
    }

    /// A register holding only the two system spins. Used for stand-alone
    /// reduced-state bookkeeping.
    pub fn qubits(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSites(
                "register needs at least one site".into(),
            ));
        }
        let sites = (1..=n)
            .map(|id| Site {
                id,
                role: SiteRole::System,
            })
            .collect();
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Full Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        SITE_DIM.pow(self.sites.len() as u32)
    }

    pub fn site_dims(&self) -> Vec<usize> {
        vec![SITE_DIM; self.sites.len()]
    }

    /// Zero-based tensor position of a site id.
    pub fn position(&self, id: usize) -> Result<usize> {
        if id == 0 || id > self.sites.len() {
            return Err(Error::InvalidSites(format!(
                "unknown site {id} (register has {} sites)",
                self.sites.len()
            )));
        }
        Ok(id - 1)
    }

    pub fn role(&self, id: usize) -> Result<SiteRole> {
        Ok(self.sites[self.position(id)?].role)
    }

    pub fn ids_with_role(&self, role: SiteRole) -> Vec<usize> {
        self.sites
            .iter()
            .filter(|s| s.role == role)
            .map(|s| s.id)
            .collect()
    }

    pub fn system_sites(&self) -> Vec<usize> {
        self.ids_with_role(SiteRole::System)
    }

    pub fn bath1_sites(&self) -> Vec<usize> {
        self.ids_with_role(SiteRole::Bath1)
    }

    pub fn bath2_sites(&self) -> Vec<usize> {
        self.ids_with_role(SiteRole::Bath2)
    }

    /// Combined dimension of all sites carrying `role`.
    pub fn role_dim(&self, role: SiteRole) -> usize {
        SITE_DIM.pow(self.ids_with_role(role).len() as u32)
    }
}

impl Default for SpinRegister {
    /// The five-site layout: system (1, 2), bath 1 (3, 4), bath 2 (5).
    fn default() -> Self {
        Self::new(2, 1).expect("default register is valid")
    }
}
