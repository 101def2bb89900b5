//! Hamiltonians on finite bases.
//!
//! Sector Hamiltonians with bosons use the product basis with the
//! configuration index major: row `i` is configuration `i / B`, boson state
//! `i % B`, where `B` is the boson dimension.

mod holstein;
mod hubbard;
mod radiation;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manybody::BosonBasis;
use crate::model::LatticeModel;
use crate::sector::{Magnetization, SectorBasis};
use crate::sparse::{SparseMatrix, C64};

pub use holstein::{
    assemble_holstein_sector, assemble_lang_firsov_sector, effective_coulomb, lang_firsov_constant, lang_firsov_phase,
};
pub use hubbard::{
    assemble_hubbard_full, assemble_nagaoka_projected, assemble_nagaoka_sector, fock_hamiltonian,
    sector_coulomb_diagonal, sector_hops, SectorHop,
};
pub use radiation::{
    assemble_radiation_sector, coupled_modes, peierls_coefficient, peierls_field, peierls_kernel, photon_modes,
    riemann_kernel, riemann_kernel_error, riemann_peierls, PhotonMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DirectFormula,
    Projected,
    HolsteinDirect,
    LangFirsov,
    Radiation,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::DirectFormula => "direct_formula",
            Provenance::Projected => "projected",
            Provenance::HolsteinDirect => "holstein_direct",
            Provenance::LangFirsov => "lang_firsov",
            Provenance::Radiation => "radiation",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub basis: SectorBasis,
    pub bosons: Option<BosonBasis>,
    pub matrix: SparseMatrix,
    pub provenance: Provenance,
    /// Scalar removed during assembly: spectrum of the physical operator is
    /// `spectrum(matrix) + dropped_constant`.
    pub dropped_constant: f64,
}

impl SectorHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn boson_dim(&self) -> usize {
        self.bosons.as_ref().map_or(1, BosonBasis::dim)
    }

    pub fn magnetization(&self) -> Magnetization {
        self.basis.magnetization()
    }

    /// Configuration index of product-basis row `i`.
    pub fn config_index(&self, i: usize) -> usize {
        i / self.boson_dim()
    }
}

/// Which sector construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Nagaoka,
    Projected,
    Holstein,
    LangFirsov,
    Radiation,
}

impl std::str::FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "nagaoka" => Form::Nagaoka,
            "projected" => Form::Projected,
            "holstein" => Form::Holstein,
            "langfirsov" => Form::LangFirsov,
            "radiation" => Form::Radiation,
            other => return Err(Error::InvalidInput(format!("unknown form '{other}'"))),
        })
    }
}

impl Form {
    /// The natural form for a model: Holstein with phonons, radiation with a
    /// field, Nagaoka otherwise.
    pub fn default_for(model: &LatticeModel) -> Form {
        if model.phonon().is_some() {
            Form::Holstein
        } else if model.radiation().is_some() {
            Form::Radiation
        } else {
            Form::Nagaoka
        }
    }
}

/// Assemble one sector. `cutoff` overrides the boson cutoff stored in the model.
pub fn assemble_sector(
    model: &LatticeModel,
    form: Form,
    m: Magnetization,
    cutoff: Option<usize>,
) -> Result<SectorHamiltonian> {
    let missing = |what: &str| Error::InvalidInput(format!("form needs a [{what}] block in the model"));
    match form {
        Form::Nagaoka => assemble_nagaoka_sector(model, m),
        Form::Projected => assemble_nagaoka_projected(model, m),
        Form::Holstein | Form::LangFirsov => {
            let c = cutoff.or(model.phonon().map(|p| p.cutoff)).ok_or_else(|| missing("phonon"))?;
            if form == Form::Holstein {
                assemble_holstein_sector(model, m, c)
            } else {
                assemble_lang_firsov_sector(model, m, c)
            }
        }
        Form::Radiation => {
            let c = cutoff.or(model.radiation().map(|r| r.cutoff)).ok_or_else(|| missing("radiation"))?;
            assemble_radiation_sector(model, m, c)
        }
    }
}

pub(crate) fn require_infinite_u(model: &LatticeModel) -> Result<()> {
    if !model.onsite_u().is_infinite() {
        return Err(Error::InvalidInput(
            "sector Hamiltonians need u = \"inf\"; use the full-space form for finite U".into(),
        ));
    }
    Ok(())
}

/// `exp(i s H)` for Hermitian `H`, by eigendecomposition.
pub fn expm_i_hermitian(h: &DMatrix<C64>, s: f64) -> DMatrix<C64> {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let phases = eig.eigenvalues.map(|l| C64::from_polar(1.0, s * l));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Electron part `E (x) I_B + I_E (x) bosons`.
pub(crate) fn kron_identity_right(a: &SparseMatrix, b_dim: usize) -> Result<SparseMatrix> {
    crate::sparse::tensor(a, &SparseMatrix::identity(b_dim))
}

pub(crate) fn kron_identity_left(e_dim: usize, b: &SparseMatrix) -> Result<SparseMatrix> {
    crate::sparse::tensor(&SparseMatrix::identity(e_dim), b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_is_unitary_and_matches_series() {
        let h = DMatrix::from_fn(4, 4, |i, j| {
            let a = (i * 3 + j) as f64 * 0.1;
            let b = (j * 3 + i) as f64 * 0.1;
            if i == j {
                C64::new(a, 0.0)
            } else if i < j {
                C64::new(a, b)
            } else {
                C64::new(b, -a)
            }
        });
        let u = expm_i_hermitian(&h, 0.7);
        let id = DMatrix::<C64>::identity(4, 4);
        assert!((u.adjoint() * &u - &id).norm() < 1e-12);
        // Taylor series oracle
        let x = h.map(|v| v * C64::new(0.0, 0.7));
        let mut term = id.clone();
        let mut sum = id.clone();
        for k in 1..60 {
            term = &term * &x / C64::new(k as f64, 0.0);
            sum += &term;
        }
        assert!((u - sum).norm() < 1e-12);
    }
}
