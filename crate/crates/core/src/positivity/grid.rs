//! Lang-Firsov Hamiltonian with each phonon coordinate on a uniform grid.
//!
//! `q_j = (j - (P-1)/2) h` with zero boundary values. The oscillator
//! `omega N_b = (p^2 + omega^2 q^2 - omega) / 2` uses the three-point
//! Laplacian, and the phonon factor of a hop is the translation
//! `f(q) -> f(q - a)`, `a_z = sqrt(2) omega^{-3/2} (g_xz - g_yz)`, which must
//! land on grid points.

use serde::Serialize;

use super::{ground_state, pf_certificate, PositivityCertificate};
use crate::error::{Error, Result};
use crate::hamiltonian::{effective_coulomb, lang_firsov_constant, sector_coulomb_diagonal, sector_hops};
use crate::model::LatticeModel;
use crate::sector::{Magnetization, SectorBasis};
use crate::sparse::{check_budget, SparseMatrix};

const MAX_GRID_SITES: usize = 3;
const MAX_GRID_MODES: usize = 2;
const COMMENSURATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub points: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    pub basis: SectorBasis,
    /// Phonon modes kept on the grid; the others are uncoupled and sit in
    /// their ground state at energy 0.
    pub modes: Vec<usize>,
    pub spec: GridSpec,
    pub matrix: SparseMatrix,
    pub dropped_constant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridCertificate {
    pub certificate: PositivityCertificate,
    pub modes: Vec<usize>,
    pub spec: GridSpec,
    pub dropped_constant: f64,
    /// Grid ground energy plus the dropped constant.
    pub energy: f64,
}

fn shift_steps(a: f64, h: f64) -> Result<i64> {
    let ratio = a / h;
    let s = ratio.round();
    if (ratio - s).abs() > COMMENSURATE_TOL * ratio.abs().max(1.0) {
        return Err(Error::Incommensurate { displacement: a, spacing: h });
    }
    Ok(s as i64)
}

/// Assemble the grid Hamiltonian in the product basis (configuration major,
/// then grid modes in increasing site order).
pub fn grid_hamiltonian(model: &LatticeModel, m: Magnetization, spec: GridSpec) -> Result<GridHamiltonian> {
    crate::hamiltonian::require_infinite_u(model)?;
    let ph = model.phonon().ok_or_else(|| Error::InvalidInput("grid certificate needs a [phonon] block".into()))?;
    let n = model.sites();
    if n > MAX_GRID_SITES {
        return Err(Error::InvalidInput(format!("grid certificate handles at most {MAX_GRID_SITES} sites")));
    }
    if spec.points < 2 || spec.spacing.is_nan() || spec.spacing <= 0.0 {
        return Err(Error::InvalidInput("grid needs at least 2 points and a positive spacing".into()));
    }
    let modes: Vec<usize> = (0..n).filter(|&z| (0..n).any(|x| ph.coupling[(x, z)] != 0.0)).collect();
    if modes.len() > MAX_GRID_MODES {
        return Err(Error::InvalidInput(format!(
            "{} coupled phonon modes; the grid handles at most {MAX_GRID_MODES}",
            modes.len()
        )));
    }
    let basis = SectorBasis::new(n, m)?;
    let p = spec.points;
    let g_dim = p.pow(modes.len() as u32);
    let dim = basis.dim().saturating_mul(g_dim);
    check_budget(dim)?;

    let h = spec.spacing;
    let omega = ph.omega;
    let q = |j: usize| (j as f64 - (p as f64 - 1.0) / 2.0) * h;
    let stride = |k: usize| p.pow((modes.len() - 1 - k) as u32);
    let digit = |g: usize, k: usize| (g / stride(k)) % p;

    let mut trips: Vec<(usize, usize, f64)> = Vec::new();

    // Electron diagonal: effective Coulomb plus the site-dependent part of
    // the polaron self-energy.
    let ueff = effective_coulomb(model)?;
    let g2 = &ph.coupling * &ph.coupling;
    let mean = g2.trace() / n as f64;
    let mut el = sector_coulomb_diagonal(model, &basis, &ueff);
    for (i, c) in basis.configs().iter().enumerate() {
        for x in 0..n {
            el[i] -= (g2[(x, x)] - mean) / omega * c.occupation(x);
        }
    }

    // Oscillators.
    let kinetic = 1.0 / (h * h);
    for (i, &e) in el.iter().enumerate() {
        for g in 0..g_dim {
            let row = i * g_dim + g;
            let mut d = e;
            for k in 0..modes.len() {
                let qj = q(digit(g, k));
                d += kinetic + 0.5 * omega * omega * qj * qj - 0.5 * omega;
                for step in [-1i64, 1] {
                    let j = digit(g, k) as i64 + step;
                    if (0..p as i64).contains(&j) {
                        let g2_ = (g as i64 + step * stride(k) as i64) as usize;
                        trips.push((row, i * g_dim + g2_, -0.5 * kinetic));
                    }
                }
            }
            trips.push((row, row, d));
        }
    }

    // Hops with translated phonon coordinates: (theta f)(q) = f(q - a).
    let scale = 2f64.sqrt() * omega.powf(-1.5);
    for hop in sector_hops(model, &basis) {
        let shifts = modes
            .iter()
            .map(|&z| shift_steps(scale * (ph.coupling[(hop.from, z)] - ph.coupling[(hop.to, z)]), h))
            .collect::<Result<Vec<i64>>>()?;
        for g in 0..g_dim {
            let mut src = 0usize;
            let mut inside = true;
            for (k, &s) in shifts.iter().enumerate() {
                let j = digit(g, k) as i64 - s;
                if !(0..p as i64).contains(&j) {
                    inside = false;
                    break;
                }
                src += j as usize * stride(k);
            }
            if inside {
                trips.push((hop.row * g_dim + g, hop.col * g_dim + src, -hop.t));
            }
        }
    }

    let matrix = SparseMatrix::from_real_triplets(dim, dim, trips).into_hermitian()?;
    Ok(GridHamiltonian { basis, modes, spec, matrix, dropped_constant: lang_firsov_constant(model)? })
}

/// Perron-Frobenius certificate for the grid Hamiltonian in the product cone
/// basis.
pub fn qgrid_holstein_certify(model: &LatticeModel, m: Magnetization, spec: GridSpec) -> Result<GridCertificate> {
    let gh = grid_hamiltonian(model, m, spec)?;
    let ground = ground_state(&gh.matrix)?;
    let certificate = pf_certificate(&gh.matrix, &ground, m, "configuration x grid")?;
    Ok(GridCertificate {
        energy: certificate.ground_energy + gh.dropped_constant,
        certificate,
        modes: gh.modes,
        spec,
        dropped_constant: gh.dropped_constant,
    })
}
