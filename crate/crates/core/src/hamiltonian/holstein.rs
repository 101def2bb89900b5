use std::collections::HashMap;

use nalgebra::DMatrix;

use super::hubbard::{attach_phonons, direct_matrix, sector_coulomb_diagonal, sector_hops};
use super::{expm_i_hermitian, kron_identity_left, require_infinite_u, Provenance, SectorHamiltonian};
use crate::error::{Error, Result};
use crate::manybody::{build_boson_op, BosonBasis, BosonOp};
use crate::model::{LatticeModel, PhononParams};
use crate::sector::{Magnetization, SectorBasis};
use crate::sparse::{check_budget, tensor, SparseMatrix, C64};

fn phonon(model: &LatticeModel) -> Result<&PhononParams> {
    model.phonon().ok_or_else(|| Error::InvalidInput("model has no [phonon] block".into()))
}

/// `U_eff = U - g g / omega` as matrices. Off-diagonal entries are the
/// effective off-site repulsion; the diagonal is `-(g^2)_xx / omega`.
pub fn effective_coulomb(model: &LatticeModel) -> Result<DMatrix<f64>> {
    let ph = phonon(model)?;
    let g = &ph.coupling;
    Ok(model.offsite_u() - (g * g) / ph.omega)
}

/// Scalar removed by the Lang-Firsov form: `-N mean_x (g^2)_xx / omega`.
/// Physical energies are Lang-Firsov energies plus this value.
pub fn lang_firsov_constant(model: &LatticeModel) -> Result<f64> {
    let ph = phonon(model)?;
    let g2 = &ph.coupling * &ph.coupling;
    let mean = g2.trace() / model.sites() as f64;
    Ok(-(model.electrons() as f64) * mean / ph.omega)
}

fn sector_product_dim(basis: &SectorBasis, bosons: &BosonBasis) -> Result<()> {
    check_budget(basis.dim().saturating_mul(bosons.dim()))
}

/// U = inf Holstein-Hubbard sector Hamiltonian in the bare (undisplaced)
/// phonon basis with `cutoff` quanta per site.
pub fn assemble_holstein_sector(model: &LatticeModel, m: Magnetization, cutoff: usize) -> Result<SectorHamiltonian> {
    require_infinite_u(model)?;
    let ph = phonon(model)?;
    let basis = SectorBasis::new(model.sites(), m)?;
    let bosons = BosonBasis::new(model.sites(), cutoff)?;
    sector_product_dim(&basis, &bosons)?;
    let h_el = direct_matrix(model, &basis, model.offsite_u());
    let matrix = attach_phonons(&h_el, |i, x| basis.config(i).occupation(x), ph, &bosons)?;
    Ok(SectorHamiltonian {
        basis,
        bosons: Some(bosons),
        matrix,
        provenance: Provenance::HolsteinDirect,
        dropped_constant: 0.0,
    })
}

/// Phonon factor `theta_xy` accompanying the hop that moves the electron from
/// `y` to `x`: `exp(-i sqrt(2) omega^{-3/2} sum_z (g_xz - g_yz) p_z)` with
/// `p_z = i sqrt(omega/2) (b*_z - b_z)` truncated. Real orthogonal.
pub fn lang_firsov_phase(phonon: &PhononParams, bosons: &BosonBasis, x: usize, y: usize) -> Result<SparseMatrix> {
    let n = phonon.coupling.nrows();
    let levels = bosons.cutoff() + 1;
    let single = BosonBasis::new(1, bosons.cutoff())?;
    let up = build_boson_op(&single, BosonOp::Create, 0)?.to_dense();
    let p = (&up - up.adjoint()) * C64::new(0.0, (phonon.omega / 2.0).sqrt());
    let scale = 2f64.sqrt() * phonon.omega.powf(-1.5);

    let mut out = SparseMatrix::identity(1);
    for z in 0..n {
        let s = scale * (phonon.coupling[(x, z)] - phonon.coupling[(y, z)]);
        let factor = if s == 0.0 {
            SparseMatrix::identity(levels)
        } else {
            // exp(-i s p) is real: p is i times a real antisymmetric matrix.
            let e = expm_i_hermitian(&p, -s).map(|v| C64::new(v.re, 0.0));
            SparseMatrix::from_dense(&e)
        };
        out = tensor(&out, &factor)?;
    }
    Ok(out)
}

/// Lang-Firsov sector Hamiltonian `T + U_eff + omega N_b` in the displaced
/// phonon basis. The part of `-(g^2)_xx n_x / omega` that is not a constant
/// (site-dependent `(g^2)_xx`) stays in the matrix as a diagonal term; the
/// constant is reported in `dropped_constant`.
pub fn assemble_lang_firsov_sector(model: &LatticeModel, m: Magnetization, cutoff: usize) -> Result<SectorHamiltonian> {
    require_infinite_u(model)?;
    let ph = phonon(model)?;
    let n = model.sites();
    let basis = SectorBasis::new(n, m)?;
    let bosons = BosonBasis::new(n, cutoff)?;
    sector_product_dim(&basis, &bosons)?;
    let b_dim = bosons.dim();

    let ueff = effective_coulomb(model)?;
    let g2 = &ph.coupling * &ph.coupling;
    let mean = g2.trace() / n as f64;
    let mut diag = sector_coulomb_diagonal(model, &basis, &ueff);
    for (i, c) in basis.configs().iter().enumerate() {
        for x in 0..n {
            diag[i] -= (g2[(x, x)] - mean) / ph.omega * c.occupation(x);
        }
    }

    let mut phases: HashMap<(usize, usize), SparseMatrix> = HashMap::new();
    let mut trips: Vec<(usize, usize, C64)> = Vec::new();
    for hop in sector_hops(model, &basis) {
        // The hole moves from -> to, so the electron moves to -> from.
        let key = (hop.from, hop.to);
        if let std::collections::hash_map::Entry::Vacant(e) = phases.entry(key) {
            e.insert(lang_firsov_phase(ph, &bosons, hop.from, hop.to)?);
        }
        let theta = &phases[&key];
        for (r, c, v) in theta.triplets() {
            trips.push((hop.row * b_dim + r, hop.col * b_dim + c, v * (-hop.t)));
        }
    }
    let dim = basis.dim() * b_dim;
    let hopping = SparseMatrix::from_triplets(dim, dim, trips);
    let nb = build_boson_op(&bosons, BosonOp::NumberTotal, 0)?.scale_real(ph.omega);
    let matrix = hopping
        .add(&tensor(&SparseMatrix::diagonal(&diag), &SparseMatrix::identity(b_dim))?)
        .add(&kron_identity_left(basis.dim(), &nb)?)
        .into_hermitian()?;
    Ok(SectorHamiltonian {
        basis,
        bosons: Some(bosons),
        matrix,
        provenance: Provenance::LangFirsov,
        dropped_constant: lang_firsov_constant(model)?,
    })
}
