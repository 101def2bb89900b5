use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{kron_identity_left, kron_identity_right, require_infinite_u, Provenance, SectorHamiltonian};
use crate::error::{Error, Result};
use crate::manybody::{
    boson_displacement, build_boson_op, build_gutzwiller, hop, mode_index, projected_indices, sector_embedding,
    BosonBasis, BosonOp, FullFockBasis, Spin, SPINS,
};
use crate::model::{LatticeModel, PhononParams};
use crate::sector::{apply_move, Magnetization, SectorBasis};
use crate::sparse::{check_budget, tensor, SparseMatrix};

/// One nonzero hop of the hole in a sector: configuration `col` goes to
/// `row` when the hole moves `from -> to`, i.e. the electron at `to` moves
/// onto `from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorHop {
    pub row: usize,
    pub col: usize,
    pub from: usize,
    pub to: usize,
    pub t: f64,
}

/// All hops of the sector, ordered by column then target site.
pub fn sector_hops(model: &LatticeModel, basis: &SectorBasis) -> Vec<SectorHop> {
    let n = model.sites();
    basis
        .configs()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(col, &c)| {
            let x = c.hole();
            (0..n).filter(move |&y| y != x && model.t(x, y) != 0.0).map(move |y| {
                let next = apply_move(c, x, y).expect("hole at x");
                SectorHop {
                    row: basis.index_of(&next).expect("moves stay in the sector"),
                    col,
                    from: x,
                    to: y,
                    t: model.t(x, y),
                }
            })
        })
        .collect()
}

/// Diagonal of `sum_{x != y} U_xy n_x n_y + sum_x t_xx n_x` on each configuration.
pub fn sector_coulomb_diagonal(model: &LatticeModel, basis: &SectorBasis, coulomb: &DMatrix<f64>) -> Vec<f64> {
    let n = model.sites();
    basis
        .configs()
        .iter()
        .map(|c| {
            let mut e = 0.0;
            for x in 0..n {
                let nx = c.occupation(x);
                e += model.t(x, x) * nx;
                for y in 0..n {
                    if x != y {
                        e += coulomb[(x, y)] * nx * c.occupation(y);
                    }
                }
            }
            e
        })
        .collect()
}

pub(crate) fn direct_matrix(model: &LatticeModel, basis: &SectorBasis, coulomb: &DMatrix<f64>) -> SparseMatrix {
    let diag = sector_coulomb_diagonal(model, basis, coulomb);
    let trips = sector_hops(model, basis)
        .into_iter()
        .map(|h| (h.row, h.col, -h.t))
        .chain(diag.into_iter().enumerate().map(|(i, d)| (i, i, d)));
    SparseMatrix::from_real_triplets(basis.dim(), basis.dim(), trips)
        .into_hermitian()
        .expect("symmetric hopping gives a Hermitian sector matrix")
}

/// U = inf sector Hamiltonian from the hole-hop matrix elements.
pub fn assemble_nagaoka_sector(model: &LatticeModel, m: Magnetization) -> Result<SectorHamiltonian> {
    require_infinite_u(model)?;
    let basis = SectorBasis::new(model.sites(), m)?;
    check_budget(basis.dim())?;
    let matrix = direct_matrix(model, &basis, model.offsite_u());
    Ok(SectorHamiltonian { basis, bosons: None, matrix, provenance: Provenance::DirectFormula, dropped_constant: 0.0 })
}

/// Electron Hamiltonian at on-site strength `u` on a fixed-N Fock basis:
/// hopping (diagonal `t_xx` included), `u sum n_up n_down` and the off-site
/// Coulomb term.
pub fn fock_hamiltonian(model: &LatticeModel, fock: &FullFockBasis, u: f64) -> SparseMatrix {
    let n = model.sites();
    let hop_pairs: Vec<(usize, usize, f64)> = model.bonds().into_iter().map(|(x, y)| (x, y, model.t(x, y))).collect();
    let offsite = model.offsite_u();
    let rows: Vec<Vec<(usize, usize, f64)>> = (0..fock.dim())
        .into_par_iter()
        .map(|col| {
            let w = fock.state(col);
            let occ = |x: usize| (((w >> x) & 1) + ((w >> (n + x)) & 1)) as f64;
            let mut diag = 0.0;
            for x in 0..n {
                diag += model.t(x, x) * occ(x);
                if fock.is_doubly_occupied(col, x) {
                    diag += u;
                }
                for y in 0..n {
                    if x != y {
                        diag += offsite[(x, y)] * occ(x) * occ(y);
                    }
                }
            }
            let mut out = vec![(col, col, diag)];
            for &(x, y, t) in &hop_pairs {
                for s in SPINS {
                    if let Some((sign, w2)) = hop(w, mode_index(n, x, s), mode_index(n, y, s)) {
                        out.push((fock.index_of(w2).expect("number conserving"), col, t * sign));
                    }
                }
            }
            out
        })
        .collect();
    SparseMatrix::from_real_triplets(fock.dim(), fock.dim(), rows.into_iter().flatten())
        .into_hermitian()
        .expect("Hubbard Hamiltonian is Hermitian")
}

/// `h_el (x) I + sum_xy g_xy n_x (x) (b*_y + b_y) + I (x) omega N_b`, with
/// `occupation(i, x)` the electron density of row `i` of `h_el`.
pub(crate) fn attach_phonons(
    h_el: &SparseMatrix,
    occupation: impl Fn(usize, usize) -> f64,
    phonon: &PhononParams,
    bosons: &BosonBasis,
) -> Result<SparseMatrix> {
    let e_dim = h_el.dim();
    let b_dim = bosons.dim();
    check_budget(e_dim.saturating_mul(b_dim))?;
    let n = phonon.coupling.nrows();
    let mut h = kron_identity_right(h_el, b_dim)?;
    for y in 0..n {
        let dens: Vec<f64> =
            (0..e_dim).map(|i| (0..n).map(|x| phonon.coupling[(x, y)] * occupation(i, x)).sum()).collect();
        if dens.iter().all(|&d| d == 0.0) {
            continue;
        }
        h = h.add(&tensor(&SparseMatrix::diagonal(&dens), &boson_displacement(bosons, y)?)?);
    }
    let nb = build_boson_op(bosons, BosonOp::NumberTotal, 0)?.scale_real(phonon.omega);
    h = h.add(&kron_identity_left(e_dim, &nb)?);
    h.into_hermitian()
}

/// Full-space Hamiltonian at finite on-site repulsion `u`, with the phonon
/// field attached when the model has one.
pub fn assemble_hubbard_full(model: &LatticeModel, u: f64) -> Result<SparseMatrix> {
    if !u.is_finite() || u < 0.0 {
        return Err(Error::InvalidInput(format!("on-site U must be finite and nonnegative, got {u}")));
    }
    let fock = FullFockBasis::single_hole(model.sites())?;
    let h_el = fock_hamiltonian(model, &fock, u);
    match model.phonon() {
        None => Ok(h_el),
        Some(ph) => {
            let bosons = BosonBasis::new(model.sites(), ph.cutoff)?;
            attach_phonons(&h_el, |i, x| fock_density(&fock, i, x), ph, &bosons)
        }
    }
}

pub(crate) fn fock_density(fock: &FullFockBasis, i: usize, x: usize) -> f64 {
    fock.occupation(i, x, Spin::Up) + fock.occupation(i, x, Spin::Down)
}

/// U = inf sector Hamiltonian as `P H^{U=0} P`, restricted to the range of
/// `P`, rotated into the hole-spin basis and cut to the `S^3 = M` block.
pub fn assemble_nagaoka_projected(model: &LatticeModel, m: Magnetization) -> Result<SectorHamiltonian> {
    require_infinite_u(model)?;
    let basis = SectorBasis::new(model.sites(), m)?;
    let fock = FullFockBasis::single_hole(model.sites())?;
    let h0 = fock_hamiltonian(model, &fock, 0.0);
    let p = build_gutzwiller(&fock);
    let php = p.matmul(&h0).matmul(&p);

    let keep = projected_indices(&fock);
    let h_ran = php.submatrix(&keep, &keep);
    let emb_full = sector_embedding(&fock, &basis)?;
    let emb = emb_full.submatrix(&keep, &(0..basis.dim()).collect::<Vec<_>>());
    if emb.nnz() != emb_full.nnz() {
        return Err(Error::Inconsistent("hole-spin states leave the range of P".into()));
    }

    // H maps the sector into itself: no weight outside the span of `emb`.
    let image = h_ran.matmul(&emb);
    let back = emb.matmul(&emb.adjoint().matmul(&image));
    let leak = image.sub(&back).max_abs();
    if leak > 1e-12 {
        return Err(Error::Inconsistent(format!("projected Hamiltonian leaks {leak:e} out of sector {m}")));
    }

    let matrix = emb.adjoint().matmul(&image).into_hermitian()?;
    Ok(SectorHamiltonian { basis, bosons: None, matrix, provenance: Provenance::Projected, dropped_constant: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::model::OnsiteU;

    #[test]
    fn pair_sector_matrix() {
        let m = Magnetization::from_twice(1);
        for h in [
            assemble_nagaoka_sector(&corpus::pair(), m).unwrap(),
            assemble_nagaoka_projected(&corpus::pair(), m).unwrap(),
        ] {
            let d = h.matrix.to_dense_real();
            assert_eq!(d, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        }
    }

    #[test]
    fn routes_agree_on_corpus() {
        for entry in corpus::corpus() {
            for m in Magnetization::all(entry.model.sites()) {
                let a = assemble_nagaoka_sector(&entry.model, m).unwrap();
                let b = assemble_nagaoka_projected(&entry.model, m).unwrap();
                let diff = a.matrix.sub(&b.matrix).max_abs();
                assert!(diff <= 1e-12, "{} M={m}: {diff}", entry.name);
            }
        }
    }

    #[test]
    fn routes_agree_with_offsite_coulomb_and_diagonal_hopping() {
        let mut t = crate::model::generate_lattice(crate::model::LatticeKind::Complete, &[4], 1.0).unwrap();
        t[(1, 2)] = 0.3;
        t[(2, 1)] = 0.3;
        t[(2, 2)] = 0.7;
        let mut v = DMatrix::zeros(4, 4);
        v[(0, 3)] = 0.4;
        v[(3, 0)] = 0.4;
        v[(1, 2)] = 1.1;
        v[(2, 1)] = 1.1;
        let model = LatticeModel::new(t).unwrap().with_offsite_u(v).unwrap();
        for m in Magnetization::all(4) {
            let a = assemble_nagaoka_sector(&model, m).unwrap();
            let b = assemble_nagaoka_projected(&model, m).unwrap();
            assert!(a.matrix.sub(&b.matrix).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn off_diagonal_of_minus_h_is_t() {
        let model = corpus::square_diagonal();
        let h = assemble_nagaoka_sector(&model, Magnetization::from_twice(1)).unwrap();
        for (r, c, v) in h.matrix.triplets() {
            if r != c {
                assert!(-v.re > 0.0 && v.im == 0.0);
            }
        }
    }

    #[test]
    fn two_site_free_spectrum() {
        let model = corpus::pair().with_onsite_u(OnsiteU::Finite(0.0)).unwrap();
        let h = assemble_hubbard_full(&model, 0.0).unwrap();
        let eig = nalgebra::SymmetricEigen::new(h.to_dense_real());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev.len(), 4);
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn onsite_term_vanishes_on_range_of_p() {
        let model = corpus::square();
        let fock = FullFockBasis::single_hole(4).unwrap();
        let u_only = fock_hamiltonian(&model, &fock, 5.0).sub(&fock_hamiltonian(&model, &fock, 0.0));
        let p = build_gutzwiller(&fock);
        assert_eq!(p.matmul(&u_only).matmul(&p).max_abs(), 0.0);
        assert!(u_only.max_abs() > 0.0);
    }

    #[test]
    fn full_hamiltonian_is_hermitian_with_phonons() {
        let model =
            corpus::with_local_phonons(corpus::triangle().with_onsite_u(OnsiteU::Finite(3.0)).unwrap(), 0.4, 1.0, 2);
        let h = assemble_hubbard_full(&model, 3.0).unwrap();
        assert!(h.is_hermitian(1e-12));
        assert_eq!(h.dim(), 15 * 27);
    }

    #[test]
    fn rejects_finite_u_for_sector_forms() {
        let model = corpus::pair().with_onsite_u(OnsiteU::Finite(1.0)).unwrap();
        assert!(matches!(assemble_nagaoka_sector(&model, Magnetization::from_twice(1)), Err(Error::InvalidInput(_))));
        assert!(assemble_hubbard_full(&corpus::pair(), f64::INFINITY).is_err());
    }
}
