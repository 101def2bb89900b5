//! Eigensolvers, total-spin resolved ground-state reports and the large-U
//! resolvent experiment.

mod eigen;
mod resolvent;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble_sector, Form, SectorHamiltonian};
use crate::model::LatticeModel;
use crate::sector::Magnetization;
use crate::sparse::{tensor, SparseMatrix, C64};
use crate::spin::sector_stot2;

pub use eigen::{eig_lowest, Eigenpairs, DENSE_LIMIT, RESIDUAL_TOL};
pub use resolvent::{
    default_z, energy_split_bound, operator_norm, resolvent_gap, u_sweep, EnergySplit, ResolventPoint,
};

/// Eigenvalues within `CLUSTER_TOL * (1 + |E0|)` of the ground energy count
/// as degenerate.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Allowed `|S(S+1) - <S^2>|` after rounding S to a half-integer.
pub const SPIN_TOL: f64 = 1e-6;

pub fn cluster_tolerance(e0: f64) -> f64 {
    CLUSTER_TOL * (1.0 + e0.abs())
}

/// Half-integer S with `S(S+1)` closest to `stot2`, and the mismatch.
pub fn resolve_spin(stot2: f64) -> (f64, f64) {
    let raw = (-1.0 + (1.0 + 4.0 * stot2.max(0.0)).sqrt()) / 2.0;
    let s = (2.0 * raw).round() / 2.0;
    (s, (s * (s + 1.0) - stot2).abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub m: Magnetization,
    pub provenance: String,
    pub dimension: usize,
    pub boson_cutoff: Option<usize>,
    pub ground_energy: f64,
    /// Add to `ground_energy` for the energy of the physical operator.
    pub dropped_constant: f64,
    pub degeneracy: usize,
    /// `E_1 - E_0` above the ground cluster; absent when the cluster fills the space.
    pub gap: Option<f64>,
    pub stot2_expectation: f64,
    /// Spin of the ground cluster; absent when the cluster mixes different spins.
    pub resolved_s: Option<f64>,
    /// Spins of the ground cluster after diagonalizing `S^2` inside it.
    pub cluster_spins: Vec<f64>,
    pub lowest: Vec<f64>,
    #[serde(skip)]
    pub ground_vector: DVector<C64>,
}

/// Eigenpairs up to and including the first level above the ground cluster.
pub fn lowest_with_gap(h: &SparseMatrix) -> Result<Eigenpairs> {
    let dim = h.dim();
    let mut k = 2.min(dim);
    loop {
        let pairs = eig_lowest(h, k)?;
        let tol = cluster_tolerance(pairs.values[0]);
        let in_cluster = pairs.values.iter().filter(|&&e| e - pairs.values[0] <= tol).count();
        if in_cluster < k || k == dim {
            return Ok(pairs);
        }
        k = (2 * k).min(dim);
    }
}

/// Ground cluster, gap and total spin of a sector Hamiltonian. `stot2` acts on
/// the same basis as `h.matrix`.
pub fn ground_report(h: &SectorHamiltonian, stot2: &SparseMatrix) -> Result<SpectralReport> {
    if stot2.dim() != h.dim() {
        return Err(Error::InvalidInput(format!(
            "S^2 has dimension {} but the Hamiltonian has {}",
            stot2.dim(),
            h.dim()
        )));
    }
    let pairs = lowest_with_gap(&h.matrix)?;
    let e0 = pairs.values[0];
    let tol = cluster_tolerance(e0);
    let degeneracy = pairs.values.iter().filter(|&&e| e - e0 <= tol).count();
    let gap = pairs.values.get(degeneracy).map(|e| e - e0);

    let v0 = &pairs.vectors[0];
    let stot2_expectation = v0.dotc(&stot2.mul_vec(v0)).re;

    // S^2 commutes with H, so it is block diagonal on the ground cluster.
    let cluster = &pairs.vectors[..degeneracy];
    let s2_block =
        nalgebra::DMatrix::from_fn(degeneracy, degeneracy, |i, j| cluster[i].dotc(&stot2.mul_vec(&cluster[j])));
    let s2_block = (&s2_block + s2_block.adjoint()).unscale(2.0);
    let mut cluster_spins = Vec::with_capacity(degeneracy);
    for ev in nalgebra::SymmetricEigen::new(s2_block).eigenvalues.iter() {
        let (s, mismatch) = resolve_spin(*ev);
        if mismatch > SPIN_TOL {
            return Err(Error::AmbiguousSpin { stot2: *ev, s, mismatch });
        }
        cluster_spins.push(s);
    }
    cluster_spins.sort_by(f64::total_cmp);
    let resolved_s = (cluster_spins.first() == cluster_spins.last()).then(|| cluster_spins[0]);

    Ok(SpectralReport {
        m: h.magnetization(),
        provenance: h.provenance.to_string(),
        dimension: h.dim(),
        boson_cutoff: h.bosons.as_ref().map(|b| b.cutoff()),
        ground_energy: e0,
        dropped_constant: h.dropped_constant,
        degeneracy,
        gap,
        stot2_expectation,
        resolved_s,
        cluster_spins,
        lowest: pairs.values.clone(),
        ground_vector: v0.clone(),
    })
}

/// `S^2` on the product basis of `h`.
pub fn stot2_for(h: &SectorHamiltonian) -> Result<SparseMatrix> {
    let s2 = sector_stot2(h.basis.sites(), h.magnetization())?;
    tensor(&s2, &SparseMatrix::identity(h.boson_dim()))
}

pub fn sector_report(h: &SectorHamiltonian) -> Result<SpectralReport> {
    ground_report(h, &stot2_for(h)?)
}

/// Reports for every magnetization sector, in ascending order of M.
pub fn all_sector_reports(model: &LatticeModel, form: Form, cutoff: Option<usize>) -> Result<Vec<SpectralReport>> {
    Magnetization::all(model.sites())
        .into_par_iter()
        .map(|m| sector_report(&assemble_sector(model, form, m, cutoff)?))
        .collect()
}

/// Summary of the ground multiplet assembled across all sectors.
#[derive(Debug, Clone, Serialize)]
pub struct Multiplet {
    pub ground_energy: f64,
    /// Number of sectors whose ground energy equals the global minimum.
    pub size: usize,
    pub spin: Option<f64>,
    /// Largest spread of sector ground energies among the multiplet.
    pub spread: f64,
    /// Smallest excitation above the multiplet across all sectors.
    pub gap: Option<f64>,
    pub unique_per_sector: bool,
}

/// Tolerance for equal ground energies across sectors.
pub const SECTOR_MATCH_TOL: f64 = 1e-10;

pub fn multiplet(reports: &[SpectralReport]) -> Multiplet {
    let e_min = reports.iter().map(|r| r.ground_energy).fold(f64::INFINITY, f64::min);
    let members: Vec<&SpectralReport> =
        reports.iter().filter(|r| r.ground_energy - e_min <= SECTOR_MATCH_TOL * (1.0 + e_min.abs())).collect();
    let spread = members.iter().map(|r| r.ground_energy - e_min).fold(0.0, f64::max);
    let spins: Vec<Option<f64>> = members.iter().map(|r| r.resolved_s).collect();
    let spin = spins.first().copied().flatten().filter(|s| spins.iter().all(|x| *x == Some(*s)));
    let size = members.iter().map(|r| r.degeneracy).sum();
    let gap = reports
        .iter()
        .filter_map(|r| {
            if members.iter().any(|m| std::ptr::eq(*m, r)) {
                r.gap.map(|g| r.ground_energy + g - e_min)
            } else {
                Some(r.ground_energy - e_min)
            }
        })
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
    Multiplet {
        ground_energy: e_min,
        size,
        spin,
        spread,
        gap,
        unique_per_sector: members.iter().all(|r| r.degeneracy == 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::hamiltonian::assemble_nagaoka_sector;

    #[test]
    fn spin_rounding() {
        assert_eq!(resolve_spin(0.75), (0.5, 0.0));
        assert_eq!(resolve_spin(3.75).0, 1.5);
        assert_eq!(resolve_spin(0.0).0, 0.0);
        assert!(resolve_spin(1.3).1 > SPIN_TOL);
    }

    #[test]
    fn complete4_half_sector() {
        let h = assemble_nagaoka_sector(&corpus::complete4(), Magnetization::from_twice(1)).unwrap();
        let r = sector_report(&h).unwrap();
        assert_eq!(r.dimension, 12);
        assert_eq!(r.resolved_s, Some(1.5));
        assert_eq!(r.degeneracy, 1);
        assert!(r.gap.unwrap() > 0.0);
        // dense oracle
        let eig = nalgebra::SymmetricEigen::new(h.matrix.to_dense_real());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((r.ground_energy - min).abs() < 1e-12);
    }

    #[test]
    fn polarized_sector_always_maximal() {
        for entry in corpus::corpus() {
            let n = entry.model.sites();
            let h = assemble_nagaoka_sector(&entry.model, Magnetization::max_for(n)).unwrap();
            let r = sector_report(&h).unwrap();
            assert_eq!(r.resolved_s, Some((n as f64 - 1.0) / 2.0), "{}", entry.name);
        }
    }

    #[test]
    fn chain_ground_cluster_mixes_spins() {
        let reports = all_sector_reports(&corpus::open_chain3(), Form::Nagaoka, None).unwrap();
        let zero = reports.iter().find(|r| r.m.twice() == 0).unwrap();
        assert_eq!(zero.degeneracy, 2);
        assert_eq!(zero.resolved_s, None);
        assert_eq!(zero.cluster_spins, vec![0.0, 1.0]);
    }

    #[test]
    fn report_is_invariant_under_relabelling() {
        let model = corpus::square_diagonal();
        let perm = [2, 0, 3, 1];
        let other = model.permuted(&perm).unwrap();
        let m = Magnetization::from_twice(-1);
        let a = sector_report(&assemble_nagaoka_sector(&model, m).unwrap()).unwrap();
        let b = sector_report(&assemble_nagaoka_sector(&other, m).unwrap()).unwrap();
        assert!((a.ground_energy - b.ground_energy).abs() < 1e-12);
        assert_eq!(a.resolved_s, b.resolved_s);
        for (x, y) in a.lowest.iter().zip(&b.lowest) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
