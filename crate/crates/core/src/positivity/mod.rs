//! Positivity predicates and Perron-Frobenius certificates in a
//! distinguished basis (hole-spin configurations, or configurations times
//! grid points).

mod grid;

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::SectorHamiltonian;
use crate::sector::Magnetization;
use crate::sparse::{SparseMatrix, C64};
use crate::spectral::{cluster_tolerance, lowest_with_gap};
use crate::spin::fock_sector_lowering;

pub use grid::{grid_hamiltonian, qgrid_holstein_certify, GridCertificate, GridHamiltonian, GridSpec};

/// Entries of a unit ground vector above this count as strictly positive.
pub const STRICT_POSITIVITY: f64 = 1e-12;

/// All entries real and `>= -tol`.
pub fn preserves_positivity(a: &SparseMatrix, tol: f64) -> bool {
    a.triplets().all(|(_, _, v)| v.re >= -tol && v.im.abs() <= tol)
}

fn reaches_all(n: usize, adj: &[Vec<usize>]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Whether `e^A` is entrywise strictly positive for an entrywise nonnegative
/// `A`: every `(m, n)` is reached by some power `A^l`, `l >= 0`, i.e. the
/// support digraph is strongly connected.
pub fn improves_positivity_exp(a: &SparseMatrix) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::InvalidInput("positivity improvement needs a square matrix".into()));
    }
    if !preserves_positivity(a, 0.0) {
        return Err(Error::InvalidInput("matrix is not entrywise nonnegative".into()));
    }
    let n = a.dim();
    let mut fwd = vec![Vec::new(); n];
    let mut back = vec![Vec::new(); n];
    for (r, c, v) in a.triplets() {
        if r != c && v.re > 0.0 {
            fwd[c].push(r);
            back[r].push(c);
        }
    }
    Ok(reaches_all(n, &fwd) && reaches_all(n, &back))
}

/// Connectivity of the undirected graph on basis states with an edge for
/// every nonzero off-diagonal entry.
pub fn offdiagonal_connected(h: &SparseMatrix) -> bool {
    let n = h.dim();
    let mut adj = vec![Vec::new(); n];
    for (r, c, _) in h.triplets() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    reaches_all(n, &adj)
}

/// Ergodicity of the U = inf dynamics on a sector: irreducibility of the
/// off-diagonal support of `-H`.
pub fn ergodicity_certificate(h: &SectorHamiltonian) -> bool {
    offdiagonal_connected(&h.matrix)
}

/// Adding a real diagonal never changes the ergodicity certificate.
pub fn diagonal_perturbation_equivalence(h: &SectorHamiltonian, d: &[f64]) -> Result<bool> {
    if d.len() != h.dim() {
        return Err(Error::InvalidInput(format!(
            "diagonal has length {} but the sector has dimension {}",
            d.len(),
            h.dim()
        )));
    }
    let perturbed = h.matrix.add(&SparseMatrix::diagonal(d));
    Ok(offdiagonal_connected(&h.matrix) == offdiagonal_connected(&perturbed))
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: DVector<C64>,
    pub degeneracy: usize,
    pub gap: Option<f64>,
}

pub fn ground_state(h: &SparseMatrix) -> Result<GroundState> {
    let pairs = lowest_with_gap(h)?;
    let e0 = pairs.values[0];
    let tol = cluster_tolerance(e0);
    let degeneracy = pairs.values.iter().filter(|&&e| e - e0 <= tol).count();
    Ok(GroundState {
        energy: e0,
        vector: pairs.vectors[0].clone(),
        degeneracy,
        gap: pairs.values.get(degeneracy).map(|e| e - e0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityCertificate {
    pub m: Magnetization,
    pub basis: String,
    pub dimension: usize,
    pub offdiag_sign_ok: bool,
    pub irreducible: bool,
    pub ground_unique: bool,
    pub ground_strictly_positive: bool,
    /// Smallest entry of the unit ground vector after fixing its sign.
    pub min_entry: f64,
    pub ground_energy: f64,
    pub gap: Option<f64>,
}

/// Fix the global phase so the largest-magnitude entry is real positive.
pub fn normalize_sign(v: &DVector<C64>) -> DVector<C64> {
    let (mut best, mut best_abs) = (C64::new(1.0, 0.0), -1.0);
    for x in v.iter() {
        if x.norm() > best_abs {
            best_abs = x.norm();
            best = *x;
        }
    }
    let phase = if best_abs > 0.0 { best.conj() / best_abs } else { C64::new(1.0, 0.0) };
    let w = v * phase;
    let n = w.norm();
    w.unscale(n)
}

/// Perron-Frobenius certificate for `h` in its own basis. Sign structure and
/// irreducibility together force a unique, strictly positive ground vector;
/// a violation of that implication is returned as an error.
pub fn pf_certificate(
    h: &SparseMatrix,
    ground: &GroundState,
    m: Magnetization,
    basis: &str,
) -> Result<PositivityCertificate> {
    let minus_offdiag = h.off_diagonal().scale_real(-1.0);
    let offdiag_sign_ok = preserves_positivity(&minus_offdiag, 0.0);
    let irreducible = offdiagonal_connected(h);
    let v = normalize_sign(&ground.vector);
    let min_entry = v.iter().map(|x| x.re).fold(f64::INFINITY, f64::min);
    let max_imag = v.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    let ground_strictly_positive = min_entry > STRICT_POSITIVITY && max_imag <= STRICT_POSITIVITY;
    let ground_unique = ground.degeneracy == 1;
    let cert = PositivityCertificate {
        m,
        basis: basis.to_string(),
        dimension: h.dim(),
        offdiag_sign_ok,
        irreducible,
        ground_unique,
        ground_strictly_positive,
        min_entry,
        ground_energy: ground.energy,
        gap: ground.gap,
    };
    if offdiag_sign_ok && irreducible && !(ground_unique && ground_strictly_positive) {
        return Err(Error::Inconsistent(format!(
            "sector {m}: -H is irreducible with nonnegative off-diagonal part, but the ground state \
             has degeneracy {} and minimum entry {min_entry:e}",
            ground.degeneracy
        )));
    }
    Ok(cert)
}

/// Certificate for a sector Hamiltonian in the hole-spin configuration basis.
pub fn certify_sector(h: &SectorHamiltonian) -> Result<PositivityCertificate> {
    if h.bosons.is_some() {
        return Err(Error::InvalidInput(
            "configuration-basis certificates need a pure electron sector; use the grid form for phonons".into(),
        ));
    }
    let ground = ground_state(&h.matrix)?;
    pf_certificate(&h.matrix, &ground, h.magnetization(), "configuration")
}

/// `S^-` from sector `m` to `m - 1`, built in the Fock space, has only
/// entries `0` and `+1` with one `+1` per up spin in each column.
pub fn spin_lowering_positivity(sites: usize, m: Magnetization) -> Result<bool> {
    let s_minus = fock_sector_lowering(sites, m)?;
    let src = crate::sector::SectorBasis::new(sites, m)?;
    let mut ones = vec![0usize; s_minus.cols()];
    for (_, c, v) in s_minus.triplets() {
        if (v - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Ok(false);
        }
        ones[c] += 1;
    }
    Ok(src.configs().iter().zip(&ones).all(|(c, &k)| c.n_up() == k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::hamiltonian::assemble_nagaoka_sector;
    use crate::sector::connectivity_check;

    #[test]
    fn predicates_on_small_matrices() {
        let nonneg = SparseMatrix::from_real_triplets(2, 2, [(0, 0, 0.3), (0, 1, 2.0), (1, 0, 0.1)]);
        assert!(preserves_positivity(&nonneg, 0.0));
        let flip = SparseMatrix::from_real_triplets(2, 2, [(0, 1, -1.0), (1, 0, -1.0)]);
        assert!(!preserves_positivity(&flip, 0.0));

        let cycle = SparseMatrix::from_real_triplets(3, 3, [(1, 0, 1.0), (2, 1, 1.0), (0, 2, 1.0)]);
        assert!(improves_positivity_exp(&cycle).unwrap());
        let blocks = SparseMatrix::from_real_triplets(4, 4, [(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)]);
        assert!(!improves_positivity_exp(&blocks).unwrap());
        let shift = SparseMatrix::from_real_triplets(3, 3, [(0, 1, 1.0), (1, 2, 1.0)]);
        assert!(!improves_positivity_exp(&shift).unwrap());
        assert!(improves_positivity_exp(&flip).is_err());
    }

    #[test]
    fn ergodicity_matches_connectivity() {
        for entry in corpus::corpus() {
            for m in Magnetization::all(entry.model.sites()) {
                let h = assemble_nagaoka_sector(&entry.model, m).unwrap();
                let bfs = connectivity_check(&entry.model, m).unwrap().connected;
                assert_eq!(ergodicity_certificate(&h), bfs, "{} M={m}", entry.name);
            }
        }
    }

    #[test]
    fn pair_certificate() {
        let h = assemble_nagaoka_sector(&corpus::pair(), Magnetization::from_twice(1)).unwrap();
        let cert = certify_sector(&h).unwrap();
        assert!(cert.offdiag_sign_ok && cert.irreducible && cert.ground_unique && cert.ground_strictly_positive);
        assert!((cert.min_entry - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn disconnected_chain_makes_no_claim() {
        let h = assemble_nagaoka_sector(&corpus::open_chain3(), Magnetization::from_twice(0)).unwrap();
        let cert = certify_sector(&h).unwrap();
        assert!(!cert.irreducible);
        assert!(!cert.ground_unique);
    }

    #[test]
    fn implication_violation_is_an_error() {
        let h = SparseMatrix::from_real_triplets(2, 2, [(0, 1, -1.0), (1, 0, -1.0)]);
        let bogus = GroundState {
            energy: 1.0,
            vector: DVector::from_vec(vec![C64::new(0.5f64.sqrt(), 0.0), C64::new(-(0.5f64.sqrt()), 0.0)]),
            degeneracy: 1,
            gap: None,
        };
        assert!(matches!(
            pf_certificate(&h, &bogus, Magnetization::from_twice(1), "configuration"),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn spin_lowering_on_corpus() {
        for entry in corpus::corpus() {
            let n = entry.model.sites();
            for m in Magnetization::all(n) {
                if m.lowered().is_valid_for(n) {
                    assert!(spin_lowering_positivity(n, m).unwrap(), "{} M={m}", entry.name);
                }
            }
        }
        let s = fock_sector_lowering(2, Magnetization::from_twice(1)).unwrap();
        assert_eq!(s.to_dense_real(), nalgebra::DMatrix::identity(2, 2));
    }

    #[test]
    fn diagonal_perturbations() {
        let h = assemble_nagaoka_sector(&corpus::triangle(), Magnetization::from_twice(0)).unwrap();
        assert!(diagonal_perturbation_equivalence(&h, &vec![0.0; h.dim()]).unwrap());
        assert!(
            diagonal_perturbation_equivalence(&h, &(0..h.dim()).map(|i| i as f64 - 2.5).collect::<Vec<_>>()).unwrap()
        );
        assert!(diagonal_perturbation_equivalence(&h, &[1.0]).is_err());
    }
}
