//! Property tests over random hopping matrices.

use nalgebra::DMatrix;
use proptest::prelude::*;

use crate::hamiltonian::{assemble_nagaoka_projected, assemble_nagaoka_sector, Form};
use crate::manybody::{projected_indices, FullFockBasis};
use crate::model::LatticeModel;
use crate::positivity::{diagonal_perturbation_equivalence, ergodicity_certificate, preserves_positivity};
use crate::sector::{connectivity_check, Magnetization, SectorBasis};
use crate::spectral::{all_sector_reports, multiplet};
use crate::spin::{sector_lowering, sector_stot2};

/// Symmetric nonnegative hopping on `n` sites; roughly a third of the bonds are absent.
fn hopping(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(prop_oneof![Just(0.0), 0.1f64..2.0, 0.1f64..2.0], n * n).prop_map(move |v| {
        DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            if a == b {
                0.0
            } else {
                v[a * n + b]
            }
        })
    })
}

fn model_and_sector() -> impl Strategy<Value = (LatticeModel, Magnetization)> {
    (3usize..=5).prop_flat_map(|n| (hopping(n), 0..n)).prop_map(|(t, k)| {
        let n = t.nrows();
        let m = Magnetization::all(n)[k];
        (LatticeModel::new(t).unwrap(), m)
    })
}

fn eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn direct_and_projected_agree((model, m) in model_and_sector()) {
        let direct = assemble_nagaoka_sector(&model, m).unwrap().matrix;
        let projected = assemble_nagaoka_projected(&model, m).unwrap().matrix;
        prop_assert!(direct.sub(&projected).max_abs() <= 1e-12);
        prop_assert!(direct.is_hermitian(1e-12));
        prop_assert!(preserves_positivity(&direct.off_diagonal().scale_real(-1.0), 0.0));
    }

    #[test]
    fn certificate_matches_bfs((model, m) in model_and_sector()) {
        let h = assemble_nagaoka_sector(&model, m).unwrap();
        prop_assert_eq!(ergodicity_certificate(&h), connectivity_check(&model, m).unwrap().connected);
    }

    #[test]
    fn hamiltonian_is_spin_invariant((model, m) in model_and_sector()) {
        let n = model.sites();
        let h = assemble_nagaoka_sector(&model, m).unwrap().matrix;
        let s2 = sector_stot2(n, m).unwrap();
        prop_assert!(h.commutator(&s2).max_abs() <= 1e-12);
        if m.lowered().is_valid_for(n) {
            let lower = sector_lowering(n, m).unwrap();
            let below = assemble_nagaoka_sector(&model, m.lowered()).unwrap().matrix;
            prop_assert!(below.matmul(&lower).sub(&lower.matmul(&h)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn relabelling_preserves_spectrum((model, m) in model_and_sector(), seed in any::<u64>()) {
        let n = model.sites();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let other = model.permuted(&perm).unwrap();
        let a = eigenvalues(assemble_nagaoka_sector(&model, m).unwrap().matrix.to_dense_real());
        let b = eigenvalues(assemble_nagaoka_sector(&other, m).unwrap().matrix.to_dense_real());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn diagonal_never_changes_ergodicity(
        (model, m) in model_and_sector(),
        diag in proptest::collection::vec(-50.0f64..50.0, 80),
    ) {
        let h = assemble_nagaoka_sector(&model, m).unwrap();
        let d: Vec<f64> = (0..h.dim()).map(|i| diag[i % diag.len()]).collect();
        prop_assert!(diagonal_perturbation_equivalence(&h, &d).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Connected sectors force the maximal-spin multiplet.
    #[test]
    fn connected_models_are_ferromagnetic(t in (3usize..=4).prop_flat_map(hopping)) {
        let model = LatticeModel::new(t).unwrap();
        let n = model.sites();
        let connected = Magnetization::all(n).into_iter().all(|m| connectivity_check(&model, m).unwrap().connected);
        prop_assume!(connected);
        let mp = multiplet(&all_sector_reports(&model, Form::Nagaoka, None).unwrap());
        prop_assert_eq!(mp.spin, Some((n as f64 - 1.0) / 2.0));
        prop_assert_eq!(mp.size, n);
        prop_assert!(mp.unique_per_sector);
    }
}

#[test]
fn projected_rank_counts_sector_configurations() {
    for n in 2..=6 {
        let fock = FullFockBasis::single_hole(n).unwrap();
        let sectors: usize = Magnetization::all(n).into_iter().map(|m| SectorBasis::new(n, m).unwrap().dim()).sum();
        assert_eq!(projected_indices(&fock).len(), n << (n - 1));
        assert_eq!(sectors, n << (n - 1));
    }
}
