//! Total-spin operators on hole-spin sectors.
//!
//! `S^-` flips one up spin to down and leaves the hole in place, with every
//! matrix element `+1` in the canonical bases.

use crate::error::{Error, Result};
use crate::manybody::{build_spin_ops, sector_embedding, FullFockBasis};
use crate::sector::{HoleSpinConfig, Magnetization, SectorBasis};
use crate::sparse::{check_budget, SparseMatrix};

fn require_sector(sites: usize, m: Magnetization) -> Result<()> {
    if !m.is_valid_for(sites) {
        return Err(Error::MagnetizationOutOfRange { m: m.to_string(), sites });
    }
    Ok(())
}

/// `S^-` from sector `m` to `m - 1` by flipping each up spin in turn.
pub fn sector_lowering(sites: usize, m: Magnetization) -> Result<SparseMatrix> {
    require_sector(sites, m)?;
    require_sector(sites, m.lowered())?;
    let src = SectorBasis::new(sites, m)?;
    let dst = SectorBasis::new(sites, m.lowered())?;
    let mut trips = Vec::new();
    for (j, c) in src.configs().iter().enumerate() {
        for z in 0..sites {
            if c.is_up(z) {
                let flipped = HoleSpinConfig::new(c.hole(), c.up_mask() & !(1 << z))?;
                trips.push((dst.index_of(&flipped).expect("flip lands in m - 1"), j, 1.0));
            }
        }
    }
    Ok(SparseMatrix::from_real_triplets(dst.dim(), src.dim(), trips))
}

/// `S^-` from sector `m` to `m - 1` computed as `E_{m-1}* S^- E_m`, where `E`
/// embeds hole-spin states into the single-hole Fock space.
pub fn fock_sector_lowering(sites: usize, m: Magnetization) -> Result<SparseMatrix> {
    require_sector(sites, m)?;
    require_sector(sites, m.lowered())?;
    let fock = FullFockBasis::single_hole(sites)?;
    let ops = build_spin_ops(&fock);
    let src = sector_embedding(&fock, &SectorBasis::new(sites, m)?)?;
    let dst = sector_embedding(&fock, &SectorBasis::new(sites, m.lowered())?)?;
    Ok(dst.adjoint().matmul(&ops.s_minus.matmul(&src)))
}

/// `S_tot^2 = M^2 + (S^+ S^- + S^- S^+) / 2` on sector `m`.
pub fn sector_stot2(sites: usize, m: Magnetization) -> Result<SparseMatrix> {
    require_sector(sites, m)?;
    let dim = SectorBasis::new(sites, m)?.dim();
    check_budget(dim)?;
    let mv = m.value();
    let mut s2 = SparseMatrix::identity(dim).scale_real(mv * mv);
    if m.lowered().is_valid_for(sites) {
        let down = sector_lowering(sites, m)?;
        s2 = s2.add(&down.adjoint().matmul(&down).scale_real(0.5));
    }
    if m.raised().is_valid_for(sites) {
        let down_from_above = sector_lowering(sites, m.raised())?;
        s2 = s2.add(&down_from_above.matmul(&down_from_above.adjoint()).scale_real(0.5));
    }
    s2.into_hermitian()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rule_matches_fock_route() {
        for sites in 2..=5 {
            for m in Magnetization::all(sites) {
                if !m.lowered().is_valid_for(sites) {
                    assert!(sector_lowering(sites, m).is_err());
                    continue;
                }
                let a = sector_lowering(sites, m).unwrap();
                let b = fock_sector_lowering(sites, m).unwrap();
                assert!(a.sub(&b).max_abs() < 1e-15, "sites={sites} M={m}");
            }
        }
    }

    #[test]
    fn stot2_matches_fock_casimir() {
        for sites in 2..=4 {
            let fock = FullFockBasis::single_hole(sites).unwrap();
            let ops = build_spin_ops(&fock);
            for m in Magnetization::all(sites) {
                let e = sector_embedding(&fock, &SectorBasis::new(sites, m).unwrap()).unwrap();
                let oracle = e.adjoint().matmul(&ops.stot2.matmul(&e));
                assert!(sector_stot2(sites, m).unwrap().sub(&oracle).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polarized_sector_has_maximal_spin() {
        let sites = 4;
        let s = 1.5;
        let s2 = sector_stot2(sites, Magnetization::max_for(sites)).unwrap();
        assert!(s2.sub(&SparseMatrix::identity(s2.dim()).scale_real(s * (s + 1.0))).max_abs() < 1e-14);
    }
}
