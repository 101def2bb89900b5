//! Occupation-number bases and second-quantized operators.
//!
//! Fermion modes are ordered with all up spins first (by site), then all
//! down spins. A basis word with bits `m_1 < m_2 < ...` set is the state
//! `c*_{m_1} c*_{m_2} ... |0>`, so `c*_m` picks up `(-1)^{#occupied modes below m}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sector::{HoleSpinConfig, SectorBasis};
use crate::sparse::{check_budget, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

pub const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermionOp {
    Create,
    Annihilate,
    Number,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BosonOp {
    Create,
    Annihilate,
    NumberTotal,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

#[inline]
fn parity_below(word: u64, mode: usize) -> f64 {
    if (word & ((1u64 << mode) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c*_mode |word>` as `(sign, word')`.
#[inline]
pub fn create(word: u64, mode: usize) -> Option<(f64, u64)> {
    if word & (1 << mode) != 0 {
        return None;
    }
    Some((parity_below(word, mode), word | (1 << mode)))
}

/// `c_mode |word>` as `(sign, word')`.
#[inline]
pub fn annihilate(word: u64, mode: usize) -> Option<(f64, u64)> {
    if word & (1 << mode) == 0 {
        return None;
    }
    Some((parity_below(word, mode), word & !(1 << mode)))
}

/// `c*_to c_from |word>`.
#[inline]
pub fn hop(word: u64, to: usize, from: usize) -> Option<(f64, u64)> {
    let (s1, w1) = annihilate(word, from)?;
    let (s2, w2) = create(w1, to)?;
    Some((s1 * s2, w2))
}

/// Fixed-particle-number fermion basis over `2 * sites` modes.
#[derive(Debug, Clone)]
pub struct FullFockBasis {
    sites: usize,
    particles: usize,
    states: Vec<u64>,
}

impl FullFockBasis {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        let modes = 2 * sites;
        if particles > modes {
            return Err(Error::InvalidInput(format!("{particles} fermions do not fit in {modes} modes")));
        }
        let dim = binomial(modes, particles).ok_or(Error::DimensionBudget { dim: usize::MAX, budget: 0 })?;
        check_budget(dim)?;
        let mut states = Vec::with_capacity(dim);
        if particles == 0 {
            states.push(0);
        } else {
            // Gosper's hack walks same-popcount words in increasing order.
            let mut w: u64 = (1u64 << particles) - 1;
            let limit = 1u64 << modes;
            while w < limit {
                states.push(w);
                let c = w & w.wrapping_neg();
                let r = w + c;
                w = (((r ^ w) >> 2) / c) | r;
            }
        }
        Ok(FullFockBasis { sites, particles, states })
    }

    /// The `N = |Lambda| - 1` electron space.
    pub fn single_hole(sites: usize) -> Result<Self> {
        Self::new(sites, sites - 1)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn index_of(&self, word: u64) -> Option<usize> {
        self.states.binary_search(&word).ok()
    }

    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        mode_index(self.sites, site, spin)
    }

    pub fn occupation(&self, i: usize, site: usize, spin: Spin) -> f64 {
        ((self.states[i] >> self.mode(site, spin)) & 1) as f64
    }

    pub fn is_doubly_occupied(&self, i: usize, site: usize) -> bool {
        let w = self.states[i];
        (w >> site) & 1 == 1 && (w >> (self.sites + site)) & 1 == 1
    }

    /// Twice the S^3 eigenvalue of basis state `i`.
    pub fn twice_sz(&self, i: usize) -> i32 {
        let w = self.states[i];
        let mask = (1u64 << self.sites) - 1;
        (w & mask).count_ones() as i32 - ((w >> self.sites) & mask).count_ones() as i32
    }
}

pub fn mode_index(sites: usize, site: usize, spin: Spin) -> usize {
    match spin {
        Spin::Up => site,
        Spin::Down => sites + site,
    }
}

/// `c*`, `c` or `n` for one mode. Creation and annihilation map into the
/// basis with one more or one fewer particle (rows index that basis).
pub fn build_fermion_op(basis: &FullFockBasis, kind: FermionOp, site: usize, spin: Spin) -> Result<SparseMatrix> {
    if site >= basis.sites {
        return Err(Error::InvalidInput(format!("site {site} out of range")));
    }
    let mode = basis.mode(site, spin);
    match kind {
        FermionOp::Number => {
            let diag: Vec<f64> = (0..basis.dim()).map(|i| basis.occupation(i, site, spin)).collect();
            Ok(SparseMatrix::diagonal(&diag))
        }
        FermionOp::Create | FermionOp::Annihilate => {
            let target_n = if kind == FermionOp::Create {
                basis.particles + 1
            } else {
                basis.particles.checked_sub(1).ok_or_else(|| Error::InvalidInput("no particles to remove".into()))?
            };
            let target = FullFockBasis::new(basis.sites, target_n)?;
            let f = if kind == FermionOp::Create { create } else { annihilate };
            let trips = basis.states.iter().enumerate().filter_map(|(col, &w)| {
                let (s, w2) = f(w, mode)?;
                Some((target.index_of(w2).expect("target basis complete"), col, s))
            });
            Ok(SparseMatrix::from_real_triplets(target.dim(), basis.dim(), trips))
        }
    }
}

/// `c*_{a} c_{b}` on a fixed-N basis.
pub fn build_bilinear(basis: &FullFockBasis, to: usize, from: usize) -> SparseMatrix {
    let trips = basis.states.iter().enumerate().filter_map(|(col, &w)| {
        let (s, w2) = hop(w, to, from)?;
        Some((basis.index_of(w2).expect("number conserving"), col, s))
    });
    SparseMatrix::from_real_triplets(basis.dim(), basis.dim(), trips)
}

/// Gutzwiller projection: 1 on states with no doubly occupied site.
pub fn build_gutzwiller(basis: &FullFockBasis) -> SparseMatrix {
    let diag: Vec<f64> = (0..basis.dim())
        .map(|i| if (0..basis.sites).any(|x| basis.is_doubly_occupied(i, x)) { 0.0 } else { 1.0 })
        .collect();
    SparseMatrix::diagonal(&diag)
}

/// Sum over sites of `n_up n_down`.
pub fn build_double_occupancy(basis: &FullFockBasis) -> SparseMatrix {
    let diag: Vec<f64> =
        (0..basis.dim()).map(|i| (0..basis.sites).filter(|&x| basis.is_doubly_occupied(i, x)).count() as f64).collect();
    SparseMatrix::diagonal(&diag)
}

/// Indices of basis states inside the range of the Gutzwiller projection.
pub fn projected_indices(basis: &FullFockBasis) -> Vec<usize> {
    (0..basis.dim()).filter(|&i| !(0..basis.sites).any(|x| basis.is_doubly_occupied(i, x))).collect()
}

#[derive(Debug, Clone)]
pub struct SpinOps {
    pub s3: SparseMatrix,
    pub s_plus: SparseMatrix,
    pub s_minus: SparseMatrix,
    pub stot2: SparseMatrix,
}

pub fn build_spin_ops(basis: &FullFockBasis) -> SpinOps {
    let n = basis.sites;
    let s3 = SparseMatrix::diagonal(&(0..basis.dim()).map(|i| basis.twice_sz(i) as f64 / 2.0).collect::<Vec<_>>());
    let mut s_minus = SparseMatrix::zeros(basis.dim(), basis.dim());
    for x in 0..n {
        s_minus = s_minus.add(&build_bilinear(basis, mode_index(n, x, Spin::Down), mode_index(n, x, Spin::Up)));
    }
    let s_plus = s_minus.adjoint();
    let stot2 = s3
        .matmul(&s3)
        .add(&s_plus.matmul(&s_minus).scale_real(0.5))
        .add(&s_minus.matmul(&s_plus).scale_real(0.5))
        .into_hermitian()
        .expect("S^2 is Hermitian");
    SpinOps { s3, s_plus, s_minus, stot2 }
}

/// `|x, sigma> = c_{x up} prod'_z c*_{z sigma'_z} |0>` with sigma' = sigma
/// except an up spin at the hole, written as `sign * |word>`.
pub fn hole_spin_state(sites: usize, c: HoleSpinConfig) -> (f64, u64) {
    let mut word = 0u64;
    let mut sign = 1.0;
    for z in (0..sites).rev() {
        let spin = if z == c.hole() || c.is_up(z) { Spin::Up } else { Spin::Down };
        let (s, w) = create(word, mode_index(sites, z, spin)).expect("distinct modes");
        sign *= s;
        word = w;
    }
    let (s, w) = annihilate(word, mode_index(sites, c.hole(), Spin::Up)).expect("hole site carries an up spin");
    (sign * s, w)
}

/// Isometry from a sector's hole-spin basis into the single-hole Fock basis:
/// column `j` is `|x, sigma>` for configuration `j`.
pub fn sector_embedding(fock: &FullFockBasis, sector: &SectorBasis) -> Result<SparseMatrix> {
    if fock.sites != sector.sites() || fock.particles + 1 != fock.sites {
        return Err(Error::InvalidInput("Fock basis is not the single-hole space of this lattice".into()));
    }
    let trips = sector.configs().iter().enumerate().map(|(j, &c)| {
        let (s, w) = hole_spin_state(fock.sites, c);
        (fock.index_of(w).expect("single-hole state present"), j, s)
    });
    Ok(SparseMatrix::from_real_triplets(fock.dim(), sector.dim(), trips))
}

/// Truncated boson space: each mode holds `0..=cutoff` quanta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BosonBasis {
    modes: usize,
    cutoff: usize,
    dim: usize,
}

impl BosonBasis {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        let dim = (cutoff + 1)
            .checked_pow(modes as u32)
            .ok_or(Error::DimensionBudget { dim: usize::MAX, budget: crate::sparse::dimension_budget() })?;
        check_budget(dim)?;
        Ok(BosonBasis { modes, cutoff, dim })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.modes - 1 - mode) as u32)
    }

    /// Occupation of `mode` in state `i` (mode 0 is the most significant digit).
    pub fn occupation(&self, i: usize, mode: usize) -> usize {
        (i / self.stride(mode)) % (self.cutoff + 1)
    }

    pub fn total_occupation(&self, i: usize) -> usize {
        (0..self.modes).map(|m| self.occupation(i, m)).sum()
    }
}

pub fn build_boson_op(basis: &BosonBasis, kind: BosonOp, mode: usize) -> Result<SparseMatrix> {
    if kind != BosonOp::NumberTotal && mode >= basis.modes {
        return Err(Error::InvalidInput(format!("boson mode {mode} out of range")));
    }
    let dim = basis.dim;
    Ok(match kind {
        BosonOp::NumberTotal => {
            SparseMatrix::diagonal(&(0..dim).map(|i| basis.total_occupation(i) as f64).collect::<Vec<_>>())
        }
        BosonOp::Create => {
            let st = basis.stride(mode);
            SparseMatrix::from_real_triplets(
                dim,
                dim,
                (0..dim).filter_map(|i| {
                    let n = basis.occupation(i, mode);
                    (n < basis.cutoff).then(|| (i + st, i, ((n + 1) as f64).sqrt()))
                }),
            )
        }
        BosonOp::Annihilate => {
            let st = basis.stride(mode);
            SparseMatrix::from_real_triplets(
                dim,
                dim,
                (0..dim).filter_map(|i| {
                    let n = basis.occupation(i, mode);
                    (n > 0).then(|| (i - st, i, (n as f64).sqrt()))
                }),
            )
        }
    })
}

/// `b*_mode + b_mode`.
pub fn boson_displacement(basis: &BosonBasis, mode: usize) -> Result<SparseMatrix> {
    let up = build_boson_op(basis, BosonOp::Create, mode)?;
    Ok(up.add(&up.adjoint()).into_hermitian().expect("b + b* is Hermitian"))
}

/// Single-mode `b*_mode b_mode`.
pub fn boson_number(basis: &BosonBasis, mode: usize) -> Result<SparseMatrix> {
    let up = build_boson_op(basis, BosonOp::Create, mode)?;
    Ok(up.matmul(&up.adjoint()).into_hermitian().expect("number operator is Hermitian"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector::{Magnetization, SectorBasis};
    use crate::sparse::C64;

    #[test]
    fn fock_dimensions() {
        assert_eq!(FullFockBasis::new(4, 3).unwrap().dim(), 56);
        assert_eq!(FullFockBasis::new(3, 0).unwrap().dim(), 1);
        assert_eq!(FullFockBasis::new(2, 4).unwrap().dim(), 1);
        let b = FullFockBasis::new(5, 4).unwrap();
        for w in b.states().windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn canonical_anticommutators() {
        let sites = 3;
        let b = FullFockBasis::new(sites, 2).unwrap();
        let lower = FullFockBasis::new(sites, 1).unwrap();
        let upper = FullFockBasis::new(sites, 3).unwrap();
        for x in 0..sites {
            for y in 0..sites {
                for s in SPINS {
                    for t in SPINS {
                        // c_{xs} c*_{yt} + c*_{yt} c_{xs} on the N sector
                        let create_y = build_fermion_op(&b, FermionOp::Create, y, t).unwrap();
                        let ann_x_up = build_fermion_op(&upper, FermionOp::Annihilate, x, s).unwrap();
                        let ann_x = build_fermion_op(&b, FermionOp::Annihilate, x, s).unwrap();
                        let create_y_low = build_fermion_op(&lower, FermionOp::Create, y, t).unwrap();
                        let anti = ann_x_up.matmul(&create_y).add(&create_y_low.matmul(&ann_x));
                        let expected = if x == y && s == t {
                            SparseMatrix::identity(b.dim())
                        } else {
                            SparseMatrix::zeros(b.dim(), b.dim())
                        };
                        assert!(anti.sub(&expected).max_abs() < 1e-12, "x={x} y={y} s={s:?} t={t:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn pauli_exclusion_and_number() {
        let b = FullFockBasis::new(3, 2).unwrap();
        let mid = FullFockBasis::new(3, 1).unwrap();
        let c1 = build_fermion_op(&b, FermionOp::Annihilate, 1, Spin::Down).unwrap();
        let c2 = build_fermion_op(&mid, FermionOp::Annihilate, 1, Spin::Down).unwrap();
        assert_eq!(c2.matmul(&c1).nnz(), 0);
        let n = build_fermion_op(&b, FermionOp::Number, 2, Spin::Up).unwrap();
        for (r, c, v) in n.triplets() {
            assert_eq!(r, c);
            assert_eq!(v, C64::new(1.0, 0.0));
        }
        // n = c* c
        let up = FullFockBasis::new(3, 1).unwrap();
        let cc = build_fermion_op(&up, FermionOp::Create, 2, Spin::Up)
            .unwrap()
            .matmul(&build_fermion_op(&b, FermionOp::Annihilate, 2, Spin::Up).unwrap());
        assert!(cc.sub(&n).max_abs() < 1e-15);
    }

    #[test]
    fn gutzwiller_projection() {
        let b = FullFockBasis::single_hole(4).unwrap();
        let p = build_gutzwiller(&b);
        assert!(p.matmul(&p).sub(&p).max_abs() == 0.0);
        assert!(p.sub(&p.adjoint()).max_abs() == 0.0);
        let rank = p.diagonal_values().iter().filter(|v| v.re == 1.0).count();
        // brute count of words with 3 electrons and no double occupancy
        let brute = (0u64..256).filter(|w| w.count_ones() == 3 && (w & 0xF) & (w >> 4) == 0).count();
        assert_eq!(rank, brute);
        assert_eq!(rank, 4 * 8);
        let pair = FullFockBasis::single_hole(2).unwrap();
        assert_eq!(build_gutzwiller(&pair), SparseMatrix::identity(pair.dim()));
    }

    #[test]
    fn su2_algebra() {
        let b = FullFockBasis::single_hole(4).unwrap();
        let ops = build_spin_ops(&b);
        let comm = ops.s_plus.commutator(&ops.s_minus);
        assert!(comm.sub(&ops.s3.scale_real(2.0)).max_abs() < 1e-12);
        assert!(ops.stot2.commutator(&ops.s3).max_abs() < 1e-12);
        let p = build_gutzwiller(&b);
        for op in [&ops.s3, &ops.s_plus, &ops.s_minus, &ops.stot2] {
            assert!(p.commutator(op).max_abs() < 1e-12);
        }
    }

    #[test]
    fn fully_polarized_state_has_maximal_spin() {
        let sites = 4;
        let b = FullFockBasis::single_hole(sites).unwrap();
        let ops = build_spin_ops(&b);
        let sector = SectorBasis::new(sites, Magnetization::max_for(sites)).unwrap();
        let emb = sector_embedding(&b, &sector).unwrap();
        let s = (sites - 1) as f64 / 2.0;
        for j in 0..sector.dim() {
            let v = nalgebra::DVector::from_iterator(b.dim(), (0..b.dim()).map(|i| emb.get(i, j)));
            let w = ops.stot2.mul_vec(&v);
            assert!((w - v.scale(s * (s + 1.0))).norm() < 1e-12);
        }
    }

    #[test]
    fn embedding_is_an_isometry() {
        for sites in 2..=5 {
            let b = FullFockBasis::single_hole(sites).unwrap();
            for m in Magnetization::all(sites) {
                let sector = SectorBasis::new(sites, m).unwrap();
                let e = sector_embedding(&b, &sector).unwrap();
                let g = e.adjoint().matmul(&e);
                assert!(g.sub(&SparseMatrix::identity(sector.dim())).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn boson_ops() {
        let b = BosonBasis::new(2, 3).unwrap();
        assert_eq!(b.dim(), 16);
        let a0 = build_boson_op(&b, BosonOp::Annihilate, 0).unwrap();
        let c0 = build_boson_op(&b, BosonOp::Create, 0).unwrap();
        let comm = a0.commutator(&c0);
        for i in 0..b.dim() {
            let expected = if b.occupation(i, 0) < 3 { 1.0 } else { -3.0 };
            assert!((comm.get(i, i).re - expected).abs() < 1e-12);
        }
        let nb = build_boson_op(&b, BosonOp::NumberTotal, 0).unwrap();
        for i in 0..b.dim() {
            assert_eq!(nb.get(i, i).re, b.total_occupation(i) as f64);
        }
        // vacuum is index 0
        let vac = nalgebra::DVector::from_fn(b.dim(), |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(a0.mul_vec(&vac).norm(), 0.0);
        let n0 = boson_number(&b, 0).unwrap();
        assert!(c0.matmul(&a0).sub(&n0).max_abs() < 1e-12);
    }
}
