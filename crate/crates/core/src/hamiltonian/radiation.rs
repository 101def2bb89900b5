//! Electrons coupled to a quantized transverse field through Peierls phases
//! along straight bonds.
//!
//! The vector potential in the box of side `L` is
//! `A(r) = |V|^{-1/2} sum_{k,l} (2 w(k))^{-1/2} e(k,l) (e^{ik.r} a + e^{-ik.r} a*)`
//! and the phase on the bond `x -> y` is its line integral,
//! `phi_xy = |V|^{-1/2} sum (2w)^{-1/2} e.(y - x) (F_xy(k) a + conj(F_xy(k)) a*)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use super::hubbard::{sector_coulomb_diagonal, sector_hops};
use super::{expm_i_hermitian, kron_identity_left, require_infinite_u, Provenance, SectorHamiltonian};
use crate::error::{Error, Result};
use crate::manybody::{build_boson_op, BosonBasis, BosonOp};
use crate::model::{LatticeModel, RadiationParams};
use crate::sector::{Magnetization, SectorBasis};
use crate::sparse::{check_budget, tensor, SparseMatrix, C64};

/// Couplings below this magnitude count as zero when pruning modes.
const DECOUPLED_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonMode {
    /// `k = 2 pi n / L`.
    pub n: [i64; 3],
    /// Polarization label, 1 or 2.
    pub polarization: u8,
    pub k: [f64; 3],
    pub omega: f64,
    pub eps: [f64; 3],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn polarizations(k: [f64; 3]) -> [[f64; 3]; 2] {
    let perp = (k[0] * k[0] + k[1] * k[1]).sqrt();
    if perp == 0.0 {
        return [[0.0; 3]; 2];
    }
    let norm = dot(k, k).sqrt();
    let e1 = [k[1] / perp, -k[0] / perp, 0.0];
    let kh = [k[0] / norm, k[1] / norm, k[2] / norm];
    let e2 = [kh[1] * e1[2] - kh[2] * e1[1], kh[2] * e1[0] - kh[0] * e1[2], kh[0] * e1[1] - kh[1] * e1[0]];
    [e1, e2]
}

/// All modes with `|k| <= uv_cutoff` plus the two `k = 0` modes, in
/// lexicographic order of `(n_1, n_2, n_3, polarization)`.
pub fn photon_modes(params: &RadiationParams) -> Vec<PhotonMode> {
    let step = 2.0 * PI / params.box_length;
    let reach = (params.uv_cutoff / step).floor() as i64;
    let mut out = Vec::new();
    for n1 in -reach..=reach {
        for n2 in -reach..=reach {
            for n3 in -reach..=reach {
                let k = [n1 as f64 * step, n2 as f64 * step, n3 as f64 * step];
                let norm = dot(k, k).sqrt();
                if norm > params.uv_cutoff {
                    continue;
                }
                let omega = if norm == 0.0 { params.mass } else { norm };
                for (l, eps) in polarizations(k).into_iter().enumerate() {
                    out.push(PhotonMode { n: [n1, n2, n3], polarization: l as u8 + 1, k, omega, eps });
                }
            }
        }
    }
    out
}

/// Straight-line kernel `F_xy(k) = (e^{ik.y} - e^{ik.x}) / (i k.(y - x))`,
/// evaluated as `e^{i(k.x + th/2)} sinc(th/2)` with `th = k.(y - x)`.
pub fn peierls_kernel(x: [f64; 3], y: [f64; 3], k: [f64; 3]) -> Result<C64> {
    if x == y {
        return Err(Error::InvalidInput("Peierls kernel needs distinct endpoints".into()));
    }
    let theta = dot(k, sub(y, x));
    let half = theta / 2.0;
    let sinc = if half == 0.0 { 1.0 } else { half.sin() / half };
    Ok(C64::from_polar(sinc, dot(k, x) + half))
}

/// Riemann sum `sum_{j=1}^{N+1} N^{-1} e^{ik.(x + (j-1)(y-x)/N)}` approximating `F_xy(k)`.
pub fn riemann_kernel(x: [f64; 3], y: [f64; 3], k: [f64; 3], n: usize) -> Result<C64> {
    if x == y {
        return Err(Error::InvalidInput("Riemann kernel needs distinct endpoints".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("subdivision count must be at least 1".into()));
    }
    let d = sub(y, x);
    let nf = n as f64;
    Ok((0..=n)
        .map(|j| {
            let s = j as f64 / nf;
            C64::from_polar(1.0 / nf, dot(k, [x[0] + s * d[0], x[1] + s * d[1], x[2] + s * d[2]]))
        })
        .sum())
}

fn volume(params: &RadiationParams) -> f64 {
    params.box_length.powi(3)
}

/// Coefficient of `a` in `phi_xy`; `a*` carries the conjugate.
pub fn peierls_coefficient(mode: &PhotonMode, x: [f64; 3], y: [f64; 3], box_volume: f64) -> Result<C64> {
    let proj = dot(mode.eps, sub(y, x));
    Ok(peierls_kernel(x, y, mode.k)? * (proj / (2.0 * mode.omega * box_volume).sqrt()))
}

/// Modes kept in the truncated field: all modes, or only those coupling to
/// at least one bond when `prune_decoupled` is set.
pub fn coupled_modes(model: &LatticeModel) -> Result<Vec<PhotonMode>> {
    let rad = radiation(model)?;
    let modes = photon_modes(rad);
    if !rad.prune_decoupled {
        return Ok(modes);
    }
    let vol = volume(rad);
    let bonds = model.bonds();
    let mut kept = Vec::new();
    for mode in modes {
        let mut coupled = false;
        for &(x, y) in &bonds {
            if peierls_coefficient(&mode, rad.positions[x], rad.positions[y], vol)?.norm() > DECOUPLED_TOL {
                coupled = true;
                break;
            }
        }
        if coupled {
            kept.push(mode);
        }
    }
    Ok(kept)
}

fn radiation(model: &LatticeModel) -> Result<&RadiationParams> {
    model.radiation().ok_or_else(|| Error::InvalidInput("model has no [radiation] block".into()))
}

/// `sum_m c_m a_m + conj(c_m) a*_m` as a dense matrix on `bosons`.
fn field_from_coefficients(coeffs: &[C64], bosons: &BosonBasis) -> Result<DMatrix<C64>> {
    let dim = bosons.dim();
    let mut phi = DMatrix::<C64>::zeros(dim, dim);
    for (m, &c) in coeffs.iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let create = build_boson_op(bosons, BosonOp::Create, m)?;
        for (r, col, v) in create.triplets() {
            phi[(r, col)] += v * c.conj();
            phi[(col, r)] += v * c;
        }
    }
    Ok(phi)
}

/// Truncated field operator `phi_xy` over `modes` (Hermitian, dense).
pub fn peierls_field(
    params: &RadiationParams,
    modes: &[PhotonMode],
    bosons: &BosonBasis,
    x: usize,
    y: usize,
) -> Result<DMatrix<C64>> {
    let vol = volume(params);
    let coeffs = modes
        .iter()
        .map(|m| peierls_coefficient(m, params.positions[x], params.positions[y], vol))
        .collect::<Result<Vec<_>>>()?;
    field_from_coefficients(&coeffs, bosons)
}

/// Riemann-sum field operator: `phi_xy` with `F` replaced by its `N`-point sum.
pub fn riemann_peierls(model: &LatticeModel, x: usize, y: usize, n: usize, cutoff: usize) -> Result<DMatrix<C64>> {
    let rad = radiation(model)?;
    let modes = coupled_modes(model)?;
    let bosons = BosonBasis::new(modes.len(), cutoff)?;
    let (px, py) = (rad.positions[x], rad.positions[y]);
    let vol = volume(rad);
    let coeffs = modes
        .iter()
        .map(|m| {
            let proj = dot(m.eps, sub(py, px));
            Ok(riemann_kernel(px, py, m.k, n)? * (proj / (2.0 * m.omega * vol).sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    field_from_coefficients(&coeffs, &bosons)
}

/// Unweighted l2 distance between `F^N_xy` and `F_xy` over the kept modes.
pub fn riemann_kernel_error(model: &LatticeModel, x: usize, y: usize, n: usize) -> Result<f64> {
    let rad = radiation(model)?;
    let (px, py) = (rad.positions[x], rad.positions[y]);
    let mut acc = 0.0;
    for m in coupled_modes(model)? {
        acc += (riemann_kernel(px, py, m.k, n)? - peierls_kernel(px, py, m.k)?).norm_sqr();
    }
    Ok(acc.sqrt())
}

/// U = inf sector Hamiltonian with Peierls-dressed hopping
/// `-t_xy e^{i phi_xy}` and the free field `sum w N`.
pub fn assemble_radiation_sector(model: &LatticeModel, m: Magnetization, cutoff: usize) -> Result<SectorHamiltonian> {
    require_infinite_u(model)?;
    let rad = radiation(model)?;
    let basis = SectorBasis::new(model.sites(), m)?;
    let modes = coupled_modes(model)?;
    let bosons = BosonBasis::new(modes.len(), cutoff)?;
    let b_dim = bosons.dim();
    check_budget(basis.dim().saturating_mul(b_dim))?;

    let mut phases: HashMap<(usize, usize), SparseMatrix> = HashMap::new();
    let mut trips: Vec<(usize, usize, C64)> = Vec::new();
    for hop in sector_hops(model, &basis) {
        let key = (hop.from, hop.to);
        if let std::collections::hash_map::Entry::Vacant(e) = phases.entry(key) {
            let phi = peierls_field(rad, &modes, &bosons, hop.from, hop.to)?;
            e.insert(SparseMatrix::from_dense(&expm_i_hermitian(&phi, 1.0)));
        }
        for (r, c, v) in phases[&key].triplets() {
            trips.push((hop.row * b_dim + r, hop.col * b_dim + c, v * (-hop.t)));
        }
    }
    let dim = basis.dim() * b_dim;
    let diag = sector_coulomb_diagonal(model, &basis, model.offsite_u());
    let field: Vec<f64> = (0..b_dim)
        .map(|b| modes.iter().enumerate().map(|(k, md)| md.omega * bosons.occupation(b, k) as f64).sum())
        .collect();
    let matrix = SparseMatrix::from_triplets(dim, dim, trips)
        .add(&tensor(&SparseMatrix::diagonal(&diag), &SparseMatrix::identity(b_dim))?)
        .add(&kron_identity_left(basis.dim(), &SparseMatrix::diagonal(&field))?)
        .into_hermitian()?;
    Ok(SectorHamiltonian {
        basis,
        bosons: Some(bosons),
        matrix,
        provenance: Provenance::Radiation,
        dropped_constant: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;

    #[test]
    fn kernel_limits() {
        let x = [0.3, -0.2, 0.5];
        let y = [1.3, -0.2, 0.5];
        let perp = [0.0, 1.7, -0.4];
        let f = peierls_kernel(x, y, perp).unwrap();
        assert!((f - C64::from_polar(1.0, dot(perp, x))).norm() < 1e-15);
        assert_eq!(peierls_kernel(x, y, [0.0; 3]).unwrap(), C64::new(1.0, 0.0));
        assert!(peierls_kernel(x, x, perp).is_err());
        // closed form away from the removable singularity
        let k = [0.9, 0.1, -0.3];
        let th = dot(k, sub(y, x));
        let direct = (C64::from_polar(1.0, dot(k, y)) - C64::from_polar(1.0, dot(k, x))) / C64::new(0.0, th);
        assert!((peierls_kernel(x, y, k).unwrap() - direct).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn kernel_is_bounded(
            x in prop::array::uniform3(-5.0f64..5.0),
            d in prop::array::uniform3(-3.0f64..3.0),
            k in prop::array::uniform3(-20.0f64..20.0),
        ) {
            prop_assume!(dot(d, d) > 1e-6);
            let y = [x[0] + d[0], x[1] + d[1], x[2] + d[2]];
            prop_assert!(peierls_kernel(x, y, k).unwrap().norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn mode_set_and_polarizations() {
        let rad = RadiationParams::on_line(3, 4.0, 2.0, 1.0, 2);
        let modes = photon_modes(&rad);
        // |n| <= 1 with |2 pi n / 4| <= 2: the origin and the six axis points
        assert_eq!(modes.len(), 14);
        assert_eq!(modes[0].n, [-1, 0, 0]);
        let zero: Vec<_> = modes.iter().filter(|m| m.n == [0, 0, 0]).collect();
        assert_eq!(zero.len(), 2);
        assert!(zero.iter().all(|m| m.omega == 1.0 && m.eps == [0.0; 3]));
        for m in &modes {
            if m.k[0] != 0.0 || m.k[1] != 0.0 {
                assert!((dot(m.eps, m.eps) - 1.0).abs() < 1e-14);
                assert!(dot(m.eps, m.k).abs() < 1e-14);
            }
        }
        let small = RadiationParams::on_line(3, 4.0, 1.0, 1.0, 2);
        assert_eq!(photon_modes(&small).len(), 2);
    }

    #[test]
    fn pruning_keeps_two_modes_for_the_collinear_triangle() {
        let model = corpus::radiation_triangle(4.0, 2.0, 1.0, 2);
        let kept = coupled_modes(&model).unwrap();
        let ns: Vec<_> = kept.iter().map(|m| (m.n, m.polarization)).collect();
        assert_eq!(ns, vec![([0, -1, 0], 1), ([0, 1, 0], 1)]);
    }

    #[test]
    fn field_is_antisymmetric_in_orientation() {
        let model = corpus::radiation_planar_triangle(4.0, 2.0, 1.0, 2);
        let rad = model.radiation().unwrap();
        let modes = coupled_modes(&model).unwrap();
        let bosons = BosonBasis::new(modes.len(), 2).unwrap();
        let a = peierls_field(rad, &modes, &bosons, 0, 1).unwrap();
        let b = peierls_field(rad, &modes, &bosons, 1, 0).unwrap();
        assert!((&a + &b).norm() < 1e-14);
        assert!((&a - a.adjoint()).norm() < 1e-14);
        let u = expm_i_hermitian(&a, 1.0);
        assert!((u.adjoint() * &u - DMatrix::<C64>::identity(u.nrows(), u.nrows())).norm() < 1e-12);
    }

    #[test]
    fn riemann_error_halves() {
        let model = corpus::radiation_planar_triangle(4.0, 2.0, 1.0, 1);
        let mut last = riemann_kernel_error(&model, 0, 1, 8).unwrap();
        for n in [16, 32, 64, 128] {
            let e = riemann_kernel_error(&model, 0, 1, n).unwrap();
            let ratio = e / last;
            assert!((0.375..=0.625).contains(&ratio), "N={n}: {ratio}");
            last = e;
        }
        let a = riemann_peierls(&model, 0, 1, 4096, 1).unwrap();
        let rad = model.radiation().unwrap();
        let modes = coupled_modes(&model).unwrap();
        let phi = peierls_field(rad, &modes, &BosonBasis::new(modes.len(), 1).unwrap(), 0, 1).unwrap();
        assert!((expm_i_hermitian(&a, 1.0) - expm_i_hermitian(&phi, 1.0)).norm() < 1e-3);
    }

    #[test]
    fn radiation_sector_is_hermitian() {
        let model = corpus::radiation_planar_triangle(4.0, 2.0, 1.0, 1);
        let h = assemble_radiation_sector(&model, Magnetization::from_twice(0), 1).unwrap();
        assert!(h.matrix.is_hermitian(1e-12));
        assert_eq!(h.dim(), 6 * 16);
    }
}
