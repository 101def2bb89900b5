use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::eigen::eig_lowest;
use crate::error::{Error, Result};
use crate::hamiltonian::assemble_hubbard_full;
use crate::model::LatticeModel;
use crate::sparse::{check_budget, SparseMatrix, C64};

const NORM_RTOL: f64 = 1e-8;
const NORM_MAX_ITER: usize = 100_000;

/// Largest singular value, by power iteration on `A* A`.
pub fn operator_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut x = DVector::from_fn(a.ncols(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    x.unscale_mut(x.norm());
    let ah = a.adjoint();
    let mut est = 0.0;
    let mut calm = 0;
    for _ in 0..NORM_MAX_ITER {
        let y = a * &x;
        let next = y.norm();
        let z = &ah * y;
        let zn = z.norm();
        if zn == 0.0 {
            return next;
        }
        x = z.unscale(zn);
        // Estimates increase monotonically towards the top singular value.
        if (next - est).abs() <= 0.01 * NORM_RTOL * next {
            calm += 1;
            if calm >= 3 {
                return next;
            }
        } else {
            calm = 0;
        }
        est = next;
    }
    est
}

/// Dense pieces shared by every point of a U sweep.
struct Setup {
    h0: DMatrix<C64>,
    doubles: Vec<f64>,
    r_inf: DMatrix<C64>,
    z: C64,
}

struct Split {
    h0: SparseMatrix,
    doubles: Vec<f64>,
    keep: Vec<usize>,
    outside: Vec<usize>,
}

fn split(model: &LatticeModel) -> Result<Split> {
    let h0 = assemble_hubbard_full(model, 0.0)?;
    let d = assemble_hubbard_full(model, 1.0)?.sub(&h0);
    let mut doubles = vec![0.0; h0.dim()];
    for (r, c, v) in d.triplets() {
        if r != c {
            return Err(Error::Inconsistent("on-site term is not diagonal".into()));
        }
        doubles[r] = v.re;
    }
    let keep = (0..h0.dim()).filter(|&i| doubles[i] == 0.0).collect();
    let outside = (0..h0.dim()).filter(|&i| doubles[i] != 0.0).collect();
    Ok(Split { h0, doubles, keep, outside })
}

fn projected_dense(s: &Split) -> DMatrix<C64> {
    s.h0.submatrix(&s.keep, &s.keep).to_dense()
}

/// `z = 2i (1 + ||H_inf||)`.
pub fn default_z(model: &LatticeModel) -> Result<C64> {
    let s = split(model)?;
    Ok(C64::new(0.0, 2.0 * (1.0 + operator_norm(&projected_dense(&s)))))
}

impl Setup {
    fn new(model: &LatticeModel, z: Option<C64>) -> Result<Self> {
        let s = split(model)?;
        check_budget(s.h0.dim())?;
        let h_inf = projected_dense(&s);
        let z = z.unwrap_or_else(|| C64::new(0.0, 2.0 * (1.0 + operator_norm(&h_inf))));
        if z.im == 0.0 {
            return Err(Error::InvalidInput("z must be off the real axis".into()));
        }
        let k = s.keep.len();
        let inv = (h_inf - DMatrix::<C64>::identity(k, k) * z)
            .try_inverse()
            .ok_or_else(|| Error::Inconsistent("H_inf - z is singular".into()))?;
        let n = s.h0.dim();
        let mut r_inf = DMatrix::<C64>::zeros(n, n);
        for (a, &i) in s.keep.iter().enumerate() {
            for (b, &j) in s.keep.iter().enumerate() {
                r_inf[(i, j)] = inv[(a, b)];
            }
        }
        Ok(Setup { h0: s.h0.to_dense(), doubles: s.doubles, r_inf, z })
    }

    fn gap(&self, u: f64) -> Result<f64> {
        let n = self.h0.nrows();
        let mut h = self.h0.clone();
        for i in 0..n {
            h[(i, i)] += C64::new(u * self.doubles[i], 0.0) - self.z;
        }
        let r = h.try_inverse().ok_or_else(|| Error::Inconsistent(format!("H_U - z is singular at U = {u}")))?;
        Ok(operator_norm(&(r - &self.r_inf)))
    }
}

/// `||(H_U - z)^{-1} - (H_inf - z)^{-1} P||` on the full single-hole space.
/// `z = None` uses `2i (1 + ||H_inf||)`.
pub fn resolvent_gap(model: &LatticeModel, u: f64, z: Option<C64>) -> Result<f64> {
    check_u(u)?;
    Setup::new(model, z)?.gap(u)
}

fn check_u(u: f64) -> Result<()> {
    if !u.is_finite() || u < 0.0 {
        return Err(Error::InvalidInput(format!("U must be finite and nonnegative, got {u}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventPoint {
    pub u: f64,
    pub delta: f64,
    pub delta_times_u: f64,
}

/// `resolvent_gap` over a list of U values, in input order.
pub fn u_sweep(model: &LatticeModel, us: &[f64], z: Option<C64>) -> Result<(C64, Vec<ResolventPoint>)> {
    for &u in us {
        check_u(u)?;
    }
    let setup = Setup::new(model, z)?;
    let points = us
        .par_iter()
        .map(|&u| {
            let delta = setup.gap(u)?;
            Ok(ResolventPoint { u, delta, delta_times_u: delta * u })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((setup.z, points))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySplit {
    pub u: f64,
    /// Bottom of `P' H P'` on the range of `P' = 1 - P`; absent when that range is empty.
    pub e_h1: Option<f64>,
    /// Bottom of the same block at U = 0.
    pub c: Option<f64>,
    pub bound_ok: bool,
}

/// Checks `E(H_1) >= C + U` for the block of `H_U` on doubly occupied states.
pub fn energy_split_bound(model: &LatticeModel, u: f64) -> Result<EnergySplit> {
    check_u(u)?;
    let s = split(model)?;
    if s.outside.is_empty() {
        return Ok(EnergySplit { u, e_h1: None, c: None, bound_ok: true });
    }
    let h1_at = |uu: f64| -> Result<f64> {
        let shifted = s.h0.add(&SparseMatrix::diagonal(&s.doubles.iter().map(|d| d * uu).collect::<Vec<_>>()));
        let block = shifted.submatrix(&s.outside, &s.outside).into_hermitian()?;
        Ok(eig_lowest(&block, 1)?.values[0])
    };
    let c = h1_at(0.0)?;
    let e = h1_at(u)?;
    let tol = 1e-9 * (1.0 + (c + u).abs());
    Ok(EnergySplit { u, e_h1: Some(e), c: Some(c), bound_ok: e >= c + u - tol })
}
