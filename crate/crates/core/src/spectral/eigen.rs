use nalgebra::{ComplexField, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, C64};

/// Largest dimension handled by dense diagonalization.
pub const DENSE_LIMIT: usize = 2048;

/// Required eigenpair residual `||Hv - lv|| / (1 + |l|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

const KRYLOV_DIM: usize = 120;
const KEEP: usize = 30;
const MAX_RESTARTS: usize = 2000;
const SEED: u64 = 0x006e_6167_616f_6b61;

/// Lowest eigenpairs in ascending order with unit-norm eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<C64>>,
    pub residuals: Vec<f64>,
}

impl Eigenpairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn residual(h: &SparseMatrix, lambda: f64, v: &DVector<C64>) -> f64 {
    let hv = h.mul_vec(v);
    (hv - v * C64::new(lambda, 0.0)).norm()
}

/// The `k` lowest eigenpairs of a Hermitian matrix.
pub fn eig_lowest(h: &SparseMatrix, k: usize) -> Result<Eigenpairs> {
    let dim = h.dim();
    if !h.is_square() {
        return Err(Error::InvalidInput("eigenproblem needs a square matrix".into()));
    }
    if k > dim {
        return Err(Error::InvalidInput(format!("asked for {k} eigenpairs of a {dim}-dimensional matrix")));
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::InvalidInput(format!("matrix is not Hermitian (deviation {:e})", h.hermitian_deviation())));
    }
    let pairs = if dim <= DENSE_LIMIT { dense_lowest(h, k) } else { lanczos_lowest(h, k)? };
    for (i, &r) in pairs.residuals.iter().enumerate() {
        if r > RESIDUAL_TOL * (1.0 + pairs.values[i].abs()) {
            return Err(Error::NoConvergence { residual: r, iterations: 0 });
        }
    }
    Ok(pairs)
}

fn dense_lowest(h: &SparseMatrix, k: usize) -> Eigenpairs {
    let (values, vectors): (Vec<f64>, Vec<DVector<C64>>) = if h.is_real() {
        let eig = nalgebra::SymmetricEigen::new(h.to_dense_real());
        let mut order: Vec<usize> = (0..h.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order
            .into_iter()
            .take(k)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).map(|x| C64::new(x, 0.0))))
            .unzip()
    } else {
        let eig = nalgebra::SymmetricEigen::new(h.to_dense());
        let mut order: Vec<usize> = (0..h.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order.into_iter().take(k).map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())).unzip()
    };
    let residuals = values.iter().zip(&vectors).map(|(&l, v)| residual(h, l, v)).collect();
    Eigenpairs { values, vectors, residuals }
}

trait Scalar: ComplexField<RealField = f64> + Copy {
    fn random(rng: &mut ChaCha8Rng) -> Self;
    fn to_c64(self) -> C64;
}

impl Scalar for f64 {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        rng.random_range(-1.0..1.0)
    }

    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
}

impl Scalar for C64 {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    fn to_c64(self) -> C64 {
        self
    }
}

fn lanczos_lowest(h: &SparseMatrix, k: usize) -> Result<Eigenpairs> {
    let found = if h.is_real() {
        let apply = |x: &DVector<f64>| {
            let mut y = DVector::zeros(x.len());
            h.mul_real_vec_into(x.as_slice(), y.as_mut_slice());
            y
        };
        lanczos(h.dim(), k, apply)?.into_iter().map(|(l, v)| (l, v.map(Scalar::to_c64))).collect::<Vec<_>>()
    } else {
        lanczos(h.dim(), k, |x: &DVector<C64>| h.mul_vec(x))?
    };
    let (values, vectors): (Vec<f64>, Vec<DVector<C64>>) = found.into_iter().unzip();
    let residuals = values.iter().zip(&vectors).map(|(&l, v)| residual(h, l, v)).collect();
    Ok(Eigenpairs { values, vectors, residuals })
}

/// Remove components along `basis` (twice, for stability) and return the remaining norm.
fn orthogonalize<T: Scalar>(v: &mut DVector<T>, basis: &[DVector<T>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(v);
            v.axpy(-c, b, T::one());
        }
    }
    v.norm()
}

/// Eigenpairs found one at a time: each run converges the lowest eigenpair
/// of `H` restricted to the complement of those already locked, so repeated
/// eigenvalues are found with their multiplicity.
fn lanczos<T: Scalar>(
    dim: usize,
    k: usize,
    apply: impl Fn(&DVector<T>) -> DVector<T>,
) -> Result<Vec<(f64, DVector<T>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut locked: Vec<DVector<T>> = Vec::new();
    let mut out = Vec::new();
    let mut hint: Option<DVector<T>> = None;

    for _ in 0..k {
        let mut start = DVector::from_fn(dim, |_, _| T::random(&mut rng));
        if let Some(h) = &hint {
            start.axpy(T::one(), h, T::from_real(0.1));
        }
        let norm = orthogonalize(&mut start, &locked);
        start.unscale_mut(norm);

        let (lambda, vec, next) = lanczos_run(dim, &apply, &locked, start)?;
        locked.push(vec.clone());
        out.push((lambda, vec));
        hint = next;
    }
    Ok(out)
}

/// Thick-restart Lanczos for the lowest eigenpair on the complement of `locked`.
/// Returns the pair and the next Ritz vector as a hint for the following run.
#[allow(clippy::type_complexity)]
fn lanczos_run<T: Scalar>(
    dim: usize,
    apply: &impl Fn(&DVector<T>) -> DVector<T>,
    locked: &[DVector<T>],
    start: DVector<T>,
) -> Result<(f64, DVector<T>, Option<DVector<T>>)> {
    let room = dim - locked.len();
    let m_max = KRYLOV_DIM.min(room);
    let mut v: Vec<DVector<T>> = vec![start];
    let mut w: Vec<DVector<T>> = vec![project_out(apply(&v[0]), locked)];
    let mut best_res = f64::INFINITY;

    for restart in 0..MAX_RESTARTS {
        // Expand the space from the newest vector.
        while v.len() < m_max {
            let mut r = w.last().expect("nonempty").clone();
            let scale = r.norm().max(1.0);
            orthogonalize(&mut r, locked);
            let norm = orthogonalize(&mut r, &v);
            if norm <= 1e-13 * scale {
                break;
            }
            r.unscale_mut(norm);
            w.push(project_out(apply(&r), locked));
            v.push(r);
        }

        // Rayleigh-Ritz on the current space.
        let m = v.len();
        let g = DMatrix::from_fn(m, m, |i, j| v[i].dotc(&w[j]));
        let g = (&g + g.adjoint()).unscale(2.0);
        let eig = nalgebra::SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let combine = |basis: &[DVector<T>], col: usize| {
            let mut acc = DVector::<T>::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                acc.axpy(eig.eigenvectors[(i, col)], b, T::one());
            }
            acc
        };
        let theta = eig.eigenvalues[order[0]];
        let u = combine(&v, order[0]);
        let hu = combine(&w, order[0]);
        let mut res_vec = &hu - &u * T::from_real(theta);
        let res = res_vec.norm();
        best_res = best_res.min(res);
        let exhausted = m == room;
        if res <= 0.1 * RESIDUAL_TOL * (1.0 + theta.abs()) || exhausted {
            let norm = u.norm();
            let hint = (m > 1).then(|| combine(&v, order[1]));
            return Ok((theta, u.unscale(norm), hint));
        }
        if m < m_max {
            // Invariant subspace without convergence: continue from a fresh direction.
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ (restart as u64 + 1));
            res_vec = DVector::from_fn(dim, |_, _| T::random(&mut rng));
        }

        // Keep the lowest Ritz vectors and continue from the residual direction.
        let keep = KEEP.min(m.saturating_sub(1)).max(1);
        let new_v: Vec<DVector<T>> = order[..keep].iter().map(|&c| combine(&v, c)).collect();
        let new_w: Vec<DVector<T>> = order[..keep].iter().map(|&c| combine(&w, c)).collect();
        v = new_v;
        w = new_w;
        orthogonalize(&mut res_vec, locked);
        let norm = orthogonalize(&mut res_vec, &v);
        if norm > 1e-300 {
            res_vec.unscale_mut(norm);
            w.push(project_out(apply(&res_vec), locked));
            v.push(res_vec);
        }
    }
    Err(Error::NoConvergence { residual: best_res, iterations: MAX_RESTARTS })
}

/// `(1 - Q Q*) x` for the locked set `Q`.
fn project_out<T: Scalar>(mut x: DVector<T>, locked: &[DVector<T>]) -> DVector<T> {
    orthogonalize(&mut x, locked);
    x
}
