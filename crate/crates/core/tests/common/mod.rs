//! Test-only oracles that share no code path with the library solvers.
#![allow(dead_code)]

use lassopeak::linalg::{center_scale, DesignMatrix, ResponseVector};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random standardized instance; predictors and response uniform on [-1, 1].
pub fn random_instance(seed: u64, n: usize, p: usize) -> (DesignMatrix, ResponseVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    let y = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    center_scale(&x, &y).expect("continuous data has no constant column")
}

pub fn random_matrix(seed: u64, n: usize, p: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0))
}

/// Twenty shapes with n, p <= 12 covering n < p, n = p and n > p.
pub fn oracle_shapes() -> Vec<(usize, usize)> {
    vec![
        (4, 8), (5, 12), (6, 9), (7, 11), (3, 6), (8, 10), (10, 12),
        (5, 5), (8, 8), (12, 12), (6, 6), (10, 10),
        (12, 4), (9, 3), (11, 7), (12, 9), (7, 5), (10, 2), (8, 6), (12, 11),
    ]
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

fn largest_eigenvalue(gram: &DMatrix<f64>) -> f64 {
    let mut v = DVector::from_element(gram.ncols(), 1.0);
    let mut est = 0.0;
    for _ in 0..500 {
        let w = gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        est = norm / v.norm();
        v = w / norm;
    }
    est * 1.01
}

fn objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    (y - x * beta).norm_squared() + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Tries to certify optimality: solve the stationarity equations on the
/// support of `beta` and accept only if signs and the KKT bound hold.
fn polish(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let scale = beta.amax();
    let support: Vec<usize> = (0..beta.len()).filter(|&j| beta[j].abs() > 1e-9 * scale.max(1e-300)).collect();
    let p = beta.len();
    let mut candidate = DVector::zeros(p);
    if !support.is_empty() {
        let xs = DMatrix::from_fn(x.nrows(), support.len(), |i, k| x[(i, support[k])]);
        let signs = DVector::from_fn(support.len(), |k, _| beta[support[k]].signum());
        let rhs = xs.tr_mul(y) - signs.clone() * (lambda / 2.0);
        let solved = (xs.tr_mul(&xs)).lu().solve(&rhs)?;
        for (k, &j) in support.iter().enumerate() {
            if solved[k].signum() != signs[k] && lambda > 0.0 {
                return None;
            }
            candidate[j] = solved[k];
        }
    }
    let grad = x.tr_mul(&(y - x * &candidate)) * 2.0;
    let tol = 1e-9 * (1.0 + lambda);
    for j in 0..p {
        let ok = if candidate[j] != 0.0 {
            (grad[j] - lambda * candidate[j].signum()).abs() <= tol
        } else {
            grad[j].abs() <= lambda + tol
        };
        if !ok {
            return None;
        }
    }
    Some(candidate)
}

fn fista_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    start: DVector<f64>,
    lipschitz: f64,
    max_iter: usize,
) -> (DVector<f64>, bool) {
    let step = 1.0 / lipschitz;
    let mut beta = start.clone();
    let mut momentum = start;
    let mut t = 1.0f64;
    let mut last_obj = objective(x, y, &beta, lambda);
    for iter in 1..=max_iter {
        let grad = x.tr_mul(&(x * &momentum - y)) * 2.0;
        let next = (&momentum - grad * step).map(|v| soft_threshold(v, lambda * step));
        let obj = objective(x, y, &next, lambda);
        // adaptive restart on objective increase
        if obj > last_obj + 1e-14 * last_obj.abs() && t > 1.0 {
            t = 1.0;
            momentum = beta.clone();
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        momentum = &next + (&next - &beta) * ((t - 1.0) / t_next);
        let change = (&next - &beta).amax();
        beta = next;
        t = t_next;
        last_obj = obj;
        if iter % 50 == 0 || change < 1e-14 {
            if let Some(certified) = polish(x, y, &beta, lambda) {
                return (certified, true);
            }
        }
    }
    (beta, false)
}

/// Proximal-gradient (FISTA) solution of `‖y − Xβ‖² + λ‖β‖₁`, reached by
/// continuation from λ_max and certified by an exact KKT check. For λ = 0
/// with n ≤ p, the target is the λ → 0⁺ limit, approximated at 1e-10·λ_max.
pub fn proximal_gradient_lasso(x: &DesignMatrix, y: &ResponseVector, lambda: f64) -> (DVector<f64>, bool) {
    let xv = x.values();
    let yv = y.values();
    let lambda_max = (xv.tr_mul(yv) * 2.0).amax();
    let mut target = lambda;
    if target < 1e-10 * lambda_max && x.nrows() <= x.ncols() {
        target = 1e-10 * lambda_max;
    }
    let lipschitz = 2.0 * largest_eigenvalue(&xv.tr_mul(xv));
    let mut beta = DVector::zeros(x.ncols());
    if target >= lambda_max {
        return (beta, true);
    }
    let mut level = lambda_max;
    let mut certified;
    loop {
        level = (level * 0.6).max(target);
        if level < 1e-3 * lambda_max && target < level {
            level = (level * 0.1).max(target);
        }
        let (b, ok) = fista_from(xv, yv, level, beta, lipschitz, 200_000);
        beta = b;
        certified = ok;
        if level <= target {
            break;
        }
    }
    (beta, certified)
}

/// Soft-thresholded OLS coefficients; the exact Lasso solution when XᵀX is a
/// multiple of the identity.
pub fn soft_threshold_orthogonal(x: &DesignMatrix, y: &ResponseVector, lambda: f64) -> DVector<f64> {
    let xv = x.values();
    let col_sq = xv.column(0).norm_squared();
    let ols = xv.tr_mul(y.values()) / col_sq;
    ols.map(|b| soft_threshold(b, lambda / (2.0 * col_sq)))
}
