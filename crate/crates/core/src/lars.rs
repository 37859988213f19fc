//! Exact Lasso regularization path via least angle regression with the lasso
//! modification.
//!
//! The objective is `‖y − Xβ‖² + λ‖β‖₁`. Along the path the coefficients are
//! affine in λ between knots, and so is their ℓ1 norm, which lets the path be
//! evaluated at any fraction `s = ‖β‖₁ / ‖β_end‖₁` by linear interpolation.
//!
//! Internally the homotopy runs on `γ = λ/2`, the common absolute correlation
//! `|Xⱼᵀ(y − Xβ)|` of the active variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{l1_norm, Coefficients, DesignMatrix, ResponseVector};

/// Two event times closer than this (relative to the starting λ) are a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// Residual norm (relative to ‖y‖) at which the fit counts as interpolating.
const INTERPOLATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PathKnot {
    pub lambda: f64,
    pub beta: Coefficients,
    pub l1: f64,
    /// Active set after the event at this knot, in order of entry.
    pub active_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    knots: Vec<PathKnot>,
}

impl LassoPath {
    pub fn knots(&self) -> &[PathKnot] {
        &self.knots
    }

    pub fn n_variables(&self) -> usize {
        self.knots[0].beta.len()
    }

    /// ℓ1 norm at the end of the path (the least-squares fit it reaches).
    pub fn terminal_l1(&self) -> f64 {
        self.terminal().l1
    }

    pub fn terminal(&self) -> &PathKnot {
        self.knots.last().expect("path has at least one knot")
    }

    /// Coefficients whose ℓ1 norm is `s · terminal_l1`.
    pub fn coef_at_fraction(&self, s: f64) -> Result<Coefficients> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::FractionOutOfRange(s));
        }
        if s == 1.0 {
            return Ok(self.terminal().beta.clone());
        }
        Ok(self.coef_at_l1(s * self.terminal_l1()))
    }

    /// Coefficients on the path with the given ℓ1 norm, clamped to the path's
    /// range.
    pub fn coef_at_l1(&self, budget: f64) -> Coefficients {
        let budget = budget.max(0.0);
        if budget == 0.0 {
            return Coefficients::zeros(self.n_variables());
        }
        if budget >= self.terminal_l1() {
            return self.terminal().beta.clone();
        }
        // first knot with l1 > budget; knots[0].l1 = 0 < budget
        let upper = self.knots.partition_point(|k| k.l1 <= budget);
        let (lo, hi) = (&self.knots[upper - 1], &self.knots[upper]);
        let w = (budget - lo.l1) / (hi.l1 - lo.l1);
        interpolate(lo, hi, w)
    }

    /// Coefficients at penalty level λ.
    pub fn coef_at_lambda(&self, lambda: f64) -> Coefficients {
        let first = &self.knots[0];
        if lambda >= first.lambda {
            return first.beta.clone();
        }
        let terminal = self.terminal();
        if lambda <= terminal.lambda {
            return terminal.beta.clone();
        }
        let upper = self.knots.partition_point(|k| k.lambda > lambda);
        let (lo, hi) = (&self.knots[upper - 1], &self.knots[upper]);
        let w = (lo.lambda - lambda) / (lo.lambda - hi.lambda);
        interpolate(lo, hi, w)
    }

    /// Penalty level at which the path has the given ℓ1 norm.
    pub fn lambda_at_l1(&self, budget: f64) -> f64 {
        if budget <= 0.0 {
            return self.knots[0].lambda;
        }
        if budget >= self.terminal_l1() {
            return self.terminal().lambda;
        }
        let upper = self.knots.partition_point(|k| k.l1 <= budget);
        let (lo, hi) = (&self.knots[upper - 1], &self.knots[upper]);
        let w = (budget - lo.l1) / (hi.l1 - lo.l1);
        lo.lambda + w * (hi.lambda - lo.lambda)
    }
}

fn interpolate(lo: &PathKnot, hi: &PathKnot, w: f64) -> Coefficients {
    Coefficients::new(lo.beta.beta() * (1.0 - w) + hi.beta.beta() * w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    Join(usize),
    Drop(usize),
    Terminal,
}

/// Earliest event; ties resolve toward the lowest variable index, and an event
/// coinciding with the end of the path (γ = 0) is superseded by termination.
fn next_event(candidates: &[(f64, Event)], gamma: f64, tie: f64) -> (f64, Event) {
    let earliest = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    if earliest >= gamma - tie {
        return (gamma, Event::Terminal);
    }
    let variable = |e: &Event| match *e {
        Event::Join(j) | Event::Drop(j) => j,
        Event::Terminal => usize::MAX,
    };
    let (t, event) = candidates
        .iter()
        .filter(|c| c.0 <= earliest + tie)
        .min_by_key(|c| variable(&c.1))
        .copied()
        .expect("at least one candidate");
    (t.max(0.0), event)
}

/// Computes the full Lasso path for centered and scaled data.
pub fn lars_path(x: &DesignMatrix, y: &ResponseVector) -> Result<LassoPath> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} rows in X but {} responses",
            y.len()
        )));
    }
    if n < 2 || p == 0 {
        return Err(Error::DimensionMismatch(format!(
            "need n >= 2 and p >= 1, got n={n}, p={p}"
        )));
    }

    let xv = x.values();
    let yv = y.values();
    let gram = xv.tr_mul(xv);
    let xty = xv.tr_mul(yv);
    let y_norm = yv.norm();

    let rank_bound = (n - 1).min(p);
    let max_steps = 8 * n.min(p);

    let mut beta = DVector::<f64>::zeros(p);
    let mut corr = xty.clone();
    let mut gamma = corr.amax();

    if gamma == 0.0 || y_norm == 0.0 {
        return Ok(LassoPath {
            knots: vec![PathKnot {
                lambda: 0.0,
                beta: Coefficients::zeros(p),
                l1: 0.0,
                active_set: Vec::new(),
            }],
        });
    }

    let scale = gamma;
    let tie = TIE_TOLERANCE * scale;

    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut is_active = vec![false; p];

    let first = lowest_index_argmax(&corr, tie);
    active.push(first);
    signs.push(corr[first].signum());
    is_active[first] = true;

    let mut knots = vec![PathKnot {
        lambda: 2.0 * gamma,
        beta: Coefficients::zeros(p),
        l1: 0.0,
        active_set: active.clone(),
    }];

    let mut just_dropped: Option<usize> = None;
    let mut stalled_steps = 0usize;
    let mut steps = 0usize;

    loop {
        steps += 1;
        if steps > max_steps {
            return Err(Error::DegeneratePath(format!(
                "exceeded {max_steps} steps"
            )));
        }

        let direction = equiangular_direction(&gram, &active, &signs)?;
        // a_j = Xⱼᵀ X_A d: rate at which each correlation falls per unit of t
        let mut slope = DVector::<f64>::zeros(p);
        for (k, &i) in active.iter().enumerate() {
            slope.axpy(direction[k], &gram.column(i), 1.0);
        }

        let mut candidates: Vec<(f64, Event)> = Vec::new();
        if active.len() < rank_bound {
            for j in 0..p {
                if is_active[j] {
                    continue;
                }
                let (c, a) = (corr[j], slope[j]);
                // a just-dropped variable sits at |c| = γ on its old side and
                // can only re-enter through the opposite boundary
                let (upper, lower) = match just_dropped {
                    Some(d) if d == j => (c < 0.0, c > 0.0),
                    _ => (true, true),
                };
                let mut t_join = f64::INFINITY;
                if upper && 1.0 - a > f64::EPSILON {
                    t_join = t_join.min((gamma - c).max(0.0) / (1.0 - a));
                }
                if lower && 1.0 + a > f64::EPSILON {
                    t_join = t_join.min((gamma + c).max(0.0) / (1.0 + a));
                }
                if t_join.is_finite() {
                    candidates.push((t_join, Event::Join(j)));
                }
            }
        }
        for (k, &i) in active.iter().enumerate() {
            let (b, d) = (beta[i], direction[k]);
            if b != 0.0 && d != 0.0 && b.signum() != d.signum() {
                candidates.push((-b / d, Event::Drop(i)));
            }
        }
        let (best_t, best_event) = next_event(&candidates, gamma, tie);

        let t = best_t;
        for (k, &i) in active.iter().enumerate() {
            beta[i] += t * direction[k];
        }
        gamma -= t;
        just_dropped = None;

        match best_event {
            Event::Terminal => gamma = 0.0,
            Event::Drop(i) => {
                let k = active.iter().position(|&v| v == i).expect("dropped variable is active");
                active.remove(k);
                signs.remove(k);
                is_active[i] = false;
                beta[i] = 0.0;
                just_dropped = Some(i);
            }
            Event::Join(_) => {}
        }

        // c = Xᵀy − Gβ
        corr.copy_from(&xty);
        for &i in &active {
            corr.axpy(-beta[i], &gram.column(i), 1.0);
        }

        if let Event::Join(j) = best_event {
            active.push(j);
            signs.push(if corr[j] >= 0.0 { 1.0 } else { -1.0 });
            is_active[j] = true;
        }

        let residual_norm = (yv - xv * &beta).norm();
        let interpolating = residual_norm <= INTERPOLATION_TOLERANCE * y_norm;
        if interpolating {
            gamma = 0.0;
        }
        let finished = best_event == Event::Terminal || interpolating;

        let coefficients = Coefficients::new(beta.clone());
        let l1 = l1_norm(&coefficients);
        if t <= tie && !finished {
            stalled_steps += 1;
            if stalled_steps > p {
                return Err(Error::DegeneratePath(
                    "tie-break cycle without progress".into(),
                ));
            }
            let last = knots.last_mut().expect("knots nonempty");
            last.active_set = active.clone();
        } else {
            stalled_steps = 0;
            let knot = PathKnot {
                lambda: 2.0 * gamma,
                beta: coefficients,
                l1,
                active_set: active.clone(),
            };
            let last = knots.last_mut().expect("knots nonempty");
            if l1 <= last.l1 {
                // zero-length step at the very end of the path
                *last = PathKnot {
                    lambda: knot.lambda,
                    active_set: knot.active_set,
                    ..last.clone()
                };
            } else {
                knots.push(knot);
            }
        }

        if finished {
            break;
        }
    }

    Ok(LassoPath { knots })
}

fn lowest_index_argmax(v: &DVector<f64>, tie: f64) -> usize {
    let max = v.amax();
    v.iter()
        .position(|c| c.abs() >= max - tie)
        .expect("nonempty vector")
}

/// Solves `G_AA d = s_A` for the equiangular direction of the active set.
fn equiangular_direction(gram: &DMatrix<f64>, active: &[usize], signs: &[f64]) -> Result<DVector<f64>> {
    let k = active.len();
    let sub = DMatrix::from_fn(k, k, |r, c| gram[(active[r], active[c])]);
    let rhs = DVector::from_column_slice(signs);
    let chol = sub.cholesky().ok_or_else(|| {
        Error::DegeneratePath(format!("active Gram matrix of size {k} is singular"))
    })?;
    let d = chol.solve(&rhs);
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegeneratePath("non-finite direction".into()));
    }
    Ok(d)
}

/// Largest violation of the optimality conditions of `‖y − Xβ‖² + λ‖β‖₁`.
pub fn kkt_residual(x: &DesignMatrix, y: &ResponseVector, beta: &Coefficients, lambda: f64) -> f64 {
    let residual = y.values() - x.values() * beta.beta();
    let gradient = x.values().tr_mul(&residual) * 2.0;
    gradient
        .iter()
        .zip(beta.beta().iter())
        .map(|(&g, &b)| {
            if b != 0.0 {
                (g - lambda * b.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}
