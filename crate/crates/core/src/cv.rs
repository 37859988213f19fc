//! K-fold cross-validation over a grid of Lasso fractions, and selection of
//! the fraction either directly (standard) or rescaled by the ratio of the
//! average fold least-squares ℓ1 norm to the full-data one (normalized).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lars::{lars_path, LassoPath};
use crate::linalg::{center_scale, l1_norm, ols_min_norm, Coefficients, DesignMatrix, ResponseVector};

/// Number of points in the default fraction grid `{0, 0.01, …, 1}`.
pub const DEFAULT_GRID_POINTS: usize = 101;

/// Which least-squares ℓ1 norm a fraction `s` is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// ℓ1 norm of the path's final (least-squares) fit.
    #[default]
    PathEndpoint,
    /// ℓ1 norm of the minimum-norm pseudo-inverse OLS solution.
    PinvOls,
}

impl Denominator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Denominator::PathEndpoint => "path_endpoint",
            Denominator::PinvOls => "pinv_ols",
        }
    }

    /// Reference ℓ1 norm for a fitted path on the given data.
    pub fn reference_l1(&self, path: &LassoPath, x: &DesignMatrix, y: &ResponseVector) -> Result<f64> {
        match self {
            Denominator::PathEndpoint => Ok(path.terminal_l1()),
            Denominator::PinvOls => Ok(l1_norm(&ols_min_norm(x, y)?)),
        }
    }
}

impl FromStr for Denominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path_endpoint" => Ok(Denominator::PathEndpoint),
            "pinv_ols" => Ok(Denominator::PinvOls),
            other => Err(Error::validation(
                "denominator_mode",
                format!("expected path_endpoint or pinv_ols, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Standard,
    Normalized,
}

impl Selector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Selector::Standard => "standard",
            Selector::Normalized => "normalized",
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Selector::Standard),
            "normalized" => Ok(Selector::Normalized),
            other => Err(Error::validation(
                "selector",
                format!("expected standard or normalized, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    pub fn new(fold_of: Vec<usize>, k: usize) -> Result<Self> {
        if k < 2 || k > fold_of.len() {
            return Err(Error::InvalidFoldCount { n: fold_of.len(), k });
        }
        if fold_of.iter().any(|&f| f >= k) {
            return Err(Error::InvalidFoldCount { n: fold_of.len(), k });
        }
        Ok(FoldAssignment { fold_of, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }

    /// (training rows, validation rows) for fold `fold`.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&i| self.fold_of[i] != fold)
    }
}

/// Random partition of `0..n` into `k` folds whose sizes differ by at most one.
pub fn kfold_split<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut fold_of = vec![0; n];
    for (position, &i) in order.iter().enumerate() {
        fold_of[i] = position % k;
    }
    Ok(FoldAssignment { fold_of, k })
}

/// `points` equally spaced fractions from 0 to 1 inclusive.
pub fn fraction_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| i as f64 / last).collect())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 || grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::InvalidGrid("grid must start at 0 and end at 1".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve {
    pub s_grid: Vec<f64>,
    pub mean_error: Vec<f64>,
    /// Reference ℓ1 norm of each fold's training fit.
    pub fold_ols_l1: Vec<f64>,
    pub denominator: Denominator,
}

impl CvCurve {
    pub fn mean_fold_ols_l1(&self) -> f64 {
        self.fold_ols_l1.iter().sum::<f64>() / self.fold_ols_l1.len() as f64
    }

    /// Grid index of the minimal mean error; ties go to the smaller fraction.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.mean_error.iter().enumerate() {
            if e < self.mean_error[best] {
                best = i;
            }
        }
        best
    }
}

fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

fn select_entries(y: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_fn(rows.len(), |i, _| y[rows[i]])
}

struct FoldResult {
    errors: Vec<f64>,
    reference_l1: f64,
}

fn evaluate_fold(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    folds: &FoldAssignment,
    fold: usize,
    s_grid: &[f64],
    denominator: Denominator,
) -> Result<FoldResult> {
    let (train, validation) = folds.split(fold);
    if train.len() < 2 {
        return Err(Error::FoldTooSmall { fold, train: train.len() });
    }
    let (train_x, train_y) = center_scale(&select_rows(x, &train), &select_entries(y, &train))?;
    let path = lars_path(&train_x, &train_y)?;
    let reference_l1 = denominator.reference_l1(&path, &train_x, &train_y)?;

    // validation rows mapped through the training split's statistics
    let val_x = train_x.transform(&select_rows(x, &validation))?;
    let val_y = select_entries(y, &validation);
    let errors = s_grid
        .iter()
        .map(|&s| {
            let beta = coef_at(&path, s, reference_l1)?;
            let predictions = (&val_x * beta.beta()).add_scalar(train_y.mean_offset());
            Ok((predictions - &val_y).norm_squared() / validation.len() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FoldResult { errors, reference_l1 })
}

fn coef_at(path: &LassoPath, s: f64, reference_l1: f64) -> Result<Coefficients> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::FractionOutOfRange(s));
    }
    if s == 1.0 || reference_l1 == path.terminal_l1() {
        return path.coef_at_fraction(s);
    }
    Ok(path.coef_at_l1(s * reference_l1))
}

/// Cross-validated mean squared error at every grid fraction. Each fold's
/// training split is standardized on its own; the validation split is mapped
/// through the training statistics.
pub fn cv_error_curve(
    x: &DesignMatrix,
    y: &ResponseVector,
    folds: &FoldAssignment,
    s_grid: &[f64],
) -> Result<CvCurve> {
    cv_error_curve_with(x, y, folds, s_grid, Denominator::PathEndpoint)
}

pub fn cv_error_curve_with(
    x: &DesignMatrix,
    y: &ResponseVector,
    folds: &FoldAssignment,
    s_grid: &[f64],
    denominator: Denominator,
) -> Result<CvCurve> {
    validate_grid(s_grid)?;
    if folds.len() != x.nrows() || y.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows, {} responses, {} fold labels",
            x.nrows(),
            y.len(),
            folds.len()
        )));
    }
    let results = (0..folds.k())
        .into_par_iter()
        .map(|f| evaluate_fold(x.values(), y.values(), folds, f, s_grid, denominator))
        .collect::<Result<Vec<_>>>()?;

    // summed in fold order so the result is independent of scheduling
    let k = results.len() as f64;
    let mut mean_error = vec![0.0; s_grid.len()];
    for r in &results {
        for (acc, e) in mean_error.iter_mut().zip(&r.errors) {
            *acc += e;
        }
    }
    for e in &mut mean_error {
        *e /= k;
    }
    Ok(CvCurve {
        s_grid: s_grid.to_vec(),
        mean_error,
        fold_ols_l1: results.iter().map(|r| r.reference_l1).collect(),
        denominator,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection {
    pub s_cv: f64,
    pub s_tilde: f64,
    pub mean_fold_ols_l1: f64,
    /// Full-data reference ℓ1 norm; known only to the normalized selector.
    pub full_ols_l1: Option<f64>,
    pub selector: Selector,
    pub denominator: Denominator,
}

impl CvSelection {
    /// The fraction the fitted model is evaluated at.
    pub fn s_applied(&self) -> f64 {
        match self.selector {
            Selector::Standard => self.s_cv,
            Selector::Normalized => self.s_tilde,
        }
    }
}

pub fn select_standard(curve: &CvCurve) -> CvSelection {
    let s_cv = curve.s_grid[curve.argmin()];
    CvSelection {
        s_cv,
        s_tilde: s_cv,
        mean_fold_ols_l1: curve.mean_fold_ols_l1(),
        full_ols_l1: None,
        selector: Selector::Standard,
        denominator: curve.denominator,
    }
}

/// `s̃ = min(1, mean(fold ℓ1) / full ℓ1 · s_cv)`.
pub fn select_normalized(curve: &CvCurve, full_ols_l1: f64) -> Result<CvSelection> {
    if !(full_ols_l1 > 0.0) {
        return Err(Error::NonpositiveNorm(full_ols_l1));
    }
    let standard = select_standard(curve);
    let s_tilde = normalized_fraction(standard.mean_fold_ols_l1, full_ols_l1, standard.s_cv);
    Ok(CvSelection {
        s_tilde,
        full_ols_l1: Some(full_ols_l1),
        selector: Selector::Normalized,
        ..standard
    })
}

pub fn normalized_fraction(mean_fold_ols_l1: f64, full_ols_l1: f64, s_cv: f64) -> f64 {
    (mean_fold_ols_l1 / full_ols_l1 * s_cv).min(1.0)
}

/// Coefficients of an already computed full-data path at the selection's
/// fraction, measured against `full_reference_l1`.
pub fn coef_for_selection(
    path: &LassoPath,
    full_reference_l1: f64,
    selection: &CvSelection,
) -> Result<Coefficients> {
    coef_at(path, selection.s_applied(), full_reference_l1)
}

/// Fits the Lasso on the full data and evaluates it at the selected fraction.
pub fn fit_selected(x: &DesignMatrix, y: &ResponseVector, selection: &CvSelection) -> Result<Coefficients> {
    let path = lars_path(x, y)?;
    let reference = selection.denominator.reference_l1(&path, x, y)?;
    coef_for_selection(&path, reference, selection)
}
