//! Synthetic regression experiment: a sparse linear model with i.i.d. standard
//! normal predictors, a fixed observation pool, and repeated subsampling of
//! training and test sets across a grid of training sizes.
//!
//! Every random stream is derived from the master seed and the cell
//! coordinates, so results do not depend on the order cells are run in.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::cv::{
    coef_for_selection, cv_error_curve_with, fraction_grid, kfold_split, select_normalized,
    select_standard, CvSelection, Denominator, Selector, DEFAULT_GRID_POINTS,
};
use crate::error::{Error, Result};
use crate::lars::lars_path;
use crate::linalg::{center_scale, l1_norm, ols_min_norm, Coefficients, DesignMatrix, ResponseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub p: usize,
    pub n_nonzero: usize,
    pub beta_low: f64,
    pub beta_high: f64,
    /// Var(xᵀβ) / Var(ε).
    pub snr: f64,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub test_size: usize,
    pub k_folds: usize,
    pub pool_size: usize,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            p: 90,
            n_nonzero: 20,
            beta_low: -4.0,
            beta_high: 4.0,
            snr: 4.0,
            n_grid: (1..=20).map(|i| 10 * i).collect(),
            reps: 10,
            test_size: 500,
            k_folds: 10,
            pool_size: 5000,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| Err(Error::validation(field, message));
        if self.p < 1 {
            return fail("p", "must be at least 1".into());
        }
        if self.n_nonzero < 1 {
            return fail("n_nonzero", "must be at least 1 (noise scale is ‖β‖²/snr)".into());
        }
        if self.n_nonzero > self.p {
            return fail("n_nonzero", format!("n_nonzero ≤ p violated: {} > {}", self.n_nonzero, self.p));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return fail("snr", format!("must be positive and finite, got {}", self.snr));
        }
        if !(self.beta_low < self.beta_high) || !self.beta_low.is_finite() || !self.beta_high.is_finite() {
            return fail(
                "beta_low",
                format!("need finite beta_low < beta_high, got [{}, {}]", self.beta_low, self.beta_high),
            );
        }
        if self.reps < 1 {
            return fail("reps", "must be at least 1".into());
        }
        if self.test_size < 1 {
            return fail("test_size", "must be at least 1".into());
        }
        if self.k_folds < 2 {
            return fail("k_folds", format!("must be at least 2, got {}", self.k_folds));
        }
        if self.n_grid.is_empty() {
            return fail("n_grid", "must contain at least one training size".into());
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("n_grid", "must be strictly increasing".into());
        }
        let smallest = self.n_grid[0];
        if smallest < self.k_folds {
            return fail("n_grid", format!("training size {smallest} is below k_folds {}", self.k_folds));
        }
        // each fold must keep two training observations
        if smallest - smallest.div_ceil(self.k_folds) < 2 {
            return fail("n_grid", format!("training size {smallest} leaves folds with fewer than 2 observations"));
        }
        let largest = *self.n_grid.last().expect("nonempty");
        if largest + self.test_size > self.pool_size {
            return fail(
                "pool_size",
                format!(
                    "max(n_grid) + test_size ≤ pool_size violated: {} + {} > {}",
                    largest, self.test_size, self.pool_size
                ),
            );
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_grid.len() * self.reps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModel {
    pub beta_true: DVector<f64>,
    pub noise_sd: f64,
}

/// Pool of raw observations drawn from a [`SyntheticModel`].
#[derive(Debug, Clone)]
pub struct Pool {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub rep: usize,
    pub selector: Selector,
    pub s_cv: f64,
    pub s_applied: f64,
    pub test_mse: f64,
    pub full_ols_l1: f64,
    pub mean_fold_ols_l1: f64,
    pub pinv_ols_l1: f64,
}

const STREAM_MODEL: u64 = 1;
const STREAM_POOL: u64 = 2;
const STREAM_CELL: u64 = 3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one independent random stream, hashed from the master seed and
/// the stream's coordinates.
pub fn derive_seed(master_seed: u64, stream: u64, n: u64, rep: u64) -> u64 {
    [stream, n, rep]
        .into_iter()
        .fold(splitmix64(master_seed), |h, v| splitmix64(h ^ splitmix64(v)))
}

fn stream_rng(config: &SimConfig, stream: u64, n: usize, rep: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, stream, n as u64, rep as u64))
}

/// Draws the true coefficients: a uniformly random support of size
/// `n_nonzero` with values uniform on `[beta_low, beta_high]`.
pub fn generate_model<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<SyntheticModel> {
    config.validate()?;
    let support = index::sample(rng, config.p, config.n_nonzero);
    let values = Uniform::new(config.beta_low, config.beta_high)
        .map_err(|e| Error::validation("beta_low", e.to_string()))?;
    let mut beta = DVector::zeros(config.p);
    for j in support.iter() {
        let mut v = 0.0;
        while v == 0.0 {
            v = values.sample(rng);
        }
        beta[j] = v;
    }
    let noise_sd = (beta.norm_squared() / config.snr).sqrt();
    Ok(SyntheticModel { beta_true: beta, noise_sd })
}

/// Draws `pool_size` observations `y = xᵀβ + ε`, x standard normal.
pub fn sample_pool<R: Rng + ?Sized>(model: &SyntheticModel, config: &SimConfig, rng: &mut R) -> Pool {
    let (rows, p) = (config.pool_size, model.beta_true.len());
    let mut x = DMatrix::zeros(rows, p);
    let mut y = DVector::zeros(rows);
    for i in 0..rows {
        let mut signal = 0.0;
        for j in 0..p {
            let v: f64 = StandardNormal.sample(rng);
            x[(i, j)] = v;
            signal += v * model.beta_true[j];
        }
        let noise: f64 = StandardNormal.sample(rng);
        y[i] = signal + model.noise_sd * noise;
    }
    Pool { x, y }
}

fn rows_of(pool: &Pool, rows: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
    (
        DMatrix::from_fn(rows.len(), pool.x.ncols(), |i, j| pool.x[(rows[i], j)]),
        DVector::from_fn(rows.len(), |i, _| pool.y[rows[i]]),
    )
}

fn test_mse(
    beta: &Coefficients,
    design: &DesignMatrix,
    response: &ResponseVector,
    test_x: &DMatrix<f64>,
    test_y: &DVector<f64>,
) -> Result<f64> {
    let predictions = beta.predict(design, response, test_x)?;
    Ok((predictions - test_y).norm_squared() / test_y.len() as f64)
}

/// Everything computed for one (n, rep) cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub standard: ExperimentRecord,
    pub normalized: ExperimentRecord,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// One (training size, repetition) cell: subsample, cross-validate once and
/// apply both selectors to the same full-data path.
pub fn run_cell(
    pool: &Pool,
    config: &SimConfig,
    n: usize,
    rep: usize,
    denominator: Denominator,
) -> Result<CellOutcome> {
    let needed = n + config.test_size;
    if needed > pool.x.nrows() {
        return Err(Error::SubsampleExhausted { needed, pool: pool.x.nrows() });
    }
    let mut rng = stream_rng(config, STREAM_CELL, n, rep);
    let drawn = index::sample(&mut rng, pool.x.nrows(), needed).into_vec();
    let (train_rows, test_rows) = drawn.split_at(n);

    let (raw_x, raw_y) = rows_of(pool, train_rows);
    let (test_x, test_y) = rows_of(pool, test_rows);
    let (x, y) = center_scale(&raw_x, &raw_y)?;

    let folds = kfold_split(n, config.k_folds, &mut rng)?;
    let grid = fraction_grid(DEFAULT_GRID_POINTS)?;
    let curve = cv_error_curve_with(&x, &y, &folds, &grid, denominator)?;

    let path = lars_path(&x, &y)?;
    let full_reference = denominator.reference_l1(&path, &x, &y)?;
    let pinv_ols_l1 = l1_norm(&ols_min_norm(&x, &y)?);

    let standard = select_standard(&curve);
    let normalized = select_normalized(&curve, full_reference)?;

    let record = |selection: &CvSelection| -> Result<ExperimentRecord> {
        let beta = coef_for_selection(&path, full_reference, selection)?;
        Ok(ExperimentRecord {
            n,
            rep,
            selector: selection.selector,
            s_cv: selection.s_cv,
            s_applied: selection.s_applied(),
            test_mse: test_mse(&beta, &x, &y, &test_x, &test_y)?,
            full_ols_l1: full_reference,
            mean_fold_ols_l1: selection.mean_fold_ols_l1,
            pinv_ols_l1,
        })
    };

    Ok(CellOutcome {
        standard: record(&standard)?,
        normalized: record(&normalized)?,
        train_rows: train_rows.to_vec(),
        test_rows: test_rows.to_vec(),
    })
}

/// Model and pool shared by every cell of an experiment.
pub fn build_population(config: &SimConfig) -> Result<(SyntheticModel, Pool)> {
    config.validate()?;
    let model = generate_model(config, &mut stream_rng(config, STREAM_MODEL, 0, 0))?;
    let pool = sample_pool(&model, config, &mut stream_rng(config, STREAM_POOL, 0, 0));
    Ok((model, pool))
}

pub fn run_experiment(config: &SimConfig) -> Result<Vec<ExperimentRecord>> {
    run_experiment_with(config, Denominator::PathEndpoint)
}

/// All cells in parallel; records sorted by (n, rep, selector).
pub fn run_experiment_with(config: &SimConfig, denominator: Denominator) -> Result<Vec<ExperimentRecord>> {
    let (_, pool) = build_population(config)?;
    let cells: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.reps).map(move |rep| (n, rep)))
        .collect();
    let outcomes = cells
        .par_iter()
        .map(|&(n, rep)| run_cell(&pool, config, n, rep, denominator))
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ExperimentRecord> = outcomes
        .into_iter()
        .flat_map(|o| [o.standard, o.normalized])
        .collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by_key(|r| (r.n, r.rep, r.selector));
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Mean and sample standard deviation (zero for a single value).
    pub fn of(values: &[f64]) -> MeanSd {
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        };
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub selector: Selector,
    pub reps: usize,
    pub test_mse: MeanSd,
    pub s_applied: MeanSd,
    pub s_cv: MeanSd,
    pub pinv_ols_l1: MeanSd,
    pub full_ols_l1: MeanSd,
}

/// Per (selector, n) statistics over repetitions, sorted by (selector, n).
pub fn summarize(records: &[ExperimentRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records to summarize"));
    }
    let mut groups: BTreeMap<(Selector, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.selector, r.n)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((selector, n), rows)| {
            let stat = |f: fn(&ExperimentRecord) -> f64| {
                MeanSd::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                n,
                selector,
                reps: rows.len(),
                test_mse: stat(|r| r.test_mse),
                s_applied: stat(|r| r.s_applied),
                s_cv: stat(|r| r.s_cv),
                pinv_ols_l1: stat(|r| r.pinv_ols_l1),
                full_ols_l1: stat(|r| r.full_ols_l1),
            }
        })
        .collect())
}

/// Summary row for a selector at training size `n`.
pub fn lookup(summary: &[SummaryRow], selector: Selector, n: usize) -> Option<&SummaryRow> {
    summary.iter().find(|r| r.selector == selector && r.n == n)
}
