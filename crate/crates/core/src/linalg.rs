//! Dense linear algebra used throughout the crate: standardization, a thin
//! SVD, the Moore-Penrose pseudo-inverse and minimum-norm least squares.
//!
//! Matrices are observation-by-variable (`n × p`), one row per observation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Iteration cap handed to the bidiagonal QR sweep of the SVD.
const SVD_MAX_ITERATIONS: usize = 10_000;

/// Centered and scaled predictors together with the statistics needed to map
/// fresh observations onto the same scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_means: DVector<f64>,
    column_scales: DVector<f64>,
}

impl DesignMatrix {
    /// Wraps a matrix that is already standardized, recording identity
    /// statistics. No centering or scaling check is performed.
    pub fn from_standardized(values: DMatrix<f64>) -> Self {
        let p = values.ncols();
        DesignMatrix {
            values,
            column_means: DVector::zeros(p),
            column_scales: DVector::from_element(p, 1.0),
        }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_means(&self) -> &DVector<f64> {
        &self.column_means
    }

    pub fn column_scales(&self) -> &DVector<f64> {
        &self.column_scales
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Maps raw observations onto this matrix's centered and scaled coordinates.
    pub fn transform(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} columns, got {}",
                self.ncols(),
                raw.ncols()
            )));
        }
        let mut out = raw.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (mean, scale) = (self.column_means[j], self.column_scales[j]);
            col.apply(|v| *v = (*v - mean) / scale);
        }
        Ok(out)
    }
}

/// Centered response.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    values: DVector<f64>,
    mean_offset: f64,
}

impl ResponseVector {
    /// Wraps an already centered response with a zero offset.
    pub fn from_centered(values: DVector<f64>) -> Self {
        ResponseVector {
            values,
            mean_offset: 0.0,
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Mean of the raw response, added back to predictions.
    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Regression coefficients on the standardized scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    beta: DVector<f64>,
}

impl Coefficients {
    pub fn new(beta: DVector<f64>) -> Self {
        Coefficients { beta }
    }

    pub fn zeros(p: usize) -> Self {
        Coefficients {
            beta: DVector::zeros(p),
        }
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.beta.iter().all(|b| b.is_finite())
    }

    /// Predictions on the original response scale for raw predictors.
    pub fn predict(
        &self,
        design: &DesignMatrix,
        response: &ResponseVector,
        raw: &DMatrix<f64>,
    ) -> Result<DVector<f64>> {
        if raw.ncols() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} columns",
                self.len(),
                raw.ncols()
            )));
        }
        let standardized = design.transform(raw)?;
        Ok((standardized * &self.beta).add_scalar(response.mean_offset()))
    }
}

impl From<Vec<f64>> for Coefficients {
    fn from(v: Vec<f64>) -> Self {
        Coefficients::new(DVector::from_vec(v))
    }
}

/// Thin SVD restricted to the numerically nonzero singular values.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub left_vectors: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub right_vectors: DMatrix<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.left_vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.singular_values[j];
        }
        scaled * self.right_vectors.transpose()
    }
}

/// Centers every column of `raw_x` and scales it to unit sample standard
/// deviation (denominator `n − 1`); centers `raw_y`.
pub fn center_scale(
    raw_x: &DMatrix<f64>,
    raw_y: &DVector<f64>,
) -> Result<(DesignMatrix, ResponseVector)> {
    let (n, p) = raw_x.shape();
    if raw_y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} rows in X but {} responses",
            n,
            raw_y.len()
        )));
    }
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "at least 2 observations required, got {n}"
        )));
    }

    let mut values = raw_x.clone();
    let mut means = DVector::zeros(p);
    let mut scales = DVector::zeros(p);
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / (n - 1) as f64).sqrt();
        let magnitude = col.amax().max(mean.abs());
        if sd == 0.0 || sd <= 64.0 * f64::EPSILON * magnitude {
            return Err(Error::ZeroVarianceColumn(j));
        }
        col /= sd;
        means[j] = mean;
        scales[j] = sd;
    }

    let y_mean = raw_y.mean();
    let y = raw_y.add_scalar(-y_mean);
    Ok((
        DesignMatrix {
            values,
            column_means: means,
            column_scales: scales,
        },
        ResponseVector {
            values: y,
            mean_offset: y_mean,
        },
    ))
}

/// Thin SVD of an arbitrary real matrix. Singular values below
/// `σ_max · max(n, p) · ε` are discarded together with their vectors.
pub fn svd(x: &DMatrix<f64>) -> Result<SvdFactors> {
    let (n, p) = x.shape();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DimensionMismatch("matrix has non-finite entries".into()));
    }
    if n == 0 || p == 0 {
        return Ok(SvdFactors {
            left_vectors: DMatrix::zeros(n, 0),
            singular_values: DVector::zeros(0),
            right_vectors: DMatrix::zeros(p, 0),
        });
    }

    let decomposition = x
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::ConvergenceFailure)?;
    let u = decomposition.u.ok_or(Error::ConvergenceFailure)?;
    let v_t = decomposition.v_t.ok_or(Error::ConvergenceFailure)?;
    let sigma = decomposition.singular_values;

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));

    let sigma_max = order.first().map_or(0.0, |&i| sigma[i]);
    let tolerance = sigma_max * n.max(p) as f64 * f64::EPSILON;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| sigma[i] > tolerance && sigma[i] > 0.0)
        .collect();

    let r = kept.len();
    let mut left = DMatrix::zeros(n, r);
    let mut right = DMatrix::zeros(p, r);
    let mut values = DVector::zeros(r);
    for (dst, &src) in kept.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &v_t.row(src).transpose());
        values[dst] = sigma[src];
    }
    Ok(SvdFactors {
        left_vectors: left,
        singular_values: values,
        right_vectors: right,
    })
}

/// Moore-Penrose pseudo-inverse; directions below the rank tolerance are
/// treated as exactly zero.
pub fn pseudo_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let factors = svd(a)?;
    let mut v_scaled = factors.right_vectors.clone();
    for (j, mut col) in v_scaled.column_iter_mut().enumerate() {
        col /= factors.singular_values[j];
    }
    Ok(v_scaled * factors.left_vectors.transpose())
}

/// Minimum-Euclidean-norm least-squares coefficients `(XᵀX)⁺Xᵀy`, computed as
/// `X⁺y` from the SVD of `X`.
pub fn ols_min_norm(x: &DesignMatrix, y: &ResponseVector) -> Result<Coefficients> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows in X but {} responses",
            x.nrows(),
            y.len()
        )));
    }
    let factors = svd(x.values())?;
    let mut projected = factors.left_vectors.tr_mul(y.values());
    for (coord, sigma) in projected.iter_mut().zip(factors.singular_values.iter()) {
        *coord /= sigma;
    }
    Ok(Coefficients::new(&factors.right_vectors * projected))
}

pub fn l1_norm(beta: &Coefficients) -> f64 {
    beta.beta().iter().map(|b| b.abs()).sum()
}

/// `(1/(n−1)) XᵀX`.
pub fn sample_covariance(x: &DesignMatrix) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "at least 2 observations required, got {n}"
        )));
    }
    let mut cov = x.values().tr_mul(x.values()) / (n - 1) as f64;
    // Symmetrize exactly; the product is symmetric only up to rounding.
    let p = cov.ncols();
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = avg;
            cov[(j, i)] = avg;
        }
    }
    Ok(cov)
}
