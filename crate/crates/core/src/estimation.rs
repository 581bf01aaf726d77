//! Empirical tail estimation: CCDFs, windowed log-log least squares, the Hill
//! estimator, per-group standardization and the imbalance regression.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of points in a log-log or imbalance regression.
pub const MIN_FIT_POINTS: usize = 10;

/// Number of log-spaced bins used by binned fits.
pub const LOG_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Right,
    Left,
}

/// A sample oriented so that the tail of interest points right: left tails
/// are stored negated.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    sorted: Vec<f64>,
    side: TailSide,
}

impl EmpiricalTail {
    pub fn new(values: &[f64], side: TailSide) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateSample("empty sample".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::DegenerateSample(format!("non-finite value {v}")));
        }
        let mut sorted: Vec<f64> = match side {
            TailSide::Right => values.to_vec(),
            TailSide::Left => values.iter().map(|v| -v).collect(),
        };
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted, side })
    }

    pub fn right(values: &[f64]) -> Result<Self> {
        Self::new(values, TailSide::Right)
    }

    pub fn left(values: &[f64]) -> Result<Self> {
        Self::new(values, TailSide::Left)
    }

    pub fn side(&self) -> TailSide {
        self.side
    }

    /// Oriented values, ascending.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.sorted.last().expect("non-empty")
    }

    /// Fraction of the sample strictly above `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|&v| v <= x);
        (self.len() - at_or_below) as f64 / self.len() as f64
    }

    /// `(x, CCDF(x))` at every distinct sample value except the maximum,
    /// where the CCDF is zero. Without ties the i-th order statistic gets
    /// `(n - i) / n`.
    pub fn ccdf_points(&self) -> Vec<(f64, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let x = self.sorted[i];
            let mut j = i + 1;
            while j < n && self.sorted[j] == x {
                j += 1;
            }
            if j < n {
                out.push((x, (n - j) as f64 / n as f64));
            }
            i = j;
        }
        out
    }

    /// The value exceeded by a fraction of about `q` of the sample:
    /// the `ceil(q n)`-th largest observation.
    pub fn upper_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::domain(format!(
                "tail quantile {q} must lie in (0, 1]"
            )));
        }
        let n = self.len();
        let k = ((q * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.sorted[n - k])
    }

    /// Sample standard deviation of the oriented values.
    pub fn std_dev(&self) -> f64 {
        sample_std(&self.sorted, mean(&self.sorted))
    }

    /// `(log10 x, log10 CCDF)` for every CCDF point with `x > 0`.
    pub fn loglog_points(&self) -> Vec<(f64, f64)> {
        self.ccdf_points()
            .into_iter()
            .filter(|&(x, _)| x > 0.0)
            .map(|(x, s)| (x.log10(), s.log10()))
            .collect()
    }
}

/// How a fit window is chosen. Quantiles are upper-tail fractions: `start =
/// 0.05` begins where 5% of the sample lies above, `stop = 0.001` ends where
/// 0.1% lies above, and `stop = 0` runs to the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWindow {
    Quantiles {
        start: f64,
        stop: f64,
    },
    /// Starts at `threshold` sample standard deviations, runs to the maximum.
    Sigma {
        threshold: f64,
    },
    /// An explicit range, e.g. quantiles of a bounding sample.
    Range {
        lo: f64,
        hi: f64,
    },
}

impl FitWindow {
    /// The window given by another sample's tail quantiles, as used when the
    /// lighter side bounds the heavier one.
    pub fn bounded_by(bounding: &EmpiricalTail, start: f64, stop: f64) -> Result<Self> {
        let (lo, hi) = quantile_range(bounding, start, stop)?;
        Ok(Self::Range { lo, hi })
    }

    /// Fits starting where the CCDF drops to `level`, up to the maximum.
    pub fn ccdf_below(level: f64) -> Self {
        Self::Quantiles {
            start: level,
            stop: 0.0,
        }
    }

    pub fn resolve(&self, tail: &EmpiricalTail) -> Result<(f64, f64)> {
        match *self {
            Self::Quantiles { start, stop } => quantile_range(tail, start, stop),
            Self::Sigma { threshold } => Ok((threshold * tail.std_dev(), tail.max())),
            Self::Range { lo, hi } => Ok((lo, hi)),
        }
    }
}

fn quantile_range(tail: &EmpiricalTail, start: f64, stop: f64) -> Result<(f64, f64)> {
    if !(stop >= 0.0 && stop < start) {
        return Err(Error::domain(format!(
            "window stop {stop} must lie in [0, start = {start})"
        )));
    }
    let lo = tail.upper_quantile(start)?;
    let hi = if stop == 0.0 {
        tail.max()
    } else {
        tail.upper_quantile(stop)?
    };
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// `-slope` of `log10 CCDF` against `log10 x`.
    pub exponent: f64,
    pub intercept: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub window: FitWindow,
    pub binned: bool,
    pub points: usize,
    pub rms_residual: f64,
    pub r_squared: f64,
}

/// Least-squares line through the CCDF points in the window, on log10 axes.
pub fn loglog_fit(tail: &EmpiricalTail, window: FitWindow, binned: bool) -> Result<TailFit> {
    let (x_lo, x_hi) = window.resolve(tail)?;
    if !(x_lo < x_hi) {
        return Err(Error::InsufficientTailData {
            found: 0,
            needed: MIN_FIT_POINTS,
        });
    }
    let in_window: Vec<(f64, f64)> = tail
        .ccdf_points()
        .into_iter()
        .filter(|&(x, _)| x >= x_lo && x <= x_hi)
        .collect();
    if in_window.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientTailData {
            found: in_window.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    if let Some(&(x, _)) = in_window.iter().find(|p| p.0 <= 0.0) {
        return Err(Error::NonPositiveValues(x));
    }
    let logs: Vec<(f64, f64)> = in_window
        .iter()
        .map(|&(x, s)| (x.log10(), s.log10()))
        .collect();
    let points = if binned {
        let (lo, hi) = (logs[0].0, logs[logs.len() - 1].0);
        log_bin(&logs, lo, hi)
    } else {
        logs
    };
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientTailData {
            found: points.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let line = LineFit::ols(&points)?;
    Ok(TailFit {
        exponent: -line.slope,
        intercept: line.intercept,
        x_lo,
        x_hi,
        window,
        binned,
        points: points.len(),
        rms_residual: line.rms_residual,
        r_squared: line.r_squared,
    })
}

/// Averages points within `LOG_BINS` equal-width bins of `log10 x`.
fn log_bin(points: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let width = (hi - lo) / LOG_BINS as f64;
    let mut sums = vec![(0.0, 0.0, 0usize); LOG_BINS];
    for &(x, y) in points {
        let b = (((x - lo) / width) as usize).min(LOG_BINS - 1);
        sums[b].0 += x;
        sums[b].1 += y;
        sums[b].2 += 1;
    }
    sums.into_iter()
        .filter(|s| s.2 > 0)
        .map(|(x, y, n)| (x / n as f64, y / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub r_squared: f64,
}

impl LineFit {
    pub fn ols(points: &[(f64, f64)]) -> Result<Self> {
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        if !(sxx > 0.0) {
            return Err(Error::DegenerateSample("regressor has zero spread".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        Ok(Self {
            slope,
            intercept,
            rms_residual: (sse / n).sqrt(),
            r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        })
    }
}

/// Hill estimator from the top `k` order statistics.
pub fn hill_estimate(tail: &EmpiricalTail, k: usize) -> Result<f64> {
    let n = tail.len();
    if !(2 <= k && k < n) {
        return Err(Error::domain(format!(
            "need 2 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let x = tail.sorted();
    let reference = x[n - k - 1];
    if !(reference > 0.0) {
        return Err(Error::NonPositiveValues(reference));
    }
    let mean_log = x[n - k..].iter().map(|v| (v / reference).ln()).sum::<f64>() / k as f64;
    if !(mean_log > 0.0) {
        return Err(Error::DegenerateSample(
            "top order statistics are all equal".into(),
        ));
    }
    Ok(1.0 / mean_log)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64], mean: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Divides each group by its own sample standard deviation and concatenates.
/// With `demean` the group mean is subtracted first.
pub fn standardize_and_merge(groups: &[Vec<f64>], demean: bool) -> Result<Vec<f64>> {
    let mut merged = Vec::with_capacity(groups.iter().map(Vec::len).sum());
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {i} has {} values, need at least 2",
                g.len()
            )));
        }
        let m = mean(g);
        let sd = sample_std(g, m);
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance(i));
        }
        let shift = if demean { m } else { 0.0 };
        merged.extend(g.iter().map(|v| (v - shift) / sd));
    }
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceRegression {
    pub c: f64,
    pub intercept: f64,
    pub used: usize,
    pub removed: usize,
}

/// Regresses `Δ` on `N_A - N_B` after dropping points more than four
/// standard deviations from the mean in either coordinate.
pub fn estimate_c(points: &[(f64, f64)]) -> Result<ImbalanceRegression> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} imbalance points, need at least {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let (sx, sy) = (sample_std(&xs, mx), sample_std(&ys, my));
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, y)| (x - mx).abs() <= 4.0 * sx && (y - my).abs() <= 4.0 * sy)
        .collect();
    if kept.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} imbalance points after outlier removal, need at least {MIN_FIT_POINTS}",
            kept.len()
        )));
    }
    let line = LineFit::ols(&kept)?;
    Ok(ImbalanceRegression {
        c: line.slope,
        intercept: line.intercept,
        used: kept.len(),
        removed: points.len() - kept.len(),
    })
}
