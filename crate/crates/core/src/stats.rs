//! Empirical strength distributions and Weibull-scale diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::SampleRecord;
use crate::models::CdfCurve;
use crate::numeric::linear_fit;

/// Sorted peak strengths of a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empirical distribution needs at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {v}")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn from_records(records: &[SampleRecord]) -> Result<Self> {
        Self::new(records.iter().map(|r| r.peak_stress).collect())
    }

    pub fn count(&self) -> usize {
        self.sorted.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.count() as f64
    }

    pub fn cdf(&self, sigma: f64) -> f64 {
        empirical_cdf(self, sigma)
    }

    /// Plotting position of the `k`-th order statistic (0-based).
    pub fn plotting_position(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.count() as f64
    }

    /// `(σ_(k), (k − ½)/n)` for every order statistic.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.sorted
            .iter()
            .enumerate()
            .map(|(k, &s)| (s, self.plotting_position(k)))
            .collect()
    }
}

/// Midpoint plotting position, held constant between order statistics.
pub fn empirical_cdf(e: &EmpiricalDistribution, sigma: f64) -> f64 {
    let k = e.sorted.partition_point(|&v| v <= sigma);
    if k == 0 {
        0.0
    } else {
        (k as f64 - 0.5) / e.count() as f64
    }
}

/// `ln(−ln(1 − P_f))`.
pub fn ystar(pf: f64) -> Result<f64> {
    if !(pf > 0.0 && pf < 1.0) {
        return Err(Error::Domain(format!("Weibull ordinate undefined at P_f = {pf}")));
    }
    Ok((-(-pf).ln_1p()).ln())
}

/// `(ln σ, ln(−ln(1 − P_f)))`.
pub fn weibull_coords(sigma: f64, pf: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("Weibull abscissa undefined at σ = {sigma}")));
    }
    Ok((sigma.ln(), ystar(pf)?))
}

/// Anything that can be read as `(σ, P_f)` pairs.
pub trait CdfPoints {
    fn cdf_points(&self) -> Vec<(f64, f64)>;
}

impl CdfPoints for EmpiricalDistribution {
    fn cdf_points(&self) -> Vec<(f64, f64)> {
        self.points()
    }
}

impl CdfPoints for CdfCurve {
    fn cdf_points(&self) -> Vec<(f64, f64)> {
        self.points.clone()
    }
}

/// Least-squares slope of `Y*` against `ln σ` over points with `P_f` in `band`.
pub fn tail_slope<C: CdfPoints + ?Sized>(curve: &C, band: (f64, f64)) -> Result<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .cdf_points()
        .into_iter()
        .filter(|&(_, p)| p >= band.0 && p <= band.1)
        .filter_map(|(s, p)| weibull_coords(s, p).ok())
        .unzip();
    if xs.len() < 10 {
        return Err(Error::Fit(format!(
            "need at least 10 points in [{}, {}], found {}",
            band.0,
            band.1,
            xs.len()
        )));
    }
    linear_fit(&xs, &ys)
        .map(|(slope, _)| slope)
        .ok_or_else(|| Error::Fit("degenerate tail band".into()))
}

/// Largest `|Y*_emp − Y*_model|` over order statistics whose plotting
/// position lies in `band`. `model` maps `σ` to its Weibull ordinate.
pub fn max_ystar_gap<F: Fn(f64) -> f64>(e: &EmpiricalDistribution, band: (f64, f64), model: F) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for (s, p) in e.points() {
        if p < band.0 || p > band.1 {
            continue;
        }
        let d = (ystar(p)? - model(s)).abs();
        worst = Some(worst.map_or(d, |w| w.max(d)));
    }
    worst.ok_or_else(|| Error::Fit("no order statistic inside the band".into()))
}

/// Agreement of a run with its first half in Weibull scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Convergence {
    /// Stress range, running up to the largest compared point, over which
    /// `|ΔY*|` stays below [`CONVERGENCE_TOLERANCE`].
    pub converged_region: Option<(f64, f64)>,
    pub max_discrepancy: f64,
}

pub const CONVERGENCE_TOLERANCE: f64 = 0.1;

/// Compares the Weibull-scale curves of `half` and `full` at the order
/// statistics of `full` with `Y* ≥ y_floor`.
pub fn convergence_check(half: &EmpiricalDistribution, full: &EmpiricalDistribution, y_floor: f64) -> Convergence {
    let mut gaps = Vec::new();
    for (s, p) in full.points() {
        let Ok(yf) = ystar(p) else { continue };
        if yf < y_floor {
            continue;
        }
        let d = match ystar(half.cdf(s)) {
            Ok(yh) => (yh - yf).abs(),
            Err(_) => f64::INFINITY,
        };
        gaps.push((s, d));
    }
    let max_discrepancy = gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    let mut lo = None;
    for &(s, d) in gaps.iter().rev() {
        if d >= CONVERGENCE_TOLERANCE {
            break;
        }
        lo = Some(s);
    }
    Convergence {
        converged_region: lo.map(|lo| (lo, gaps.last().unwrap().0)),
        max_discrepancy,
    }
}

/// Equal-width density histogram over `[min, max]`.
///
/// When every sample is equal the result is a single `(value, ∞)` spike.
pub fn histogram(e: &EmpiricalDistribution, bins: usize) -> Result<Vec<(f64, f64)>> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("histogram needs at least 2 bins, got {bins}")));
    }
    let (lo, hi) = (e.min(), e.max());
    if hi == lo {
        return Ok(vec![(lo, f64::INFINITY)]);
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in e.values() {
        let k = (((v - lo) / w) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let norm = 1.0 / (e.count() as f64 * w);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &c)| (lo + (k as f64 + 0.5) * w, c as f64 * norm))
        .collect())
}
