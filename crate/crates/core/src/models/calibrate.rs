//! Redistribution constants from solved stress fields.

use serde::Serialize;

use super::ModelParams;
use crate::dist::StrengthDistribution;
use crate::error::{Error, Result};
use crate::mesh::FishnetMesh;
use crate::numeric::{golden_min, log_grid};
use crate::solver::{DamageState, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationOptions {
    /// Ratios at or above this count as amplified.
    pub threshold: f64,
    /// Fitting band in `P₁`.
    pub band: (f64, f64),
    pub grid_points: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            threshold: 1.1,
            band: (1e-10, 0.5),
            grid_points: 200,
        }
    }
}

/// Result of collapsing a ratio field into `(count, amplification)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplificationFit {
    pub count: usize,
    pub eta: f64,
    /// RMS residual of the fit in log-survival units.
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Constants with `n_links` set to the calibration mesh.
    pub params: ModelParams,
    pub first_failure: usize,
    pub second_failure: usize,
    pub eta_max: f64,
    pub eta_min: f64,
    pub first_fit: AmplificationFit,
    pub second_fit: AmplificationFit,
    /// Ratios of the survivors after the first failure, by link id.
    #[serde(skip)]
    pub first_etas: Vec<f64>,
}

fn band_grid(p1: &StrengthDistribution, opts: &CalibrationOptions) -> Result<Vec<f64>> {
    let lo = p1.inverse_cdf(opts.band.0)?;
    let hi = p1.inverse_cdf(opts.band.1)?;
    if !(hi > lo && lo > 0.0) {
        return Err(Error::Fit("empty calibration band".into()));
    }
    Ok(log_grid(lo, hi, opts.grid_points.max(2)))
}

fn hazard(p1: &StrengthDistribution, s: f64) -> f64 {
    -p1.ln_survival(s)
}

/// Fits `(1 − P₁(σ))^(rest) (1 − P₁(η σ))^ν` to `Π_i (1 − P₁(λ_i σ))` over
/// the band, where `etas` are the survivors' ratios and `ν` counts those at
/// or above the threshold.
pub fn fit_amplification(p1: &StrengthDistribution, etas: &[f64], opts: &CalibrationOptions) -> Result<AmplificationFit> {
    let amplified: Vec<f64> = etas.iter().copied().filter(|&e| e >= opts.threshold).collect();
    let rest: Vec<f64> = etas.iter().map(|&e| e.max(1.0)).filter(|&e| e < opts.threshold).collect();
    if amplified.is_empty() {
        return Err(Error::Fit(format!("no link reaches amplification {}", opts.threshold)));
    }
    let count = amplified.len();
    let grid = band_grid(p1, opts)?;
    // log-survival deficit over an unamplified baseline
    let target: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| {
            let h0 = hazard(p1, s);
            let a: f64 = amplified.iter().map(|&e| hazard(p1, e * s)).sum();
            let r: f64 = rest.iter().filter(|&&e| e > 1.0).map(|&e| hazard(p1, e * s) - h0).sum();
            (s, a + r)
        })
        .filter(|(_, t)| t.is_finite())
        .collect();
    if target.len() < 2 {
        return Err(Error::Fit("calibration band has no finite hazards".into()));
    }
    let nu = count as f64;
    let objective = |eta: f64| -> f64 {
        target
            .iter()
            .map(|&(s, t)| {
                let d = nu * hazard(p1, eta * s) - t;
                if d.is_finite() {
                    d * d
                } else {
                    f64::MAX / 1e3
                }
            })
            .sum()
    };
    let upper = amplified.iter().copied().fold(1.0, f64::max) * 1.5;
    let eta = golden_min(objective, 1.0, upper, 1e-12);
    let rms = (objective(eta) / target.len() as f64).sqrt();
    Ok(AmplificationFit { count, eta, rms })
}

/// Fits `η_b` from `ν₁ P₁(η_b σ) ≈ Σ_j P₁(η_j σ)` over the amplified links.
pub fn fit_eta_b(p1: &StrengthDistribution, etas: &[f64], opts: &CalibrationOptions) -> Result<f64> {
    let amplified: Vec<f64> = etas.iter().copied().filter(|&e| e >= opts.threshold).collect();
    if amplified.is_empty() {
        return Err(Error::Fit(format!("no link reaches amplification {}", opts.threshold)));
    }
    let grid = band_grid(p1, opts)?;
    let nu = amplified.len() as f64;
    let target: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| (s, amplified.iter().map(|&e| p1.fail_prob(e * s)).sum::<f64>().ln()))
        .collect();
    let objective = |eta: f64| -> f64 {
        target
            .iter()
            .map(|&(s, t)| {
                let d = (nu * p1.fail_prob(eta * s)).ln() - t;
                d * d
            })
            .sum()
    };
    let upper = amplified.iter().copied().fold(1.0, f64::max) * 1.5;
    Ok(golden_min(objective, 1.0, upper, 1e-12))
}

/// Fails the central link, then its most loaded neighbour, and condenses the
/// two stress fields into [`ModelParams`].
pub fn calibrate_params(mesh: &FishnetMesh, p1: &StrengthDistribution, opts: &CalibrationOptions) -> Result<Calibration> {
    if mesh.rows() < 16 || mesh.cols() < 16 {
        return Err(Error::Precondition(format!(
            "calibration needs at least a 16x16 mesh, got {}x{}",
            mesh.rows(),
            mesh.cols()
        )));
    }
    let nl = mesh.link_count();
    let first = mesh.link_id(mesh.rows() / 2, mesh.cols() / 2);
    let mut solver = Solver::new(mesh);
    let mut damage = DamageState::from_links(nl, &[first])?;
    let f1 = solver.solve(damage.mask())?;
    let survivors = |eta: &[f64], damage: &DamageState| -> Vec<f64> {
        eta.iter()
            .enumerate()
            .filter(|(l, _)| !damage.is_failed(*l))
            .map(|(_, &e)| e)
            .collect()
    };
    let etas1 = survivors(&f1.eta, &damage);
    let first_fit = fit_amplification(p1, &etas1, opts)?;
    let eta_b = fit_eta_b(p1, &etas1, opts)?;
    let eta_max = etas1.iter().copied().fold(f64::MIN, f64::max);
    let eta_min = etas1.iter().copied().fold(f64::MAX, f64::min);

    let dist = mesh.link_distances(&[first]);
    let mut second = usize::MAX;
    for l in 0..nl {
        if dist[l] == 1 && (second == usize::MAX || f1.eta[l] > f1.eta[second]) {
            second = l;
        }
    }
    if second == usize::MAX {
        return Err(Error::Internal("central link has no neighbours".into()));
    }
    damage.fail(second)?;
    let f2 = solver.solve(damage.mask())?;
    let etas2 = survivors(&f2.eta, &damage);
    let second_fit = fit_amplification(p1, &etas2, opts)?;

    let params = ModelParams {
        n_links: nl,
        nu1: first_fit.count,
        eta_a: first_fit.eta,
        eta_b,
        nu2: second_fit.count,
        eta2: second_fit.eta,
    };
    params.validate()?;
    Ok(Calibration {
        params,
        first_failure: first,
        second_failure: second,
        eta_max,
        eta_min,
        first_fit,
        second_fit,
        first_etas: f1.eta,
    })
}
