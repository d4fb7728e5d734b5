//! Analytical failure probabilities of fishnets and their limits.
//!
//! Every model is evaluated as `S − 1`, the survival probability minus one,
//! rearranged into binomial remainders so that the leading terms cancel
//! analytically rather than in floating point. When `P₁(σ)` is so small that
//! even the surviving powers of `P₁` underflow, a leading-order expansion in
//! `ln P₁` takes over. Both paths report `ln(−ln(1 − P_f))`, which stays
//! finite far below the smallest representable `P_f`.

mod calibrate;

pub use calibrate::{calibrate_params, fit_amplification, fit_eta_b, AmplificationFit, Calibration, CalibrationOptions};

use serde::Serialize;

use crate::dist::StrengthDistribution;
use crate::error::{Error, Result};
use crate::numeric::{binomial_remainder, linear_fit, log_grid};

/// Below this `ln P₁(σ)` the leading-order expansion is used.
const LN_DEEP: f64 = -207.0; // ≈ ln 1e-90

/// Above this `N P₁(σ)` the survival sum is formed directly.
const DIRECT_ABOVE: f64 = 0.1;

/// Redistribution constants of the fishnet models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Total number of links `N`.
    pub n_links: usize,
    /// Links amplified after one failure.
    pub nu1: usize,
    /// Effective amplification after one failure.
    pub eta_a: f64,
    /// Amplification used for a second failure next to the first.
    pub eta_b: f64,
    /// Links amplified after two adjacent failures.
    pub nu2: usize,
    /// Effective amplification after two adjacent failures.
    pub eta2: f64,
}

impl ModelParams {
    /// Two-term parameters; the second-failure constants default to the
    /// first-failure ones.
    pub fn new(n_links: usize, nu1: usize, eta_a: f64) -> Result<Self> {
        let p = Self {
            n_links,
            nu1,
            eta_a,
            eta_b: eta_a,
            nu2: nu1,
            eta2: eta_a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_second_failure(mut self, eta_b: f64, nu2: usize, eta2: f64) -> Result<Self> {
        self.eta_b = eta_b;
        self.nu2 = nu2;
        self.eta2 = eta2;
        self.validate()?;
        Ok(self)
    }

    /// Same constants applied to a net with a different link count.
    pub fn with_links(mut self, n_links: usize) -> Result<Self> {
        self.n_links = n_links;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_links == 0 {
            return Err(Error::InvalidInput("link count must be positive".into()));
        }
        for (name, v) in [("eta_a", self.eta_a), ("eta_b", self.eta_b), ("eta2", self.eta2)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be at least 1, got {v}")));
            }
        }
        Ok(())
    }
}

/// A model failure probability together with its Weibull-scale ordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProbability {
    /// `P_f`, possibly underflowed to 0 in the deep tail.
    pub pf: f64,
    /// `ln(−ln(1 − P_f))`; finite whenever `0 < P_f < 1` mathematically.
    pub ln_hazard: f64,
    /// The truncated series left `[0, 1]` and was clamped.
    pub clamped: bool,
}

impl TailProbability {
    /// From `q = S − 1`.
    fn from_survival_excess(q: f64) -> Self {
        if q >= 0.0 {
            Self {
                pf: 0.0,
                ln_hazard: f64::NEG_INFINITY,
                clamped: q > 0.0,
            }
        } else if q <= -1.0 {
            Self {
                pf: 1.0,
                ln_hazard: f64::INFINITY,
                clamped: q < -1.0,
            }
        } else {
            Self {
                pf: -q,
                ln_hazard: (-q.ln_1p()).ln(),
                clamped: false,
            }
        }
    }

    /// From `ln P_f` in the deep tail, where the hazard equals `P_f`.
    fn from_ln_pf(ln_pf: f64) -> Self {
        Self {
            pf: ln_pf.exp(),
            ln_hazard: ln_pf,
            clamped: false,
        }
    }

    fn clamped_zero() -> Self {
        Self {
            pf: 0.0,
            ln_hazard: f64::NEG_INFINITY,
            clamped: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WeakestLink,
    TwoTerm,
    ThreeTerm,
    Bundle,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WeakestLink => "weakest_link",
            Self::TwoTerm => "two_term",
            Self::ThreeTerm => "three_term",
            Self::Bundle => "bundle",
        }
    }

    pub fn eval(&self, p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> TailProbability {
        match self {
            Self::WeakestLink => weakest_link_tail(p1, params.n_links, sigma),
            Self::TwoTerm => two_term_tail(p1, params, sigma),
            Self::ThreeTerm => three_term_tail(p1, params, sigma),
            Self::Bundle => bundle_series_tail(p1, params.n_links, sigma),
        }
    }
}

/// A model evaluated on a stress grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfCurve {
    pub model: ModelKind,
    /// `(σ, P_f)` pairs in increasing `σ`.
    pub points: Vec<(f64, f64)>,
}

impl CdfCurve {
    pub fn evaluate(model: ModelKind, p1: &StrengthDistribution, params: &ModelParams, sigmas: &[f64]) -> Self {
        Self {
            model,
            points: sigmas.iter().map(|&s| (s, model.eval(p1, params, s).pf)).collect(),
        }
    }
}

/// Chain of `N` links: `1 − (1 − P₁)^N`.
pub fn weakest_link_cdf(p1: &StrengthDistribution, n: usize, sigma: f64) -> f64 {
    weakest_link_tail(p1, n, sigma).pf
}

pub fn weakest_link_tail(p1: &StrengthDistribution, n: usize, sigma: f64) -> TailProbability {
    let nf = n as f64;
    let ln_p0 = p1.ln_fail_prob(sigma);
    if ln_p0 < LN_DEEP {
        return TailProbability::from_ln_pf(nf.ln() + ln_p0);
    }
    let h = -nf * p1.ln_survival(sigma);
    TailProbability {
        pf: -(-h).exp_m1(),
        ln_hazard: h.ln(),
        clamped: false,
    }
}

/// `N P₁(σ) Π_i [1 − P₁(λ_i σ)]` with `λ_i = max(η_i, 1)` over the `N − 1`
/// survivors of a single failure.
pub fn exact_two_term_survival_factor(p1: &StrengthDistribution, etas: &[f64], sigma: f64) -> Result<f64> {
    if etas.is_empty() {
        return Err(Error::InvalidInput("no surviving link ratios".into()));
    }
    let n = (etas.len() + 1) as f64;
    let ln_prod: f64 = etas.iter().map(|&e| p1.ln_survival(e.max(1.0) * sigma)).sum();
    Ok(n * p1.fail_prob(sigma) * ln_prod.exp())
}

/// The simplified counterpart of [`exact_two_term_survival_factor`].
pub fn simplified_two_term_survival_factor(p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> f64 {
    let n = params.n_links as f64;
    let nu = params.nu1 as f64;
    let ln_prod = (n - nu - 1.0) * p1.ln_survival(sigma) + nu * p1.ln_survival(params.eta_a * sigma);
    n * p1.fail_prob(sigma) * ln_prod.exp()
}

/// Correction factor of the extra survival term after one failure.
pub fn p_delta(p1: &StrengthDistribution, eta_a: f64, nu1: usize, sigma: f64) -> Result<f64> {
    if !(eta_a >= 1.0) {
        return Err(Error::Domain(format!("eta_a must be at least 1, got {eta_a}")));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::Domain(format!("stress must be non-negative, got {sigma}")));
    }
    let ls0 = p1.ln_survival(sigma);
    if ls0 == f64::NEG_INFINITY {
        return Err(Error::Pole(format!("P1({sigma}) = 1")));
    }
    let lsa = p1.ln_survival(eta_a * sigma);
    let nu = nu1 as f64;
    if lsa == f64::NEG_INFINITY && nu > 0.0 {
        return Ok(0.0);
    }
    Ok((nu * lsa - (nu + 1.0) * ls0).exp())
}

pub fn two_term_cdf(p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> f64 {
    two_term_tail(p1, params, sigma).pf
}

/// `P_f = 1 − (1 − P₁)^N (1 + N P₁ P_Δ)`.
pub fn two_term_tail(p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> TailProbability {
    let n = params.n_links as f64;
    let nu = params.nu1 as f64;
    let ln_p0 = p1.ln_fail_prob(sigma);
    if ln_p0 == f64::NEG_INFINITY {
        return TailProbability::from_survival_excess(0.0);
    }
    if ln_p0 < LN_DEEP {
        let ra = (p1.ln_fail_prob(params.eta_a * sigma) - ln_p0).exp();
        let coef = 0.5 * (n - 1.0) - nu + nu * ra;
        if !(coef > 0.0) {
            return TailProbability::clamped_zero();
        }
        return TailProbability::from_ln_pf(n.ln() + 2.0 * ln_p0 + coef.ln());
    }
    let p0 = p1.fail_prob(sigma);
    let ls0 = p1.ln_survival(sigma);
    let lsa = p1.ln_survival(params.eta_a * sigma);
    if n * p0 > DIRECT_ABOVE {
        let surv = (n * ls0).exp() + n * p0 * ((n - nu - 1.0) * ls0 + nu * lsa).exp();
        return TailProbability::from_survival_excess(surv - 1.0);
    }
    let e = ((n - nu - 1.0) * ls0 + nu * lsa).exp_m1();
    TailProbability::from_survival_excess(binomial_remainder(n, p0, 2) + n * p0 * e)
}

/// Stress at which `P_Δ` falls to one half.
pub fn sigma_transition(p1: &StrengthDistribution, eta_a: f64, nu1: usize) -> Result<f64> {
    if !(eta_a >= 1.0) {
        return Err(Error::Domain(format!("eta_a must be at least 1, got {eta_a}")));
    }
    let lo = p1.inverse_cdf(1e-15)?;
    let hi = p1.inverse_cdf(1.0 - 1e-9)?;
    let grid = log_grid(lo, hi, 2000);
    let f = |s: f64| p_delta(p1, eta_a, nu1, s).map(|v| v - 0.5);
    let mut prev = (grid[0], f(grid[0])?);
    for &s in &grid[1..] {
        let v = f(s)?;
        if v <= 0.0 {
            let (mut a, mut b) = (prev.0, s);
            let mut last = prev.1;
            for k in 1..=64 {
                let x = a + (b - a) * k as f64 / 64.0;
                let fx = f(x)?;
                if fx > last {
                    return Err(Error::Precondition("P_delta is not decreasing across the bracket".into()));
                }
                last = fx;
            }
            while b - a > 1e-10 * b {
                let mid = 0.5 * (a + b);
                if f(mid)? > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = (s, v);
    }
    Err(Error::Fit("P_delta never reaches 1/2".into()))
}

pub fn three_term_cdf(p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> f64 {
    three_term_tail(p1, params, sigma).pf
}

/// Adds the two-failure survival terms (adjacent and remote second failure)
/// to the two-term model.
pub fn three_term_tail(p1: &StrengthDistribution, params: &ModelParams, sigma: f64) -> TailProbability {
    let n = params.n_links as f64;
    let nu1 = params.nu1 as f64;
    let nu2 = params.nu2 as f64;
    let ln_p0 = p1.ln_fail_prob(sigma);
    if ln_p0 == f64::NEG_INFINITY {
        return TailProbability::from_survival_excess(0.0);
    }
    if ln_p0 < LN_DEEP {
        // the order-P₁² terms cancel except for N ν₁ P₁ (P₁(η_a σ) − P₁(η_b σ))
        let ra = (p1.ln_fail_prob(params.eta_a * sigma) - ln_p0).exp();
        let rb = (p1.ln_fail_prob(params.eta_b * sigma) - ln_p0).exp();
        let coef = nu1 * (ra - rb);
        if !(coef > 0.0) {
            return TailProbability::clamped_zero();
        }
        return TailProbability::from_ln_pf(n.ln() + 2.0 * ln_p0 + coef.ln());
    }
    let p0 = p1.fail_prob(sigma);
    let pb = p1.fail_prob(params.eta_b * sigma);
    let ls0 = p1.ln_survival(sigma);
    let lsa = p1.ln_survival(params.eta_a * sigma);
    let ls2 = p1.ln_survival(params.eta2 * sigma);
    let t21 = n * nu1 * (p0 * pb - 0.5 * p0 * p0) * ((n - nu2 - 2.0) * ls0 + nu2 * ls2).exp();
    let t22 = 0.5 * n * (n - nu1 - 1.0) * p0 * p0 * ((n - 2.0 * nu1 - 2.0) * ls0 + 2.0 * nu1 * lsa).exp();
    if n * p0 > DIRECT_ABOVE {
        let surv = (n * ls0).exp() + n * p0 * ((n - nu1 - 1.0) * ls0 + nu1 * lsa).exp() + t21 + t22;
        return TailProbability::from_survival_excess(surv - 1.0);
    }
    let e = ((n - nu1 - 1.0) * ls0 + nu1 * lsa).exp_m1();
    let q = binomial_remainder(n, p0, 3) + n * p0 * e + 0.5 * n * (n - 1.0) * p0 * p0 + t21 + t22;
    TailProbability::from_survival_excess(q)
}

pub fn bundle_series_cdf(p1: &StrengthDistribution, n: usize, sigma: f64) -> f64 {
    bundle_series_tail(p1, n, sigma).pf
}

/// Equal-load-sharing bundle of `N ≥ 3` fibers, series truncated after two
/// failures.
pub fn bundle_series_tail(p1: &StrengthDistribution, n: usize, sigma: f64) -> TailProbability {
    debug_assert!(n >= 3);
    let nf = n as f64;
    let s1 = nf * sigma / (nf - 1.0);
    let s2 = nf * sigma / (nf - 2.0);
    let ln_p0 = p1.ln_fail_prob(sigma);
    if ln_p0 == f64::NEG_INFINITY {
        return TailProbability::from_survival_excess(0.0);
    }
    if ln_p0 < LN_DEEP {
        let r1 = (p1.ln_fail_prob(s1) - ln_p0).exp();
        let r2 = (p1.ln_fail_prob(s2) - ln_p0).exp();
        let coef = 1.0 / 6.0 - 0.5 * r1 * r1 + r1 * r2 - 0.5 * r2;
        if !(coef > 0.0) {
            return TailProbability::clamped_zero();
        }
        let c = nf * (nf - 1.0) * (nf - 2.0);
        return TailProbability::from_ln_pf(c.ln() + 3.0 * ln_p0 + coef.ln());
    }
    let p0 = p1.fail_prob(sigma);
    let p1v = p1.fail_prob(s1);
    let k = nf * (nf - 1.0) * (p0 * p1v - 0.5 * p0 * p0);
    let r1 = (nf - 2.0) * p1.ln_survival(s2);
    if nf * p0 > DIRECT_ABOVE {
        let surv = (nf * p1.ln_survival(sigma)).exp()
            + nf * p0 * ((nf - 1.0) * p1.ln_survival(s1)).exp()
            + k * r1.exp();
        return TailProbability::from_survival_excess(surv - 1.0);
    }
    let q = binomial_remainder(nf, p0, 3) + nf * p0 * binomial_remainder(nf - 1.0, p1v, 2) + k * r1.exp_m1();
    TailProbability::from_survival_excess(q)
}

/// Deep-tail Weibull-scale fits of the two-term model with `P_Δ ≡ 1` and of
/// the weakest-link model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteFit {
    /// Slope of `Y*` against `ln σ`.
    pub slope: f64,
    /// Intercept of `Y*` regressed on `ln P₁`.
    pub intercept: f64,
    pub weakest_link_slope: f64,
    pub weakest_link_intercept: f64,
}

/// Fits the Weibull-scale asymptotes over the band `P₁ ∈ [1e-14, 1e-10]`.
pub fn weibull_asymptote_check(p1: &StrengthDistribution, n: usize) -> Result<AsymptoteFit> {
    let probs = log_grid(1e-14, 1e-10, 41);
    let nf = n as f64;
    let (mut xs, mut lp, mut y2, mut y1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &p in &probs {
        let s = p1.inverse_cdf(p)?;
        let p0 = p1.fail_prob(s);
        if !(p0 > 0.0) {
            continue;
        }
        // P_Δ ≡ 1: S − 1 = R₂(N, P₁) + N P₁ R₁(N, P₁)
        let q = binomial_remainder(nf, p0, 2) + nf * p0 * binomial_remainder(nf, p0, 1);
        let t2 = TailProbability::from_survival_excess(q);
        let t1 = weakest_link_tail(p1, n, s);
        xs.push(s.ln());
        lp.push(p0.ln());
        y2.push(t2.ln_hazard);
        y1.push(t1.ln_hazard);
    }
    if xs.len() < 2 {
        return Err(Error::Fit("empty deep-tail band".into()));
    }
    let fail = || Error::Fit("degenerate deep-tail band".into());
    let (slope, _) = linear_fit(&xs, &y2).ok_or_else(fail)?;
    let (_, intercept) = linear_fit(&lp, &y2).ok_or_else(fail)?;
    let (weakest_link_slope, _) = linear_fit(&xs, &y1).ok_or_else(fail)?;
    let (_, weakest_link_intercept) = linear_fit(&lp, &y1).ok_or_else(fail)?;
    Ok(AsymptoteFit {
        slope,
        intercept,
        weakest_link_slope,
        weakest_link_intercept,
    })
}

/// Mean strength `∫ (1 − P_f) dσ` of a model, by the trapezoid rule.
pub fn model_mean_strength(model: ModelKind, p1: &StrengthDistribution, params: &ModelParams, upper: f64, steps: usize) -> f64 {
    let h = upper / steps as f64;
    let f = |s: f64| 1.0 - model.eval(p1, params, s).pf;
    let mut acc = 0.5 * (f(0.0) + f(upper));
    for k in 1..steps {
        acc += f(k as f64 * h);
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{GraftedGaussianPower, GraftedWeibullGaussian};

    fn pg() -> StrengthDistribution {
        GraftedGaussianPower::light_tail().into()
    }

    fn reference() -> ModelParams {
        ModelParams::new(512, 6, 1.36).unwrap()
    }

    #[test]
    fn weakest_link_basics() {
        let d = pg();
        assert_eq!(weakest_link_cdf(&d, 512, 0.0), 0.0);
        for s in [5.0, 8.0, 9.5] {
            assert!((weakest_link_cdf(&d, 1, s) - d.fail_prob(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn weakest_link_at_reference_stress() {
        let pf = weakest_link_cdf(&pg(), 512, 6.05);
        assert!((pf / 2.95e-5 - 1.0).abs() < 0.02, "{pf}");
    }

    #[test]
    fn two_term_at_reference_stress() {
        let d = pg();
        let two = two_term_cdf(&d, &reference(), 6.05);
        assert!((two / 1.19e-6 - 1.0).abs() < 0.03, "{two}");
        let ratio = weakest_link_cdf(&d, 512, 6.05) / two;
        assert!((ratio - 24.8).abs() < 1.5, "{ratio}");
    }

    #[test]
    fn two_term_without_redistribution_is_binomial() {
        // η_a = 1, ν₁ = 0 keeps one failure survivable: P_f = P(at least two failures)
        let d = pg();
        let par = ModelParams::new(64, 0, 1.0).unwrap();
        for s in [6.0, 8.0, 9.0, 10.0] {
            let p = d.fail_prob(s);
            let mut want = 0.0;
            let mut c = 64.0 * 63.0 / 2.0;
            for k in 2..=64 {
                want += c * p.powi(k) * (1.0 - p).powi(64 - k);
                c *= (64 - k) as f64 / (k + 1) as f64;
            }
            let got = two_term_cdf(&d, &par, s);
            assert!((got - want).abs() <= 1e-12 * want, "{s}: {got} {want}");
        }
    }

    #[test]
    fn strong_redistribution_recovers_weakest_link() {
        let d = pg();
        let par = ModelParams::new(512, 6, 1.36).unwrap();
        for s in [9.6, 10.0, 10.5] {
            let wl = weakest_link_cdf(&d, 512, s);
            let two = two_term_cdf(&d, &par, s);
            assert!((wl - two).abs() <= 1e-12 * wl, "{s}: {wl} {two}");
        }
    }

    #[test]
    fn p_delta_limits() {
        let d = pg();
        assert!((p_delta(&d, 1.36, 6, 1e-3).unwrap() - 1.0).abs() < 1e-12);
        assert!(p_delta(&d, 1.36, 6, 9.0).unwrap() < 1e-6);
        for s in [3.0, 7.0, 9.0] {
            let v = p_delta(&d, 1.0, 11, s).unwrap();
            assert!((v - 1.0 / (1.0 - d.fail_prob(s))).abs() < 1e-12 && v >= 1.0);
        }
        assert!(matches!(p_delta(&d, 0.9, 6, 5.0), Err(Error::Domain(_))));
        assert!(matches!(p_delta(&d, 1.2, 3, 14.0), Err(Error::Pole(_))));
    }

    #[test]
    fn transition_moves_left_with_amplification() {
        let d = pg();
        let t: Vec<f64> = [1.01, 1.1, 1.3, 1.6].iter().map(|&e| sigma_transition(&d, e, 6).unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] > w[1]), "{t:?}");
        let a = sigma_transition(&d, 1.2, 6).unwrap();
        let b = sigma_transition(&d, 1.2, 512).unwrap();
        assert!(b < a);
        let eta_shift = (t[1] - t[3]) / t[1];
        assert!((a - b) / a < eta_shift);
        assert!(sigma_transition(&d, 1.0, 6).is_err());
    }

    #[test]
    fn three_term_limits_and_ordering() {
        let d: StrengthDistribution = GraftedWeibullGaussian::heavy_tail().into();
        let par = ModelParams::new(512, 6, 1.36).unwrap().with_second_failure(1.33, 10, 1.6).unwrap();
        for k in 0..2000 {
            let s = 2.0 + 10.0 * k as f64 / 2000.0;
            let wl = weakest_link_cdf(&d, 512, s);
            let two = two_term_cdf(&d, &par, s);
            let three = three_term_cdf(&d, &par, s);
            assert!(three <= two * (1.0 + 1e-12) && two <= wl * (1.0 + 1e-12), "{s}: {three} {two} {wl}");
        }
    }

    #[test]
    fn remote_second_failure_share_grows_with_size() {
        let d: StrengthDistribution = GraftedWeibullGaussian::heavy_tail().into();
        let s = 5.0;
        let p = d.fail_prob(s);
        let pb = d.fail_prob(1.33 * s);
        let ratio = |n: f64| {
            let t21 = n * 6.0 * (p * pb - 0.5 * p * p);
            let t22 = 0.5 * n * (n - 7.0) * p * p;
            t22 / t21
        };
        assert!(ratio(5120.0) > 1.0);
        assert!((ratio(5120.0) / ratio(512.0) - 5113.0 / 505.0).abs() < 1e-9);
    }

    #[test]
    fn deep_tail_paths_agree_with_direct_evaluation() {
        let d = pg();
        let par = ModelParams::new(512, 6, 1.36).unwrap().with_second_failure(1.33, 10, 1.6).unwrap();
        // straddle the switch-over point
        let lo = d.inverse_cdf(1e-92).unwrap();
        let hi = d.inverse_cdf(1e-88).unwrap();
        for kind in [ModelKind::WeakestLink, ModelKind::TwoTerm, ModelKind::ThreeTerm, ModelKind::Bundle] {
            let a = kind.eval(&d, &par, lo).ln_hazard;
            let b = kind.eval(&d, &par, hi).ln_hazard;
            let slope = (b - a) / (hi.ln() - lo.ln());
            let expect = match kind {
                ModelKind::WeakestLink => 38.0,
                ModelKind::Bundle => 114.0,
                _ => 76.0,
            };
            assert!((slope - expect).abs() < 0.01 * expect, "{kind:?}: {slope}");
        }
    }

    #[test]
    fn extreme_tail_is_finite_and_monotone() {
        let d = pg();
        let par = ModelParams::new(512, 6, 1.36).unwrap().with_second_failure(1.33, 10, 1.6).unwrap();
        let s = d.inverse_cdf(1e-300).unwrap();
        for kind in [ModelKind::WeakestLink, ModelKind::TwoTerm, ModelKind::ThreeTerm, ModelKind::Bundle] {
            let a = kind.eval(&d, &par, s).ln_hazard;
            let b = kind.eval(&d, &par, s * 1.001).ln_hazard;
            assert!(a.is_finite() && b.is_finite() && b > a, "{kind:?}");
        }
    }

    #[test]
    fn bundle_zero_and_below_chain() {
        let d = pg();
        assert_eq!(bundle_series_cdf(&d, 512, 0.0), 0.0);
        for s in [7.0, 7.5, 8.0] {
            assert!(bundle_series_cdf(&d, 512, s) < weakest_link_cdf(&d, 512, s));
        }
    }

    #[test]
    fn bundle_slope_triples() {
        let d = pg();
        let probs = log_grid(1e-14, 1e-10, 21);
        let xs: Vec<f64> = probs.iter().map(|&p| d.inverse_cdf(p).unwrap().ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| bundle_series_tail(&d, 512, x.exp()).ln_hazard).collect();
        let (slope, _) = linear_fit(&xs, &ys).unwrap();
        assert!((slope / 114.0 - 1.0).abs() < 0.03, "{slope}");
    }

    #[test]
    fn asymptote_fit() {
        let f = weibull_asymptote_check(&pg(), 512).unwrap();
        assert!((f.slope - 76.0).abs() < 1.0, "{f:?}");
        assert!((f.intercept - (512.0f64 * 513.0 / 2.0).ln()).abs() < 0.05, "{f:?}");
        assert!((f.weakest_link_slope - 38.0).abs() < 0.5);
        assert!((f.weakest_link_intercept - 512f64.ln()).abs() < 0.05);
    }

    #[test]
    fn models_are_monotone() {
        let d = pg();
        let par = ModelParams::new(512, 6, 1.36).unwrap().with_second_failure(1.33, 10, 1.6).unwrap();
        for kind in [ModelKind::WeakestLink, ModelKind::TwoTerm, ModelKind::ThreeTerm, ModelKind::Bundle] {
            let mut prev = 0.0;
            for k in 0..10_000 {
                let s = 14.0 * k as f64 / 10_000.0;
                let t = kind.eval(&d, &par, s);
                assert!((0.0..=1.0).contains(&t.pf));
                assert!(t.pf >= prev - 1e-12, "{kind:?} at {s}: {} < {prev}", t.pf);
                prev = t.pf;
            }
        }
    }

    #[test]
    fn exact_factor_basics() {
        let d = pg();
        let etas = vec![1.0; 99];
        for s in [5.0, 8.0, 9.5] {
            let p = d.fail_prob(s);
            let want = 100.0 * p * (1.0 - p).powi(99);
            assert!((exact_two_term_survival_factor(&d, &etas, s).unwrap() - want).abs() <= 1e-12 * want);
        }
        assert_eq!(exact_two_term_survival_factor(&d, &etas, 0.0).unwrap(), 0.0);
        assert!(exact_two_term_survival_factor(&d, &[], 1.0).is_err());
    }
}
