//! Link strength distributions.
//!
//! The two grafted families join a lower tail (a power law, or a scaled
//! Weibull law) to a Gaussian core at a graft stress `σ_g`. The core branch
//! is written in the "offset minus erf" form
//!
//! ```text
//! P(σ) = P_gr + c_off − c_erf · erf(c_z · (μ − σ))      σ > σ_g
//! ```
//!
//! where `erf` is the standard error function. Both the tail coefficient and
//! `c_off` are derived from continuity at the graft point, so
//! `P(σ_g⁻) = P(σ_g⁺) = P_gr` holds exactly. `c_z` and `c_erf` are kept as
//! given; with rounded constants the law tends to `P_gr + c_off + c_erf`
//! rather than 1 at infinity (a deficit or excess of order 1e-4), which is
//! reported by [`StrengthDistribution::upper_limit`] and not renormalized.

use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use libm::{erf, erfc};
use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::ln_1m;

/// Gaussian branch shared by the grafted families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCore {
    pub mean: f64,
    pub graft_stress: f64,
    pub graft_prob: f64,
    pub core_scale: f64,
    pub erf_scale: f64,
    pub core_offset: f64,
}

impl GaussianCore {
    fn new(mean: f64, graft_stress: f64, graft_prob: f64, core_scale: f64, erf_scale: f64) -> Self {
        let core_offset = erf_scale * erf(core_scale * (mean - graft_stress));
        Self {
            mean,
            graft_stress,
            graft_prob,
            core_scale,
            erf_scale,
            core_offset,
        }
    }

    /// Scale that makes the branch reach exactly 1 at infinity.
    fn normalized_erf_scale(mean: f64, graft_stress: f64, graft_prob: f64, core_scale: f64) -> f64 {
        (1.0 - graft_prob) / (1.0 + erf(core_scale * (mean - graft_stress)))
    }

    fn limit(&self) -> f64 {
        self.graft_prob + self.core_offset + self.erf_scale
    }

    fn cdf(&self, s: f64) -> f64 {
        let v = self.graft_prob + self.core_offset - self.erf_scale * erf(self.core_scale * (self.mean - s));
        v.clamp(0.0, 1.0)
    }

    fn sf(&self, s: f64) -> f64 {
        if s <= self.mean {
            return 1.0 - self.cdf(s);
        }
        let deficit = 1.0 - self.limit();
        (deficit + self.erf_scale * erfc(self.core_scale * (s - self.mean))).clamp(0.0, 1.0)
    }

    fn pdf(&self, s: f64) -> f64 {
        if self.cdf(s) >= 1.0 {
            return 0.0;
        }
        let z = self.core_scale * (s - self.mean);
        self.erf_scale * self.core_scale * FRAC_2_SQRT_PI * (-z * z).exp()
    }

    /// Stress beyond which the branch is flat to double precision.
    fn cap(&self) -> f64 {
        self.mean + 6.0 / self.core_scale
    }

    fn inverse(&self, p: f64) -> f64 {
        let hi = self.cap();
        if p >= self.cdf(hi) {
            return hi;
        }
        root_find(|s| self.cdf(s), |s| self.pdf(s), p, self.graft_stress, hi)
    }
}

/// Gaussian core with a power-law lower tail `α (σ/μ)^m0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraftedGaussianPower {
    pub sd: f64,
    pub tail_exponent: f64,
    tail_coef: f64,
    core: GaussianCore,
}

impl GraftedGaussianPower {
    /// Builds the law with a normalized Gaussian branch (limit exactly 1).
    pub fn new(mean: f64, sd: f64, tail_exponent: f64, graft_stress: f64, graft_prob: f64) -> Result<Self> {
        check_grafted(mean, sd, graft_stress, graft_prob)?;
        let core_scale = 1.0 / (sd * SQRT_2);
        let erf_scale = GaussianCore::normalized_erf_scale(mean, graft_stress, graft_prob, core_scale);
        Self::with_core_constants(mean, sd, tail_exponent, graft_stress, graft_prob, core_scale, erf_scale)
    }

    /// Builds the law with explicit Gaussian-branch constants.
    pub fn with_core_constants(
        mean: f64,
        sd: f64,
        tail_exponent: f64,
        graft_stress: f64,
        graft_prob: f64,
        core_scale: f64,
        erf_scale: f64,
    ) -> Result<Self> {
        check_grafted(mean, sd, graft_stress, graft_prob)?;
        if !(tail_exponent > 0.0) {
            return Err(Error::InvalidInput(format!("tail exponent must be positive, got {tail_exponent}")));
        }
        check_core(core_scale, erf_scale)?;
        let tail_coef = graft_prob / (graft_stress / mean).powf(tail_exponent);
        Ok(Self {
            sd,
            tail_exponent,
            tail_coef,
            core: GaussianCore::new(mean, graft_stress, graft_prob, core_scale, erf_scale),
        })
    }

    /// Light power-law tail: N(10, 0.8²) grafted at 1.5% at 8.4 MPa, m0 = 38.
    pub fn light_tail() -> Self {
        Self::with_core_constants(10.0, 0.8, 38.0, 8.4, 0.015, 0.884, 0.504).expect("valid constants")
    }

    /// Coefficient `α` of the power-law tail, fixed by continuity.
    pub fn tail_coef(&self) -> f64 {
        self.tail_coef
    }

    pub fn core(&self) -> &GaussianCore {
        &self.core
    }

    fn ln_tail(&self, s: f64) -> f64 {
        self.tail_coef.ln() + self.tail_exponent * (s / self.core.mean).ln()
    }
}

/// Gaussian core with a scaled Weibull lower tail `c (1 − exp(−(σ/s0)^k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraftedWeibullGaussian {
    pub sd: f64,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    multiplier: f64,
    core: GaussianCore,
}

impl GraftedWeibullGaussian {
    pub fn new(
        mean: f64,
        sd: f64,
        weibull_shape: f64,
        weibull_scale: f64,
        graft_stress: f64,
        graft_prob: f64,
    ) -> Result<Self> {
        check_grafted(mean, sd, graft_stress, graft_prob)?;
        let core_scale = 1.0 / (sd * SQRT_2);
        let erf_scale = GaussianCore::normalized_erf_scale(mean, graft_stress, graft_prob, core_scale);
        Self::with_core_constants(
            mean,
            sd,
            weibull_shape,
            weibull_scale,
            graft_stress,
            graft_prob,
            core_scale,
            erf_scale,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_core_constants(
        mean: f64,
        sd: f64,
        weibull_shape: f64,
        weibull_scale: f64,
        graft_stress: f64,
        graft_prob: f64,
        core_scale: f64,
        erf_scale: f64,
    ) -> Result<Self> {
        check_grafted(mean, sd, graft_stress, graft_prob)?;
        if !(weibull_shape > 0.0 && weibull_scale > 0.0) {
            return Err(Error::InvalidInput("Weibull shape and scale must be positive".into()));
        }
        check_core(core_scale, erf_scale)?;
        let base = -(-(graft_stress / weibull_scale).powf(weibull_shape)).exp_m1();
        if graft_prob >= base * 1e6 || !(base > 0.0) {
            return Err(Error::InvalidInput("graft point incompatible with Weibull tail".into()));
        }
        Ok(Self {
            sd,
            weibull_shape,
            weibull_scale,
            multiplier: graft_prob / base,
            core: GaussianCore::new(mean, graft_stress, graft_prob, core_scale, erf_scale),
        })
    }

    /// Heavy Weibull tail (k = 10, s0 = 12 MPa) grafted at 8.955% at 8.6 MPa.
    pub fn heavy_tail() -> Self {
        Self::with_core_constants(10.0, 0.8, 10.0, 12.0, 8.6, 0.08955, 0.884, 0.474).expect("valid constants")
    }

    /// Tail multiplier `c`, fixed by continuity.
    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn core(&self) -> &GaussianCore {
        &self.core
    }

    fn tail_base(&self, s: f64) -> f64 {
        -(-(s / self.weibull_scale).powf(self.weibull_shape)).exp_m1()
    }
}

/// Two-parameter Weibull law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    pub shape: f64,
    pub scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) {
            return Err(Error::InvalidInput("Weibull shape and scale must be positive".into()));
        }
        Ok(Self { shape, scale })
    }
}

/// Gaussian law truncated to positive stresses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussian {
    pub mean: f64,
    pub sd: f64,
    lower_mass: f64,
}

impl TruncatedGaussian {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidInput("Gaussian needs finite mean and positive sd".into()));
        }
        Ok(Self {
            mean,
            sd,
            lower_mass: normal_cdf(-mean / sd),
        })
    }

    fn cdf(&self, s: f64) -> f64 {
        ((normal_cdf((s - self.mean) / self.sd) - self.lower_mass) / (1.0 - self.lower_mass)).clamp(0.0, 1.0)
    }

    fn sf(&self, s: f64) -> f64 {
        (normal_cdf((self.mean - s) / self.sd) / (1.0 - self.lower_mass)).clamp(0.0, 1.0)
    }

    fn pdf(&self, s: f64) -> f64 {
        let z = (s - self.mean) / self.sd;
        (-0.5 * z * z).exp() / (self.sd * (2.0 * std::f64::consts::PI).sqrt() * (1.0 - self.lower_mass))
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn check_grafted(mean: f64, sd: f64, graft_stress: f64, graft_prob: f64) -> Result<()> {
    if !(mean > 0.0 && sd > 0.0) {
        return Err(Error::InvalidInput("mean and sd must be positive".into()));
    }
    if !(graft_stress > 0.0 && graft_stress < mean) {
        return Err(Error::InvalidInput(format!(
            "graft stress {graft_stress} must lie in (0, mean)"
        )));
    }
    if !(graft_prob > 0.0 && graft_prob < 0.5) {
        return Err(Error::InvalidInput(format!("graft probability {graft_prob} must lie in (0, 0.5)")));
    }
    Ok(())
}

fn check_core(core_scale: f64, erf_scale: f64) -> Result<()> {
    if !(core_scale > 0.0 && erf_scale > 0.0) {
        return Err(Error::InvalidInput("Gaussian branch constants must be positive".into()));
    }
    Ok(())
}

/// Safeguarded Newton iteration for `cdf(s) = p` on `[lo, hi]`.
fn root_find<F, D>(cdf: F, pdf: D, p: f64, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = cdf(s) - p;
        if f == 0.0 || f.abs() <= 1e-13 * p {
            return s;
        }
        if f > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let d = pdf(s);
        let newton = s - f / d;
        s = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    s
}

/// Link strength law `P₁(σ)`: one of the four supported families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrengthDistribution {
    GraftedGaussianPower(GraftedGaussianPower),
    GraftedWeibullGaussian(GraftedWeibullGaussian),
    Weibull(Weibull),
    Gaussian(TruncatedGaussian),
}

impl From<GraftedGaussianPower> for StrengthDistribution {
    fn from(d: GraftedGaussianPower) -> Self {
        Self::GraftedGaussianPower(d)
    }
}

impl From<GraftedWeibullGaussian> for StrengthDistribution {
    fn from(d: GraftedWeibullGaussian) -> Self {
        Self::GraftedWeibullGaussian(d)
    }
}

impl From<Weibull> for StrengthDistribution {
    fn from(d: Weibull) -> Self {
        Self::Weibull(d)
    }
}

impl From<TruncatedGaussian> for StrengthDistribution {
    fn from(d: TruncatedGaussian) -> Self {
        Self::Gaussian(d)
    }
}

fn check_stress(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("stress must be non-negative, got {s}")));
    }
    Ok(())
}

impl StrengthDistribution {
    /// Short family name used in configs and manifests.
    pub fn family(&self) -> &'static str {
        match self {
            Self::GraftedGaussianPower(_) => "grafted-gaussian-power",
            Self::GraftedWeibullGaussian(_) => "grafted-weibull-gaussian",
            Self::Weibull(_) => "weibull",
            Self::Gaussian(_) => "gaussian",
        }
    }

    /// Failure probability `P₁(σ)`.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        check_stress(s)?;
        Ok(self.fail_prob(s))
    }

    /// Probability density; at a graft stress this is the left (tail) branch.
    pub fn pdf(&self, s: f64) -> Result<f64> {
        check_stress(s)?;
        Ok(self.pdf_limits(s).0)
    }

    /// Left and right limits of the density at `s`.
    pub fn pdf_limits(&self, s: f64) -> (f64, f64) {
        if s <= 0.0 {
            let right = self.pdf_branch(f64::MIN_POSITIVE, false);
            return (0.0, right);
        }
        (self.pdf_branch(s, true), self.pdf_branch(s, false))
    }

    fn pdf_branch(&self, s: f64, left: bool) -> f64 {
        match self {
            Self::GraftedGaussianPower(d) => {
                let in_tail = if left { s <= d.core.graft_stress } else { s < d.core.graft_stress };
                if in_tail {
                    d.tail_exponent * d.tail_coef * (s / d.core.mean).powf(d.tail_exponent) / s
                } else {
                    d.core.pdf(s)
                }
            }
            Self::GraftedWeibullGaussian(d) => {
                let in_tail = if left { s <= d.core.graft_stress } else { s < d.core.graft_stress };
                if in_tail {
                    let x = (s / d.weibull_scale).powf(d.weibull_shape);
                    d.multiplier * d.weibull_shape * x * (-x).exp() / s
                } else {
                    d.core.pdf(s)
                }
            }
            Self::Weibull(d) => {
                let x = (s / d.scale).powf(d.shape);
                d.shape * x * (-x).exp() / s
            }
            Self::Gaussian(d) => d.pdf(s),
        }
    }

    /// `P₁(σ)` for `σ ≥ 0`; negative stresses count as zero.
    pub fn fail_prob(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        match self {
            Self::GraftedGaussianPower(d) => {
                if s <= d.core.graft_stress {
                    d.tail_coef * (s / d.core.mean).powf(d.tail_exponent)
                } else {
                    d.core.cdf(s)
                }
            }
            Self::GraftedWeibullGaussian(d) => {
                if s <= d.core.graft_stress {
                    d.multiplier * d.tail_base(s)
                } else {
                    d.core.cdf(s)
                }
            }
            Self::Weibull(d) => -(-(s / d.scale).powf(d.shape)).exp_m1(),
            Self::Gaussian(d) => d.cdf(s),
        }
    }

    /// `ln P₁(σ)`, finite far below the underflow threshold of `P₁` itself.
    pub fn ln_fail_prob(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return f64::NEG_INFINITY;
        }
        match self {
            Self::GraftedGaussianPower(d) if s <= d.core.graft_stress => d.ln_tail(s),
            Self::GraftedWeibullGaussian(d) if s <= d.core.graft_stress => {
                d.multiplier.ln() + ln_weibull_base(d.weibull_shape * (s / d.weibull_scale).ln())
            }
            Self::Weibull(d) => ln_weibull_base(d.shape * (s / d.scale).ln()),
            _ => self.fail_prob(s).ln(),
        }
    }

    /// Survival probability `1 − P₁(σ)`, accurate in the upper tail.
    pub fn survival(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 1.0;
        }
        match self {
            Self::GraftedGaussianPower(d) if s > d.core.graft_stress => d.core.sf(s),
            Self::GraftedWeibullGaussian(d) if s > d.core.graft_stress => d.core.sf(s),
            Self::Weibull(d) => (-(s / d.scale).powf(d.shape)).exp(),
            Self::Gaussian(d) => d.sf(s),
            _ => 1.0 - self.fail_prob(s),
        }
    }

    /// `ln(1 − P₁(σ))`.
    pub fn ln_survival(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        match self {
            Self::Weibull(d) => -(s / d.scale).powf(d.shape),
            _ => {
                let p = self.fail_prob(s);
                if p < 0.5 {
                    ln_1m(p)
                } else {
                    self.survival(s).ln()
                }
            }
        }
    }

    /// Value approached by the law as `σ → ∞` (1 for normalized laws).
    pub fn upper_limit(&self) -> f64 {
        match self {
            Self::GraftedGaussianPower(d) => d.core.limit().min(1.0),
            Self::GraftedWeibullGaussian(d) => d.core.limit().min(1.0),
            _ => 1.0,
        }
    }

    /// Graft point `(σ_g, P_gr)` of the grafted families.
    pub fn graft_point(&self) -> Option<(f64, f64)> {
        match self {
            Self::GraftedGaussianPower(d) => Some((d.core.graft_stress, d.core.graft_prob)),
            Self::GraftedWeibullGaussian(d) => Some((d.core.graft_stress, d.core.graft_prob)),
            _ => None,
        }
    }

    /// Inverse of the cdf. Probabilities above [`Self::upper_limit`] map to the
    /// stress at which the Gaussian branch is numerically flat.
    pub fn inverse_cdf(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("probability must lie in [0, 1), got {p}")));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::GraftedGaussianPower(d) => {
                if p <= d.core.graft_prob {
                    d.core.mean * ((p.ln() - d.tail_coef.ln()) / d.tail_exponent).exp()
                } else {
                    d.core.inverse(p)
                }
            }
            Self::GraftedWeibullGaussian(d) => {
                if p <= d.core.graft_prob {
                    let x = -ln_1m(p / d.multiplier);
                    d.weibull_scale * x.powf(1.0 / d.weibull_shape)
                } else {
                    d.core.inverse(p)
                }
            }
            Self::Weibull(d) => d.scale * (-ln_1m(p)).powf(1.0 / d.shape),
            Self::Gaussian(d) => {
                let mut hi = d.mean.max(0.0) + d.sd;
                while d.cdf(hi) < p && hi < d.mean + 40.0 * d.sd {
                    hi += d.sd;
                }
                if d.cdf(hi) < p {
                    hi
                } else {
                    root_find(|s| d.cdf(s), |s| d.pdf(s), p, 0.0, hi)
                }
            }
        })
    }

    /// Inverse-transform draw from the caller's random stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.inverse_cdf(u).expect("uniform variate lies in [0, 1)")
    }
}

/// `ln(1 − e^{−x})` given `ln x`.
fn ln_weibull_base(ln_x: f64) -> f64 {
    if ln_x < -40.0 {
        ln_x - 0.5 * ln_x.exp()
    } else {
        (-(-ln_x.exp()).exp_m1()).ln()
    }
}
