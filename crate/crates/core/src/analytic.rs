//! Closed forms and series.

use std::f64::consts::FRAC_PI_2;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::integrate::{gk, CompensatedSum, Tolerance};
use crate::model::{Method, MomentResult, NetworkModel, QuadConfig, WeightDistribution};

/// `E[W^e]` for a weight law.
pub fn fractional_weight_moment(dist: &WeightDistribution, e: f64) -> Result<f64> {
    if e == 0.0 || !e.is_finite() {
        return Err(Error::Domain(format!("fractional moment exponent must be finite and nonzero, got {e}")));
    }
    let value = match dist {
        WeightDistribution::Deterministic { power } => power.powf(e),
        WeightDistribution::Exponential { rate, power } => {
            if e <= -1.0 {
                return Err(Error::MomentDiverges(format!(
                    "E[W^{e}] is infinite for exponential weights"
                )));
            }
            (power / rate).powf(e) * gamma(1.0 + e)
        }
        WeightDistribution::UserDefined(u) => (u.fractional_moment)(e),
    };
    if !value.is_finite() || value < 0.0 {
        return Err(Error::MomentDiverges(format!("E[W^{e}] = {value}")));
    }
    Ok(value)
}

/// First moment of the typical tier-`k` cell volume, in any dimension `d >= 2`:
/// `E_k[W^{d/alpha}] / sum_q lambda_q E_q[W^{d/alpha}]`.
pub fn mean_cell_area(model: &NetworkModel, k: usize) -> Result<MomentResult> {
    model.ensure_valid()?;
    model.tier(k)?;
    let e = model.dimension() as f64 / model.alpha();
    let moments = model
        .tiers()
        .iter()
        .map(|t| fractional_weight_moment(&t.weights, e))
        .collect::<Result<Vec<_>>>()?;
    let denom: f64 = model
        .tiers()
        .iter()
        .zip(&moments)
        .map(|(t, m)| t.density * m)
        .sum();
    Ok(MomentResult {
        value: moments[k - 1] / denom,
        error: 0.0,
        order: 1,
        tier: k,
        method: Method::ClosedForm,
        evaluations: 0,
        converged: true,
    })
}

/// `B(m, m) = Gamma(m)^2 / Gamma(2m)`, through log-gamma so large `m` does not underflow early.
pub fn beta_equal(m: f64) -> f64 {
    (2.0 * ln_gamma(m) - ln_gamma(2.0 * m)).exp()
}

/// Term `k` of the single-tier second-moment series at unit density.
pub fn mirpa_series_term(k: usize) -> f64 {
    let kf = k as f64;
    beta_equal(kf + 1.0) / (kf + 1.0) + 2.0 * kf * kf * beta_equal(kf + 2.0) / ((kf + 1.0) * (kf + 1.0))
}

/// Partial sum of the first `terms` series terms, scaled by `density^-2`.
pub fn mirpa_series_partial(density: f64, terms: usize) -> f64 {
    let mut s = CompensatedSum::default();
    for k in 0..terms {
        s.add(mirpa_series_term(k));
    }
    s.value() / (density * density)
}

const SERIES_MAX_TERMS: usize = 100_000;

/// Second moment of the typical cell area for a single tier with exponential weights
/// at `alpha = 2`, from the Beta-function series.
pub fn second_moment_mirpa_series(density: f64, tol: f64) -> Result<MomentResult> {
    if !(density > 0.0 && density.is_finite()) || !(tol > 0.0) {
        return Err(Error::Domain(format!("density {density} and tol {tol} must be positive")));
    }
    let mut sum = CompensatedSum::default();
    let mut prev = f64::NAN;
    for k in 0..SERIES_MAX_TERMS {
        let term = mirpa_series_term(k);
        sum.add(term);
        if k >= 2 && term < tol * sum.value() {
            let ratio = (term / prev).min(0.99);
            let tail = term * ratio / (1.0 - ratio);
            let scale = 1.0 / (density * density);
            return Ok(MomentResult {
                value: sum.value() * scale,
                error: tail * scale,
                order: 2,
                tier: 1,
                method: Method::Series,
                evaluations: k as u64 + 1,
                converged: true,
            });
        }
        prev = term;
    }
    Err(Error::NoConvergence {
        value: sum.value() / (density * density),
        error: f64::NAN,
        evaluations: SERIES_MAX_TERMS as u64,
    })
}

/// The `k`-th integrand of the angular form, after summing the inner geometric-type
/// series `sum_q (q+1)^2 x^q = (1+x)/(1-x)^3`.
pub fn phi_integrand(k: usize, phi: f64) -> f64 {
    let kf = k as f64;
    let (s, c) = phi.sin_cos();
    let sc = s * c;
    let a = 1.0 + kf * c * c;
    let b = 1.0 + kf * s * s;
    let x = kf * kf * sc * sc / (a * b);
    // 1 - x written without cancellation: ab - k^2 s^2 c^2 = 1 + k.
    let one_minus_x = (1.0 + kf) / (a * b);
    (kf + 1.0) * sc.powi(2 * k as i32 + 1) / (a * a * b * b) * (1.0 + x) / one_minus_x.powi(3)
}

const PHI_MAX_TERMS: usize = 10_000;

/// Same second moment as [`second_moment_mirpa_series`], evaluated as a sum of
/// one-dimensional angular integrals instead of the Beta series.
pub fn second_moment_mirpa_phi_integral(density: f64, cfg: &QuadConfig) -> Result<MomentResult> {
    cfg.validate()?;
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::Domain(format!("density {density} must be positive")));
    }
    let tol = Tolerance::new(0.1 * cfg.rel_tol, 0.1 * cfg.abs_tol).with_max_evals(cfg.max_evals);
    let mut sum = CompensatedSum::default();
    let mut quad_error = 0.0;
    let mut evals = 0u64;
    let mut prev = f64::NAN;
    for k in 0..PHI_MAX_TERMS {
        let e = gk::integrate(|phi| phi_integrand(k, phi), 0.0, FRAC_PI_2, tol);
        evals += e.evals;
        if !e.converged || evals > cfg.max_evals {
            return Err(Error::NoConvergence {
                value: sum.value() / (density * density),
                error: f64::NAN,
                evaluations: evals,
            });
        }
        let term = 2.0 * e.value;
        quad_error += 2.0 * e.error;
        sum.add(term);
        if k >= 2 && term < cfg.rel_tol * sum.value() {
            let ratio = (term / prev).min(0.99);
            let tail = term * ratio / (1.0 - ratio);
            let scale = 1.0 / (density * density);
            return Ok(MomentResult {
                value: sum.value() * scale,
                error: (tail + quad_error) * scale,
                order: 2,
                tier: 1,
                method: Method::Quadrature,
                evaluations: evals,
                converged: true,
            });
        }
        prev = term;
    }
    Err(Error::NoConvergence {
        value: sum.value() / (density * density),
        error: f64::NAN,
        evaluations: evals,
    })
}

/// Shape parameter of the Gamma baseline, `(7/2) E[W^{2/alpha}] E[W^{-2/alpha}]`.
pub fn gamma_zeta(dist: &WeightDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if dist.is_deterministic() {
        return Ok(3.5);
    }
    let e = 2.0 / alpha;
    let zeta = 3.5 * fractional_weight_moment(dist, e)? * fractional_weight_moment(dist, -e)?;
    if !zeta.is_finite() {
        return Err(Error::MomentDiverges(format!("zeta overflowed at alpha={alpha}")));
    }
    Ok(zeta)
}

/// Gamma law with shape `zeta` and mean `1 / density`. An infinite `zeta` is the
/// degenerate limit concentrated at `1 / density`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    pub zeta: f64,
    pub density: f64,
}

impl GammaApprox {
    pub fn new(zeta: f64, density: f64) -> Self {
        GammaApprox { zeta, density }
    }

    pub fn pdf(&self, area: f64) -> f64 {
        approx_area_pdf(area, *self)
    }

    /// `E[A^p] = Gamma(zeta + p) / (Gamma(zeta) (zeta lambda)^p)`.
    pub fn moment(&self, p: usize) -> f64 {
        let mut m = 1.0;
        for i in 0..p {
            let factor = if self.zeta.is_infinite() {
                1.0
            } else {
                (self.zeta + i as f64) / self.zeta
            };
            m *= factor / self.density;
        }
        m
    }

    pub fn void_probability(&self, user_density: f64) -> f64 {
        void_prob_approx(user_density, self.density, self.zeta)
    }
}

/// Gamma density `(zeta lambda)^zeta A^{zeta-1} e^{-zeta lambda A} / Gamma(zeta)`.
pub fn approx_area_pdf(area: f64, approx: GammaApprox) -> f64 {
    if area <= 0.0 {
        return 0.0;
    }
    let GammaApprox { zeta, density } = approx;
    let rate = zeta * density;
    let log = zeta * rate.ln() + (zeta - 1.0) * area.ln() - rate * area - ln_gamma(zeta);
    log.exp()
}

/// Laplace transform of the Gamma baseline at the user density: `(1 + lambda_0/(zeta lambda))^{-zeta}`.
pub fn void_prob_approx(user_density: f64, bs_density: f64, zeta: f64) -> f64 {
    let x = user_density / bs_density;
    if zeta.is_infinite() {
        return (-x).exp();
    }
    (-zeta * (x / zeta).ln_1p()).exp()
}
