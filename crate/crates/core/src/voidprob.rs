//! Probability that a typical station serves no user, from area moments or from
//! an area density.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{gk, CompensatedSum, Tolerance};
use crate::model::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoidSeries {
    /// Partial sum clamped to `[0, 1]`.
    pub value: f64,
    /// The unclamped partial sum.
    pub raw: f64,
    /// Magnitude of the last included term. A truncation indicator, not a guarantee.
    pub bound: f64,
    pub terms_used: usize,
    pub clamped: bool,
}

/// `sum_{p=0}^{P} (-lambda_0)^p E[V^p] / p!` from `moments[p] = E[V^p]`.
/// With `tol` set, fails when the last included term exceeds it.
pub fn void_prob_series(moments: &[f64], user_density: f64, tol: Option<f64>) -> Result<VoidSeries> {
    if moments.is_empty() || (moments[0] - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("moments must start with E[V^0] = 1".into()));
    }
    if !(user_density >= 0.0 && user_density.is_finite()) {
        return Err(Error::Domain(format!("user density must be non-negative, got {user_density}")));
    }
    if moments.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::Domain("moments must be finite and non-negative".into()));
    }
    let mut sum = CompensatedSum::default();
    let mut coef = 1.0;
    let mut last = 0.0;
    for (p, m) in moments.iter().enumerate() {
        if p > 0 {
            coef *= -user_density / p as f64;
        }
        last = coef * m;
        sum.add(last);
    }
    let bound = if moments.len() == 1 { 0.0 } else { last.abs() };
    if let Some(tol) = tol {
        if bound > tol {
            return Err(Error::InsufficientMoments { bound, tol });
        }
    }
    let raw = sum.value();
    let value = raw.clamp(0.0, 1.0);
    Ok(VoidSeries {
        value,
        raw,
        bound,
        terms_used: moments.len(),
        clamped: value != raw,
    })
}

/// `int_0^inf e^{-lambda_0 a} f(a) da` for an area density `f`, which must carry
/// unit mass to within `1e-6`.
pub fn laplace_from_pdf<F: Fn(f64) -> f64>(pdf: F, user_density: f64, cfg: &QuadConfig) -> Result<f64> {
    cfg.validate()?;
    if !(user_density >= 0.0 && user_density.is_finite()) {
        return Err(Error::Domain(format!("user density must be non-negative, got {user_density}")));
    }
    let tol = Tolerance::new((1e-3 * cfg.rel_tol).max(1e-14), 1e-3 * cfg.abs_tol).with_max_evals(cfg.max_evals);
    let density = |a: f64| if a > 0.0 { pdf(a) } else { 0.0 };
    let mass = gk::integrate_semi_infinite(density, 1.0, tol);
    if !mass.converged {
        return Err(Error::NoConvergence {
            value: mass.value,
            error: mass.error,
            evaluations: mass.evals,
        });
    }
    if (mass.value - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("pdf integrates to {} instead of 1", mass.value)));
    }
    if user_density == 0.0 {
        return Ok(1.0);
    }
    let e = gk::integrate_semi_infinite(|a| (-user_density * a).exp() * density(a), 1.0, tol);
    if !e.converged {
        return Err(Error::NoConvergence {
            value: e.value,
            error: e.error,
            evaluations: e.evals,
        });
    }
    Ok(e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{void_prob_approx, GammaApprox};

    #[test]
    fn series_examples() {
        let s = void_prob_series(&[1.0, 1.0, 1.122], 0.0, None).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.bound, 0.0);
        let s = void_prob_series(&[1.0, 1.0, 1.122], 0.1, None).unwrap();
        assert!((s.value - 0.90561).abs() < 1e-12);
        assert!((s.bound - 0.00561).abs() < 1e-12);
        assert_eq!(s.terms_used, 3);
        assert!(!s.clamped);
    }

    #[test]
    fn series_converges_to_gamma_transform() {
        let g = GammaApprox::new(3.5, 1.0);
        let moments: Vec<f64> = (0..=25).map(|p| g.moment(p)).collect();
        let s = void_prob_series(&moments, 0.5, None).unwrap();
        let exact = (8.0f64 / 7.0).powf(-3.5);
        assert!((s.value - exact).abs() < 1e-6, "{s:?}");
        assert!((exact - 0.626654533).abs() < 1e-9);
    }

    #[test]
    fn series_error_shrinks_with_more_terms() {
        let g = GammaApprox::new(3.5, 1.0);
        for l0 in [0.25, 0.5, 1.0] {
            let exact = void_prob_approx(l0, 1.0, 3.5);
            let mut prev = f64::INFINITY;
            for pairs in 1..8 {
                let moments: Vec<f64> = (0..=2 * pairs).map(|p| g.moment(p)).collect();
                let err = (void_prob_series(&moments, l0, None).unwrap().raw - exact).abs();
                assert!(err <= prev * 0.5 + 1e-15, "l0={l0} pairs={pairs}: {err} vs {prev}");
                prev = err;
            }
        }
    }

    #[test]
    fn series_flags_clamping_and_refuses_large_bounds() {
        let s = void_prob_series(&[1.0, 1.0], 3.0, None).unwrap();
        assert!(s.clamped && s.value == 0.0 && s.raw == -2.0);
        assert!(matches!(
            void_prob_series(&[1.0, 1.0, 1.122], 1.0, Some(1e-3)),
            Err(Error::InsufficientMoments { .. })
        ));
        assert!(matches!(void_prob_series(&[2.0], 1.0, None), Err(Error::Domain(_))));
    }

    #[test]
    fn laplace_of_gamma_density() {
        let cfg = QuadConfig::default();
        for zeta in [3.5, 5.497_787_143_782_138] {
            let g = GammaApprox::new(zeta, 1.0);
            for i in 0..=20 {
                let l0 = 0.1 * i as f64;
                let v = laplace_from_pdf(|a| g.pdf(a), l0, &cfg).unwrap();
                assert!((v - void_prob_approx(l0, 1.0, zeta)).abs() < 1e-8, "zeta={zeta} l0={l0}");
            }
        }
        let narrow = GammaApprox::new(1e4, 1.0);
        let v = laplace_from_pdf(|a| narrow.pdf(a), 1.0, &cfg).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn laplace_rejects_unnormalized_density() {
        let g = GammaApprox::new(3.5, 1.0);
        assert!(matches!(
            laplace_from_pdf(|a| 1.01 * g.pdf(a), 0.3, &QuadConfig::default()),
            Err(Error::Domain(_))
        ));
    }
}
