//! Arbitrary weight laws.
//!
//! With `x_1 = (1, 0)` and `x_2 = t e(theta)`, the per-tier inner integral splits as
//! `A_1 + A_2 - C`, where `A_j = |x_j|^2 pi E[W^{2/alpha}] w_j^{-2/alpha}` is exact
//! and the cross term `C = int (1 - G(y_1)) (1 - G(y_2)) dr` is integrated in polar
//! coordinates around `x_1`, truncated where a Markov bound makes the tail negligible.

use std::f64::consts::PI;

use super::mirpa::moment_mirpa_alpha2;
use super::{check_common, check_order, integrate_shape};
use crate::analytic::fractional_weight_moment;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::integrate::{gk, Tolerance};
use crate::model::{MomentResult, NetworkModel, QuadConfig, WeightDistribution};

const MARKOV_ORDERS: [f64; 5] = [16.0, 12.0, 8.0, 6.0, 4.0];

struct TierTerm {
    lambda: f64,
    law: WeightDistribution,
    kappa: f64,
    atoms: Vec<f64>,
    support_max: Option<f64>,
    /// `(m, E[W^m])` for the finite moments among `MARKOV_ORDERS / alpha`.
    markov: Vec<(f64, f64)>,
}

struct GeneralKernel {
    alpha: f64,
    tiers: Vec<TierTerm>,
    trunc_eps: f64,
    rel_tol: f64,
}

impl GeneralKernel {
    fn new(normalized: &NetworkModel, cfg: &QuadConfig) -> Result<Self> {
        let alpha = normalized.alpha();
        let mut tiers = Vec::new();
        for t in normalized.tiers() {
            let kappa = PI * fractional_weight_moment(&t.weights, 2.0 / alpha)?;
            let markov: Vec<(f64, f64)> = MARKOV_ORDERS
                .iter()
                .map(|m| m / alpha)
                .filter_map(|m| fractional_weight_moment(&t.weights, m).ok().map(|v| (m, v)))
                .collect();
            let support_max = t.weights.support_max();
            if support_max.is_none() && markov.is_empty() {
                return Err(Error::MomentDiverges(
                    "no finite moment above 2/alpha bounds the inner tail".into(),
                ));
            }
            tiers.push(TierTerm {
                lambda: t.density,
                law: t.weights.clone(),
                kappa,
                atoms: t.weights.atoms(),
                support_max,
                markov,
            });
        }
        Ok(GeneralKernel {
            alpha,
            tiers,
            trunc_eps: cfg.trunc_eps,
            rel_tol: cfg.rel_tol,
        })
    }

    /// Radius beyond which `int (1 - G(w rho^alpha)) dr` is below `trunc_eps`.
    fn radius(&self, tier: &TierTerm, w: f64) -> Result<f64> {
        let a = self.alpha;
        if let Some(s) = tier.support_max {
            return Ok((s / w).powf(1.0 / a));
        }
        let (mut best, mut at) = (f64::INFINITY, (0.0, 0.0));
        for &(m, moment) in &tier.markov {
            let k = a * m - 2.0;
            let r = (2.0 * PI * moment * w.powf(-m) / (k * self.trunc_eps)).powf(1.0 / k);
            if r < best {
                best = r;
                at = (m, moment);
            }
        }
        // The survival function must respect its own Markov bound, otherwise the
        // inner integral cannot be trusted to decay.
        let (m, moment) = at;
        let surv = tier.law.survival(w * best.powf(a));
        let bound = moment * (w * best.powf(a)).powf(-m);
        if !best.is_finite() || surv > bound * (1.0 + 1e-9) + f64::MIN_POSITIVE {
            return Err(Error::MomentDiverges(format!(
                "weight survival {surv:e} exceeds its moment bound {bound:e}; the inner integral does not decay"
            )));
        }
        Ok(best)
    }

    fn eval(&self, pts: &[Point], w: &[f64]) -> Result<f64> {
        let e = -2.0 / self.alpha;
        if pts.len() == 1 {
            let r2 = pts[0].x * pts[0].x + pts[0].y * pts[0].y;
            return Ok(self.tiers.iter().map(|t| t.lambda * t.kappa * w[0].powf(e) * r2).sum());
        }
        let t = pts[1].norm();
        let d = pts[0].dist(pts[1]);
        let mut s = 0.0;
        for tier in &self.tiers {
            let singles = tier.kappa * (w[0].powf(e) + t * t * w[1].powf(e));
            let c = self.cross(tier, w[0], w[1], t, d, singles)?;
            s += tier.lambda * (singles - c);
        }
        Ok(s)
    }

    /// `int (1 - G(w1 |r - x1|^alpha)) (1 - G(w2 |r - x2|^alpha / t^alpha)) dr`
    /// with `|x1| = 1`, `|x2| = t`, `|x1 - x2| = d`. In the frame with `x1` at the
    /// origin and `x2` on the positive axis the integrand is even in the angle.
    fn cross(&self, tier: &TierTerm, w1: f64, w2: f64, t: f64, d: f64, singles: f64) -> Result<f64> {
        let a = self.alpha;
        let r1 = self.radius(tier, w1)?;
        let r2 = t * self.radius(tier, w2)?;
        if d >= r1 + r2 || t <= 0.0 {
            return Ok(0.0);
        }
        let mut ra: Vec<f64> = tier.atoms.iter().map(|x| (x / w1).powf(1.0 / a)).filter(|&r| r < r1).collect();
        ra.push(r1);
        let mut rb: Vec<f64> = tier.atoms.iter().map(|x| t * (x / w2).powf(1.0 / a)).filter(|&r| r < r2).collect();
        rb.push(r2);

        let psi_max = if d > r2 { (r2 / d).asin() } else { PI };
        let mut breaks = vec![0.0, psi_max];
        for &b in &rb {
            if b < d {
                breaks.push((b / d).asin());
            }
            for &ar in &ra {
                let c = (ar * ar + d * d - b * b) / (2.0 * ar * d);
                if c > -1.0 && c < 1.0 {
                    breaks.push(c.acos());
                }
            }
        }
        breaks.retain(|&x| x <= psi_max);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let target = 0.02 * self.rel_tol * singles;
        let f1 = |rho: f64| tier.law.survival(w1 * rho.powf(a));
        let f2 = |r: f64| tier.law.survival(w2 * (r / t).powf(a));
        let mut inner_failed = false;
        let mut rbreaks = Vec::with_capacity(2 * rb.len() + ra.len() + 2);
        let outer = gk::integrate_with_breaks(
            |psi: f64| {
                let (sn, cs) = psi.sin_cos();
                let h2 = d * d * sn * sn;
                let disc = r2 * r2 - h2;
                if disc <= 0.0 {
                    return 0.0;
                }
                let lo = (d * cs - disc.sqrt()).max(0.0);
                let hi = (d * cs + disc.sqrt()).min(r1);
                if hi <= lo {
                    return 0.0;
                }
                rbreaks.clear();
                rbreaks.push(lo);
                rbreaks.extend(ra.iter().copied().filter(|&r| r > lo && r < hi));
                for &b in &rb {
                    let db = b * b - h2;
                    if db > 0.0 {
                        for r in [d * cs - db.sqrt(), d * cs + db.sqrt()] {
                            if r > lo && r < hi {
                                rbreaks.push(r);
                            }
                        }
                    }
                }
                rbreaks.push(hi);
                rbreaks.sort_by(f64::total_cmp);
                let inner = gk::integrate_with_breaks(
                    |rho: f64| {
                        let r = (rho * rho - 2.0 * rho * d * cs + d * d).max(0.0).sqrt();
                        rho * f1(rho) * f2(r)
                    },
                    &rbreaks,
                    Tolerance::new(0.01 * self.rel_tol, target / (4.0 * PI)).with_max_evals(200_000),
                );
                inner_failed |= !inner.converged;
                inner.value
            },
            &breaks,
            Tolerance::new(0.01 * self.rel_tol, 0.25 * target).with_max_evals(200_000),
        );
        if !outer.converged || inner_failed {
            return Err(Error::NoConvergence {
                value: 2.0 * outer.value,
                error: 2.0 * outer.error,
                evaluations: outer.evals,
            });
        }
        Ok(2.0 * outer.value)
    }
}

/// `E[V_k^p]`, `p <= 2`, for arbitrary weight laws. Exponential weights at
/// `alpha = 2` are delegated to the closed Gaussian kernel.
pub fn moment_general(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    check_common(model, k, cfg)?;
    check_order(p, 2, "moment_general", "1..=2")?;
    if model.alpha() == 2.0 && model.all_exponential() {
        return moment_mirpa_alpha2(model, k, p, cfg);
    }
    moment_general_direct(model, k, p, cfg)
}

/// [`moment_general`] without delegation to the closed kernels.
pub fn moment_general_direct(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    check_common(model, k, cfg)?;
    check_order(p, 2, "moment_general", "1..=2")?;
    let (normalized, total) = model.normalized();
    let kernel = GeneralKernel::new(&normalized, cfg)?;
    let law = &normalized.tier(k)?.weights;
    integrate_shape(p, k, law, model.alpha(), total, cfg, |pts, w| kernel.eval(pts, w))
}
