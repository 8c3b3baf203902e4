//! Exponential weights at `alpha = 2`: the inner integral is Gaussian and closes.

use std::f64::consts::PI;

use super::{check_common, check_order, integrate_shape};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::model::{MomentResult, NetworkModel, QuadConfig, WeightDistribution};

/// One inclusion-exclusion term: the users in `subset`, their weights and positions,
/// and the effective rate `mu` of the interfering tier.
#[derive(Debug, Clone, PartialEq)]
pub struct HTermInput {
    pub weights: Vec<f64>,
    pub points: Vec<Point>,
    pub mu: f64,
}

/// `int exp(-mu sum_j beta_j |r - x_j|^2) dr` with `beta_j = w_j / |x_j|^2`, i.e.
/// `pi / (mu sum beta) exp(-mu sum w + mu |sum beta x|^2 / sum beta)`.
pub fn h_term(input: &HTermInput) -> Result<f64> {
    let HTermInput { weights, points, mu } = input;
    if weights.is_empty() || weights.len() != points.len() {
        return Err(Error::Domain("h_term needs one weight per point and at least one point".into()));
    }
    if !(*mu > 0.0) || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Domain("h_term needs positive weights and rate".into()));
    }
    if points.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::Domain("h_term is undefined for a user at the origin".into()));
    }
    let beta: Vec<f64> = weights.iter().zip(points).map(|(w, x)| w / (x.x * x.x + x.y * x.y)).collect();
    Ok(h_raw(&beta, points, *mu))
}

/// The exponent is rewritten as `-mu / sum(beta) * sum_{i<j} beta_i beta_j |x_i - x_j|^2`,
/// which avoids cancelling `sum w` against the quadratic term.
fn h_raw(beta: &[f64], points: &[Point], mu: f64) -> f64 {
    let total: f64 = beta.iter().sum();
    let mut spread = 0.0;
    for i in 0..beta.len() {
        for j in (i + 1)..beta.len() {
            let dx = points[i].x - points[j].x;
            let dy = points[i].y - points[j].y;
            spread += beta[i] * beta[j] * (dx * dx + dy * dy);
        }
    }
    PI / (mu * total) * (-mu * spread / total).exp()
}

/// `S` for the Gaussian kernel: `sum_q lambda_q sum_{J} (-1)^{|J|+1} H_J^q`.
pub(super) struct MirpaKernel {
    tiers: Vec<(f64, f64)>,
}

impl MirpaKernel {
    pub(super) fn new(normalized: &NetworkModel) -> Self {
        let tiers = normalized
            .tiers()
            .iter()
            .map(|t| match t.weights {
                WeightDistribution::Exponential { rate, power } => (t.density, rate / power),
                _ => unreachable!("checked by the caller"),
            })
            .collect();
        MirpaKernel { tiers }
    }

    pub(super) fn eval(&self, pts: &[Point], w: &[f64]) -> Result<f64> {
        let p = pts.len();
        let mut beta = [0.0; 3];
        for j in 0..p {
            beta[j] = w[j] / (pts[j].x * pts[j].x + pts[j].y * pts[j].y);
        }
        let mut sub_beta = [0.0; 3];
        let mut sub_pts = [Point::new(0.0, 0.0); 3];
        let mut s = 0.0;
        for mask in 1u32..(1 << p) {
            let mut n = 0;
            for j in 0..p {
                if mask >> j & 1 == 1 {
                    sub_beta[n] = beta[j];
                    sub_pts[n] = pts[j];
                    n += 1;
                }
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            for &(lambda, mu) in &self.tiers {
                s += sign * lambda * h_raw(&sub_beta[..n], &sub_pts[..n], mu);
            }
        }
        Ok(s)
    }
}

pub(super) fn check_mirpa(model: &NetworkModel) -> Result<()> {
    if model.alpha() != 2.0 || !model.all_exponential() {
        return Err(Error::NotApplicable {
            path: "moment_mirpa_alpha2",
            reason: "requires alpha = 2 and exponential weights in every tier".into(),
        });
    }
    Ok(())
}

/// `E[V_k^p]`, `p <= 3`, for exponential weights at `alpha = 2`.
pub fn moment_mirpa_alpha2(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    check_common(model, k, cfg)?;
    check_mirpa(model)?;
    check_order(p, 3, "moment_mirpa_alpha2", "1..=3")?;
    let (normalized, total) = model.normalized();
    let kernel = MirpaKernel::new(&normalized);
    let law = &normalized.tier(k)?.weights;
    integrate_shape(p, k, law, 2.0, total, cfg, |pts, w| kernel.eval(pts, w))
}
