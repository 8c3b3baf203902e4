//! Deterministic weights: the inner integral is the area of a union of disks.

use super::{check_common, check_order, integrate_shape};
use crate::error::{Error, Result};
use crate::geometry::{union_area, Disk, Point};
use crate::model::{MomentResult, NetworkModel, QuadConfig, WeightDistribution};

/// `S = sum_q lambda_q |union_j D(x_j, c_q |x_j|)|` with `c_q = (P_q / P_k)^{1/alpha}`.
pub(super) struct MarpaKernel {
    tiers: Vec<(f64, f64)>,
}

impl MarpaKernel {
    pub(super) fn new(normalized: &NetworkModel, k: usize) -> Self {
        let power = |w: &WeightDistribution| match w {
            WeightDistribution::Deterministic { power } => *power,
            _ => unreachable!("checked by the caller"),
        };
        let pk = power(&normalized.tiers()[k - 1].weights);
        let alpha = normalized.alpha();
        let tiers = normalized
            .tiers()
            .iter()
            .map(|t| (t.density, (power(&t.weights) / pk).powf(1.0 / alpha)))
            .collect();
        MarpaKernel { tiers }
    }

    pub(super) fn eval(&self, pts: &[Point]) -> f64 {
        let mut disks = [Disk::new(0.0, 0.0, 0.0); 3];
        let mut s = 0.0;
        for &(lambda, c) in &self.tiers {
            for (d, x) in disks.iter_mut().zip(pts) {
                *d = Disk {
                    center: *x,
                    radius: c * x.norm(),
                };
            }
            s += lambda * union_area(&disks[..pts.len()]);
        }
        s
    }
}

/// `E[V_k^p]`, `p <= 3`, for deterministic weights in every tier.
pub fn moment_marpa(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    check_common(model, k, cfg)?;
    if !model.all_deterministic() {
        return Err(Error::NotApplicable {
            path: "moment_marpa",
            reason: "requires deterministic weights in every tier".into(),
        });
    }
    check_order(p, 3, "moment_marpa", "1..=3")?;
    let (normalized, total) = model.normalized();
    let kernel = MarpaKernel::new(&normalized, k);
    let law = &normalized.tier(k)?.weights;
    integrate_shape(p, k, law, model.alpha(), total, cfg, |pts, _| Ok(kernel.eval(pts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::mean_cell_area;
    use crate::model::TierSpec;

    fn two_tier(alpha: f64) -> NetworkModel {
        NetworkModel::new(
            vec![
                TierSpec::new(0.3, WeightDistribution::deterministic(10.0)),
                TierSpec::new(1.2, WeightDistribution::deterministic(1.0)),
            ],
            alpha,
        )
    }

    #[test]
    fn first_moment_matches_closed_form() {
        for alpha in [2.5, 4.0] {
            let m = two_tier(alpha);
            for k in 1..=2 {
                let q = moment_marpa(&m, k, 1, &QuadConfig::default()).unwrap();
                let c = mean_cell_area(&m, k).unwrap();
                assert!((q.value / c.value - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn second_moment_scales_with_density() {
        let cfg = QuadConfig::default().with_rel_tol(1e-5);
        let one = NetworkModel::single_tier(1.0, WeightDistribution::deterministic(1.0), 4.0);
        let a = moment_marpa(&one, 1, 2, &cfg).unwrap();
        let two = NetworkModel::single_tier(2.0, WeightDistribution::deterministic(1.0), 4.0);
        let b = moment_marpa(&two, 1, 2, &cfg).unwrap();
        assert!((b.value - a.value / 4.0).abs() < 1e-12 * a.value);
        assert!(a.value > 1.0 && a.value < 1.35, "{a:?}");
    }

    #[test]
    fn single_tier_does_not_depend_on_alpha_or_power() {
        let cfg = QuadConfig::default().with_rel_tol(1e-5);
        let a = moment_marpa(&NetworkModel::single_tier(1.0, WeightDistribution::deterministic(1.0), 3.0), 1, 2, &cfg)
            .unwrap();
        let b = moment_marpa(&NetworkModel::single_tier(1.0, WeightDistribution::deterministic(7.0), 5.0), 1, 2, &cfg)
            .unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn rejects_random_weights() {
        let m = NetworkModel::single_tier(1.0, WeightDistribution::exponential(1.0, 1.0), 4.0);
        assert!(matches!(
            moment_marpa(&m, 1, 2, &QuadConfig::default()),
            Err(Error::NotApplicable { .. })
        ));
    }
}
