//! Deterministic quadrature of the exact moment integrals.
//!
//! Every path shares one reduction. Fix `x_1 = (1, 0)` scaled by `rho` and write
//! `x_j = rho t_j e(theta_j)`. The exponent of the void probability is then
//! `rho^2 S(t, theta, w)`, so the `rho` integral is exact and
//!
//! `E[V^p] = pi (p-1)! int prod_j t_j dt_j dtheta_j E_w[S^-p]`.
//!
//! Relabelling so that `x_1` is the farthest point restricts `t_j` to `[0, 1]`
//! (factor `p`), and reflecting about the axis of `x_1` restricts `theta_2` to
//! `[0, pi]` (factor 2). The paths differ only in how `S` is computed.

mod general;
mod marpa;
mod mirpa;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::integrate::{cubature, gauss, Tolerance};
use crate::model::{Method, MomentResult, NetworkModel, QuadConfig, WeightDistribution};

pub use general::{moment_general, moment_general_direct};
pub use marpa::moment_marpa;
pub use mirpa::{h_term, moment_mirpa_alpha2, HTermInput};

fn check_order(p: usize, max: usize, path: &'static str, allowed: &'static str) -> Result<()> {
    if p == 0 || p > max {
        return Err(Error::UnsupportedOrder { order: p, path, allowed });
    }
    Ok(())
}

fn check_common(model: &NetworkModel, k: usize, cfg: &QuadConfig) -> Result<()> {
    model.ensure_valid()?;
    model.ensure_planar()?;
    model.tier(k)?;
    cfg.validate()
}

/// A cubature rule for `E[f(W_1, .., W_p)]` over iid weights: `nodes` holds `p`
/// coordinates per point.
struct WeightRule {
    nodes: Vec<f64>,
    omega: Vec<f64>,
}

impl WeightRule {
    fn len(&self) -> usize {
        self.omega.len()
    }
}

/// Exponential laws use the sum `s = sum w_j` and the simplex point `v = w / s`:
/// `S^-p` is close to `s^gamma` times a smooth function of `(s, v)`, so a
/// generalized Laguerre rule in `s` and Gauss-Legendre on the (collapsed) simplex
/// converge quickly. Other laws use a tensor product of the one-dimensional rule.
fn weight_rule(law: &WeightDistribution, p: usize, order: usize, gamma: f64) -> WeightRule {
    let mut nodes = Vec::new();
    let mut omega = Vec::new();
    match law {
        WeightDistribution::Exponential { rate, power } if p > 1 => {
            let scale = power / rate;
            let radial = gauss::laguerre_generalized(order, (p - 1) as f64 + gamma);
            let leg: Vec<(f64, f64)> = gauss::legendre(order)
                .into_iter()
                .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
                .collect();
            let simplex = if p == 3 { simplex_rule(&leg) } else { Vec::new() };
            for &(sz, sw) in &radial {
                let sw = sw * sz.powf(-gamma);
                if p == 2 {
                    for &(v, vw) in &leg {
                        nodes.extend([scale * sz * v, scale * sz * (1.0 - v)]);
                        omega.push(sw * vw);
                    }
                } else {
                    for &(v, vw) in &simplex {
                        nodes.extend([scale * sz * v[0], scale * sz * v[1], scale * sz * v[2]]);
                        omega.push(sw * vw);
                    }
                }
            }
        }
        _ => {
            let one = match law {
                WeightDistribution::Exponential { rate, power } => {
                    let scale = power / rate;
                    gauss::laguerre_generalized(order, gamma)
                        .into_iter()
                        .map(|(z, w)| (z * scale, w * z.powf(-gamma)))
                        .collect()
                }
                _ => law.expectation_rule(order),
            };
            let n = one.len();
            let mut idx = vec![0usize; p];
            'outer: loop {
                let mut wt = 1.0;
                for &i in &idx {
                    nodes.push(one[i].0);
                    wt *= one[i].1;
                }
                omega.push(wt);
                for slot in idx.iter_mut() {
                    *slot += 1;
                    if *slot < n {
                        continue 'outer;
                    }
                    *slot = 0;
                }
                break;
            }
        }
    }
    WeightRule { nodes, omega }
}

/// Rule on `{v >= 0, v1 + v2 + v3 = 1}` (total mass 1/2 in the `(v1, v2)` chart).
/// `S` is singular in a homogeneous way at each vertex, so the simplex is split
/// into six triangles, each with one original vertex, and each triangle is
/// collapsed onto that vertex, which makes the vertex behaviour smooth in the
/// square coordinates.
fn simplex_rule(leg: &[(f64, f64)]) -> Vec<([f64; 3], f64)> {
    let vertex = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
    let centroid = [1.0 / 3.0, 1.0 / 3.0];
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let a = vertex[i];
            let b = mid(vertex[i], vertex[j]);
            let c = centroid;
            let det = ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs();
            for &(r, wr) in leg {
                for &(u, wu) in leg {
                    let x = a[0] + r * ((1.0 - u) * (b[0] - a[0]) + u * (c[0] - a[0]));
                    let y = a[1] + r * ((1.0 - u) * (b[1] - a[1]) + u * (c[1] - a[1]));
                    out.push(([x, y, (1.0 - x - y).max(0.0)], det * r * wr * wu));
                }
            }
        }
    }
    out
}

/// `E_w[S^-p]` under the weight rule.
fn weight_expectation<K>(rule: &WeightRule, pts: &[Point], kernel: &K) -> Result<f64>
where
    K: Fn(&[Point], &[f64]) -> Result<f64>,
{
    let p = pts.len();
    let mut total = 0.0;
    for (w, omega) in rule.nodes.chunks_exact(p).zip(&rule.omega) {
        total += omega * kernel(pts, w)?.powi(-(p as i32));
    }
    Ok(total)
}

fn points(p: usize, u: &[f64]) -> Vec<Point> {
    let mut pts = vec![Point::new(1.0, 0.0)];
    for j in 1..p {
        let (t, th) = (u[j - 1], u[p - 1 + j - 1]);
        pts.push(Point::new(t * th.cos(), t * th.sin()));
    }
    pts
}

fn jacobian(p: usize, u: &[f64]) -> f64 {
    u[..p - 1].iter().product()
}

fn prefactor(p: usize) -> f64 {
    match p {
        1 => PI,
        2 => 4.0 * PI,
        _ => 12.0 * PI,
    }
}

/// Outer box: `t_j` in `[0, 1]`, `theta_2` in `[0, pi]`, later angles in `[0, 2pi]`.
fn outer_box(p: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = vec![0.0; 2 * (p - 1)];
    let mut hi = vec![1.0; p - 1];
    hi.push(PI);
    hi.extend(std::iter::repeat_n(2.0 * PI, p - 2));
    (lo, hi)
}

fn probes(p: usize) -> Vec<Vec<f64>> {
    match p {
        1 => vec![vec![]],
        2 => vec![vec![0.35, 0.6], vec![0.8, 2.2], vec![0.97, 0.1]],
        _ => vec![vec![0.5, 0.7, 1.0, 4.0], vec![0.9, 0.3, 2.5, 1.0]],
    }
}

struct RuleChoice {
    rule: WeightRule,
    rel_error: f64,
    evals: u64,
}

/// Doubles the weight-rule order until `E_w[S^-p]` is stable at the probe configurations.
fn choose_rule<K>(p: usize, law: &WeightDistribution, gamma: f64, cfg: &QuadConfig, kernel: &K) -> Result<RuleChoice>
where
    K: Fn(&[Point], &[f64]) -> Result<f64>,
{
    if law.is_deterministic() {
        return Ok(RuleChoice {
            rule: weight_rule(law, p, 1, gamma),
            rel_error: 0.0,
            evals: 0,
        });
    }
    let max_order = if p == 3 { 16 } else { 64 };
    let mut evals = 0u64;
    let mut order = if p == 3 { 4 } else { 8 };
    let mut rule = weight_rule(law, p, order, gamma);
    loop {
        let finer = weight_rule(law, p, 2 * order, gamma);
        let mut diff = 0.0f64;
        for u in probes(p) {
            let pts = points(p, &u);
            let a = weight_expectation(&rule, &pts, kernel)?;
            let b = weight_expectation(&finer, &pts, kernel)?;
            evals += (rule.len() + finer.len()) as u64;
            diff = diff.max(((a - b) / b).abs());
        }
        if diff <= 0.25 * cfg.rel_tol {
            return Ok(RuleChoice { rule, rel_error: diff, evals });
        }
        if 2 * order >= max_order {
            return Ok(RuleChoice {
                rule: finer,
                rel_error: diff,
                evals,
            });
        }
        order *= 2;
        rule = finer;
    }
}

/// Integrates `E_w[S^-p]` over the reduced configuration space of the normalized
/// model and rescales by `total_density^-p`.
fn integrate_shape<K>(
    p: usize,
    k: usize,
    law: &WeightDistribution,
    alpha: f64,
    total_density: f64,
    cfg: &QuadConfig,
    kernel: K,
) -> Result<MomentResult>
where
    K: Fn(&[Point], &[f64]) -> Result<f64>,
{
    let gamma = 2.0 * p as f64 / alpha;
    let choice = choose_rule(p, law, gamma, cfg, &kernel)?;
    let combos = choice.rule.len() as u64;
    let pre = prefactor(p);
    let scale = total_density.powi(-(p as i32));

    let (value, error, outer_evals, converged) = if p == 1 {
        let v = weight_expectation(&choice.rule, &points(1, &[]), &kernel)?;
        (pre * v, 0.0, 1u64, true)
    } else {
        let mut failure: Option<Error> = None;
        let (lo, hi) = outer_box(p);
        let budget = (cfg.max_evals / combos).max(1000);
        let tol = Tolerance::new(cfg.rel_tol, cfg.abs_tol / pre).with_max_evals(budget);
        let est = cubature::integrate(
            |u| {
                if failure.is_some() {
                    return 0.0;
                }
                let pts = points(p, u);
                match weight_expectation(&choice.rule, &pts, &kernel) {
                    Ok(v) => jacobian(p, u) * v,
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            &lo,
            &hi,
            tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        (pre * est.value, pre * est.error, est.evals, est.converged)
    };
    let error = error + value.abs() * choice.rel_error;
    let evaluations = outer_evals * combos + choice.evals;
    let value = value * scale;
    let error = error * scale;
    if !converged || choice.rel_error > cfg.rel_tol {
        return Err(Error::NoConvergence {
            value,
            error,
            evaluations,
        });
    }
    Ok(MomentResult {
        value,
        error,
        order: p,
        tier: k,
        method: Method::Quadrature,
        evaluations,
        converged: true,
    })
}
