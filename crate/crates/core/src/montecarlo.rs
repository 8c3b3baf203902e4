//! Palm-conditioned simulation of the network.
//!
//! Each realization places the typical tier-`k` station at the origin (index 0),
//! samples every tier as a Poisson process on a disk of radius
//! `window_radius + guard_radius`, and tests uniform points of the window for
//! association with the origin. Weights are drawn fresh for every
//! (station, point) pair.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::integrate::pairwise_sum;
use crate::model::{MCConfig, NetworkModel};

/// Environment variable overriding the number of simulation workers.
pub const THREADS_ENV: &str = "VORONOI_MOMENTS_THREADS";

/// Associated points beyond this fraction of the window radius count as boundary hits.
const BOUNDARY_FRACTION: f64 = 0.95;
/// Largest tolerated share of realizations with a boundary hit.
const MAX_BOUNDARY_SHARE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub realizations: usize,
    pub seed: u64,
}

/// Homogeneous Poisson process of the given density on the disk `|x| < radius`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, radius: f64, rng: &mut R) -> Vec<Point> {
    let mean = density * PI * radius * radius;
    let n = if mean > 0.0 {
        Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    (0..n).map(|_| uniform_in_disk(radius, rng)).collect()
}

fn uniform_in_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
    Point::new(r * c, r * s)
}

/// Station locations with their 1-based tiers; the typical station is entry 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub bs: Vec<(Point, usize)>,
}

impl Realization {
    pub fn sample<R: Rng + ?Sized>(model: &NetworkModel, k: usize, radius: f64, rng: &mut R) -> Self {
        let mut bs = vec![(Point::new(0.0, 0.0), k)];
        for (q, tier) in model.tiers().iter().enumerate() {
            bs.extend(sample_ppp(tier.density, radius, rng).into_iter().map(|x| (x, q + 1)));
        }
        Realization { bs }
    }
}

/// Index of the station maximizing `w_i |r_i - x|^-alpha` for the given weights.
/// A station at `x` itself wins; ties go to the lower index.
pub fn associate_with_weights(x: Point, realization: &Realization, alpha: f64, weights: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, ((r, _), w)) in realization.bs.iter().zip(weights).enumerate() {
        let d2 = (r.x - x.x).powi(2) + (r.y - x.y).powi(2);
        let score = if d2 == 0.0 { f64::INFINITY } else { w * d2.powf(-0.5 * alpha) };
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Association of a user at `x` with fresh weight draws for every station.
pub fn associate<R: Rng>(x: Point, realization: &Realization, model: &NetworkModel, rng: &mut R) -> usize {
    let weights: Vec<f64> = realization
        .bs
        .iter()
        .map(|(_, q)| model.tiers()[q - 1].weights.sample(rng))
        .collect();
    associate_with_weights(x, realization, model.alpha(), &weights)
}

/// Uniform grid over the stations so the competitors nearest a user are tried first.
struct Grid {
    lo: f64,
    cell: f64,
    n: usize,
    cells: Vec<Vec<usize>>,
}

impl Grid {
    fn new(realization: &Realization, radius: f64, cell: f64) -> Self {
        let n = ((2.0 * radius / cell).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); n * n];
        let mut g = Grid {
            lo: -radius,
            cell,
            n,
            cells: Vec::new(),
        };
        for (i, (x, _)) in realization.bs.iter().enumerate().skip(1) {
            let (cx, cy) = g.cell_of(*x);
            cells[cy * n + cx].push(i);
        }
        g.cells = cells;
        g
    }

    fn cell_of(&self, x: Point) -> (usize, usize) {
        let f = |v: f64| (((v - self.lo) / self.cell).floor().max(0.0) as usize).min(self.n - 1);
        (f(x.x), f(x.y))
    }
}

/// Per-realization context for the "joins the origin" test.
struct Arena<'a> {
    model: &'a NetworkModel,
    k: usize,
    realization: Realization,
    grid: Grid,
}

impl Arena<'_> {
    /// Whether a user at `x` associates with the origin, drawing weights lazily
    /// and stopping at the first station that beats it.
    fn joins_origin<R: Rng>(&self, x: Point, rng: &mut R) -> bool {
        let half_alpha = 0.5 * self.model.alpha();
        let d0 = x.x * x.x + x.y * x.y;
        if d0 == 0.0 {
            return true;
        }
        let w0 = self.model.tiers()[self.k - 1].weights.sample(rng);
        let threshold = w0 / d0.powf(half_alpha);
        let beats = |i: usize, rng: &mut R| {
            let (r, q) = self.realization.bs[i];
            let d2 = (r.x - x.x).powi(2) + (r.y - x.y).powi(2);
            let w = self.model.tiers()[q - 1].weights.sample(rng);
            d2 == 0.0 || w > threshold * d2.powf(half_alpha)
        };
        let (cx, cy) = self.grid.cell_of(x);
        let near = |gx: usize, gy: usize| gx.abs_diff(cx) <= 1 && gy.abs_diff(cy) <= 1;
        let n = self.grid.n;
        for gy in cy.saturating_sub(1)..=(cy + 1).min(n - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(n - 1) {
                for &i in &self.grid.cells[gy * n + gx] {
                    if beats(i, rng) {
                        return false;
                    }
                }
            }
        }
        for gy in 0..n {
            for gx in 0..n {
                if near(gx, gy) {
                    continue;
                }
                for &i in &self.grid.cells[gy * n + gx] {
                    if beats(i, rng) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn check(model: &NetworkModel, k: usize, cfg: &MCConfig) -> Result<()> {
    model.ensure_valid()?;
    model.ensure_planar()?;
    model.tier(k)?;
    cfg.validate()
}

fn rng_for(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs `f` for every realization index on the worker pool and returns the
/// results in index order.
fn run<F>(realizations: usize, f: F) -> Result<Vec<(f64, bool)>>
where
    F: Fn(usize) -> (f64, bool) + Sync + Send,
{
    let work = || (0..realizations).into_par_iter().map(&f).collect::<Vec<_>>();
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(work))
        }
        _ => Ok(work()),
    }
}

fn summarize(samples: &[(f64, bool)], seed: u64) -> Result<MCEstimate> {
    let n = samples.len();
    let boundary = samples.iter().filter(|s| s.1).count() as f64 / n as f64;
    if boundary > MAX_BOUNDARY_SHARE {
        return Err(Error::WindowTooSmall { fraction: boundary });
    }
    let values: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mean = pairwise_sum(&values) / n as f64;
    let squares: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = if n > 1 { pairwise_sum(&squares) / (n - 1) as f64 } else { 0.0 };
    Ok(MCEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        realizations: n,
        seed,
    })
}

/// `m (m-1) ... (m-p+1)`.
pub fn falling(m: usize, p: usize) -> f64 {
    (0..p).map(|i| m.saturating_sub(i) as f64).product()
}

/// Unbiased single-realization estimate of `V^p` from `hits` of `n` uniform points
/// in a window of area `area`, counting ordered tuples of distinct points.
pub fn u_statistic(hits: usize, n: usize, p: usize, area: f64) -> f64 {
    area.powi(p as i32) * falling(hits, p) / falling(n, p)
}

/// Monte Carlo estimate of `E[V_k^p]`.
pub fn estimate_moment(model: &NetworkModel, k: usize, p: usize, cfg: &MCConfig) -> Result<MCEstimate> {
    check(model, k, cfg)?;
    if p == 0 || cfg.points_per_realization < p + 1 {
        return Err(Error::Domain(format!(
            "order {p} needs p >= 1 and at least p + 1 points per realization, got {}",
            cfg.points_per_realization
        )));
    }
    let w = cfg.window_radius;
    let area = PI * w * w;
    let outer = w + cfg.guard_radius;
    let cell = 1.0 / model.total_density().sqrt();
    let samples = run(cfg.realizations, |idx| {
        let mut rng = rng_for(cfg.seed, idx);
        let realization = Realization::sample(model, k, outer, &mut rng);
        let arena = Arena {
            model,
            k,
            grid: Grid::new(&realization, outer, cell),
            realization,
        };
        let mut hits = 0;
        let mut boundary = false;
        for _ in 0..cfg.points_per_realization {
            let x = uniform_in_disk(w, &mut rng);
            if arena.joins_origin(x, &mut rng) {
                hits += 1;
                boundary |= x.norm() > BOUNDARY_FRACTION * w;
            }
        }
        (u_statistic(hits, cfg.points_per_realization, p, area), boundary)
    })?;
    summarize(&samples, cfg.seed)
}

/// Monte Carlo estimate of the probability that no user of a Poisson process of
/// density `user_density` associates with the typical tier-`k` station.
pub fn estimate_void_prob(model: &NetworkModel, k: usize, user_density: f64, cfg: &MCConfig) -> Result<MCEstimate> {
    check(model, k, cfg)?;
    if !(user_density > 0.0 && user_density.is_finite()) {
        return Err(Error::Domain(format!("user density must be positive, got {user_density}")));
    }
    let w = cfg.window_radius;
    let outer = w + cfg.guard_radius;
    let cell = 1.0 / model.total_density().sqrt();
    let samples = run(cfg.realizations, |idx| {
        let mut rng = rng_for(cfg.seed, idx);
        let realization = Realization::sample(model, k, outer, &mut rng);
        let arena = Arena {
            model,
            k,
            grid: Grid::new(&realization, outer, cell),
            realization,
        };
        let users = sample_ppp(user_density, w, &mut rng);
        let mut void = true;
        let mut boundary = false;
        for x in users {
            if arena.joins_origin(x, &mut rng) {
                void = false;
                boundary |= x.norm() > BOUNDARY_FRACTION * w;
            }
        }
        (if void { 1.0 } else { 0.0 }, boundary)
    })?;
    summarize(&samples, cfg.seed)
}
