//! System-model types shared by the closed-form, quadrature and simulation paths.
//!
//! A network is a superposition of independent homogeneous Poisson point processes
//! (tiers). Every (base station, user) pair carries an independent random weight
//! drawn from the base station's tier law, and a user joins the station maximizing
//! `w * |r - x|^-alpha`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::gauss;

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MomentFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// Path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss(f64);

impl PathLoss {
    pub fn new(alpha: f64) -> Self {
        PathLoss(alpha)
    }

    pub fn alpha(self) -> f64 {
        self.0
    }
}

/// A weight law given only through its CDF, fractional moments and a sampler.
#[derive(Clone)]
pub struct UserWeights {
    pub cdf: CdfFn,
    pub fractional_moment: MomentFn,
    pub sampler: SamplerFn,
    /// Locations of CDF jumps, used as integration breakpoints.
    pub atoms: Vec<f64>,
}

impl fmt::Debug for UserWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserWeights")
            .field("atoms", &self.atoms)
            .finish_non_exhaustive()
    }
}

/// Law of the association weights of one tier.
#[derive(Debug, Clone)]
pub enum WeightDistribution {
    /// `w = power` almost surely (average received power association).
    Deterministic { power: f64 },
    /// `w = power * h` with `h ~ Exp(rate)` (instantaneous received power under Rayleigh fading).
    Exponential { rate: f64, power: f64 },
    UserDefined(UserWeights),
}

impl WeightDistribution {
    pub fn deterministic(power: f64) -> Self {
        WeightDistribution::Deterministic { power }
    }

    pub fn exponential(rate: f64, power: f64) -> Self {
        WeightDistribution::Exponential { rate, power }
    }

    pub fn user_defined(
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fractional_moment: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sampler: impl Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WeightDistribution::UserDefined(UserWeights {
            cdf: Arc::new(cdf),
            fractional_moment: Arc::new(fractional_moment),
            sampler: Arc::new(sampler),
            atoms: Vec::new(),
        })
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, WeightDistribution::Deterministic { .. })
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self, WeightDistribution::Exponential { .. })
    }

    /// `G(w) = P(W <= w)`.
    pub fn cdf(&self, w: f64) -> f64 {
        match self {
            WeightDistribution::Deterministic { power } => {
                if w >= *power {
                    1.0
                } else {
                    0.0
                }
            }
            WeightDistribution::Exponential { rate, power } => {
                if w <= 0.0 {
                    0.0
                } else {
                    -(-rate * w / power).exp_m1()
                }
            }
            WeightDistribution::UserDefined(u) => {
                if w <= 0.0 {
                    0.0
                } else {
                    (u.cdf)(w).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// `1 - G(w)`, computed without cancellation where the law allows it.
    pub fn survival(&self, w: f64) -> f64 {
        match self {
            WeightDistribution::Exponential { rate, power } => {
                if w <= 0.0 {
                    1.0
                } else {
                    (-rate * w / power).exp()
                }
            }
            _ => 1.0 - self.cdf(w),
        }
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        match self {
            WeightDistribution::Deterministic { power } => *power,
            WeightDistribution::Exponential { rate, power } => {
                let h: f64 = rng.sample(Exp1);
                h * power / rate
            }
            WeightDistribution::UserDefined(u) => (u.sampler)(rng as &mut dyn RngCore),
        }
    }

    /// Jump locations of the CDF.
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            WeightDistribution::Deterministic { power } => vec![*power],
            WeightDistribution::Exponential { .. } => Vec::new(),
            WeightDistribution::UserDefined(u) => u.atoms.clone(),
        }
    }

    /// Smallest `w` with `G(w) = 1`, when finite and known.
    pub fn support_max(&self) -> Option<f64> {
        match self {
            WeightDistribution::Deterministic { power } => Some(*power),
            _ => None,
        }
    }

    /// Generalized inverse `inf { w : G(w) >= u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            WeightDistribution::Deterministic { power } => *power,
            WeightDistribution::Exponential { rate, power } => -(-u).ln_1p() * power / rate,
            WeightDistribution::UserDefined(_) => {
                let mut lo = 0.0;
                let mut hi = 1.0;
                while self.cdf(hi) < u && hi < 1e300 {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) >= u {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 1e-15 * hi {
                        break;
                    }
                }
                hi
            }
        }
    }

    /// Law of `c * W`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            WeightDistribution::Deterministic { power } => {
                WeightDistribution::Deterministic { power: power * c }
            }
            WeightDistribution::Exponential { rate, power } => WeightDistribution::Exponential {
                rate: *rate,
                power: power * c,
            },
            WeightDistribution::UserDefined(u) => {
                let cdf = u.cdf.clone();
                let mom = u.fractional_moment.clone();
                let sampler = u.sampler.clone();
                WeightDistribution::UserDefined(UserWeights {
                    cdf: Arc::new(move |w| cdf(w / c)),
                    fractional_moment: Arc::new(move |e| c.powf(e) * mom(e)),
                    sampler: Arc::new(move |rng| c * sampler(rng)),
                    atoms: u.atoms.iter().map(|a| a * c).collect(),
                })
            }
        }
    }

    /// Nodes and weights `(w_i, omega_i)` approximating `E[f(W)] ~ sum omega_i f(w_i)`.
    ///
    /// Deterministic laws use a single node, exponential laws a Gauss-Laguerre rule of
    /// the given order, and user-defined laws Gauss-Legendre on the quantile function.
    pub fn expectation_rule(&self, order: usize) -> Vec<(f64, f64)> {
        match self {
            WeightDistribution::Deterministic { power } => vec![(*power, 1.0)],
            WeightDistribution::Exponential { rate, power } => {
                let scale = power / rate;
                gauss::laguerre(order)
                    .into_iter()
                    .map(|(x, w)| (x * scale, w))
                    .collect()
            }
            WeightDistribution::UserDefined(_) => gauss::legendre(order)
                .into_iter()
                .map(|(x, w)| (self.quantile(0.5 * (x + 1.0)), 0.5 * w))
                .collect(),
        }
    }

    fn parameters_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            WeightDistribution::Deterministic { power } => ok(*power),
            WeightDistribution::Exponential { rate, power } => ok(*rate) && ok(*power),
            WeightDistribution::UserDefined(_) => true,
        }
    }
}

/// One tier: a homogeneous PPP of base stations sharing a weight law.
#[derive(Debug, Clone)]
pub struct TierSpec {
    pub density: f64,
    pub weights: WeightDistribution,
}

impl TierSpec {
    pub fn new(density: f64, weights: WeightDistribution) -> Self {
        TierSpec { density, weights }
    }
}

/// A model invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NoTiers,
    AlphaOutOfRange { alpha: f64 },
    DimensionOutOfRange { dimension: u32 },
    NonPositiveDensity { tier: usize },
    InvalidWeightParameter { tier: usize },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::NoTiers => "no_tiers",
            Violation::AlphaOutOfRange { .. } => "alpha_out_of_range",
            Violation::DimensionOutOfRange { .. } => "dimension_out_of_range",
            Violation::NonPositiveDensity { .. } => "non_positive_density",
            Violation::InvalidWeightParameter { .. } => "invalid_weight_parameter",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoTiers => write!(f, "no_tiers"),
            Violation::AlphaOutOfRange { alpha } => write!(f, "alpha_out_of_range (alpha={alpha})"),
            Violation::DimensionOutOfRange { dimension } => {
                write!(f, "dimension_out_of_range (dimension={dimension})")
            }
            Violation::NonPositiveDensity { tier } => write!(f, "non_positive_density (tier {tier})"),
            Violation::InvalidWeightParameter { tier } => {
                write!(f, "invalid_weight_parameter (tier {tier})")
            }
        }
    }
}

/// A K-tier network. Tier indices are 1-based throughout the public API.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    tiers: Vec<TierSpec>,
    pathloss: PathLoss,
    dimension: u32,
}

impl NetworkModel {
    pub fn new(tiers: Vec<TierSpec>, alpha: f64) -> Self {
        NetworkModel {
            tiers,
            pathloss: PathLoss::new(alpha),
            dimension: 2,
        }
    }

    pub fn single_tier(density: f64, weights: WeightDistribution, alpha: f64) -> Self {
        Self::new(vec![TierSpec::new(density, weights)], alpha)
    }

    pub fn with_dimension(mut self, dimension: u32) -> Self {
        self.dimension = dimension;
        self
    }

    pub fn tiers(&self) -> &[TierSpec] {
        &self.tiers
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn alpha(&self) -> f64 {
        self.pathloss.alpha()
    }

    pub fn pathloss(&self) -> PathLoss {
        self.pathloss
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn total_density(&self) -> f64 {
        self.tiers.iter().map(|t| t.density).sum()
    }

    pub fn tier(&self, k: usize) -> Result<&TierSpec> {
        if k == 0 || k > self.tiers.len() {
            return Err(Error::InvalidTier {
                tier: k,
                tiers: self.tiers.len(),
            });
        }
        Ok(&self.tiers[k - 1])
    }

    pub fn all_exponential(&self) -> bool {
        !self.tiers.is_empty() && self.tiers.iter().all(|t| t.weights.is_exponential())
    }

    pub fn all_deterministic(&self) -> bool {
        !self.tiers.is_empty() && self.tiers.iter().all(|t| t.weights.is_deterministic())
    }

    /// Same network with every tier's weight scale multiplied by `c`.
    pub fn with_scaled_powers(&self, c: f64) -> Self {
        NetworkModel {
            tiers: self
                .tiers
                .iter()
                .map(|t| TierSpec::new(t.density, t.weights.scaled(c)))
                .collect(),
            ..self.clone()
        }
    }

    /// Same network with every density multiplied by `c`.
    pub fn with_scaled_densities(&self, c: f64) -> Self {
        NetworkModel {
            tiers: self
                .tiers
                .iter()
                .map(|t| TierSpec::new(t.density * c, t.weights.clone()))
                .collect(),
            ..self.clone()
        }
    }

    /// Same network with densities divided by their total.
    pub(crate) fn normalized(&self) -> (Self, f64) {
        let total = self.total_density();
        (self.with_scaled_densities(1.0 / total), total)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.tiers.is_empty() {
            out.push(Violation::NoTiers);
        }
        let alpha = self.alpha();
        // alpha == 2 is reserved for the all-exponential kernel.
        let alpha_ok = alpha.is_finite() && (alpha > 2.0 || (alpha == 2.0 && self.all_exponential()));
        if !alpha_ok {
            out.push(Violation::AlphaOutOfRange { alpha });
        }
        if self.dimension < 2 {
            out.push(Violation::DimensionOutOfRange {
                dimension: self.dimension,
            });
        }
        for (i, t) in self.tiers.iter().enumerate() {
            if !(t.density.is_finite() && t.density > 0.0) {
                out.push(Violation::NonPositiveDensity { tier: i + 1 });
            }
            if !t.weights.parameters_valid() {
                out.push(Violation::InvalidWeightParameter { tier: i + 1 });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(v))
        }
    }

    pub(crate) fn ensure_planar(&self) -> Result<()> {
        if self.dimension != 2 {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Series,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Series => "series",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed moment `E[V_k^p]` with its absolute error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentResult {
    pub value: f64,
    pub error: f64,
    pub order: usize,
    pub tier: usize,
    pub method: Method,
    pub evaluations: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bound on the neglected tail of every truncated inner integral.
    pub trunc_eps: f64,
    pub max_evals: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-6,
            abs_tol: 1e-10,
            trunc_eps: 1e-9,
            max_evals: 100_000_000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.rel_tol) && ok(self.abs_tol) && ok(self.trunc_eps) && self.max_evals > 0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid quadrature config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub seed: u64,
    pub realizations: usize,
    pub points_per_realization: usize,
    pub window_radius: f64,
    pub guard_radius: f64,
}

impl MCConfig {
    /// Default geometry: a window of radius `6 / sqrt(pi * lambda_tot)` and an equal guard band.
    pub fn for_model(model: &NetworkModel, seed: u64, realizations: usize, points: usize) -> Self {
        let window = default_window_radius(model.total_density());
        MCConfig {
            seed,
            realizations,
            points_per_realization: points,
            window_radius: window,
            guard_radius: window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fine = self.realizations >= 1
            && self.points_per_realization >= 2
            && self.window_radius.is_finite()
            && self.window_radius > 0.0
            && self.guard_radius.is_finite()
            && self.guard_radius >= self.window_radius;
        if fine {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid Monte Carlo config {self:?}")))
        }
    }
}

pub fn default_window_radius(total_density: f64) -> f64 {
    6.0 / (total_density * std::f64::consts::PI).sqrt()
}
