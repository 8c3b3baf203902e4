//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{gamma_zeta, mean_cell_area, second_moment_mirpa_series, void_prob_approx, GammaApprox};
use crate::error::{Error, Result};
use crate::model::{default_window_radius, MCConfig, MomentResult, NetworkModel, QuadConfig, TierSpec, WeightDistribution};
use crate::montecarlo::{estimate_moment, estimate_void_prob, MCEstimate};
use crate::quadrature::{moment_general, moment_marpa, moment_mirpa_alpha2};
use crate::voidprob::void_prob_series;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const CSV_HEADER: &str = "tier,order,method,value,error,evals,converged,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Mean,
    Moment,
    Voidprob,
    ApproxCompare,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Series,
    Quadrature,
    Mc,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "voronoi-moments", version, about = "Moments of typical Voronoi cell areas in K-tier networks")]
pub struct Cli {
    /// Command to run (alternatively `--command`).
    #[arg(value_enum)]
    pub command: Option<Command>,

    #[arg(long = "command", value_enum, conflicts_with = "command")]
    pub command_flag: Option<Command>,

    /// JSON model and run configuration.
    #[arg(long)]
    pub config: PathBuf,

    /// Moment order (default 1, or 2 for approx-compare).
    #[arg(long)]
    pub order: Option<usize>,

    /// 1-based tier index.
    #[arg(long, default_value_t = 1)]
    pub tier: usize,

    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,

    /// Seed of the simulation paths.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightsConfig {
    Deterministic {
        #[serde(default = "one")]
        power: f64,
    },
    Exponential {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        power: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierConfig {
    pub density: f64,
    pub weights: WeightsConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub realizations: Option<usize>,
    pub points_per_realization: Option<usize>,
    pub window_radius: Option<f64>,
    pub guard_radius: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoidBlock {
    pub user_density: f64,
    #[serde(default = "three")]
    pub max_order: usize,
    /// Refuse the series when its last term exceeds this.
    pub bound_tol: Option<f64>,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(default = "two")]
    pub dimension: u32,
    pub tiers: Vec<TierConfig>,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub mc: McBlock,
    pub voidprob: Option<VoidBlock>,
}

impl RunConfig {
    pub fn model(&self) -> NetworkModel {
        let tiers = self
            .tiers
            .iter()
            .map(|t| {
                let w = match t.weights {
                    WeightsConfig::Deterministic { power } => WeightDistribution::deterministic(power),
                    WeightsConfig::Exponential { rate, power } => WeightDistribution::exponential(rate, power),
                };
                TierSpec::new(t.density, w)
            })
            .collect();
        NetworkModel::new(tiers, self.alpha).with_dimension(self.dimension)
    }

    pub fn mc_config(&self, model: &NetworkModel, seed: u64) -> MCConfig {
        let window = self.mc.window_radius.unwrap_or_else(|| default_window_radius(model.total_density()));
        MCConfig {
            seed,
            realizations: self.mc.realizations.unwrap_or(10_000),
            points_per_realization: self.mc.points_per_realization.unwrap_or(1_000),
            window_radius: window,
            guard_radius: self.mc.guard_radius.unwrap_or(window),
        }
    }
}

/// One output line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub tier: usize,
    pub order: usize,
    pub method: String,
    pub value: f64,
    pub error: f64,
    pub evals: u64,
    pub converged: bool,
    pub seed: Option<u64>,
}

impl Row {
    fn from_moment(r: &MomentResult) -> Self {
        Row {
            tier: r.tier,
            order: r.order,
            method: r.method.as_str().to_string(),
            value: r.value,
            error: r.error,
            evals: r.evaluations,
            converged: r.converged,
            seed: None,
        }
    }

    fn from_mc(tier: usize, order: usize, e: &MCEstimate) -> Self {
        Row {
            tier,
            order,
            method: "monte_carlo".into(),
            value: e.value,
            error: e.std_error,
            evals: e.realizations as u64,
            converged: true,
            seed: Some(e.seed),
        }
    }

    fn derived(tier: usize, order: usize, method: &str, value: f64, error: f64) -> Self {
        Row {
            tier,
            order,
            method: method.into(),
            value,
            error,
            evals: 0,
            converged: true,
            seed: None,
        }
    }

    fn unconverged(tier: usize, order: usize, method: &str, value: f64, error: f64, evals: u64) -> Self {
        Row {
            tier,
            order,
            method: method.into(),
            value,
            error,
            evals,
            converged: false,
            seed: None,
        }
    }
}

pub fn render_csv(rows: &[Row]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{},{},{}",
            r.tier, r.order, r.method, r.value, r.error, r.evals, r.converged, seed
        );
    }
    out
}

pub fn render_json(rows: &[Row]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Quadrature path for the model: union areas for deterministic weights, the
/// Gaussian kernel for exponential weights at `alpha = 2`, otherwise the general path.
pub fn quadrature_moment(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    if model.all_deterministic() {
        moment_marpa(model, k, p, cfg)
    } else if model.alpha() == 2.0 && model.all_exponential() {
        moment_mirpa_alpha2(model, k, p, cfg)
    } else {
        moment_general(model, k, p, cfg)
    }
}

fn series_applies(model: &NetworkModel, p: usize) -> Result<f64> {
    if p == 2 && model.num_tiers() == 1 && model.alpha() == 2.0 && model.all_exponential() {
        return Ok(model.tiers()[0].density);
    }
    Err(Error::NotApplicable {
        path: "series",
        reason: "needs a single exponential tier at alpha = 2 and order 2".into(),
    })
}

/// `E[V_k^p]` from the cheapest exact route.
fn exact_moment(model: &NetworkModel, k: usize, p: usize, cfg: &QuadConfig) -> Result<MomentResult> {
    if p == 1 {
        return mean_cell_area(model, k);
    }
    if let Ok(density) = series_applies(model, p) {
        return second_moment_mirpa_series(density, 1e-3 * cfg.rel_tol);
    }
    quadrature_moment(model, k, p, cfg)
}

/// Outcome of one requested path under `--method all`.
fn skippable(e: &Error) -> bool {
    matches!(
        e,
        Error::NotApplicable { .. } | Error::UnsupportedOrder { .. } | Error::UnsupportedDimension(_)
    )
}

struct Collector {
    rows: Vec<Row>,
    unconverged: bool,
    all: bool,
}

impl Collector {
    fn push(&mut self, r: Result<Row>, tier: usize, order: usize, method: &str) -> Result<()> {
        match r {
            Ok(row) => self.rows.push(row),
            Err(Error::NoConvergence { value, error, evaluations }) => {
                self.unconverged = true;
                self.rows.push(Row::unconverged(tier, order, method, value, error, evaluations));
            }
            Err(e) if self.all && skippable(&e) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

fn wants(method: MethodArg, m: MethodArg) -> bool {
    method == MethodArg::All || method == m
}

fn run_moment(cli: &Cli, cfg: &RunConfig, model: &NetworkModel, p: usize, c: &mut Collector) -> Result<()> {
    let k = cli.tier;
    if wants(cli.method, MethodArg::Closed) {
        let r = if p == 1 {
            mean_cell_area(model, k)
        } else {
            Err(Error::UnsupportedOrder {
                order: p,
                path: "closed",
                allowed: "1",
            })
        };
        c.push(r.map(|r| Row::from_moment(&r)), k, p, "closed_form")?;
    }
    if wants(cli.method, MethodArg::Series) {
        let r = series_applies(model, p).and_then(|density| second_moment_mirpa_series(density, 1e-3 * cfg.quad.rel_tol));
        c.push(r.map(|r| Row::from_moment(&r)), k, p, "series")?;
    }
    if wants(cli.method, MethodArg::Quadrature) {
        let r = quadrature_moment(model, k, p, &cfg.quad);
        c.push(r.map(|r| Row::from_moment(&r)), k, p, "quadrature")?;
    }
    if wants(cli.method, MethodArg::Mc) {
        let r = estimate_moment(model, k, p, &cfg.mc_config(model, cli.seed));
        c.push(r.map(|e| Row::from_mc(k, p, &e)), k, p, "monte_carlo")?;
    }
    Ok(())
}

fn run_voidprob(cli: &Cli, cfg: &RunConfig, model: &NetworkModel, c: &mut Collector) -> Result<()> {
    let k = cli.tier;
    let block = cfg
        .voidprob
        .as_ref()
        .ok_or_else(|| Error::Domain("voidprob needs a `voidprob` block with `user_density`".into()))?;
    let l0 = block.user_density;
    let top = block.max_order;
    if wants(cli.method, MethodArg::Series) || wants(cli.method, MethodArg::Quadrature) {
        let mut moments = vec![1.0];
        let mut moment_error = 0.0;
        let mut evals = 0;
        let mut coef = 1.0;
        let mut failed = None;
        for p in 1..=top {
            coef *= l0 / p as f64;
            // Third and higher orders only need to resolve the series truncation.
            let quad = if p >= 3 { cfg.quad.with_rel_tol(cfg.quad.rel_tol.max(1e-3)) } else { cfg.quad };
            match exact_moment(model, k, p, &quad) {
                Ok(m) => {
                    moments.push(m.value);
                    moment_error += coef * m.error;
                    evals += m.evaluations;
                }
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        let r = match failed {
            Some(e) => Err(e),
            None => void_prob_series(&moments, l0, block.bound_tol).map(|s| Row {
                tier: k,
                order: top,
                method: "series".into(),
                value: s.value,
                error: s.bound + moment_error,
                evals,
                converged: !s.clamped,
                seed: None,
            }),
        };
        c.push(r, k, top, "series")?;
    }
    if wants(cli.method, MethodArg::Closed) {
        let r = mean_cell_area(model, k).and_then(|mean| {
            let law = &model.tier(k)?.weights;
            let zeta = match gamma_zeta(law, model.alpha()) {
                Ok(z) => z,
                Err(Error::MomentDiverges(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            Ok(Row::derived(k, 0, "gamma_approx", void_prob_approx(l0, 1.0 / mean.value, zeta), 0.0))
        });
        c.push(r, k, 0, "gamma_approx")?;
    }
    if wants(cli.method, MethodArg::Mc) {
        let r = estimate_void_prob(model, k, l0, &cfg.mc_config(model, cli.seed));
        c.push(r.map(|e| Row::from_mc(k, 0, &e)), k, 0, "monte_carlo")?;
    }
    Ok(())
}

fn run_approx_compare(cfg: &RunConfig, model: &NetworkModel, p: usize, c: &mut Collector) -> Result<()> {
    model.ensure_valid()?;
    if model.num_tiers() != 1 {
        return Err(Error::NotApplicable {
            path: "approx-compare",
            reason: "defined for a single tier".into(),
        });
    }
    let exact = match exact_moment(model, 1, p, &cfg.quad) {
        Ok(r) => r,
        Err(Error::NoConvergence { value, error, evaluations }) => {
            c.unconverged = true;
            MomentResult {
                value,
                error,
                order: p,
                tier: 1,
                method: crate::model::Method::Quadrature,
                evaluations,
                converged: false,
            }
        }
        Err(e) => return Err(e),
    };
    let tier = &model.tiers()[0];
    // A divergent shape parameter is the degenerate limit of the Gamma law.
    let zeta = match gamma_zeta(&tier.weights, model.alpha()) {
        Ok(z) => z,
        Err(Error::MomentDiverges(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let approx = GammaApprox::new(zeta, tier.density).moment(p);
    let diff = (exact.value - approx).abs();
    c.rows.push(Row::from_moment(&exact));
    c.rows.push(Row::derived(1, p, "gamma_approx", approx, 0.0));
    c.rows.push(Row::derived(1, p, "rel_error_vs_exact", diff / exact.value, exact.error * approx / exact.value.powi(2)));
    c.rows.push(Row::derived(1, p, "rel_error_vs_approx", diff / approx, exact.error / approx));
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (program name first), runs the command and writes the table to
/// `--out` or `stdout`. Diagnostics go to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let Some(command) = cli.command.or(cli.command_flag) else {
        let _ = writeln!(stderr, "error: no command given (mean, moment, voidprob, approx-compare, validate)");
        return EXIT_INVALID;
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot read {}: {e}", cli.config.display());
            return EXIT_IO;
        }
    };
    let cfg: RunConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: invalid config {}: {e}", cli.config.display());
            return EXIT_INVALID;
        }
    };
    let model = cfg.model();
    let violations = model.validate();
    if !violations.is_empty() {
        for v in &violations {
            let _ = writeln!(stderr, "{v}");
        }
        return EXIT_INVALID;
    }
    if command == Command::Validate {
        let _ = writeln!(stdout, "valid");
        return EXIT_OK;
    }

    let mut c = Collector {
        rows: Vec::new(),
        unconverged: false,
        all: cli.method == MethodArg::All,
    };
    let result = match command {
        Command::Mean => run_moment(&cli, &cfg, &model, 1, &mut c),
        Command::Moment => run_moment(&cli, &cfg, &model, cli.order.unwrap_or(1), &mut c),
        Command::Voidprob => run_voidprob(&cli, &cfg, &model, &mut c),
        Command::ApproxCompare => run_approx_compare(&cfg, &model, cli.order.unwrap_or(2), &mut c),
        Command::Validate => unreachable!(),
    };
    if let Err(e) = result {
        let _ = writeln!(stderr, "error: {e}");
        return exit_code(&e);
    }
    if c.rows.is_empty() {
        let _ = writeln!(stderr, "error: no requested method applies to this model and order");
        return EXIT_INVALID;
    }
    let body = match cli.format {
        Format::Csv => render_csv(&c.rows),
        Format::Json => render_json(&c.rows),
    };
    if let Err(e) = emit(cli.out.as_deref(), &body, stdout) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_IO;
    }
    if c.unconverged {
        let _ = writeln!(stderr, "error: at least one path did not converge");
        return EXIT_NO_CONVERGENCE;
    }
    EXIT_OK
}

fn emit(out: Option<&Path>, body: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => stdout.write_all(body.as_bytes()),
    }
}
