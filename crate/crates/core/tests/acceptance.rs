//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voronoi_moments::analytic::{
    mean_cell_area, second_moment_mirpa_phi_integral, second_moment_mirpa_series, void_prob_approx, GammaApprox,
};
use voronoi_moments::cli::run;
use voronoi_moments::geometry::Point;
use voronoi_moments::model::{MCConfig, NetworkModel, QuadConfig, TierSpec, WeightDistribution};
use voronoi_moments::montecarlo::{associate_with_weights, estimate_moment, estimate_void_prob, sample_ppp, Realization};
use voronoi_moments::quadrature::{moment_marpa, moment_mirpa_alpha2};
use voronoi_moments::voidprob::{laplace_from_pdf, void_prob_series};

/// Second moment of the cell area under nearest-station association at unit density,
/// computed by quadrature at relative tolerance 1e-6 and confirmed by simulation.
const MARPA_SECOND_MOMENT: f64 = 1.280176;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mirpa(density: f64, rate: f64) -> NetworkModel {
    NetworkModel::single_tier(density, WeightDistribution::exponential(rate, 1.0), 2.0)
}

fn series_second_moment() -> Outcome {
    let start = Instant::now();
    let s = second_moment_mirpa_series(1.0, 1e-10).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let phi = second_moment_mirpa_phi_integral(1.0, &QuadConfig::default()).map_err(|e| e.to_string())?;
    let rel = (phi.value / s.value - 1.0).abs();
    check(
        (s.value - 1.122).abs() <= 1e-3 && elapsed < Duration::from_secs(1) && rel <= 1e-4,
        format!("series {:.9} in {elapsed:?}, phi form rel diff {rel:.1e}", s.value),
    )
}

fn quadrature_second_moment() -> Outcome {
    let mut values = Vec::new();
    let mut ok = true;
    for rate in [0.5, 1.0, 5.0] {
        let start = Instant::now();
        let q = moment_mirpa_alpha2(&mirpa(1.0, rate), 1, 2, &QuadConfig::default()).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        ok &= (q.value / 1.122 - 1.0).abs() <= 0.01 && elapsed < Duration::from_secs(60);
        values.push(format!("mu={rate}: {:.9} ({elapsed:?})", q.value));
    }
    check(ok, values.join(", "))
}

fn closed_forms() -> Outcome {
    let mut ok = true;
    for density in [0.3, 1.0, 7.0] {
        let m = mirpa(density, 1.0);
        ok &= mean_cell_area(&m, 1).map_err(|e| e.to_string())?.value == 1.0 / density;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_sum = 0.0f64;
    let mut worst_formula = 0.0f64;
    for i in 0..100 {
        let k_count = rng.random_range(1..=4);
        let deterministic = i % 2 == 0;
        let alpha = if !deterministic && i % 4 == 1 { 2.0 } else { rng.random_range(2.1..6.0) };
        let tiers: Vec<TierSpec> = (0..k_count)
            .map(|_| {
                let power = 10f64.powf(rng.random_range(-2.0..2.0));
                let w = if deterministic {
                    WeightDistribution::deterministic(power)
                } else {
                    WeightDistribution::exponential(1.0, power)
                };
                TierSpec::new(rng.random_range(0.05..5.0), w)
            })
            .collect();
        let powers: Vec<f64> = tiers
            .iter()
            .map(|t| match t.weights {
                WeightDistribution::Deterministic { power } => power,
                WeightDistribution::Exponential { power, .. } => power,
                _ => unreachable!(),
            })
            .collect();
        let m = NetworkModel::new(tiers, alpha);
        let norm: f64 = m.tiers().iter().zip(&powers).map(|(t, p)| t.density * p.powf(2.0 / alpha)).sum();
        let mut sum = 0.0;
        for k in 1..=k_count {
            let v = mean_cell_area(&m, k).map_err(|e| e.to_string())?.value;
            sum += m.tiers()[k - 1].density * v;
            let formula = powers[k - 1].powf(2.0 / alpha) / norm;
            worst_formula = worst_formula.max((v / formula - 1.0).abs());
        }
        worst_sum = worst_sum.max((sum - 1.0).abs());
    }
    ok &= worst_sum <= 1e-12 && worst_formula <= 1e-12;
    check(ok, format!("max |sum - 1| = {worst_sum:.1e}, max formula rel diff = {worst_formula:.1e}"))
}

fn monte_carlo_oracle() -> Outcome {
    let m = mirpa(1.0, 1.0);
    let first = estimate_moment(&m, 1, 1, &MCConfig::for_model(&m, 1, 10_000, 1_000)).map_err(|e| e.to_string())?;
    let cfg = MCConfig {
        window_radius: 5.0,
        guard_radius: 5.0,
        ..MCConfig::for_model(&m, 2, 20_000, 2_000)
    };
    let second = estimate_moment(&m, 1, 2, &cfg).map_err(|e| e.to_string())?;
    let z1 = (first.value - 1.0) / first.std_error;
    let z2 = (second.value - 1.122) / second.std_error;
    check(
        z1.abs() <= 3.0 && z2.abs() <= 3.0,
        format!(
            "E[V] = {:.4} +- {:.4} (z {z1:.2}), E[V^2] = {:.4} +- {:.4} (z {z2:.2})",
            first.value, first.std_error, second.value, second.std_error
        ),
    )
}

fn marpa_second_moment() -> Outcome {
    let m = NetworkModel::single_tier(1.0, WeightDistribution::deterministic(1.0), 4.0);
    let q = moment_marpa(&m, 1, 2, &QuadConfig::default()).map_err(|e| e.to_string())?;
    let mc = estimate_moment(&m, 1, 2, &MCConfig::for_model(&m, 3, 20_000, 2_000)).map_err(|e| e.to_string())?;
    let combined = q.error + mc.std_error;
    check(
        (q.value - mc.value).abs() <= 3.0 * combined && (q.value - MARPA_SECOND_MOMENT).abs() <= 1e-5,
        format!(
            "quadrature {:.7} +- {:.1e}, simulation {:.4} +- {:.4}, golden {MARPA_SECOND_MOMENT}",
            q.value, q.error, mc.value, mc.std_error
        ),
    )
}

fn approx_compare() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("k1.json");
    std::fs::write(
        &path,
        r#"{"alpha": 2, "tiers": [{"density": 1, "weights": {"type": "exponential", "rate": 1, "power": 1}}]}"#,
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(["voronoi-moments", "approx-compare", "--config", path.to_str().unwrap()], &mut out, &mut err);
    if code != 0 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    let text = String::from_utf8(out).map_err(|e| e.to_string())?;
    let value = |method: &str| -> Option<f64> {
        text.lines()
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|f| f[2] == method)
            .and_then(|f| f[3].parse().ok())
    };
    let (Some(exact), Some(approx), Some(a), Some(b)) =
        (value("series"), value("gamma_approx"), value("rel_error_vs_exact"), value("rel_error_vs_approx"))
    else {
        return Err(format!("missing rows in\n{text}"));
    };
    let in_band = |r: f64| (0.10..=0.13).contains(&r);
    check(
        (exact - 1.122).abs() <= 1e-3 && approx == 1.0 && (in_band(a) || in_band(b)),
        format!("exact {exact:.4}, approximation {approx:.4}, rel errors {a:.4} / {b:.4}"),
    )
}

fn void_probability() -> Outcome {
    let m = mirpa(1.0, 1.0);
    let cfg = QuadConfig::default();
    let moments = [
        1.0,
        moment_mirpa_alpha2(&m, 1, 1, &cfg).map_err(|e| e.to_string())?.value,
        moment_mirpa_alpha2(&m, 1, 2, &cfg).map_err(|e| e.to_string())?.value,
        moment_mirpa_alpha2(&m, 1, 3, &cfg.with_rel_tol(1e-3)).map_err(|e| e.to_string())?.value,
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, l0) in [0.1, 0.25].into_iter().enumerate() {
        let s = void_prob_series(&moments, l0, None).map_err(|e| e.to_string())?;
        let mc_cfg = MCConfig {
            window_radius: 5.0,
            guard_radius: 5.0,
            ..MCConfig::for_model(&m, 40 + i as u64, 20_000, 2)
        };
        let mc = estimate_void_prob(&m, 1, l0, &mc_cfg).map_err(|e| e.to_string())?;
        ok &= (s.value - mc.value).abs() <= 3.0 * mc.std_error;
        detail.push(format!("l0={l0}: series {:.5}, simulation {:.5} +- {:.5}", s.value, mc.value, mc.std_error));
    }
    let mut worst = 0.0f64;
    for zeta in [3.5, 5.497_787_143_782_138] {
        let g = GammaApprox::new(zeta, 1.0);
        for i in 0..=20 {
            let l0 = 0.1 * i as f64;
            let v = laplace_from_pdf(|a| g.pdf(a), l0, &QuadConfig::default()).map_err(|e| e.to_string())?;
            worst = worst.max((v - void_prob_approx(l0, 1.0, zeta)).abs());
        }
    }
    ok &= worst <= 1e-8;
    detail.push(format!("Gamma transform max diff {worst:.1e}"));
    check(ok, detail.join(", "))
}

fn property_suites() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();

    let cfg = QuadConfig::default().with_rel_tol(1e-5);
    let base = NetworkModel::single_tier(1.0, WeightDistribution::deterministic(1.0), 4.0);
    let m2 = moment_marpa(&base, 1, 2, &cfg).map_err(|e| e.to_string())?.value;
    let mut worst = 0.0f64;
    for c in [0.5, 2.0, 4.0] {
        for (model, p) in [(base.with_scaled_densities(c), 2), (mirpa(c, 1.0), 2), (mirpa(c, 1.0), 1)] {
            let v = if model.all_deterministic() {
                moment_marpa(&model, 1, p, &cfg)
            } else {
                moment_mirpa_alpha2(&model, 1, p, &cfg)
            }
            .map_err(|e| e.to_string())?
            .value;
            let reference = if model.all_deterministic() {
                m2
            } else if p == 2 {
                moment_mirpa_alpha2(&mirpa(1.0, 1.0), 1, 2, &cfg).map_err(|e| e.to_string())?.value
            } else {
                1.0
            };
            worst = worst.max((v * c.powi(p as i32) / reference - 1.0).abs());
        }
    }
    ok &= worst <= 1e-9;
    detail.push(format!("density scaling {worst:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let two = NetworkModel::new(
        vec![
            TierSpec::new(0.5, WeightDistribution::exponential(1.0, 5.0)),
            TierSpec::new(2.0, WeightDistribution::exponential(1.0, 1.0)),
        ],
        4.0,
    );
    let mut mismatches = 0;
    for _ in 0..200 {
        let real = Realization::sample(&two, 1, 4.0, &mut rng);
        let w: Vec<f64> = (0..real.bs.len()).map(|_| rng.random_range(0.01..10.0)).collect();
        let c = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        let x = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if associate_with_weights(x, &real, 4.0, &w) != associate_with_weights(x, &real, 4.0, &scaled) {
            mismatches += 1;
        }
    }
    ok &= mismatches == 0;
    detail.push(format!("argmax mismatches {mismatches}"));

    let mut jensen = true;
    for rate in [0.5, 2.0] {
        let m = mirpa(1.0, rate);
        let v1 = mean_cell_area(&m, 1).map_err(|e| e.to_string())?.value;
        let v2 = moment_mirpa_alpha2(&m, 1, 2, &cfg).map_err(|e| e.to_string())?.value;
        jensen &= v2 >= v1 * v1;
    }
    jensen &= m2 >= 1.0;
    ok &= jensen;
    detail.push(format!("Jensen {}", if jensen { "holds" } else { "violated" }));

    let (density, radius, n) = (2.0, 3.0, 4_000);
    let mean = density * PI * radius * radius / 2.0;
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for _ in 0..n {
        let pts = sample_ppp(density, radius, &mut rng);
        let u = pts.iter().filter(|p| p.y > 0.0).count() as f64;
        upper.push(u);
        lower.push(pts.len() as f64 - u);
    }
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mu, ml) = (avg(&upper), avg(&lower));
    let var = upper.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
    let cov = upper.iter().zip(&lower).map(|(a, b)| (a - mu) * (b - ml)).sum::<f64>() / (n - 1) as f64;
    let corr = cov / var;
    let fano = var / mu;
    let se = (mean / n as f64).sqrt();
    let ppp_ok = (mu - mean).abs() <= 4.0 * se && (fano - 1.0).abs() <= 0.1 && corr.abs() <= 4.0 / (n as f64).sqrt();
    ok &= ppp_ok;
    detail.push(format!("PPP mean {mu:.2} (expected {mean:.2}), Fano {fano:.3}, half-disk correlation {corr:.3}"));

    check(ok, detail.join(", "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 series second moment", series_second_moment),
        ("2 quadrature second moment", quadrature_second_moment),
        ("3 closed-form means", closed_forms),
        ("4 Monte Carlo oracle", monte_carlo_oracle),
        ("5 nearest-station second moment", marpa_second_moment),
        ("6 Gamma approximation error", approx_compare),
        ("7 void probability", void_probability),
        ("8 property suites", property_suites),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
