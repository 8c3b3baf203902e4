use voronoi_moments::analytic::{mean_cell_area, second_moment_mirpa_series};
use voronoi_moments::model::{MCConfig, NetworkModel, QuadConfig, TierSpec, WeightDistribution};
use voronoi_moments::montecarlo::estimate_moment;
use voronoi_moments::quadrature::{moment_general, moment_general_direct, moment_marpa, moment_mirpa_alpha2};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn general_path_matches_union_areas_for_deterministic_weights() {
    let m = NetworkModel::new(
        vec![
            TierSpec::new(0.3, WeightDistribution::deterministic(10.0)),
            TierSpec::new(1.2, WeightDistribution::deterministic(1.0)),
        ],
        4.0,
    );
    let cfg = QuadConfig::default().with_rel_tol(1e-3);
    for k in 1..=2 {
        let g = moment_general_direct(&m, k, 2, &cfg).unwrap();
        let u = moment_marpa(&m, k, 2, &QuadConfig::default().with_rel_tol(1e-5)).unwrap();
        assert!(close(g.value, u.value, 3.0 * (g.error + u.error) + 2e-3 * u.value), "k={k}: {g:?} vs {u:?}");
    }
}

#[test]
fn general_path_matches_gaussian_kernel_at_alpha_two() {
    let m = NetworkModel::new(
        vec![
            TierSpec::new(0.5, WeightDistribution::exponential(1.0, 4.0)),
            TierSpec::new(1.0, WeightDistribution::exponential(2.0, 1.0)),
        ],
        2.0,
    );
    let cfg = QuadConfig::default().with_rel_tol(1e-2);
    for k in 1..=2 {
        let g = moment_general_direct(&m, k, 2, &cfg).unwrap();
        let h = moment_mirpa_alpha2(&m, k, 2, &QuadConfig::default()).unwrap();
        assert!(close(g.value, h.value, 2e-2 * h.value), "k={k}: {g:?} vs {h:?}");
        // The routed entry point takes the Gaussian kernel.
        let r = moment_general(&m, k, 2, &QuadConfig::default()).unwrap();
        assert_eq!(r.value, h.value);
    }
}

#[test]
fn quadrature_first_moment_matches_closed_form() {
    let m = NetworkModel::new(
        vec![
            TierSpec::new(0.2, WeightDistribution::exponential(1.0, 20.0)),
            TierSpec::new(1.0, WeightDistribution::exponential(0.5, 1.0)),
            TierSpec::new(3.0, WeightDistribution::exponential(2.0, 0.1)),
        ],
        2.0,
    );
    for k in 1..=3 {
        let c = mean_cell_area(&m, k).unwrap();
        let q = moment_mirpa_alpha2(&m, k, 1, &QuadConfig::default()).unwrap();
        assert!(close(q.value, c.value, 1e-6 * c.value), "k={k}");
    }
}

#[test]
fn quadrature_second_moment_matches_series() {
    for density in [0.5, 1.0, 5.0] {
        let m = NetworkModel::single_tier(density, WeightDistribution::exponential(1.0, 1.0), 2.0);
        let s = second_moment_mirpa_series(density, 1e-10).unwrap();
        let q = moment_mirpa_alpha2(&m, 1, 2, &QuadConfig::default()).unwrap();
        assert!(close(q.value, s.value, 1e-5 * s.value), "density={density}: {q:?} vs {s:?}");
    }
}

#[test]
fn exponential_weights_at_alpha_four_agree_with_simulation() {
    let m = NetworkModel::single_tier(1.0, WeightDistribution::exponential(1.0, 1.0), 4.0);
    let q = moment_general(&m, 1, 2, &QuadConfig::default().with_rel_tol(1e-2)).unwrap();
    let mc = estimate_moment(&m, 1, 2, &MCConfig::for_model(&m, 11, 10_000, 1_000)).unwrap();
    let tol = 3.0 * (q.error.powi(2) + mc.std_error.powi(2)).sqrt() + 1e-2 * q.value;
    assert!(close(q.value, mc.value, tol), "{q:?} vs {mc:?}");
}

#[test]
fn tier_means_partition_the_plane_in_simulation() {
    let m = NetworkModel::new(
        vec![
            TierSpec::new(0.5, WeightDistribution::exponential(1.0, 10.0)),
            TierSpec::new(1.5, WeightDistribution::exponential(1.0, 1.0)),
        ],
        4.0,
    );
    let mut sum = 0.0;
    for k in 1..=2 {
        let c = mean_cell_area(&m, k).unwrap();
        let e = estimate_moment(&m, k, 1, &MCConfig::for_model(&m, 3, 5_000, 500)).unwrap();
        assert!(close(e.value, c.value, 3.0 * e.std_error), "k={k}: {e:?} vs {c:?}");
        sum += m.tiers()[k - 1].density * c.value;
    }
    assert!(close(sum, 1.0, 1e-12));
}
