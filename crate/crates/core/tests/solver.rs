mod common;

use common::{brute_force_min_distortion, H3Inverse};
use stegdist_core::distribution::solver_tolerance;
use stegdist_core::embed::sample_changes;
use stegdist_core::rng::counter_uniform;
use stegdist_core::{
    expected_distortion, solve_lambda, CostMap, DistributionModel, GrayImage, ProbabilityMap,
};

#[test]
fn exponential_solution_is_distortion_optimal() {
    let inverse = H3Inverse::new();
    for instance in 0..20u64 {
        let rho: [f64; 3] =
            std::array::from_fn(|k| 0.1 + 9.9 * counter_uniform(500 + instance, k as u64));
        let costs = CostMap::new(3, 1, rho.to_vec()).unwrap();
        let pm = solve_lambda(&costs, &[false; 3], 2.0, DistributionModel::Exponential).unwrap();
        let exp_d = expected_distortion(&costs, &pm).unwrap();
        let brute = brute_force_min_distortion(&inverse, rho, 2.0);
        assert!(
            brute >= exp_d - 1e-3,
            "instance {instance}: {brute} < {exp_d}"
        );
        // The search really reaches the optimum.
        assert!(
            brute <= exp_d + 1e-3,
            "instance {instance}: {brute} vs {exp_d}"
        );
    }
}

#[test]
fn exponential_beats_other_models_on_distortion() {
    for instance in 0..20u64 {
        let rho: Vec<f64> = (0..50)
            .map(|k| 0.1 + 9.9 * counter_uniform(instance, k))
            .collect();
        let costs = CostMap::new(50, 1, rho).unwrap();
        let sat = vec![false; 50];
        let d = |model| {
            let pm = solve_lambda(&costs, &sat, 30.0, model).unwrap();
            expected_distortion(&costs, &pm).unwrap()
        };
        let exp = d(DistributionModel::Exponential);
        for model in [DistributionModel::Linear, DistributionModel::Polynomial] {
            assert!(exp <= d(model) + 1e-9);
        }
    }
}

#[test]
fn expected_distortion_matches_monte_carlo() {
    let costs = CostMap::new(3, 1, vec![1.0, 2.0, 4.0]).unwrap();
    let pm = solve_lambda(&costs, &[false; 3], 2.0, DistributionModel::Exponential).unwrap();
    let analytic = expected_distortion(&costs, &pm).unwrap();
    assert!((analytic - 0.617_395_827_273_725_2).abs() < 1e-9);

    // Each row of a 3 x 1000 cover is one independent draw of the change map.
    let rows = 1000;
    let cover = GrayImage::filled(3, rows, 100);
    let tiled = ProbabilityMap::from_parts(
        3,
        rows,
        pm.probabilities().repeat(rows),
        vec![false; 3 * rows],
        pm.lambda(),
        pm.model(),
    );
    let runs = 1_000_000u64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for seed in 0..runs / rows as u64 {
        let cm = sample_changes(&cover, &tiled, seed).unwrap();
        for row in cm.changes().chunks(3) {
            let d: f64 = row
                .iter()
                .zip(costs.costs())
                .map(|(&s, &rho)| rho * f64::from(s.abs()))
                .sum();
            sum += d;
            sum_sq += d * d;
        }
    }
    let mean = sum / runs as f64;
    let var = sum_sq / runs as f64 - mean * mean;
    let se = (var / runs as f64).sqrt();
    assert!(
        (mean - analytic).abs() <= 3.0 * se,
        "{mean} vs {analytic} (se {se})"
    );
}

#[test]
fn constraint_on_image_sized_maps() {
    let n = 128 * 128;
    let rho: Vec<f64> = (0..n)
        .map(|k| 1e-3 + 50.0 * counter_uniform(77, k as u64).powi(3))
        .collect();
    let costs = CostMap::new(128, 128, rho).unwrap();
    let sat = vec![false; n];
    for model in DistributionModel::ALL {
        for alpha in [0.05, 0.4, 1.2] {
            let m = alpha * n as f64;
            let pm = solve_lambda(&costs, &sat, m, model).unwrap();
            let h = pm.entropy();
            if model.is_continuous() {
                assert!(
                    (h - m).abs() <= solver_tolerance(m),
                    "{model} {alpha}: {h} vs {m}"
                );
            } else {
                assert!(h >= m && h - m < stegdist_core::LOG2_3);
            }
        }
    }
}
