//! Acceptance suite: one test per shipped criterion, each pinned to its
//! stated tolerance. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` for the per-criterion detail lines).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::{Path, PathBuf};
use std::time::Instant;
use vardist::approx::{
    best_approximation, boundary_gradient_check, uniqueness_probe, uniqueness_probe_at,
};
use vardist::critsys::{build_auto, build_lp_minor_system, square_up, CriticalSystem};
use vardist::degree::nu_distance_degree;
use vardist::norms::NormSpec;
use vardist::poly::parse_polynomial;
use vardist::solver::{multistart_oracle, solve_at, SolveOutcome, TrackingConfig};
use vardist::variety::VarietySpec;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn pass(name: &str, detail: &str) {
    eprintln!("[ACCEPTANCE] {name}: PASS ({detail})");
}

fn plane_curve(text: &str, name: &str) -> VarietySpec {
    let g = parse_polynomial(text, &["y1", "y2"]).unwrap();
    VarietySpec::new(2, vec![g], 1, name).unwrap()
}

fn circle() -> VarietySpec {
    plane_curve("y1^2 + y2^2 - 1", "circle")
}

fn line() -> VarietySpec {
    plane_curve("y1 - y2", "line")
}

fn cv(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn same_y_sets(a: &SolveOutcome, b: &SolveOutcome, tol: f64) -> bool {
    if a.solutions.len() != b.solutions.len() {
        return false;
    }
    let mut used = vec![false; b.solutions.len()];
    'outer: for p in &a.solutions {
        for (j, q) in b.solutions.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = p
                .y_part
                .iter()
                .zip(&q.y_part)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            if dist < tol {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[test]
fn criterion_01_circle_ed_degree() {
    let started = Instant::now();
    let cfg = TrackingConfig::default();
    let report = nu_distance_degree(&circle(), &NormSpec::Euclidean, 8, 5, 0, &cfg).unwrap();
    assert_eq!(report.delta_hat, Some(2), "delta_hat must be 2");
    assert_eq!(report.stability, 1.0, "stability must be 1.0");
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "runtime {elapsed:.2}s exceeds 5s");
    pass(
        "circle ED degree",
        &format!("delta_hat 2, stability 1.0, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_02_ellipse_ed_degree_with_multistart_confirmation() {
    let started = Instant::now();
    let cfg = TrackingConfig::default();
    let ellipse = plane_curve("1/4*y1^2 + y2^2 - 1", "ellipse");
    let report = nu_distance_degree(&ellipse, &NormSpec::Euclidean, 8, 5, 0, &cfg).unwrap();
    assert_eq!(report.delta_hat, Some(4), "delta_hat must be 4");

    let system = build_auto(&ellipse, &NormSpec::Euclidean, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..3 {
        let x: Vec<Complex64> = (0..2)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let tracked = solve_at(&system, &x, &cfg).unwrap();
        let oracle = multistart_oracle(&system, &x, 10_000, 4.0, 77 + k, &cfg).unwrap();
        assert!(
            same_y_sets(&tracked, &oracle, 1e-6),
            "multistart oracle disagrees at x #{k}"
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 15.0, "runtime {elapsed:.2}s exceeds 15s");
    pass(
        "ellipse ED degree",
        &format!("delta_hat 4 confirmed by 10^4-start oracle at 3 points, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_03_line_l4_fiber_sigma1_and_midpoint() {
    let started = Instant::now();
    let cfg = TrackingConfig::default();
    let norm = NormSpec::LpRational { m: 2, l: 0 };
    let system = build_auto(&line(), &norm, 0).unwrap();

    // Fiber count 3 at 8 generic complex points.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..8 {
        let x: Vec<Complex64> = (0..2)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let out = solve_at(&system, &x, &cfg).unwrap();
        assert_eq!(out.smooth().count(), 3, "fiber count must be 3");
    }

    // Monodromy isolates the linear factor: sigma1 = 1.
    let report = nu_distance_degree(&line(), &norm, 8, 5, 0, &cfg).unwrap();
    assert_eq!(report.sigma1_degree, Some(1), "sigma1 must be 1");

    // The unique real solution is the hand-factored midpoint
    // (x1 + x2 - 2t divides (x1 - t)^3 + (x2 - t)^3).
    for _ in 0..100 {
        let x: Vec<f64> = (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let out = solve_at(&system, &cv(&x), &cfg).unwrap();
        let real: Vec<_> = out.smooth().filter(|s| s.is_real).collect();
        assert_eq!(real.len(), 1, "exactly one real solution");
        let mid = (x[0] + x[1]) / 2.0;
        assert!((real[0].y_part[0].re - mid).abs() < 1e-8);
        assert!((real[0].y_part[1].re - mid).abs() < 1e-8);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "runtime {elapsed:.2}s exceeds 10s");
    pass(
        "line under l4",
        &format!("fiber 3, sigma1 1, midpoint at 100 points, {elapsed:.2}s"),
    );
}

#[test]
fn criterion_04_best_approximation_circle() {
    let cfg = TrackingConfig::default();
    let result = best_approximation(&circle(), &NormSpec::Euclidean, &[3.0, 4.0], &cfg).unwrap();
    assert!((result.best.y[0] - 0.6).abs() < 1e-8);
    assert!((result.best.y[1] - 0.8).abs() < 1e-8);
    assert!((result.distance - 4.0).abs() < 1e-8);
    assert!(result.unique);

    let center = best_approximation(&circle(), &NormSpec::Euclidean, &[0.0, 0.0], &cfg).unwrap();
    assert!(!center.unique);
    assert!(center.gap.expect("at least two candidates") < 1e-6);
    pass(
        "best approximation",
        "best (0.6, 0.8) at distance 4 unique; center non-unique with gap < 1e-6",
    );
}

#[test]
fn criterion_05_implicit_norm_cross_check() {
    let cfg = TrackingConfig::default();
    let g = parse_polynomial("t^4 - z1^4 - z2^4", &["z1", "z2", "t"]).unwrap();
    let implicit = build_auto(&line(), &NormSpec::ImplicitBranch { g }, 0).unwrap();
    let direct = square_up(&build_lp_minor_system(&line(), 2), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..20 {
        let x: Vec<Complex64> = (0..2)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let a = solve_at(&implicit, &x, &cfg).unwrap();
        let b = solve_at(&direct, &x, &cfg).unwrap();
        assert!(same_y_sets(&a, &b, 1e-6), "y-sets differ at x #{k}");
        assert!(
            a.solutions.iter().all(|s| !s.on_discriminant),
            "discriminant flag raised at x #{k}"
        );
    }
    pass(
        "implicit-norm cross-check",
        "distinct-y sets match the direct l4 system at 20 points, discriminant flags off",
    );
}

/// Relative norm of the component of `grad` tangent to the variety at `y`.
fn tangential_ratio(v: &VarietySpec, y: &[f64], grad: &[f64]) -> f64 {
    let n = v.ambient_dim();
    let m = v.generators().len();
    let jac = v.jacobian();
    let yc = cv(y);
    let mut j = DMatrix::<f64>::zeros(n, m);
    for row in 0..n {
        for col in 0..m {
            j[(row, col)] = jac.at(row, col).evaluate(&yc).unwrap().re;
        }
    }
    let svd = j.svd(true, false);
    let u = svd.u.as_ref().unwrap();
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    let gv = DVector::from_column_slice(grad);
    let mut tangential = gv.clone();
    for k in 0..rank {
        let col = u.column(k);
        let coeff = col.dot(&gv);
        tangential -= col * coeff;
    }
    tangential.norm() / gv.norm().max(1e-300)
}

fn objective_gradient(
    norm: &NormSpec,
    x: &[f64],
    point: &[Complex64],
    system: &CriticalSystem,
) -> Vec<f64> {
    let y: Vec<f64> = system.y_slots().iter().map(|&j| point[j].re).collect();
    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
    match norm {
        NormSpec::Euclidean => diff,
        NormSpec::LpRational { .. } => norm.power_gradient(&diff).unwrap(),
        NormSpec::ImplicitBranch { g } => {
            let t_slot = system.num_unknowns() - 1;
            let mut zt = cv(&diff);
            zt.push(point[t_slot]);
            (0..x.len())
                .map(|j| g.differentiate(j).unwrap().evaluate(&zt).unwrap().re)
                .collect()
        }
    }
}

#[test]
fn criterion_06_critical_condition_equivalence_across_fixtures() {
    let cfg = TrackingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0usize;
    for fixture in [
        "circle.json",
        "ellipse.json",
        "line-l4.json",
        "line-implicit-l4.json",
        "cusp.json",
        "parallel-lines.json",
        "circle-p43.json",
    ] {
        let text = std::fs::read_to_string(fixtures().join(fixture)).unwrap();
        let file: vardist_cli::ProblemFile = serde_json::from_str(&text).unwrap();
        let built = vardist_cli::build_problem(file, 0).unwrap();
        for _ in 0..3 {
            let x: Vec<f64> = (0..2)
                .map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let out = solve_at(&built.system, &cv(&x), &cfg).unwrap();
            for sol in out.smooth().filter(|s| s.is_real) {
                let y: Vec<f64> = sol.y_part.iter().map(|c| c.re).collect();
                let gap: f64 = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if gap < 1e-6 {
                    continue;
                }
                let grad = objective_gradient(&built.norm, &x, &sol.point, &built.system);
                let ratio = tangential_ratio(&built.variety, &y, &grad);
                assert!(
                    ratio < 1e-6,
                    "{fixture}: tangential gradient ratio {ratio:.3e}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 20, "too few critical points exercised: {checked}");
    pass(
        "critical-condition equivalence",
        &format!("tangential gradient < 1e-6 relative at {checked} real critical points"),
    );
}

#[test]
fn criterion_07_uniqueness_probe_circle() {
    let cfg = TrackingConfig::default();
    let report = uniqueness_probe(&circle(), &NormSpec::Euclidean, 1000, 3.0, 0, &cfg).unwrap();
    assert_eq!(report.failures, 0, "all probe samples must solve");
    assert_eq!(report.unique_fraction, 1.0, "unique fraction must be 1.000");

    let forced =
        uniqueness_probe_at(&circle(), &NormSpec::Euclidean, &[vec![0.0, 0.0]], &cfg).unwrap();
    assert_eq!(forced.unique_fraction, 0.0, "center must be non-unique");
    pass(
        "uniqueness probe",
        "1000 Gaussian samples all unique; forced center non-unique",
    );
}

#[test]
fn criterion_08_boundary_gradients() {
    let cfg = TrackingConfig::default();
    // Ten points spread over the circle.
    let points: Vec<Vec<f64>> = (0..10)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 10.0;
            vec![theta.cos(), theta.sin()]
        })
        .collect();
    let worst_circle =
        boundary_gradient_check(&circle(), &NormSpec::Euclidean, 2.0, &points, &cfg).unwrap();
    assert!(worst_circle < 1e-5, "circle dist^2 gradient {worst_circle:.3e}");

    let norm = NormSpec::LpRational { m: 2, l: 0 };
    let worst_line =
        boundary_gradient_check(&line(), &norm, 4.0, &[vec![0.0, 0.0]], &cfg).unwrap();
    assert!(worst_line < 1e-5, "line dist_l4^4 gradient {worst_line:.3e}");
    pass(
        "boundary gradient",
        &format!("circle {worst_circle:.2e}, line {worst_line:.2e}, both < 1e-5"),
    );
}

#[test]
fn criterion_09_bezout_ceiling_and_determinism() {
    let cfg = TrackingConfig::default();
    let all_fixtures = [
        "circle.json",
        "ellipse.json",
        "line-l4.json",
        "line-implicit-l4.json",
        "cusp.json",
        "parallel-lines.json",
        "circle-p43.json",
    ];
    for fixture in all_fixtures {
        let text = std::fs::read_to_string(fixtures().join(fixture)).unwrap();
        let file: vardist_cli::ProblemFile = serde_json::from_str(&text).unwrap();
        let x = file.x.clone().unwrap();
        let built = vardist_cli::build_problem(file, 0).unwrap();
        let bezout = built.system.bezout_bound().unwrap();
        let out = solve_at(&built.system, &cv(&x), &cfg).unwrap();
        assert!(
            (out.solutions.len() as u64) <= bezout,
            "{fixture}: {} deduped solutions exceed Bezout {bezout}",
            out.solutions.len()
        );
    }
    // Byte-identical reports under equal seeds.
    for fixture in all_fixtures {
        let run_once = || {
            std::process::Command::new(env!("CARGO_BIN_EXE_vardist"))
                .arg("solve")
                .arg(fixtures().join(fixture))
                .args(["--seed", "11", "--no-timing"])
                .output()
                .unwrap()
        };
        let a = run_once();
        let b = run_once();
        assert_eq!(a.status.code(), Some(0), "{fixture}: solve failed");
        assert_eq!(a.stdout, b.stdout, "{fixture}: reports differ between runs");
    }
    pass(
        "Bezout ceiling and determinism",
        "counts within bound and byte-identical reports on all 7 fixtures",
    );
}

#[test]
fn criterion_10_singular_filtering_cusp() {
    let cfg = TrackingConfig::default();
    let cusp = plane_curve("y2^2 - y1^3", "cusp");
    let system = build_auto(&cusp, &NormSpec::Euclidean, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut smooth_counts = Vec::new();
    for _ in 0..8 {
        let x: Vec<Complex64> = (0..2)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let out = solve_at(&system, &x, &cfg).unwrap();
        let origin: Vec<_> = out
            .solutions
            .iter()
            .filter(|s| s.y_part.iter().all(|v| v.norm() < 1e-6))
            .collect();
        assert!(!origin.is_empty(), "origin must appear in the fiber");
        assert!(
            origin.iter().all(|s| s.is_singular_on_c),
            "origin solutions must be flagged singular"
        );
        smooth_counts.push(out.smooth().count());
    }
    let first = smooth_counts[0];
    assert!(
        smooth_counts.iter().all(|&c| c == first),
        "smooth fiber count unstable: {smooth_counts:?}"
    );
    pass(
        "singular filtering",
        &format!("origin flagged and excluded; smooth fiber count {first} across 8 points"),
    );
}
