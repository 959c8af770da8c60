//! Best approximation from the real critical points, uniqueness-gap
//! diagnostics, non-uniqueness sampling, and boundary-gradient checks.

use crate::critsys::{build_auto, SystemError};
use crate::norms::{NormError, NormSpec};
use crate::solver::{solve_at, SolveError, TrackingConfig};
use crate::variety::{VarietyError, VarietySpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

/// Distance gaps below this are reported as non-unique rather than broken
/// arbitrarily; numerically indistinguishable ties are evidence of
/// proximity to the non-uniqueness set.
pub const GAP_TOL: f64 = 1e-6;
/// Membership tolerance for boundary-gradient base points.
pub const BOUNDARY_MEMBERSHIP_TOL: f64 = 1e-8;
/// Finite-difference step for boundary gradients.
pub const BOUNDARY_FD_STEP: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("query point has {got} coordinates, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("no real critical candidates found (solver failure or empty real locus)")]
    NoRealCandidates,
    #[error("power exponent must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("point {index} is off the variety (membership residual {residual:.3e})")]
    NotOnVariety { index: usize, residual: f64 },
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

/// One real critical point with its distance to the query.
#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub y: Vec<f64>,
    pub distance: f64,
    pub is_singular: bool,
}

/// Best-approximation outcome with uniqueness diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    pub x: Vec<f64>,
    /// All real candidates in ascending distance order; singular critical
    /// points participate but carry their flag.
    pub candidates: Vec<Candidate>,
    pub best: Candidate,
    pub distance: f64,
    /// Second-best distance minus best; absent with a single candidate.
    pub gap: Option<f64>,
    pub unique: bool,
    pub best_is_singular: bool,
    /// No path failures occurred, so minimality is certified relative to
    /// the full computed critical set.
    pub complete: bool,
    pub warnings: Vec<String>,
}

/// Solves the critical system at a real query point and minimizes the norm
/// distance over the real solutions. Singular critical points participate
/// as candidates (they are always critical) but are flagged.
pub fn best_approximation(
    v: &VarietySpec,
    norm: &NormSpec,
    x: &[f64],
    cfg: &TrackingConfig,
) -> Result<ApproxResult, ApproxError> {
    let n = v.ambient_dim();
    if x.len() != n {
        return Err(ApproxError::Arity {
            expected: n,
            got: x.len(),
        });
    }
    norm.validate(n)?;
    let system = build_auto(v, norm, cfg.gamma_seed)?;
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let out = solve_at(&system, &xc, cfg)?;

    let mut warnings = out.warnings.clone();
    let mut candidates = Vec::new();
    for sol in out.solutions.iter().filter(|s| s.is_real) {
        let y: Vec<f64> = sol.y_part.iter().map(|v| v.re).collect();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        match norm.eval(&diff) {
            Ok(distance) => candidates.push(Candidate {
                y,
                distance,
                is_singular: sol.is_singular_on_c,
            }),
            Err(NormError::NoBranchRoot) => warnings.push(
                "a real critical point fell outside the branch coverage and was skipped"
                    .to_string(),
            ),
            Err(e) => return Err(e.into()),
        }
    }
    if candidates.is_empty() {
        return Err(ApproxError::NoRealCandidates);
    }
    candidates.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    let best = candidates[0].clone();
    let gap = candidates.get(1).map(|c| c.distance - best.distance);
    let unique = gap.map_or(true, |g| g > GAP_TOL);
    if best.is_singular {
        warnings.push(
            "the best candidate is a singular point of the variety; smooth critical-point \
             optimality conditions do not certify it"
                .to_string(),
        );
    }
    let complete = out.path_failures == 0;
    if !complete {
        warnings.push(format!(
            "{} paths failed; minimality is certified only against the computed critical set",
            out.path_failures
        ));
    }
    Ok(ApproxResult {
        x: x.to_vec(),
        distance: best.distance,
        best_is_singular: best.is_singular,
        best,
        gap,
        unique,
        candidates,
        complete,
        warnings,
    })
}

/// Distance to the variety under the norm; a convenience over
/// `best_approximation`.
pub fn distance_to(
    v: &VarietySpec,
    norm: &NormSpec,
    x: &[f64],
    cfg: &TrackingConfig,
) -> Result<f64, ApproxError> {
    Ok(best_approximation(v, norm, x, cfg)?.distance)
}

/// A query point whose best approximation was numerically ambiguous.
#[derive(Debug, Clone, Serialize)]
pub struct NearTie {
    pub x: Vec<f64>,
    pub gap: Option<f64>,
}

/// Aggregate uniqueness evidence over sampled query points: empirically,
/// the set of points with a non-unique best approximation has measure
/// zero.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub unique_fraction: f64,
    pub near_ties: Vec<NearTie>,
    pub failures: usize,
}

/// Draws real Gaussian query points at the given scale and reports the
/// fraction with a unique best approximation.
pub fn uniqueness_probe(
    v: &VarietySpec,
    norm: &NormSpec,
    samples: usize,
    scale: f64,
    seed: u64,
    cfg: &TrackingConfig,
) -> Result<ProbeReport, ApproxError> {
    let n = v.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            (0..n)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    uniqueness_probe_at(v, norm, &points, cfg)
}

/// Runs the uniqueness probe over an explicit list of query points.
pub fn uniqueness_probe_at(
    v: &VarietySpec,
    norm: &NormSpec,
    points: &[Vec<f64>],
    cfg: &TrackingConfig,
) -> Result<ProbeReport, ApproxError> {
    let mut unique = 0usize;
    let mut failures = 0usize;
    let mut near_ties = Vec::new();
    for x in points {
        match best_approximation(v, norm, x, cfg) {
            Ok(result) => {
                if result.unique {
                    unique += 1;
                } else {
                    near_ties.push(NearTie {
                        x: x.clone(),
                        gap: result.gap,
                    });
                }
            }
            Err(ApproxError::NoRealCandidates) => failures += 1,
            Err(ApproxError::Solve(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    let decided = points.len() - failures;
    Ok(ProbeReport {
        samples: points.len(),
        unique_fraction: if decided > 0 {
            unique as f64 / decided as f64
        } else {
            0.0
        },
        near_ties,
        failures,
    })
}

/// Central finite differences of `x -> dist(x, C)^a` at points on the
/// variety; for `a > 1` the gradient vanishes there. Returns the maximum
/// gradient norm over the given points.
pub fn boundary_gradient_check(
    v: &VarietySpec,
    norm: &NormSpec,
    a: f64,
    points: &[Vec<f64>],
    cfg: &TrackingConfig,
) -> Result<f64, ApproxError> {
    if a <= 1.0 {
        return Err(ApproxError::BadExponent(a));
    }
    let n = v.ambient_dim();
    let mut worst = 0.0f64;
    for (index, point) in points.iter().enumerate() {
        let pc: Vec<Complex64> = point.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let residual = v.membership_residual(&pc)?;
        if residual >= BOUNDARY_MEMBERSHIP_TOL {
            return Err(ApproxError::NotOnVariety { index, residual });
        }
        let mut grad_sq_sum = 0.0f64;
        for j in 0..n {
            let mut xp = point.clone();
            let mut xm = point.clone();
            xp[j] += BOUNDARY_FD_STEP;
            xm[j] -= BOUNDARY_FD_STEP;
            let fp = distance_to(v, norm, &xp, cfg)?.powf(a);
            let fm = distance_to(v, norm, &xm, cfg)?.powf(a);
            let g = (fp - fm) / (2.0 * BOUNDARY_FD_STEP);
            grad_sq_sum += g * g;
        }
        worst = worst.max(grad_sq_sum.sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn circle() -> VarietySpec {
        let g = parse_polynomial("y1^2 + y2^2 - 1", &["y1", "y2"]).unwrap();
        VarietySpec::new(2, vec![g], 1, "circle").unwrap()
    }

    fn line() -> VarietySpec {
        let g = parse_polynomial("y1 - y2", &["y1", "y2"]).unwrap();
        VarietySpec::new(2, vec![g], 1, "line").unwrap()
    }

    fn ellipse() -> VarietySpec {
        let g = parse_polynomial("1/4*y1^2 + y2^2 - 1", &["y1", "y2"]).unwrap();
        VarietySpec::new(2, vec![g], 1, "ellipse").unwrap()
    }

    fn parallel_lines() -> VarietySpec {
        // (y1 - y2)(y1 - y2 - 2) expanded.
        let g = parse_polynomial(
            "y1^2 - 2*y1*y2 + y2^2 - 2*y1 + 2*y2",
            &["y1", "y2"],
        )
        .unwrap();
        VarietySpec::new(2, vec![g], 1, "parallel lines").unwrap()
    }

    #[test]
    fn circle_best_approximation_at_3_4() {
        let cfg = TrackingConfig::default();
        let result =
            best_approximation(&circle(), &NormSpec::Euclidean, &[3.0, 4.0], &cfg).unwrap();
        assert!((result.best.y[0] - 0.6).abs() < 1e-9);
        assert!((result.best.y[1] - 0.8).abs() < 1e-9);
        assert!((result.distance - 4.0).abs() < 1e-9);
        assert!(result.unique);
        assert_eq!(result.candidates.len(), 2);
        assert!((result.gap.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn circle_center_is_non_unique() {
        let cfg = TrackingConfig::default();
        let result =
            best_approximation(&circle(), &NormSpec::Euclidean, &[0.0, 0.0], &cfg).unwrap();
        assert!(result.candidates.len() >= 2);
        assert!((result.distance - 1.0).abs() < 1e-8);
        assert!(result.gap.unwrap() < 1e-6);
        assert!(!result.unique);
    }

    #[test]
    fn line_l4_midpoint_solution() {
        let cfg = TrackingConfig::default();
        let norm = NormSpec::LpRational { m: 2, l: 0 };
        let result = best_approximation(&line(), &norm, &[0.0, 1.0], &cfg).unwrap();
        assert!((result.best.y[0] - 0.5).abs() < 1e-8);
        assert!((result.best.y[1] - 0.5).abs() < 1e-8);
        let expect = 0.5 * 2f64.powf(0.25);
        assert!((result.distance - expect).abs() < 1e-9);
    }

    #[test]
    fn probe_circle_all_unique() {
        let cfg = TrackingConfig::default();
        let report =
            uniqueness_probe(&circle(), &NormSpec::Euclidean, 100, 3.0, 0, &cfg).unwrap();
        assert_eq!(report.unique_fraction, 1.0);
        assert!(report.near_ties.is_empty());
        assert_eq!(report.failures, 0);
    }

    #[test]
    fn probe_forced_center_not_unique() {
        let cfg = TrackingConfig::default();
        let report = uniqueness_probe_at(
            &circle(),
            &NormSpec::Euclidean,
            &[vec![0.0, 0.0]],
            &cfg,
        )
        .unwrap();
        assert_eq!(report.unique_fraction, 0.0);
        assert_eq!(report.near_ties.len(), 1);
    }

    #[test]
    fn parallel_lines_tie_on_midline() {
        let cfg = TrackingConfig::default();
        // Points with x1 - x2 = 1 are equidistant from both lines.
        let report = uniqueness_probe_at(
            &parallel_lines(),
            &NormSpec::Euclidean,
            &[vec![1.0, 0.0], vec![3.5, 2.5]],
            &cfg,
        )
        .unwrap();
        assert_eq!(report.near_ties.len(), 2);
        let result =
            best_approximation(&parallel_lines(), &NormSpec::Euclidean, &[1.0, 0.0], &cfg)
                .unwrap();
        assert!((result.distance - 1.0 / 2f64.sqrt()).abs() < 1e-8);
        assert!(!result.unique);
    }

    #[test]
    fn boundary_gradient_vanishes_for_squared_distance() {
        let cfg = TrackingConfig::default();
        let worst = boundary_gradient_check(
            &circle(),
            &NormSpec::Euclidean,
            2.0,
            &[vec![1.0, 0.0], vec![0.6, 0.8]],
            &cfg,
        )
        .unwrap();
        assert!(worst < 1e-5, "gradient norm {worst}");
        assert!(matches!(
            boundary_gradient_check(&circle(), &NormSpec::Euclidean, 1.0, &[], &cfg),
            Err(ApproxError::BadExponent(_))
        ));
    }

    #[test]
    fn unpowered_distance_has_unit_slope_at_boundary() {
        // dist(x, circle) = ||x| - 1|: one-sided difference quotients of the
        // unpowered distance at (1, 0) are +-1, which is why the boundary
        // check requires a > 1.
        let cfg = TrackingConfig::default();
        let h = 1e-4;
        let out = distance_to(&circle(), &NormSpec::Euclidean, &[1.0 + h, 0.0], &cfg).unwrap();
        let inn = distance_to(&circle(), &NormSpec::Euclidean, &[1.0 - h, 0.0], &cfg).unwrap();
        assert!((out / h - 1.0).abs() < 1e-6);
        assert!((inn / h - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boundary_gradient_l4_line_at_origin() {
        let cfg = TrackingConfig::default();
        let norm = NormSpec::LpRational { m: 2, l: 0 };
        let worst =
            boundary_gradient_check(&line(), &norm, 4.0, &[vec![0.0, 0.0]], &cfg).unwrap();
        assert!(worst < 1e-5, "gradient norm {worst}");
    }

    #[test]
    fn off_variety_points_rejected() {
        let cfg = TrackingConfig::default();
        assert!(matches!(
            boundary_gradient_check(
                &circle(),
                &NormSpec::Euclidean,
                2.0,
                &[vec![2.0, 0.0]],
                &cfg
            ),
            Err(ApproxError::NotOnVariety { .. })
        ));
    }

    #[test]
    fn minimality_against_sampled_variety_points() {
        // Project random starts onto the circle by Gauss-Newton on the
        // generator alone, then check the reported distance is minimal.
        let v = circle();
        let cfg = TrackingConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let generator = &v.generators()[0];
        let mut samples: Vec<Vec<f64>> = Vec::new();
        while samples.len() < 100 {
            let mut y: Vec<f64> = (0..2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for _ in 0..60 {
                let yc: Vec<Complex64> = y.iter().map(|&t| Complex64::new(t, 0.0)).collect();
                let f = generator.evaluate(&yc).unwrap().re;
                let g: Vec<f64> = (0..2)
                    .map(|j| generator.differentiate(j).unwrap().evaluate(&yc).unwrap().re)
                    .collect();
                let gnorm2: f64 = g.iter().map(|t| t * t).sum();
                if gnorm2 < 1e-12 {
                    break;
                }
                for j in 0..2 {
                    y[j] -= f * g[j] / gnorm2;
                }
            }
            let yc: Vec<Complex64> = y.iter().map(|&t| Complex64::new(t, 0.0)).collect();
            if v.membership_residual(&yc).unwrap() < 1e-12 {
                samples.push(y);
            }
        }
        for x in [[3.0, 4.0], [-0.2, 1.7], [0.4, -0.1]] {
            let result =
                best_approximation(&v, &NormSpec::Euclidean, &x, &cfg).unwrap();
            for y in &samples {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                let d = NormSpec::Euclidean.eval(&diff).unwrap();
                assert!(result.distance <= d + 1e-8);
            }
        }
    }

    #[test]
    fn argmin_invariant_under_distance_powers() {
        let cfg = TrackingConfig::default();
        // Inside the evolute of the ellipse there are four real critical
        // points with distinct distances.
        let result =
            best_approximation(&ellipse(), &NormSpec::Euclidean, &[0.3, 0.2], &cfg).unwrap();
        assert!(result.candidates.len() >= 3);
        for a in [1.5, 2.0, 3.0] {
            let powered_argmin = result
                .candidates
                .iter()
                .enumerate()
                .min_by(|(_, p), (_, q)| {
                    p.distance.powf(a).total_cmp(&q.distance.powf(a))
                })
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(powered_argmin, 0);
        }
    }
}
