//! Numerical solution of a critical system at a fixed query point:
//! total-degree homotopy continuation with the gamma trick, damped Newton
//! refinement, deduplication by y-coordinates, and reality/singularity
//! classification. A multistart Newton oracle provides an independent
//! cross-check for tests.

mod track;

pub use track::{SpecializedSystem, DIVERGENCE_NORM};
use track::{track_path, SegmentHomotopy, TotalDegreeHomotopy, TrackResult};

use crate::critsys::{CriticalSystem, SystemError};
use crate::poly::PolyError;
use crate::variety::{VarietyError, DEFAULT_RANK_TOL};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Residual threshold above which a surviving squared-up solution is
/// discarded as spurious against the retained full minor list.
pub const MINOR_FILTER_TOL: f64 = 1e-8;
/// Discriminant values below this scaled magnitude flag a solution as lying
/// on the branch discriminant.
pub const DISCRIMINANT_TOL: f64 = 1e-8;
/// Endpoints whose imaginary fuzz is below this are re-polished from their
/// real projection before the reality flag is decided.
const REAL_SNAP_THRESHOLD: f64 = 1e-3;
/// Refuse to track absurd path counts; desk-scale systems stay far below.
const MAX_PATHS: u64 = 20_000;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{failed} of {total} paths failed; re-run with a different gamma seed or smaller steps")]
    TooManyPathFailures { failed: usize, total: usize },
    #[error("system is not square ({equations} equations in {unknowns} unknowns)")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("query point has {got} coordinates, expected {expected}")]
    ParameterArity { expected: usize, got: usize },
    #[error("Bezout bound {bound} exceeds the tracking limit {limit}")]
    TooManyPaths { bound: u64, limit: u64 },
    #[error("Newton did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular linearization: condition number exceeds 1e14")]
    SingularLinearization,
    #[error("start point has {got} coordinates, expected {expected} unknowns")]
    PointArity { expected: usize, got: usize },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Variety(#[from] VarietyError),
}

/// Continuation and refinement tolerances. All randomness in a solve flows
/// from `gamma_seed`.
#[derive(Debug, Clone)]
pub struct TrackingConfig {
    pub gamma_seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
    pub residual_tol: f64,
    pub real_tol: f64,
    pub dedup_tol: f64,
    pub newton_max_iter: usize,
    /// Fraction of failed paths above which the solve is rejected.
    pub max_failure_fraction: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            gamma_seed: 0,
            initial_step: 0.1,
            min_step: 1e-10,
            max_steps: 50_000,
            corrector_tol: 1e-10,
            residual_tol: 1e-10,
            real_tol: 1e-8,
            dedup_tol: 1e-6,
            newton_max_iter: 50,
            max_failure_fraction: 0.2,
        }
    }
}

/// One deduplicated solution of a critical system at a fixed query point.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Full unknown vector (y, then any multipliers and branch value).
    pub point: Vec<Complex64>,
    /// Projection to the y-coordinates; the identity used for dedup.
    pub y_part: Vec<Complex64>,
    /// Max scaled equation residual.
    pub residual: f64,
    pub is_real: bool,
    pub is_singular_on_c: bool,
    /// dG/dt vanishes here (implicit-norm systems only).
    pub on_discriminant: bool,
    /// Number of cleanly tracked paths that converged to this point.
    pub multiplicity: usize,
    pub path_ids: Vec<usize>,
    /// At least one contributing path needed a stalled-path rescue.
    pub rescued: bool,
}

/// Everything `solve_at` learned: solutions plus path bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct SolveOutcome {
    pub solutions: Vec<Solution>,
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub path_failures: usize,
    pub minor_filtered: usize,
    pub warnings: Vec<String>,
}

impl SolveOutcome {
    /// Solutions off the singular locus, the ones fiber counts see.
    pub fn smooth(&self) -> impl Iterator<Item = &Solution> {
        self.solutions.iter().filter(|s| !s.is_singular_on_c)
    }

    pub fn real_smooth_count(&self) -> usize {
        self.smooth().filter(|s| s.is_real).count()
    }
}

/// A refined path endpoint before classification.
#[derive(Debug, Clone)]
pub struct RawEndpoint {
    pub point: Vec<Complex64>,
    pub residual: f64,
    pub path_id: usize,
    pub rescued: bool,
}

pub(crate) struct RefinedPoint {
    pub point: DVector<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    /// |step_k| / |step_{k-1}|^2 of the final two steps; near-constant for
    /// quadratic convergence.
    pub tail_ratio: Option<f64>,
}

fn finite(z: &DVector<Complex64>) -> bool {
    z.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Newton polish against a specialized system, keeping the best iterate
/// seen. Full steps are taken even when the residual transiently grows:
/// near a multiple root the linear correction of one equation dominates the
/// higher-order residual of another, and a residual-monotone line search
/// would stall a solvent iteration. Damping is reserved for non-finite
/// trials. Runs past the residual tolerance so multiple-root clusters get
/// polished deep enough to merge under the dedup tolerance and to register
/// on the singularity test.
pub(crate) fn refine(
    spec: &SpecializedSystem,
    start: DVector<Complex64>,
    cfg: &TrackingConfig,
) -> RefinedPoint {
    let mut z = start;
    let mut best = z.clone();
    let mut best_res = if finite(&z) {
        spec.scaled_residual(&z)
    } else {
        f64::INFINITY
    };
    let mut prev_step: Option<f64> = None;
    let mut tail_ratio = None;
    let mut iterations = 0usize;
    for _ in 0..cfg.newton_max_iter {
        if !finite(&z) || best_res == 0.0 {
            break;
        }
        if z.iter().map(|v| v.norm()).fold(0.0, f64::max) > DIVERGENCE_NORM {
            break;
        }
        let f = spec.eval(&z);
        let jac = spec.jacobian(&z);
        let delta = match jac.clone().lu().solve(&(-&f)) {
            Some(d) => d,
            // Singular linearization: fall back to the SVD pseudo-inverse,
            // which still improves points near rank-deficient solutions.
            None => match jac.svd(true, true).solve(&(-&f), 1e-14) {
                Ok(d) => d,
                Err(_) => break,
            },
        };
        let mut scale = 1.0f64;
        let mut trial = &z + &delta;
        let mut halvings = 0;
        while !finite(&trial) && halvings < 8 {
            scale /= 2.0;
            trial = &z + &delta * Complex64::new(scale, 0.0);
            halvings += 1;
        }
        if !finite(&trial) {
            break;
        }
        let step_norm = delta.norm() * scale;
        if step_norm < 1e-16 * z.norm().max(1.0) {
            // Already at a fixed point; don't count a zero-length step.
            break;
        }
        if let Some(p) = prev_step {
            if p > 0.0 {
                tail_ratio = Some(step_norm / (p * p));
            }
        }
        prev_step = Some(step_norm);
        z = trial;
        iterations += 1;
        let res = spec.scaled_residual(&z);
        if res < best_res {
            best = z.clone();
            best_res = res;
        }
        if step_norm < 1e-14 * z.norm().max(1.0) {
            break;
        }
    }
    RefinedPoint {
        point: best,
        residual: best_res,
        iterations,
        tail_ratio,
    }
}

fn specialize_checked(
    s: &CriticalSystem,
    x: &[Complex64],
) -> Result<SpecializedSystem, SolveError> {
    if !s.is_square() {
        return Err(SolveError::NotSquare {
            equations: s.equations().len(),
            unknowns: s.num_unknowns(),
        });
    }
    if x.len() != s.num_parameters() {
        return Err(SolveError::ParameterArity {
            expected: s.num_parameters(),
            got: x.len(),
        });
    }
    Ok(SpecializedSystem::new(s.specialize(x)?)?)
}

/// Start points of the total-degree start system: every combination of
/// `d_i`-th roots of unity, enumerated in mixed-radix order.
fn start_points(degrees: &[u32]) -> Vec<DVector<Complex64>> {
    let dim = degrees.len();
    let total: u64 = degrees.iter().map(|&d| d.max(1) as u64).product();
    let mut points = Vec::with_capacity(total as usize);
    let mut digits = vec![0u32; dim];
    loop {
        let z = DVector::from_iterator(
            dim,
            digits.iter().zip(degrees).map(|(&k, &d)| {
                let d = d.max(1);
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64)
            }),
        );
        points.push(z);
        let mut carry = 0usize;
        loop {
            digits[carry] += 1;
            if digits[carry] < degrees[carry].max(1) {
                break;
            }
            digits[carry] = 0;
            carry += 1;
            if carry == dim {
                return points;
            }
        }
    }
}

/// Tracks every total-degree start point to the system at `x`, refines the
/// endpoints, filters against retained minors, and classifies the survivors.
pub fn solve_at(
    s: &CriticalSystem,
    x: &[Complex64],
    cfg: &TrackingConfig,
) -> Result<SolveOutcome, SolveError> {
    let spec = specialize_checked(s, x)?;
    let bezout = s.bezout_bound()?;
    if bezout > MAX_PATHS {
        return Err(SolveError::TooManyPaths {
            bound: bezout,
            limit: MAX_PATHS,
        });
    }
    let degrees = s.equation_degrees();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.gamma_seed);
    let gamma = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    let homotopy = TotalDegreeHomotopy {
        target: &spec,
        degrees: degrees.clone(),
        gamma,
    };

    let starts = start_points(&degrees);
    let total = starts.len();
    // Non-convergent endpoints far beyond the query scale are surplus
    // Bezout paths drifting to infinity too slowly to trip the hard
    // divergence norm.
    let escape_norm = 100.0 * (1.0 + x.iter().map(|v| v.norm()).fold(0.0, f64::max));
    let mut raw: Vec<RawEndpoint> = Vec::new();
    let mut diverged = 0usize;
    let mut failures = 0usize;
    for (path_id, start) in starts.into_iter().enumerate() {
        let (endpoint, rescued) = match track_path(&homotopy, start, cfg) {
            TrackResult::Reached(z) => (Some(z), false),
            TrackResult::Diverged => (None, false),
            TrackResult::Stalled(z) => (Some(z), true),
        };
        match endpoint {
            None => diverged += 1,
            Some(z) => {
                let refined = refine(&spec, z, cfg);
                if refined.residual < cfg.residual_tol && finite(&refined.point) {
                    raw.push(RawEndpoint {
                        point: refined.point.iter().copied().collect(),
                        residual: refined.residual,
                        path_id,
                        rescued,
                    });
                } else if !finite(&refined.point)
                    || refined.point.iter().map(|v| v.norm()).fold(0.0, f64::max) > escape_norm
                {
                    diverged += 1;
                } else {
                    failures += 1;
                }
            }
        }
    }
    if total > 0 && failures as f64 / total as f64 > cfg.max_failure_fraction {
        return Err(SolveError::TooManyPathFailures {
            failed: failures,
            total,
        });
    }

    // Squared-up systems: drop endpoints that fail the retained minors.
    let mut minor_filtered = 0usize;
    if let Some(minors) = s.original_minors() {
        raw.retain(|r| {
            let mut point = r.point.clone();
            point.extend_from_slice(x);
            let z_inf = point.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
            let worst = minors
                .iter()
                .map(|m| {
                    m.evaluate(&point).map(|v| v.norm()).unwrap_or(f64::INFINITY)
                        / z_inf.powi(m.total_degree() as i32)
                })
                .fold(0.0, f64::max);
            let keep = worst < MINOR_FILTER_TOL;
            if !keep {
                minor_filtered += 1;
            }
            keep
        });
    }

    let mut outcome = classify_and_dedup(raw, s, x, cfg)?;
    outcome.paths_tracked = total;
    outcome.paths_diverged = diverged;
    outcome.path_failures = failures;
    outcome.minor_filtered = minor_filtered;
    Ok(outcome)
}

/// A refined solution together with convergence quality metrics.
#[derive(Debug, Clone)]
pub struct RefineReport {
    pub solution: Solution,
    pub iterations: usize,
    /// |step_k| / |step_{k-1}|^2 over the final two Newton steps; bounded
    /// for quadratic convergence.
    pub tail_ratio: Option<f64>,
}

/// Newton refinement of one candidate against the system at `x`, reporting
/// the quadratic-convergence tail as a quality metric.
///
/// Refinement is local: an iterate that travels more than half the start's
/// scale means the start was not near a solution, and the run is reported
/// as non-convergent rather than silently landing on a faraway root.
pub fn newton_refine(
    s: &CriticalSystem,
    x: &[Complex64],
    point: &[Complex64],
    cfg: &TrackingConfig,
) -> Result<RefineReport, SolveError> {
    let spec = specialize_checked(s, x)?;
    if point.len() != s.num_unknowns() {
        return Err(SolveError::PointArity {
            expected: s.num_unknowns(),
            got: point.len(),
        });
    }
    let start = DVector::from_column_slice(point);
    let refined = refine(&spec, start.clone(), cfg);
    let travel = (&refined.point - &start).norm();
    if travel > 0.5 * (1.0 + start.norm()) {
        return Err(SolveError::NoConvergence {
            iterations: refined.iterations,
            residual: refined.residual,
        });
    }
    if refined.residual >= cfg.residual_tol || !finite(&refined.point) {
        // Distinguish a hopeless linearization from plain non-convergence.
        if finite(&refined.point) {
            let svd = spec.jacobian(&refined.point).svd(false, false);
            let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
            let smin = svd
                .singular_values
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            if smin == 0.0 || smax / smin > 1e14 {
                return Err(SolveError::SingularLinearization);
            }
        }
        return Err(SolveError::NoConvergence {
            iterations: refined.iterations,
            residual: refined.residual,
        });
    }
    let raw = vec![RawEndpoint {
        point: refined.point.iter().copied().collect(),
        residual: refined.residual,
        path_id: 0,
        rescued: false,
    }];
    let outcome = classify_and_dedup(raw, s, x, cfg)?;
    Ok(RefineReport {
        solution: outcome.solutions.into_iter().next().expect("one endpoint"),
        iterations: refined.iterations,
        tail_ratio: refined.tail_ratio,
    })
}

/// Newton from `starts` random complex points in a box; an independent
/// cross-check for the homotopy path, used by tests and acceptance runs.
pub fn multistart_oracle(
    s: &CriticalSystem,
    x: &[Complex64],
    starts: usize,
    box_radius: f64,
    seed: u64,
    cfg: &TrackingConfig,
) -> Result<SolveOutcome, SolveError> {
    let spec = specialize_checked(s, x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = s.num_unknowns();
    let mut raw = Vec::new();
    for k in 0..starts {
        let z0 = DVector::from_iterator(
            dim,
            (0..dim).map(|_| {
                Complex64::new(
                    rng.random_range(-box_radius..box_radius),
                    rng.random_range(-box_radius..box_radius),
                )
            }),
        );
        let refined = refine(&spec, z0, cfg);
        if refined.residual < cfg.residual_tol && finite(&refined.point) {
            raw.push(RawEndpoint {
                point: refined.point.iter().copied().collect(),
                residual: refined.residual,
                path_id: k,
                rescued: false,
            });
        }
    }
    // The retained-minor filter applies to oracle hits as well.
    if let Some(minors) = s.original_minors() {
        raw.retain(|r| {
            let mut point = r.point.clone();
            point.extend_from_slice(x);
            let z_inf = point.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
            minors
                .iter()
                .map(|m| {
                    m.evaluate(&point).map(|v| v.norm()).unwrap_or(f64::INFINITY)
                        / z_inf.powi(m.total_degree() as i32)
                })
                .fold(0.0, f64::max)
                < MINOR_FILTER_TOL
        });
    }
    let mut outcome = classify_and_dedup(raw, s, x, cfg)?;
    outcome.paths_tracked = starts;
    Ok(outcome)
}

fn rel_dist_inf(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max);
    let scale = a
        .iter()
        .chain(b)
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    diff / scale
}

/// Merges endpoints into solutions: paths colliding on the full unknown
/// vector form multiplicity clusters, clusters sharing y-coordinates merge
/// (auxiliary unknowns are forgotten), near-real points are re-polished from
/// their real projection, and reality/singularity/discriminant flags are
/// attached. Output is sorted by rounded y for determinism.
pub fn classify_and_dedup(
    raw: Vec<RawEndpoint>,
    s: &CriticalSystem,
    x: &[Complex64],
    cfg: &TrackingConfig,
) -> Result<SolveOutcome, SolveError> {
    let spec = specialize_checked(s, x)?;
    let y_slots = s.y_slots();

    // Level 1: cluster on the full unknown vector.
    struct PointCluster {
        representative: RawEndpoint,
        clean_paths: usize,
        path_ids: Vec<usize>,
        rescued: bool,
    }
    let mut point_clusters: Vec<PointCluster> = Vec::new();
    for r in raw {
        match point_clusters
            .iter_mut()
            .find(|c| rel_dist_inf(&c.representative.point, &r.point) < cfg.dedup_tol)
        {
            Some(c) => {
                c.clean_paths += usize::from(!r.rescued);
                c.path_ids.push(r.path_id);
                c.rescued |= r.rescued;
                if r.residual < c.representative.residual {
                    c.representative = r;
                }
            }
            None => point_clusters.push(PointCluster {
                clean_paths: usize::from(!r.rescued),
                path_ids: vec![r.path_id],
                rescued: r.rescued,
                representative: r,
            }),
        }
    }

    // Level 2: merge clusters sharing y-coordinates (projection semantics).
    struct YGroup {
        representative: RawEndpoint,
        multiplicity: usize,
        path_ids: Vec<usize>,
        rescued: bool,
    }
    let mut groups: Vec<YGroup> = Vec::new();
    for c in point_clusters {
        let y: Vec<Complex64> = y_slots.iter().map(|&j| c.representative.point[j]).collect();
        match groups.iter_mut().find(|g| {
            let gy: Vec<Complex64> = y_slots
                .iter()
                .map(|&j| g.representative.point[j])
                .collect();
            rel_dist_inf(&gy, &y) < cfg.dedup_tol
        }) {
            Some(g) => {
                g.multiplicity = g.multiplicity.max(c.clean_paths);
                g.path_ids.extend(c.path_ids);
                g.rescued |= c.rescued;
                if c.representative.residual < g.representative.residual {
                    g.representative = c.representative;
                }
            }
            None => groups.push(YGroup {
                multiplicity: c.clean_paths,
                path_ids: c.path_ids,
                rescued: c.rescued,
                representative: c.representative,
            }),
        }
    }

    let mut warnings: Vec<String> = Vec::new();
    let mut solutions = Vec::with_capacity(groups.len());
    for mut g in groups {
        let fuzz = g
            .representative
            .point
            .iter()
            .map(|v| v.im.abs())
            .fold(0.0, f64::max);
        // Real-snap: endpoints picked up along positive-dimensional or
        // near-real fibers carry imaginary fuzz well above the reality
        // tolerance. If the real projection re-converges essentially in
        // place, adopt it.
        if fuzz > cfg.real_tol && fuzz < REAL_SNAP_THRESHOLD {
            let real_proj = DVector::from_iterator(
                g.representative.point.len(),
                g.representative
                    .point
                    .iter()
                    .map(|v| Complex64::new(v.re, 0.0)),
            );
            let polished = refine(&spec, real_proj.clone(), cfg);
            if polished.residual < cfg.residual_tol {
                let moved = polished
                    .point
                    .iter()
                    .zip(real_proj.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if moved <= 10.0 * fuzz + 1e-12 {
                    g.representative.point = polished.point.iter().copied().collect();
                    g.representative.residual = polished.residual;
                }
            }
        }

        let point = g.representative.point.clone();
        let y_part: Vec<Complex64> = y_slots.iter().map(|&j| point[j]).collect();
        let is_real = y_part.iter().map(|v| v.im.abs()).fold(0.0, f64::max) < cfg.real_tol
            && point.iter().map(|v| v.im.abs()).fold(0.0, f64::max) < REAL_SNAP_THRESHOLD;
        let is_singular_on_c = match s.variety().singular_test(&y_part, DEFAULT_RANK_TOL) {
            Ok(flag) => flag,
            Err(e) => {
                warnings.push(format!(
                    "singularity test skipped at a solution: {e}"
                ));
                false
            }
        };
        if !is_singular_on_c {
            if let Ok(rank) = s.variety().jacobian_rank(&y_part, DEFAULT_RANK_TOL) {
                if rank != s.variety().codim() {
                    warnings.push(format!(
                        "declared codimension {} but Jacobian rank {} at a smooth solution; \
                         the presentation may not cut the stated dimension",
                        s.variety().codim(),
                        rank
                    ));
                }
            }
        }
        let on_discriminant = match s.discriminant() {
            Some(disc) => {
                let mut full = point.clone();
                full.extend_from_slice(x);
                let z_inf = full.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
                let value = disc.evaluate(&full)?.norm()
                    / z_inf.powi(disc.total_degree() as i32);
                value < DISCRIMINANT_TOL
            }
            None => false,
        };
        if g.multiplicity > 1 && !is_singular_on_c {
            warnings.push(format!(
                "solution cluster of multiplicity {} at a smooth point; the query point \
                 may be non-generic",
                g.multiplicity
            ));
        }
        solutions.push(Solution {
            point,
            y_part,
            residual: g.representative.residual,
            is_real,
            is_singular_on_c,
            on_discriminant,
            multiplicity: g.multiplicity.max(1),
            path_ids: g.path_ids,
            rescued: g.rescued,
        });
    }

    // Deterministic order: lexicographic over rounded real and imaginary
    // parts of y.
    let quantum = 1e-9;
    let key = |sol: &Solution| -> Vec<i64> {
        sol.y_part
            .iter()
            .flat_map(|v| [v.re, v.im])
            .map(|v| {
                let q = (v / quantum).round();
                if q >= i64::MAX as f64 {
                    i64::MAX
                } else if q <= i64::MIN as f64 {
                    i64::MIN
                } else {
                    q as i64
                }
            })
            .collect()
    };
    solutions.sort_by(|a, b| key(a).cmp(&key(b)));

    Ok(SolveOutcome {
        solutions,
        warnings,
        ..Default::default()
    })
}

/// Tracks a set of solutions while the query point moves along a straight
/// segment, refining each endpoint against the system at the far vertex.
/// Any failed path aborts the whole segment so monodromy loops are either
/// complete or discarded.
pub fn track_solutions_along_segment(
    s: &CriticalSystem,
    points: &[Vec<Complex64>],
    from: &[Complex64],
    to: &[Complex64],
    cfg: &TrackingConfig,
) -> Result<Vec<Vec<Complex64>>, SolveError> {
    let homotopy = SegmentHomotopy::new(s, from, to)?;
    let spec_end = specialize_checked(s, to)?;
    let mut tracked = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != s.num_unknowns() {
            return Err(SolveError::PointArity {
                expected: s.num_unknowns(),
                got: p.len(),
            });
        }
        let start = DVector::from_column_slice(p);
        let endpoint = match track_path(&homotopy, start, cfg) {
            TrackResult::Reached(z) => z,
            TrackResult::Diverged | TrackResult::Stalled(_) => {
                return Err(SolveError::NoConvergence {
                    iterations: 0,
                    residual: f64::INFINITY,
                })
            }
        };
        let refined = refine(&spec_end, endpoint, cfg);
        if refined.residual >= cfg.residual_tol || !finite(&refined.point) {
            return Err(SolveError::NoConvergence {
                iterations: refined.iterations,
                residual: refined.residual,
            });
        }
        tracked.push(refined.point.iter().copied().collect());
    }
    Ok(tracked)
}

/// Relative distance between y-projections; the matching metric for
/// monodromy endpoint identification.
pub fn y_distance(s: &CriticalSystem, a: &[Complex64], b: &[Complex64]) -> f64 {
    let ya: Vec<Complex64> = s.y_slots().iter().map(|&j| a[j]).collect();
    let yb: Vec<Complex64> = s.y_slots().iter().map(|&j| b[j]).collect();
    rel_dist_inf(&ya, &yb)
}
