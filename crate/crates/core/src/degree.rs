//! Distance-degree estimation: fiber counts over generic query points,
//! mode-based degree reporting, and monodromy grouping of the fiber to
//! isolate the component that carries the real critical points.

use crate::critsys::{build_auto, CriticalSystem, SystemError};
use crate::norms::NormSpec;
use crate::solver::{
    solve_at, track_solutions_along_segment, SolveError, TrackingConfig,
};
use crate::variety::VarietySpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// Below this mode frequency the degree estimate is withheld.
pub const STABILITY_FLOOR: f64 = 0.5;

const MAX_TOTAL_LOOPS: usize = 64;
const MAX_DISCARDED_LOOPS: usize = 60;
const BASE_POINT_ATTEMPTS: usize = 6;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error("need at least 3 trials, got {0}")]
    TooFewTrials(usize),
    #[error("all {0} fiber trials failed")]
    AllTrialsFailed(usize),
    #[error("no real smooth solution found at any candidate base point")]
    NoRealBasePoint,
    #[error("monodromy loops kept failing: {discarded} discarded")]
    LoopsExhausted { discarded: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Degree evidence assembled from generic fiber counts and monodromy.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    /// Smooth fiber cardinalities at the sampled complex query points.
    pub trial_counts: Vec<usize>,
    /// Mode of `trial_counts`; absent when the mode frequency drops below
    /// the stability floor.
    pub delta_hat: Option<usize>,
    /// Frequency of the mode among completed trials.
    pub stability: f64,
    /// Real smooth critical counts at real query points -> occurrences.
    pub real_count_distribution: BTreeMap<usize, usize>,
    /// Size of the monodromy orbit union containing the real solutions;
    /// the degree of the correspondence component carrying real points.
    pub sigma1_degree: Option<usize>,
    pub bezout: u64,
    pub path_failures: usize,
    pub seeds: DegreeSeeds,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeSeeds {
    pub master: u64,
    pub gamma: u64,
}

/// Orbit structure of the fiber under random monodromy loops.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    /// Sizes of the orbit-closure components, descending.
    pub orbit_sizes: Vec<usize>,
    /// Members of components containing at least one real solution.
    pub real_component_degree: usize,
    pub fiber_size: usize,
    pub real_count: usize,
    pub loops_completed: usize,
    pub loops_discarded: usize,
    /// Whether the component partition survived two consecutive rounds
    /// unchanged.
    pub stabilized: bool,
    /// The permutation each completed loop induced on the fiber.
    pub permutations: Vec<Vec<usize>>,
}

/// Number of deduplicated, finite, smooth-on-C solutions (distinct y) of
/// the system at `x`.
pub fn fiber_count(
    s: &CriticalSystem,
    x: &[Complex64],
    cfg: &TrackingConfig,
) -> Result<usize, SolveError> {
    Ok(solve_at(s, x, cfg)?.smooth().count())
}

fn gaussian_complex_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

fn gaussian_real_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect()
}

/// Estimates the distance degree of the variety under the given norm:
/// draws `trials` complex Gaussian query points, takes the mode of the
/// smooth fiber counts, records real critical counts at real query points,
/// and for the rational-exponent family runs monodromy at two real base
/// points to estimate the degree of the component containing the real
/// critical points.
pub fn nu_distance_degree(
    v: &VarietySpec,
    norm: &NormSpec,
    trials: usize,
    loops: usize,
    seed: u64,
    cfg: &TrackingConfig,
) -> Result<DegreeReport, DegreeError> {
    if trials < 3 {
        return Err(DegreeError::TooFewTrials(trials));
    }
    let system = build_auto(v, norm, seed)?;
    let bezout = system.bezout_bound().map_err(SolveError::from)?;
    let n = v.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut warnings = Vec::new();
    let mut path_failures = 0usize;

    let mut trial_counts = Vec::with_capacity(trials);
    for k in 0..trials {
        let x = gaussian_complex_vec(&mut rng, n);
        match solve_at(&system, &x, cfg) {
            Ok(out) => {
                path_failures += out.path_failures;
                trial_counts.push(out.smooth().count());
            }
            Err(e) => warnings.push(format!("complex trial {k} failed: {e}")),
        }
    }
    if trial_counts.is_empty() {
        return Err(DegreeError::AllTrialsFailed(trials));
    }

    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &trial_counts {
        *freq.entry(c).or_insert(0) += 1;
    }
    // Mode; ties break toward the larger count since path loss undercounts.
    let (&mode, &mode_freq) = freq
        .iter()
        .max_by_key(|&(&count, &occurrences)| (occurrences, count))
        .expect("non-empty");
    let stability = mode_freq as f64 / trial_counts.len() as f64;
    let delta_hat = if stability >= STABILITY_FLOOR {
        Some(mode)
    } else {
        warnings.push(format!(
            "fiber counts unstable (mode frequency {stability:.2}); \
             the input may be degenerate or ill-conditioned"
        ));
        None
    };

    let mut real_count_distribution: BTreeMap<usize, usize> = BTreeMap::new();
    for k in 0..trials {
        let x = gaussian_real_vec(&mut rng, n);
        match solve_at(&system, &x, cfg) {
            Ok(out) => {
                path_failures += out.path_failures;
                *real_count_distribution
                    .entry(out.real_smooth_count())
                    .or_insert(0) += 1;
            }
            Err(e) => warnings.push(format!("real trial {k} failed: {e}")),
        }
    }

    // Monodromy applies to the polynomial correspondence of the
    // rational-exponent family; implicit-branch fibers mix several branch
    // values per y and are reported by counts alone.
    let sigma1_degree = if norm.lp_exponents().is_some() {
        let mut estimates = Vec::new();
        for attempt in 0..2 {
            match monodromy_at_random_base(&system, loops, &mut rng, cfg) {
                Ok(report) => {
                    if !report.stabilized {
                        warnings.push(format!(
                            "monodromy round {attempt}: partition not fully stabilized \
                             after {} loops",
                            report.loops_completed
                        ));
                    }
                    estimates.push(report.real_component_degree);
                }
                Err(e) => warnings.push(format!("monodromy round {attempt} failed: {e}")),
            }
        }
        match estimates.as_slice() {
            [] => None,
            [a] => Some(*a),
            [a, b] => {
                if a != b {
                    warnings.push(format!(
                        "monodromy base points disagree on the real component degree \
                         ({a} vs {b}); reporting the larger"
                    ));
                }
                Some(*a.max(b))
            }
            _ => unreachable!(),
        }
    } else {
        None
    };

    Ok(DegreeReport {
        trial_counts,
        delta_hat,
        stability,
        real_count_distribution,
        sigma1_degree,
        bezout,
        path_failures,
        seeds: DegreeSeeds {
            master: seed,
            gamma: cfg.gamma_seed,
        },
        warnings,
    })
}

fn monodromy_at_random_base(
    system: &CriticalSystem,
    loops: usize,
    rng: &mut ChaCha8Rng,
    cfg: &TrackingConfig,
) -> Result<OrbitReport, DegreeError> {
    let n = system.num_parameters();
    for _ in 0..BASE_POINT_ATTEMPTS {
        let x0 = gaussian_real_vec(rng, n);
        let out = solve_at(system, &x0, cfg)?;
        if out.smooth().any(|s| s.is_real) {
            let loop_seed: u64 = rng.random();
            return monodromy_real_component(system, &x0, loops, loop_seed, cfg);
        }
    }
    Err(DegreeError::NoRealBasePoint)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn partition(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|i| self.find(i)).collect()
    }
}

/// Tracks the smooth fiber at `x0` around random triangular loops in
/// complex query space. Each completed loop induces a permutation of the
/// fiber; orbits are merged until the partition survives two consecutive
/// rounds, and the union of orbits containing a real solution estimates
/// the degree of the real critical-point component.
pub fn monodromy_real_component(
    s: &CriticalSystem,
    x0: &[Complex64],
    loops: usize,
    seed: u64,
    cfg: &TrackingConfig,
) -> Result<OrbitReport, DegreeError> {
    let base = solve_at(s, x0, cfg)?;
    let fiber: Vec<Vec<Complex64>> = base.smooth().map(|sol| sol.point.clone()).collect();
    let real_indices: Vec<usize> = base
        .smooth()
        .enumerate()
        .filter(|(_, sol)| sol.is_real)
        .map(|(i, _)| i)
        .collect();
    if real_indices.is_empty() {
        return Err(DegreeError::NoRealBasePoint);
    }
    let size = fiber.len();
    let scale = x0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uf = UnionFind::new(size);
    let mut permutations: Vec<Vec<usize>> = Vec::new();
    let mut completed = 0usize;
    let mut discarded = 0usize;
    let mut round_size = loops.max(1);
    let mut stable_rounds = 0usize;
    let mut prev_partition = uf.partition();

    'rounds: while stable_rounds < 2 && completed < MAX_TOTAL_LOOPS {
        let mut done_in_round = 0usize;
        while done_in_round < round_size {
            if discarded > MAX_DISCARDED_LOOPS {
                return Err(DegreeError::LoopsExhausted { discarded });
            }
            if completed >= MAX_TOTAL_LOOPS {
                break 'rounds;
            }
            let vertex_a: Vec<Complex64> = x0
                .iter()
                .map(|v| {
                    v + Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                        * scale
                })
                .collect();
            let vertex_b: Vec<Complex64> = x0
                .iter()
                .map(|v| {
                    v + Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                        * scale
                })
                .collect();
            let perm = run_loop(s, &fiber, x0, &vertex_a, &vertex_b, cfg);
            match perm {
                Some(p) => {
                    for (i, &j) in p.iter().enumerate() {
                        uf.union(i, j);
                    }
                    permutations.push(p);
                    completed += 1;
                    done_in_round += 1;
                }
                None => discarded += 1,
            }
        }
        let partition = uf.partition();
        if partition == prev_partition {
            stable_rounds += 1;
        } else {
            stable_rounds = 0;
        }
        prev_partition = partition;
        round_size = (round_size * 2).min(16);
    }

    let partition = uf.partition();
    let mut orbit_sizes_map: BTreeMap<usize, usize> = BTreeMap::new();
    for &root in &partition {
        *orbit_sizes_map.entry(root).or_insert(0) += 1;
    }
    let real_roots: std::collections::BTreeSet<usize> =
        real_indices.iter().map(|&i| partition[i]).collect();
    let real_component_degree = real_roots
        .iter()
        .map(|r| orbit_sizes_map.get(r).copied().unwrap_or(0))
        .sum();
    let mut orbit_sizes: Vec<usize> = orbit_sizes_map.into_values().collect();
    orbit_sizes.sort_unstable_by(|a, b| b.cmp(a));

    Ok(OrbitReport {
        orbit_sizes,
        real_component_degree,
        fiber_size: size,
        real_count: real_indices.len(),
        loops_completed: completed,
        loops_discarded: discarded,
        stabilized: stable_rounds >= 2,
        permutations,
    })
}

/// Tracks the full fiber around the triangle `x0 -> a -> b -> x0` and
/// matches the endpoints back to the fiber. Returns the induced
/// permutation, or `None` when tracking fails or the matching is not a
/// bijection.
fn run_loop(
    s: &CriticalSystem,
    fiber: &[Vec<Complex64>],
    x0: &[Complex64],
    vertex_a: &[Complex64],
    vertex_b: &[Complex64],
    cfg: &TrackingConfig,
) -> Option<Vec<usize>> {
    let leg1 = track_solutions_along_segment(s, fiber, x0, vertex_a, cfg).ok()?;
    let leg2 = track_solutions_along_segment(s, &leg1, vertex_a, vertex_b, cfg).ok()?;
    let final_points = track_solutions_along_segment(s, &leg2, vertex_b, x0, cfg).ok()?;

    let y_of = |p: &[Complex64]| -> Vec<Complex64> {
        s.y_slots().iter().map(|&j| p[j]).collect()
    };
    let mut used = vec![false; fiber.len()];
    let mut perm = vec![usize::MAX; fiber.len()];
    for (i, tracked) in final_points.iter().enumerate() {
        let ty = y_of(tracked);
        let mut best: Option<(usize, f64)> = None;
        for (j, base_point) in fiber.iter().enumerate() {
            let by = y_of(base_point);
            let dist = ty
                .iter()
                .zip(&by)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            let scale = by
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max)
                .max(1.0);
            let rel = dist / scale;
            if best.map_or(true, |(_, d)| rel < d) {
                best = Some((j, rel));
            }
        }
        let (j, dist) = best?;
        if dist > cfg.dedup_tol || used[j] {
            return None;
        }
        used[j] = true;
        perm[i] = j;
    }
    Some(perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn circle() -> VarietySpec {
        let g = parse_polynomial("y1^2 + y2^2 - 1", &["y1", "y2"]).unwrap();
        VarietySpec::new(2, vec![g], 1, "circle").unwrap()
    }

    fn line() -> VarietySpec {
        let g = parse_polynomial("y1 - y2", &["y1", "y2"]).unwrap();
        VarietySpec::new(2, vec![g], 1, "line").unwrap()
    }

    #[test]
    fn circle_euclidean_fiber_is_two() {
        // Closed-form oracle: the critical points are +-x/|x| (after
        // complexification, the two square roots of x1^2 + x2^2 select
        // them), so the generic fiber has exactly 2 points.
        let sys = build_auto(&circle(), &NormSpec::Euclidean, 0).unwrap();
        let cfg = TrackingConfig::default();
        let x = [c(1.3), c(-0.7)];
        assert_eq!(fiber_count(&sys, &x, &cfg).unwrap(), 2);
    }

    #[test]
    fn line_euclidean_fiber_is_one() {
        let sys = build_auto(&line(), &NormSpec::Euclidean, 0).unwrap();
        let cfg = TrackingConfig::default();
        assert_eq!(fiber_count(&sys, &[c(0.9), c(2.0)], &cfg).unwrap(), 1);
    }

    #[test]
    fn circle_degree_report() {
        let cfg = TrackingConfig::default();
        let report =
            nu_distance_degree(&circle(), &NormSpec::Euclidean, 8, 5, 0, &cfg).unwrap();
        assert_eq!(report.delta_hat, Some(2));
        assert_eq!(report.stability, 1.0);
        assert_eq!(report.bezout, 4);
        assert_eq!(report.sigma1_degree, Some(2));
        // Every real query point of the circle has 2 real critical points.
        assert!(report
            .real_count_distribution
            .iter()
            .all(|(&count, _)| count == 2));
    }

    #[test]
    fn line_l4_degree_and_real_component() {
        let cfg = TrackingConfig::default();
        let norm = NormSpec::LpRational { m: 2, l: 0 };
        let report = nu_distance_degree(&line(), &norm, 8, 5, 0, &cfg).unwrap();
        assert_eq!(report.delta_hat, Some(3));
        assert_eq!(report.sigma1_degree, Some(1));
    }

    #[test]
    fn monodromy_loops_are_permutations() {
        let sys = build_auto(&circle(), &NormSpec::Euclidean, 0).unwrap();
        let cfg = TrackingConfig::default();
        let x0 = [c(3.0), c(4.0)];
        let report = monodromy_real_component(&sys, &x0, 5, 11, &cfg).unwrap();
        assert!(report.loops_completed >= 5);
        for perm in &report.permutations {
            let mut seen = vec![false; report.fiber_size];
            for &j in perm {
                assert!(j < report.fiber_size && !seen[j]);
                seen[j] = true;
            }
        }
        // The Euclidean correspondence of the circle is irreducible: both
        // fiber points lie in one orbit.
        assert_eq!(report.real_component_degree, 2);
        assert_eq!(report.orbit_sizes, vec![2]);
    }

    #[test]
    fn too_few_trials_rejected() {
        let cfg = TrackingConfig::default();
        assert!(matches!(
            nu_distance_degree(&circle(), &NormSpec::Euclidean, 2, 5, 0, &cfg),
            Err(DegreeError::TooFewTrials(2))
        ));
    }
}
