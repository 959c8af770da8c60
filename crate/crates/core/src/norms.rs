//! Evaluation and differential calculus of the supported norms: Euclidean,
//! rational-exponent `l_p` with `p = 2m/(2l+1) > 1`, and implicit algebraic
//! branches `G(z, t) = 0`.

use crate::poly::{univariate_roots, PolyError, Polynomial};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

/// Callers must keep gradient evaluations away from the origin.
pub const GRADIENT_ORIGIN_TOL: f64 = 1e-12;

const BRANCH_IMAG_TOL: f64 = 1e-7;
const BRANCH_POSITIVE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("lp norm requires integers m > l >= 0, got m = {m}, l = {l}")]
    BadExponents { m: u32, l: u32 },
    #[error("implicit norm polynomial must have positive degree in t")]
    ConstantInT,
    #[error("implicit norm polynomial has {got} variables, expected {expected} (z1..zn then t)")]
    WrongArity { expected: usize, got: usize },
    #[error("the branch polynomial has no positive real root at this point")]
    NoBranchRoot,
    #[error("the norm gradient is undefined at the origin")]
    GradientAtZero,
    #[error("operation not supported for this norm variant")]
    Unsupported,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Tagged choice of norm. The Euclidean norm is the `m = 1, l = 0` special
/// case of the rational-exponent family but keeps its own tag since its
/// critical systems take a simpler form.
#[derive(Debug, Clone)]
pub enum NormSpec {
    Euclidean,
    /// `p = 2m / (2l + 1)` with `m > l >= 0`, so `p > 1`.
    LpRational { m: u32, l: u32 },
    /// Branch of `G(z, t) = 0` in the variables `z1..zn, t`; the norm value
    /// is the smallest positive real root in `t`.
    ImplicitBranch { g: Polynomial },
}

impl NormSpec {
    /// Validates internally and against the ambient dimension `n`.
    pub fn validate(&self, n: usize) -> Result<(), NormError> {
        match self {
            NormSpec::Euclidean => Ok(()),
            NormSpec::LpRational { m, l } => {
                if *m == 0 || m <= l {
                    Err(NormError::BadExponents { m: *m, l: *l })
                } else {
                    Ok(())
                }
            }
            NormSpec::ImplicitBranch { g } => {
                if g.num_vars() != n + 1 {
                    return Err(NormError::WrongArity {
                        expected: n + 1,
                        got: g.num_vars(),
                    });
                }
                if g.degree_in(&[n]) == 0 {
                    return Err(NormError::ConstantInT);
                }
                Ok(())
            }
        }
    }

    /// `(m, l)` for the rational-exponent family, treating Euclidean as
    /// `(1, 0)`. `None` for implicit branches.
    pub fn lp_exponents(&self) -> Option<(u32, u32)> {
        match self {
            NormSpec::Euclidean => Some((1, 0)),
            NormSpec::LpRational { m, l } => Some((*m, *l)),
            NormSpec::ImplicitBranch { .. } => None,
        }
    }

    pub fn p_value(&self) -> Option<f64> {
        self.lp_exponents()
            .map(|(m, l)| 2.0 * m as f64 / (2.0 * l as f64 + 1.0))
    }

    /// Norm value at a real point.
    pub fn eval(&self, x: &[f64]) -> Result<f64, NormError> {
        match self {
            NormSpec::Euclidean => Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt()),
            NormSpec::LpRational { m, l } => {
                let root_index = 2 * l + 1;
                let power = 2 * m;
                let sum: f64 = x
                    .iter()
                    .map(|&v| odd_root(v, root_index).powi(power as i32))
                    .sum();
                Ok(sum.powf(root_index as f64 / power as f64))
            }
            NormSpec::ImplicitBranch { g } => {
                if x.iter().all(|&v| v == 0.0) {
                    return Ok(0.0);
                }
                branch_root(g, x)
            }
        }
    }

    /// Gradient of the p-th power `nu^p` for the rational-exponent family:
    /// component `j` is `p * sign(x_j) |x_j|^(p-1)`, evaluated on the real
    /// odd-root branch.
    pub fn power_gradient(&self, x: &[f64]) -> Result<Vec<f64>, NormError> {
        let (m, l) = self.lp_exponents().ok_or(NormError::Unsupported)?;
        if x.iter().map(|v| v.abs()).fold(0.0, f64::max) <= GRADIENT_ORIGIN_TOL {
            return Err(NormError::GradientAtZero);
        }
        let p = 2.0 * m as f64 / (2.0 * l as f64 + 1.0);
        let root_index = 2 * l + 1;
        let power = 2 * m - 2 * l - 1;
        Ok(x.iter()
            .map(|&v| p * odd_root(v, root_index).powi(power as i32))
            .collect())
    }

    /// Gradient of the squared norm. Zero at the origin; elsewhere
    /// `2 nu(x)^(2-p) sign(x_j) |x_j|^(p-1)` for the rational family.
    pub fn grad_sq(&self, x: &[f64]) -> Result<Vec<f64>, NormError> {
        let (m, l) = self.lp_exponents().ok_or(NormError::Unsupported)?;
        if x.iter().map(|v| v.abs()).fold(0.0, f64::max) <= GRADIENT_ORIGIN_TOL {
            return Ok(vec![0.0; x.len()]);
        }
        let p = 2.0 * m as f64 / (2.0 * l as f64 + 1.0);
        let nu = self.eval(x)?;
        let factor = 2.0 * nu.powf(2.0 - p);
        let root_index = 2 * l + 1;
        let power = 2 * m - 2 * l - 1;
        Ok(x.iter()
            .map(|&v| factor * odd_root(v, root_index).powi(power as i32))
            .collect())
    }

    /// Dual exponent `q = p / (p - 1)` as an exact reduced fraction.
    pub fn dual_exponent(&self) -> Option<(u64, u64)> {
        let (m, l) = self.lp_exponents()?;
        let num = 2 * m as u64;
        let den = (2 * m - 2 * l - 1) as u64;
        let g = gcd(num, den);
        Some((num / g, den / g))
    }
}

/// Real `k`-th root for odd `k`: negative inputs map to negative roots.
pub fn odd_root(v: f64, k: u32) -> f64 {
    debug_assert!(k % 2 == 1);
    if k == 1 {
        v
    } else {
        v.signum() * v.abs().powf(1.0 / k as f64)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Smallest positive real root in `t` of `G(x, t) = 0`.
fn branch_root(g: &Polynomial, x: &[f64]) -> Result<f64, NormError> {
    let n = g.num_vars() - 1;
    if x.len() != n {
        return Err(NormError::WrongArity {
            expected: n,
            got: x.len(),
        });
    }
    let t_degree = g.degree_in(&[n]) as usize;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); t_degree + 1];
    for (exps, c) in g.terms() {
        let k = exps[n] as usize;
        let mut v = c;
        for (j, &e) in exps[..n].iter().enumerate() {
            if e > 0 {
                v *= Complex64::new(x[j], 0.0).powu(e);
            }
        }
        coeffs[k] += v;
    }
    let scale = x.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let positive_tol = BRANCH_POSITIVE_TOL * scale;
    univariate_roots(&coeffs)
        .into_iter()
        .filter(|z| z.im.abs() <= BRANCH_IMAG_TOL * z.re.abs().max(1.0) && z.re > positive_tol)
        .map(|z| z.re)
        .fold(None, |best: Option<f64>, r| {
            Some(best.map_or(r, |b| b.min(r)))
        })
        .ok_or(NormError::NoBranchRoot)
}

/// Outcome of sampling-based checks of injectivity and surjectivity of the
/// squared-norm gradient.
#[derive(Debug, Clone, Serialize)]
pub struct InjectivityReport {
    pub samples: usize,
    /// Minimum over sampled pairs of |F(x) - F(x')| / |x - x'|; zero would
    /// witness a collision.
    pub min_image_separation: f64,
    /// Fraction of sampled targets w for which Newton inversion of the
    /// squared-norm gradient reached residual below 1e-8.
    pub inversion_success_rate: f64,
    pub max_inversion_residual: f64,
}

/// Samples pairs to look for gradient collisions and inverts the map on
/// random targets. A weak result is reported, never raised as an error.
pub fn grad_sq_injectivity_probe(
    spec: &NormSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<InjectivityReport, NormError> {
    if spec.lp_exponents().is_none() {
        return Err(NormError::Unsupported);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sep = f64::INFINITY;
    for _ in 0..samples {
        let a = gaussian_vec(&mut rng, n);
        let b = gaussian_vec(&mut rng, n);
        let dist: f64 = a
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        if dist < 1e-9 {
            continue;
        }
        let fa = spec.grad_sq(&a)?;
        let fb = spec.grad_sq(&b)?;
        let img: f64 = fa
            .iter()
            .zip(&fb)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        min_sep = min_sep.min(img / dist);
    }

    let mut successes = 0usize;
    let mut max_residual = 0.0f64;
    for _ in 0..samples {
        let w = gaussian_vec(&mut rng, n);
        let start: Vec<f64> = w.iter().map(|v| v / 2.0).collect();
        let residual = match newton_invert_map(|x| spec.grad_sq(x), &w, &start) {
            Some((_, r)) => r,
            None => f64::INFINITY,
        };
        if residual < 1e-8 {
            successes += 1;
        }
        if residual.is_finite() {
            max_residual = max_residual.max(residual);
        }
    }
    Ok(InjectivityReport {
        samples,
        min_image_separation: if min_sep.is_finite() { min_sep } else { 0.0 },
        inversion_success_rate: successes as f64 / samples.max(1) as f64,
        max_inversion_residual: max_residual,
    })
}

/// Damped Newton inversion of a real vector map with a finite-difference
/// Jacobian. Returns the preimage and its residual when the iteration
/// converges.
pub fn newton_invert_map<F>(map: F, target: &[f64], start: &[f64]) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, NormError>,
{
    let n = target.len();
    let h = 1e-6;
    let residual_of = |x: &[f64]| -> Option<f64> {
        let fx = map(x).ok()?;
        Some(
            fx.iter()
                .zip(target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        )
    };
    let mut x = start.to_vec();
    let mut res = residual_of(&x)?;
    for _ in 0..120 {
        if res < 1e-12 {
            return Some((x, res));
        }
        let fx = map(&x).ok()?;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fp = map(&xp).ok()?;
            let fm = map(&xm).ok()?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let rhs = DVector::from_iterator(n, fx.iter().zip(target).map(|(a, b)| b - a));
        let step = jac.lu().solve(&rhs)?;
        // Backtrack until the residual actually drops.
        let mut damping = 1.0;
        let mut advanced = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(v, s)| v + damping * s)
                .collect();
            if trial.iter().all(|v| v.is_finite()) {
                if let Some(trial_res) = residual_of(&trial) {
                    if trial_res < res {
                        x = trial;
                        res = trial_res;
                        advanced = true;
                        break;
                    }
                }
            }
            damping /= 2.0;
        }
        if !advanced {
            break;
        }
    }
    Some((x, res))
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
