//! Path tracking along homotopies: explicit Euler prediction on the
//! Davidenko equation, a short Newton corrector, and adaptive step control.

use super::TrackingConfig;
use crate::critsys::CriticalSystem;
use crate::poly::{PolyError, Polynomial};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Paths whose iterates exceed this norm are classified as diverging to
/// infinity.
pub const DIVERGENCE_NORM: f64 = 1e8;

const CORRECTOR_STEPS: usize = 3;
const STEP_GROWTH_AFTER: usize = 5;

/// A square polynomial system in its unknowns with a precomputed Jacobian,
/// plus per-equation degrees for scaled residuals.
pub struct SpecializedSystem {
    eqs: Vec<Polynomial>,
    jac: Vec<Vec<Polynomial>>,
    degrees: Vec<u32>,
    dim: usize,
}

impl SpecializedSystem {
    pub fn new(eqs: Vec<Polynomial>) -> Result<Self, PolyError> {
        let dim = eqs.first().map(|e| e.num_vars()).unwrap_or(0);
        let mut jac = Vec::with_capacity(eqs.len());
        for e in &eqs {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                row.push(e.differentiate(j)?);
            }
            jac.push(row);
        }
        let degrees = eqs.iter().map(|e| e.total_degree()).collect();
        Ok(SpecializedSystem {
            eqs,
            jac,
            degrees,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_equations(&self) -> usize {
        self.eqs.len()
    }

    pub fn eval(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.eqs.len(),
            self.eqs
                .iter()
                .map(|e| e.evaluate(z.as_slice()).expect("dimension fixed")),
        )
    }

    pub fn jacobian(&self, z: &DVector<Complex64>) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.eqs.len(), self.dim);
        for (i, row) in self.jac.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                m[(i, j)] = p.evaluate(z.as_slice()).expect("dimension fixed");
            }
        }
        m
    }

    /// Degree-aware residual: `max_i |f_i(z)| / max(1, |z|_inf^deg_i)`.
    pub fn scaled_residual(&self, z: &DVector<Complex64>) -> f64 {
        let z_inf = z.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        self.eqs
            .iter()
            .zip(&self.degrees)
            .map(|(e, &d)| {
                e.evaluate(z.as_slice()).expect("dimension fixed").norm() / z_inf.powi(d as i32)
            })
            .fold(0.0, f64::max)
    }
}

/// A one-parameter family H(z, t) with t running from 0 to 1.
pub trait Homotopy {
    fn eval(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64>;
    fn jac_z(&self, z: &DVector<Complex64>, t: f64) -> DMatrix<Complex64>;
    fn d_dt(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64>;
}

/// Convex gamma-trick combination of the total-degree start system
/// `z_i^(d_i) - 1` with a fixed target system.
pub struct TotalDegreeHomotopy<'a> {
    pub target: &'a SpecializedSystem,
    pub degrees: Vec<u32>,
    pub gamma: Complex64,
}

impl TotalDegreeHomotopy<'_> {
    fn start_eval(&self, z: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.degrees.len(),
            self.degrees
                .iter()
                .enumerate()
                .map(|(i, &d)| z[i].powu(d.max(1)) - Complex64::new(1.0, 0.0)),
        )
    }
}

impl Homotopy for TotalDegreeHomotopy<'_> {
    fn eval(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let s = self.start_eval(z) * (self.gamma * (1.0 - t));
        let f = self.target.eval(z) * Complex64::new(t, 0.0);
        s + f
    }

    fn jac_z(&self, z: &DVector<Complex64>, t: f64) -> DMatrix<Complex64> {
        let mut m = self.target.jacobian(z) * Complex64::new(t, 0.0);
        let g = self.gamma * (1.0 - t);
        for (i, &d) in self.degrees.iter().enumerate() {
            let d = d.max(1);
            m[(i, i)] += g * d as f64 * z[i].powu(d - 1);
        }
        m
    }

    fn d_dt(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let _ = t;
        self.target.eval(z) - self.start_eval(z) * self.gamma
    }
}

/// The system's parameters move along the segment `from -> to` while the
/// unknowns are tracked. Used for monodromy loops.
pub struct SegmentHomotopy {
    eqs: Vec<Polynomial>,
    jac_u: Vec<Vec<Polynomial>>,
    jac_x: Vec<Vec<Polynomial>>,
    num_unknowns: usize,
    from: Vec<Complex64>,
    to: Vec<Complex64>,
}

impl SegmentHomotopy {
    pub fn new(
        system: &CriticalSystem,
        from: &[Complex64],
        to: &[Complex64],
    ) -> Result<Self, PolyError> {
        let u = system.num_unknowns();
        let n = system.num_parameters();
        let mut jac_u = Vec::new();
        let mut jac_x = Vec::new();
        for e in system.equations() {
            let mut row_u = Vec::with_capacity(u);
            for j in 0..u {
                row_u.push(e.differentiate(j)?);
            }
            jac_u.push(row_u);
            let mut row_x = Vec::with_capacity(n);
            for j in 0..n {
                row_x.push(e.differentiate(u + j)?);
            }
            jac_x.push(row_x);
        }
        Ok(SegmentHomotopy {
            eqs: system.equations().to_vec(),
            jac_u,
            jac_x,
            num_unknowns: u,
            from: from.to_vec(),
            to: to.to_vec(),
        })
    }

    fn full_point(&self, z: &DVector<Complex64>, t: f64) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.num_unknowns + self.from.len());
        v.extend(z.iter().copied());
        v.extend(
            self.from
                .iter()
                .zip(&self.to)
                .map(|(a, b)| a * (1.0 - t) + b * t),
        );
        v
    }
}

impl Homotopy for SegmentHomotopy {
    fn eval(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let point = self.full_point(z, t);
        DVector::from_iterator(
            self.eqs.len(),
            self.eqs
                .iter()
                .map(|e| e.evaluate(&point).expect("dimension fixed")),
        )
    }

    fn jac_z(&self, z: &DVector<Complex64>, t: f64) -> DMatrix<Complex64> {
        let point = self.full_point(z, t);
        let mut m = DMatrix::zeros(self.eqs.len(), self.num_unknowns);
        for (i, row) in self.jac_u.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                m[(i, j)] = p.evaluate(&point).expect("dimension fixed");
            }
        }
        m
    }

    fn d_dt(&self, z: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let point = self.full_point(z, t);
        let mut v = DVector::zeros(self.eqs.len());
        for (i, row) in self.jac_x.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, p) in row.iter().enumerate() {
                acc += p.evaluate(&point).expect("dimension fixed") * (self.to[j] - self.from[j]);
            }
            v[i] = acc;
        }
        v
    }
}

pub enum TrackResult {
    /// Reached t = 1 with a healthy corrector.
    Reached(DVector<Complex64>),
    /// Iterates blew past the divergence norm.
    Diverged,
    /// Step control hit the floor or the step budget short of t = 1.
    Stalled(DVector<Complex64>),
}

fn finite(z: &DVector<Complex64>) -> bool {
    z.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

fn corrector<H: Homotopy>(
    h: &H,
    mut z: DVector<Complex64>,
    t: f64,
    cfg: &TrackingConfig,
) -> Option<DVector<Complex64>> {
    for _ in 0..CORRECTOR_STEPS {
        let f = h.eval(&z, t);
        let jac = h.jac_z(&z, t);
        let delta = jac.lu().solve(&(-f))?;
        let step = delta.norm();
        z += delta;
        if !finite(&z) {
            return None;
        }
        if step <= cfg.corrector_tol * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

/// Tracks one path from t = 0 to t = 1.
pub fn track_path<H: Homotopy>(
    h: &H,
    start: DVector<Complex64>,
    cfg: &TrackingConfig,
) -> TrackResult {
    let mut z = start;
    let mut t = 0.0f64;
    let mut step = cfg.initial_step;
    let mut successes = 0usize;
    for _ in 0..cfg.max_steps {
        if t >= 1.0 {
            return TrackResult::Reached(z);
        }
        if !finite(&z) || z.iter().map(|v| v.norm()).fold(0.0, f64::max) > DIVERGENCE_NORM {
            return TrackResult::Diverged;
        }
        let dt = step.min(1.0 - t);
        let t_next = t + dt;
        // Euler predictor on the Davidenko equation; a singular predictor
        // matrix just means we lean on the corrector.
        let predicted = match h.jac_z(&z, t).lu().solve(&(-h.d_dt(&z, t))) {
            Some(dz) => {
                let p = &z + dz * Complex64::new(dt, 0.0);
                if finite(&p) {
                    p
                } else {
                    z.clone()
                }
            }
            None => z.clone(),
        };
        match corrector(h, predicted, t_next, cfg) {
            Some(corrected) => {
                z = corrected;
                t = t_next;
                successes += 1;
                if successes >= STEP_GROWTH_AFTER {
                    step = (step * 2.0).min(cfg.initial_step);
                    successes = 0;
                }
            }
            None => {
                successes = 0;
                step /= 2.0;
                if step < cfg.min_step {
                    return TrackResult::Stalled(z);
                }
            }
        }
    }
    let _ = t;
    TrackResult::Stalled(z)
}
