//! Construction of the parametric critical-point polynomial systems.
//!
//! The unknowns come first in every equation's variable context, ordered
//! `y1..yn`, then Lagrange multipliers `lam1..lamc`, then the branch value
//! `t` where present; the query-point parameters `x1..xn` follow. Solutions
//! are identified by their y-coordinates; auxiliary unknowns are forgotten
//! when fibers are counted.

use crate::norms::NormSpec;
use crate::poly::{PolyError, PolyMatrix, Polynomial};
use crate::variety::VarietySpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("the Lagrange form needs #generators = codim, got {generators} generators for codimension {codim}")]
    LagrangeNeedsCompleteIntersection { generators: usize, codim: usize },
    #[error("lp exponents require m > l >= 0, got m = {m}, l = {l}")]
    InvalidExponents { m: u32, l: u32 },
    #[error("implicit norm polynomial must depend on t")]
    ConstantInT,
    #[error("implicit norm polynomial has {got} variables, expected {expected}")]
    ImplicitArity { expected: usize, got: usize },
    #[error("system with {equations} equations in {unknowns} unknowns is underdetermined")]
    Underdetermined { equations: usize, unknowns: usize },
    #[error("system is not square: {equations} equations in {unknowns} unknowns")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("the generator block alone fills the square system; nothing is left for minors")]
    NoRoomForMinors,
    #[error("Bezout product overflows")]
    BezoutOverflow,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Which critical-point formulation a system realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    L2Minor,
    LpLagrange { m: u32, l: u32 },
    LpMinor { m: u32 },
    ImplicitNorm,
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formulation::L2Minor => write!(f, "l2-minor"),
            Formulation::LpLagrange { m, l } => write!(f, "lp-lagrange(m={m},l={l})"),
            Formulation::LpMinor { m } => write!(f, "lp-minor(m={m})"),
            Formulation::ImplicitNorm => write!(f, "implicit"),
        }
    }
}

/// A parametric polynomial system whose solutions over a fixed query point x
/// are the critical points of the distance objective on the variety.
#[derive(Debug, Clone)]
pub struct CriticalSystem {
    variety: VarietySpec,
    equations: Vec<Polynomial>,
    unknowns: Vec<String>,
    parameters: Vec<String>,
    formulation: Formulation,
    y_slots: Vec<usize>,
    original_minors: Option<Vec<Polynomial>>,
    discriminant: Option<Polynomial>,
}

impl CriticalSystem {
    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn y_slots(&self) -> &[usize] {
        &self.y_slots
    }

    /// Full minor list retained by `square_up` for post-hoc filtering.
    pub fn original_minors(&self) -> Option<&[Polynomial]> {
        self.original_minors.as_deref()
    }

    /// `dG/dt` composed with `(x - y, t)`; solutions annihilating it sit on
    /// the branch discriminant.
    pub fn discriminant(&self) -> Option<&Polynomial> {
        self.discriminant.as_ref()
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn num_parameters(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_square(&self) -> bool {
        self.equations.len() == self.unknowns.len()
    }

    /// Total degrees of the equations; the factors of the Bezout bound and
    /// the start-system degrees of the total-degree homotopy.
    pub fn equation_degrees(&self) -> Vec<u32> {
        self.equations.iter().map(|e| e.total_degree()).collect()
    }

    /// Product of equation total degrees. Requires a square system.
    pub fn bezout_bound(&self) -> Result<u64, SystemError> {
        if !self.is_square() {
            return Err(SystemError::NotSquare {
                equations: self.equations.len(),
                unknowns: self.unknowns.len(),
            });
        }
        let mut acc: u64 = 1;
        for d in self.equation_degrees() {
            acc = acc
                .checked_mul(d.max(1) as u64)
                .ok_or(SystemError::BezoutOverflow)?;
        }
        Ok(acc)
    }

    /// Unknown and parameter names, in variable-context order.
    pub fn variable_names(&self) -> Vec<String> {
        self.unknowns
            .iter()
            .chain(self.parameters.iter())
            .cloned()
            .collect()
    }

    /// Equations with the parameters fixed at `x`.
    pub fn specialize(&self, x: &[Complex64]) -> Result<Vec<Polynomial>, PolyError> {
        self.equations
            .iter()
            .map(|e| e.specialize_suffix(x))
            .collect()
    }

    /// Indices of parameters that appear in no equation. A non-empty result
    /// flags a degenerate presentation (criticality does not depend on that
    /// query coordinate); reported as a diagnostic, not an error.
    pub fn missing_parameters(&self) -> Vec<usize> {
        let u = self.num_unknowns();
        (0..self.num_parameters())
            .filter(|&j| {
                !self
                    .equations
                    .iter()
                    .any(|e| e.degree_in(&[u + j]) > 0)
            })
            .collect()
    }
}

fn y_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("y{j}")).collect()
}

fn x_names(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("x{j}")).collect()
}

fn lambda_names(c: usize) -> Vec<String> {
    (1..=c).map(|i| format!("lam{i}")).collect()
}

/// Generators and Jacobian entries lifted into a context with `unknowns`
/// unknown slots followed by n parameter slots.
fn embed_variety(
    v: &VarietySpec,
    unknowns: usize,
) -> Result<(Vec<Polynomial>, PolyMatrix), SystemError> {
    let n = v.ambient_dim();
    let total = unknowns + n;
    let slot_map: Vec<usize> = (0..n).collect();
    let gens = v
        .generators()
        .iter()
        .map(|g| g.embed(total, &slot_map))
        .collect::<Result<Vec<_>, _>>()?;
    let jac = v.jacobian();
    let mut entries = Vec::with_capacity(n * v.generators().len());
    for j in 0..n {
        for i in 0..v.generators().len() {
            entries.push(jac.at(j, i).embed(total, &slot_map)?);
        }
    }
    let jac = PolyMatrix::new(n, v.generators().len(), entries)?;
    Ok((gens, jac))
}

/// `x_j - y_j` in a context with `unknowns` unknown slots.
fn displacement(total: usize, unknowns: usize, j: usize) -> Polynomial {
    let x = Polynomial::variable(total, unknowns + j).expect("slot in range");
    let y = Polynomial::variable(total, j).expect("slot in range");
    &x - &y
}

/// Critical system for the Euclidean norm: the generators together with all
/// (codim+1)-minors of the Jacobian augmented by the column x - y. Unknowns
/// are y only; the system may be overdetermined.
pub fn build_l2_minor_system(v: &VarietySpec) -> CriticalSystem {
    build_minor_system(v, 1, Formulation::L2Minor)
}

/// Critical system for the even norm `p = 2m`: the augmented column carries
/// the coordinate-wise odd power `(x_j - y_j)^(2m-1)`.
pub fn build_lp_minor_system(v: &VarietySpec, m: u32) -> CriticalSystem {
    let formulation = if m == 1 {
        Formulation::LpMinor { m: 1 }
    } else {
        Formulation::LpMinor { m }
    };
    build_minor_system(v, m, formulation)
}

fn build_minor_system(v: &VarietySpec, m: u32, formulation: Formulation) -> CriticalSystem {
    let n = v.ambient_dim();
    let unknowns = n;
    let total = unknowns + n;
    let (gens, jac) = embed_variety(v, unknowns).expect("embedding preserves arity");
    let cols = v.generators().len() + 1;
    let mut entries = Vec::with_capacity(n * cols);
    for j in 0..n {
        for i in 0..v.generators().len() {
            entries.push(jac.at(j, i).clone());
        }
        entries.push(displacement(total, unknowns, j).pow(2 * m - 1));
    }
    let augmented = PolyMatrix::new(n, cols, entries).expect("shape by construction");
    let minors = augmented
        .all_minors(v.codim() + 1)
        .expect("codim + 1 <= n and <= cols");
    let mut equations = gens;
    equations.extend(minors);
    CriticalSystem {
        variety: v.clone(),
        equations,
        unknowns: y_names(n),
        parameters: x_names(n),
        formulation,
        y_slots: (0..n).collect(),
        original_minors: None,
        discriminant: None,
    }
}

/// Lagrange form for `p = 2m/(2l+1)`: unknowns (y, lam), equations
/// `p_i(y) = 0` and `(x_j - y_j)^(2m-2l-1) = ((D(C)(y) lam)_j)^(2l+1)`.
/// Needs a complete-intersection presentation (#generators = codim).
pub fn build_lp_lagrange_system(
    v: &VarietySpec,
    m: u32,
    l: u32,
) -> Result<CriticalSystem, SystemError> {
    if m == 0 || m <= l {
        return Err(SystemError::InvalidExponents { m, l });
    }
    let c = v.codim();
    if v.generators().len() != c {
        return Err(SystemError::LagrangeNeedsCompleteIntersection {
            generators: v.generators().len(),
            codim: c,
        });
    }
    let n = v.ambient_dim();
    let unknowns = n + c;
    let total = unknowns + n;
    let (gens, jac) = embed_variety(v, unknowns)?;
    let mut equations = gens;
    for j in 0..n {
        let mut normal_j = Polynomial::zero(total);
        for i in 0..c {
            let lam = Polynomial::variable(total, n + i)?;
            normal_j = &normal_j + &(&lam * jac.at(j, i));
        }
        let lhs = displacement(total, unknowns, j).pow(2 * m - 2 * l - 1);
        let rhs = normal_j.pow(2 * l + 1);
        equations.push(&lhs - &rhs);
    }
    let mut unames = y_names(n);
    unames.extend(lambda_names(c));
    Ok(CriticalSystem {
        variety: v.clone(),
        equations,
        unknowns: unames,
        parameters: x_names(n),
        formulation: Formulation::LpLagrange { m, l },
        y_slots: (0..n).collect(),
        original_minors: None,
        discriminant: None,
    })
}

/// Critical system for an implicit branch norm G(z, t): unknowns
/// (y, lam, t), equations `p_i(y) = 0`, `G(x - y, t) = 0`, and
/// `dG/dz_j(x - y, t) = (D(C)(y) lam)_j`. Solutions with
/// `dG/dt(x - y, t) = 0` lie on the branch discriminant and are flagged
/// downstream.
pub fn build_implicit_norm_system(
    v: &VarietySpec,
    g: &Polynomial,
) -> Result<CriticalSystem, SystemError> {
    let n = v.ambient_dim();
    if g.num_vars() != n + 1 {
        return Err(SystemError::ImplicitArity {
            expected: n + 1,
            got: g.num_vars(),
        });
    }
    if g.degree_in(&[n]) == 0 {
        return Err(SystemError::ConstantInT);
    }
    let c = v.codim();
    if v.generators().len() != c {
        return Err(SystemError::LagrangeNeedsCompleteIntersection {
            generators: v.generators().len(),
            codim: c,
        });
    }
    let unknowns = n + c + 1;
    let t_slot = n + c;
    let total = unknowns + n;
    let (gens, jac) = embed_variety(v, unknowns)?;

    // Substitution (z, t) -> (x - y, t) into G and its z-gradient.
    let mut subs: Vec<Polynomial> = (0..n)
        .map(|j| displacement(total, unknowns, j))
        .collect();
    subs.push(Polynomial::variable(total, t_slot)?);

    let mut equations = gens;
    equations.push(g.compose(&subs)?);
    for j in 0..n {
        let grad_j = g.differentiate(j)?.compose(&subs)?;
        let mut normal_j = Polynomial::zero(total);
        for i in 0..c {
            let lam = Polynomial::variable(total, n + i)?;
            normal_j = &normal_j + &(&lam * jac.at(j, i));
        }
        equations.push(&grad_j - &normal_j);
    }
    let discriminant = g.differentiate(n)?.compose(&subs)?;

    let mut unames = y_names(n);
    unames.extend(lambda_names(c));
    unames.push("t".to_string());
    Ok(CriticalSystem {
        variety: v.clone(),
        equations,
        unknowns: unames,
        parameters: x_names(n),
        formulation: Formulation::ImplicitNorm,
        y_slots: (0..n).collect(),
        original_minors: None,
        discriminant: Some(discriminant),
    })
}

/// Replaces an overdetermined minor block by `#unknowns - #generators`
/// random complex linear combinations of all minors, retaining the original
/// minors for post-hoc residual filtering. Square systems pass through
/// unchanged; the combination weights are deterministic under `seed`.
pub fn square_up(s: &CriticalSystem, seed: u64) -> Result<CriticalSystem, SystemError> {
    let e = s.equations.len();
    let u = s.unknowns.len();
    if e == u {
        return Ok(s.clone());
    }
    if e < u {
        return Err(SystemError::Underdetermined {
            equations: e,
            unknowns: u,
        });
    }
    let g = s.variety.generators().len();
    if g >= u {
        return Err(SystemError::NoRoomForMinors);
    }
    let needed = u - g;
    let minors: Vec<Polynomial> = s.equations[g..].to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combos = Vec::with_capacity(needed);
    for _ in 0..needed {
        let mut combo = Polynomial::zero(minors[0].num_vars());
        for minor in &minors {
            let w = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            combo = &combo + &minor.scale(w);
        }
        combos.push(combo);
    }
    let mut equations = s.equations[..g].to_vec();
    equations.extend(combos);
    Ok(CriticalSystem {
        variety: s.variety.clone(),
        equations,
        unknowns: s.unknowns.clone(),
        parameters: s.parameters.clone(),
        formulation: s.formulation,
        y_slots: s.y_slots.clone(),
        original_minors: Some(minors),
        discriminant: s.discriminant.clone(),
    })
}

/// Formulation choice used by the `auto` mode: minor forms where they exist
/// (Euclidean and even p), the Lagrange form for fractional p, the implicit
/// form for branch norms. Minor systems are squared up with `seed`.
pub fn build_auto(
    v: &VarietySpec,
    norm: &NormSpec,
    seed: u64,
) -> Result<CriticalSystem, SystemError> {
    match norm {
        NormSpec::Euclidean => square_up(&build_l2_minor_system(v), seed),
        NormSpec::LpRational { m, l } => {
            if *m == 0 || m <= l {
                return Err(SystemError::InvalidExponents { m: *m, l: *l });
            }
            if *l == 0 {
                square_up(&build_lp_minor_system(v, *m), seed)
            } else {
                build_lp_lagrange_system(v, *m, *l)
            }
        }
        NormSpec::ImplicitBranch { g } => build_implicit_norm_system(v, g),
    }
}
