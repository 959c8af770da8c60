//! Problem-file ingestion, subcommand dispatch, and deterministic JSON
//! reporting for the vardist toolset.
//!
//! Reports are byte-identical for identical inputs and seeds; floats are
//! emitted with 17 significant digits so runs can be diffed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;
use vardist::approx::{self, ApproxError, ApproxResult, ProbeReport};
use vardist::critsys::{
    build_implicit_norm_system, build_l2_minor_system, build_lp_lagrange_system,
    build_lp_minor_system, square_up, CriticalSystem, SystemError,
};
use vardist::degree::{nu_distance_degree, DegreeError, DegreeReport};
use vardist::norms::{NormError, NormSpec};
use vardist::poly::{parse_polynomial, PolyError, Polynomial};
use vardist::solver::{solve_at, SolveError, SolveOutcome, TrackingConfig};
use vardist::variety::{VarietyError, VarietySpec};

pub const DEFAULT_TRIALS: usize = 8;
pub const DEFAULT_LOOPS: usize = 5;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SCALE: f64 = 1.0;

/// Exit code 2: the problem file or flags are invalid.
/// Exit code 3: the solvers gave up (path-failure thresholds exceeded or no
/// usable solutions).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Validation {
        message: String,
        position: Option<usize>,
    },
    #[error("{message}")]
    Solver { message: String },
    #[error("{message}")]
    Io { message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } | CliError::Io { .. } => 2,
            CliError::Solver { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::Solver { .. } => "solver",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable error object, written to stdout on failure.
    pub fn to_json(&self) -> String {
        let position = match self {
            CliError::Validation {
                position: Some(p), ..
            } => format!(",\"position\":{p}"),
            _ => String::new(),
        };
        format!(
            "{{\"error\":{{\"kind\":\"{}\",\"message\":{}{}}}}}",
            self.kind(),
            serde_json::to_string(&self.to_string()).expect("string encodes"),
            position
        )
    }
}

fn validation(message: impl Into<String>) -> CliError {
    CliError::Validation {
        message: message.into(),
        position: None,
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        let position = match &e {
            PolyError::UnknownIdentifier { position, .. }
            | PolyError::Syntax { position, .. }
            | PolyError::BadExponent { position } => Some(*position),
            _ => None,
        };
        CliError::Validation {
            message: e.to_string(),
            position,
        }
    }
}

impl From<VarietyError> for CliError {
    fn from(e: VarietyError) -> Self {
        validation(e.to_string())
    }
}

impl From<NormError> for CliError {
    fn from(e: NormError) -> Self {
        validation(e.to_string())
    }
}

impl From<SystemError> for CliError {
    fn from(e: SystemError) -> Self {
        validation(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotSquare { .. }
            | SolveError::ParameterArity { .. }
            | SolveError::PointArity { .. }
            | SolveError::System(_)
            | SolveError::Poly(_) => validation(e.to_string()),
            _ => CliError::Solver {
                message: e.to_string(),
            },
        }
    }
}

impl From<DegreeError> for CliError {
    fn from(e: DegreeError) -> Self {
        match e {
            DegreeError::TooFewTrials(_) | DegreeError::System(_) => validation(e.to_string()),
            _ => CliError::Solver {
                message: e.to_string(),
            },
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match e {
            ApproxError::Arity { .. }
            | ApproxError::BadExponent(_)
            | ApproxError::NotOnVariety { .. }
            | ApproxError::Norm(_)
            | ApproxError::System(_)
            | ApproxError::Variety(_) => validation(e.to_string()),
            ApproxError::NoRealCandidates => CliError::Solver {
                message: e.to_string(),
            },
            ApproxError::Solve(inner) => inner.into(),
        }
    }
}

/// Norm field of the problem file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormField {
    Euclidean,
    Lp { m: u32, l: u32 },
    Implicit {
        #[serde(rename = "G")]
        g: String,
    },
}

/// Solver tolerance overrides accepted in the problem file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dedup_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_failure_fraction: Option<f64>,
}

/// The on-disk problem description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub codim: usize,
    pub generators: Vec<String>,
    pub norm: NormField,
    #[serde(default = "default_formulation")]
    pub formulation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigOverrides>,
}

fn default_formulation() -> String {
    "auto".to_string()
}

/// Flag overrides from the command line; these win over file config.
#[derive(Debug, Clone, Default)]
pub struct RunFlags {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub loops: Option<usize>,
    pub samples: Option<usize>,
    pub scale: Option<f64>,
    pub tol_residual: Option<f64>,
    pub tol_real: Option<f64>,
    pub tol_dedup: Option<f64>,
    pub max_steps: Option<usize>,
    pub paths_tol: Option<f64>,
    pub no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Validate,
    Solve,
    Degree,
    Approx,
    Probe,
}

impl Subcommand {
    fn name(&self) -> &'static str {
        match self {
            Subcommand::Validate => "validate",
            Subcommand::Solve => "solve",
            Subcommand::Degree => "degree",
            Subcommand::Approx => "approx",
            Subcommand::Probe => "probe",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Serialize)]
pub struct SolutionJson {
    /// Full unknown vector, one [re, im] pair per unknown.
    pub point: Vec<[f64; 2]>,
    /// Projection to the y-coordinates.
    pub y: Vec<[f64; 2]>,
    pub residual: f64,
    pub is_real: bool,
    pub is_singular_on_c: bool,
    pub on_discriminant: bool,
    pub multiplicity: usize,
}

#[derive(Debug, Serialize)]
pub struct SolvePayload {
    pub x: Vec<f64>,
    pub bezout: u64,
    pub solutions: Vec<SolutionJson>,
    pub real_smooth_count: usize,
    pub paths_tracked: usize,
    pub paths_diverged: usize,
    pub path_failures: usize,
    pub minor_filtered: usize,
}

#[derive(Debug, Serialize)]
pub struct ValidatePayload {
    pub ok: bool,
    pub formulation: String,
    pub unknowns: Vec<String>,
    pub parameters: Vec<String>,
    pub equations: Vec<String>,
    pub bezout: u64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Validate(ValidatePayload),
    Solve(SolvePayload),
    Degree(DegreeReport),
    Approx(ApproxResult),
    Probe(ProbeReport),
}

/// The top-level report written to standard output.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: ToolInfo,
    pub subcommand: &'static str,
    pub problem: ProblemFile,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
    pub warnings: Vec<String>,
    pub payload: Payload,
}

/// A parsed and validated problem: the variety, the norm, and the critical
/// system under the requested formulation.
pub struct BuiltProblem {
    pub file: ProblemFile,
    pub variety: VarietySpec,
    pub norm: NormSpec,
    pub system: CriticalSystem,
    pub warnings: Vec<String>,
}

fn parse_generators(file: &ProblemFile) -> Result<Vec<Polynomial>, CliError> {
    let names: Vec<String> = (1..=file.n).map(|j| format!("y{j}")).collect();
    let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    file.generators
        .iter()
        .enumerate()
        .map(|(i, text)| {
            parse_polynomial(text, &name_refs).map_err(|e| {
                let base: CliError = e.into();
                match base {
                    CliError::Validation { message, position } => CliError::Validation {
                        message: format!("generator {}: {message}", i + 1),
                        position,
                    },
                    other => other,
                }
            })
        })
        .collect()
}

fn parse_norm(file: &ProblemFile) -> Result<NormSpec, CliError> {
    let norm = match &file.norm {
        NormField::Euclidean => NormSpec::Euclidean,
        NormField::Lp { m, l } => NormSpec::LpRational { m: *m, l: *l },
        NormField::Implicit { g } => {
            let mut names: Vec<String> = (1..=file.n).map(|j| format!("z{j}")).collect();
            names.push("t".to_string());
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let poly = parse_polynomial(g, &name_refs).map_err(|e| {
                let base: CliError = e.into();
                match base {
                    CliError::Validation { message, position } => CliError::Validation {
                        message: format!("norm polynomial: {message}"),
                        position,
                    },
                    other => other,
                }
            })?;
            NormSpec::ImplicitBranch { g: poly }
        }
    };
    norm.validate(file.n)?;
    Ok(norm)
}

fn build_system(
    file: &ProblemFile,
    variety: &VarietySpec,
    norm: &NormSpec,
    seed: u64,
) -> Result<(CriticalSystem, String), CliError> {
    let formulation = file.formulation.as_str();
    let system = match formulation {
        "auto" => vardist::critsys::build_auto(variety, norm, seed)?,
        "l2-minor" => {
            if !matches!(norm, NormSpec::Euclidean) {
                return Err(validation(
                    "formulation l2-minor requires the euclidean norm",
                ));
            }
            square_up(&build_l2_minor_system(variety), seed)?
        }
        "lp-minor" => match norm {
            NormSpec::LpRational { m, l: 0 } => {
                square_up(&build_lp_minor_system(variety, *m), seed)?
            }
            NormSpec::Euclidean => square_up(&build_lp_minor_system(variety, 1), seed)?,
            _ => {
                return Err(validation(
                    "formulation lp-minor requires an lp norm with l = 0",
                ))
            }
        },
        "lp-lagrange" => match norm {
            NormSpec::LpRational { m, l } => build_lp_lagrange_system(variety, *m, *l)?,
            NormSpec::Euclidean => build_lp_lagrange_system(variety, 1, 0)?,
            _ => {
                return Err(validation(
                    "formulation lp-lagrange requires an lp or euclidean norm",
                ))
            }
        },
        "implicit" => match norm {
            NormSpec::ImplicitBranch { g } => build_implicit_norm_system(variety, g)?,
            _ => {
                return Err(validation(
                    "formulation implicit requires an implicit norm",
                ))
            }
        },
        other => {
            return Err(validation(format!(
                "unknown formulation `{other}` (expected auto | l2-minor | lp-lagrange | lp-minor | implicit)"
            )))
        }
    };
    let tag = system.formulation().to_string();
    Ok((system, tag))
}

/// Parses, validates, and builds the critical system for a problem file.
pub fn build_problem(file: ProblemFile, seed: u64) -> Result<BuiltProblem, CliError> {
    if file.n == 0 {
        return Err(validation("ambient dimension n must be positive"));
    }
    if let Some(x) = &file.x {
        if x.len() != file.n {
            return Err(validation(format!(
                "x has {} coordinates but n = {}",
                x.len(),
                file.n
            )));
        }
    }
    let generators = parse_generators(&file)?;
    let variety = VarietySpec::new(
        file.n,
        generators,
        file.codim,
        file.name.clone().unwrap_or_else(|| "problem".to_string()),
    )?;
    let norm = parse_norm(&file)?;
    let (system, _) = build_system(&file, &variety, &norm, seed)?;

    let mut warnings =
        vec!["irreducibility of the variety is assumed, not verified".to_string()];
    let missing = system.missing_parameters();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(|j| format!("x{}", j + 1)).collect();
        warnings.push(format!(
            "query coordinates {} do not appear in the critical system; criticality \
             is independent of them",
            names.join(", ")
        ));
    }
    Ok(BuiltProblem {
        file,
        variety,
        norm,
        system,
        warnings,
    })
}

fn tracking_config(file: &ProblemFile, flags: &RunFlags, seed: u64) -> TrackingConfig {
    let mut cfg = TrackingConfig {
        gamma_seed: seed,
        ..TrackingConfig::default()
    };
    if let Some(overrides) = &file.config {
        if let Some(v) = overrides.residual_tol {
            cfg.residual_tol = v;
        }
        if let Some(v) = overrides.real_tol {
            cfg.real_tol = v;
        }
        if let Some(v) = overrides.dedup_tol {
            cfg.dedup_tol = v;
        }
        if let Some(v) = overrides.max_steps {
            cfg.max_steps = v;
        }
        if let Some(v) = overrides.max_failure_fraction {
            cfg.max_failure_fraction = v;
        }
    }
    if let Some(v) = flags.tol_residual {
        cfg.residual_tol = v;
    }
    if let Some(v) = flags.tol_real {
        cfg.real_tol = v;
    }
    if let Some(v) = flags.tol_dedup {
        cfg.dedup_tol = v;
    }
    if let Some(v) = flags.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = flags.paths_tol {
        cfg.max_failure_fraction = v;
    }
    cfg
}

fn check_config(cfg: &TrackingConfig) -> Result<(), CliError> {
    let tolerances = [
        ("tol-residual", cfg.residual_tol),
        ("tol-real", cfg.real_tol),
        ("tol-dedup", cfg.dedup_tol),
        ("paths-tol", cfg.max_failure_fraction),
    ];
    for (name, value) in tolerances {
        if !(value > 0.0 && value.is_finite()) {
            return Err(validation(format!("{name} must be a positive number")));
        }
    }
    if cfg.max_steps == 0 {
        return Err(validation("max-steps must be positive"));
    }
    Ok(())
}

fn solution_json(sol: &vardist::solver::Solution) -> SolutionJson {
    let pair = |c: &Complex64| [c.re, c.im];
    SolutionJson {
        point: sol.point.iter().map(pair).collect(),
        y: sol.y_part.iter().map(pair).collect(),
        residual: sol.residual,
        is_real: sol.is_real,
        is_singular_on_c: sol.is_singular_on_c,
        on_discriminant: sol.on_discriminant,
        multiplicity: sol.multiplicity,
    }
}

fn solve_payload(x: &[f64], bezout: u64, out: &SolveOutcome) -> SolvePayload {
    SolvePayload {
        x: x.to_vec(),
        bezout,
        solutions: out.solutions.iter().map(solution_json).collect(),
        real_smooth_count: out.real_smooth_count(),
        paths_tracked: out.paths_tracked,
        paths_diverged: out.paths_diverged,
        path_failures: out.path_failures,
        minor_filtered: out.minor_filtered,
    }
}

/// Loads the problem file and dispatches the subcommand, producing the
/// report that `main` serializes.
pub fn run(
    subcommand: Subcommand,
    problem_path: &Path,
    flags: &RunFlags,
) -> Result<RunReport, CliError> {
    let started = std::time::Instant::now();
    let text = std::fs::read_to_string(problem_path).map_err(|e| CliError::Io {
        message: format!("cannot read {}: {e}", problem_path.display()),
    })?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| CliError::Validation {
        message: format!("problem file: {e}"),
        position: None,
    })?;
    let seed = flags
        .seed
        .or(file.config.as_ref().and_then(|c| c.seed))
        .unwrap_or(0);
    let cfg = tracking_config(&file, flags, seed);
    check_config(&cfg)?;

    let built = build_problem(file, seed)?;
    let mut warnings = built.warnings.clone();
    let payload = match subcommand {
        Subcommand::Validate => {
            let names = built.system.variable_names();
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let equations = built
                .system
                .equations()
                .iter()
                .map(|e| e.to_text(&name_refs))
                .collect();
            Payload::Validate(ValidatePayload {
                ok: true,
                formulation: built.system.formulation().to_string(),
                unknowns: built.system.unknowns().to_vec(),
                parameters: built.system.parameters().to_vec(),
                equations,
                bezout: built.system.bezout_bound().map_err(CliError::from)?,
                diagnostics: warnings.clone(),
            })
        }
        Subcommand::Solve => {
            let x = built.file.x.clone().ok_or_else(|| {
                validation("the solve subcommand needs an `x` field in the problem file")
            })?;
            let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let bezout = built.system.bezout_bound().map_err(CliError::from)?;
            let out = solve_at(&built.system, &xc, &cfg)?;
            warnings.extend(out.warnings.clone());
            Payload::Solve(solve_payload(&x, bezout, &out))
        }
        Subcommand::Degree => {
            let report = nu_distance_degree(
                &built.variety,
                &built.norm,
                flags.trials.unwrap_or(DEFAULT_TRIALS),
                flags.loops.unwrap_or(DEFAULT_LOOPS),
                seed,
                &cfg,
            )?;
            warnings.extend(report.warnings.clone());
            Payload::Degree(report)
        }
        Subcommand::Approx => {
            let x = built.file.x.clone().ok_or_else(|| {
                validation("the approx subcommand needs an `x` field in the problem file")
            })?;
            let result = approx::best_approximation(&built.variety, &built.norm, &x, &cfg)?;
            warnings.extend(result.warnings.clone());
            Payload::Approx(result)
        }
        Subcommand::Probe => {
            let report = approx::uniqueness_probe(
                &built.variety,
                &built.norm,
                flags.samples.unwrap_or(DEFAULT_SAMPLES),
                flags.scale.unwrap_or(DEFAULT_SCALE),
                seed,
                &cfg,
            )?;
            Payload::Probe(report)
        }
    };

    Ok(RunReport {
        tool: ToolInfo {
            name: "vardist",
            version: env!("CARGO_PKG_VERSION"),
        },
        subcommand: subcommand.name(),
        problem: built.file,
        seed,
        timing_ms: if flags.no_timing {
            None
        } else {
            Some(started.elapsed().as_secs_f64() * 1e3)
        },
        warnings,
        payload,
    })
}

/// Serializes a report with floats at 17 significant digits, pretty-printed
/// with a trailing newline.
pub fn report_to_json(report: &RunReport) -> String {
    let mut buf = Vec::new();
    let mut serializer =
        serde_json::Serializer::with_formatter(&mut buf, SigFigFormatter::new());
    report.serialize(&mut serializer).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("json is utf-8")
}

/// Pretty JSON formatter that renders every float with 17 significant
/// digits for reproducible, diffable reports.
pub struct SigFigFormatter {
    indent: usize,
    has_value: Vec<bool>,
}

impl SigFigFormatter {
    fn new() -> Self {
        SigFigFormatter {
            indent: 0,
            has_value: Vec::new(),
        }
    }

    fn newline<W: ?Sized + Write>(&self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        self.has_value.push(false);
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        let had = self.has_value.pop().unwrap_or(false);
        if had {
            self.newline(writer)?;
        }
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        if let Some(flag) = self.has_value.last_mut() {
            *flag = true;
        }
        self.newline(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent += 1;
        self.has_value.push(false);
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.indent -= 1;
        let had = self.has_value.pop().unwrap_or(false);
        if had {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        if let Some(flag) = self.has_value.last_mut() {
            *flag = true;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b": ")
    }
}
