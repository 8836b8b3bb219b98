//! Batch verification harness behind the `cma-lift` binary.
//!
//! A JSON config names a family, its functional parameters and a sampling
//! plan. `verify` runs the selected suites and writes a report; `scan`
//! evaluates Δ on a grid of `σ`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{
    build_potential, lift_extended, lift_rotational, Catalog, Chart, Family, FamilyCForm, FieldError, PotentialField,
    Range, SolutionSpec, Window,
};
use crate::foliation::{self, Flow, Invariant, Relation};
use crate::geometry::{self, Grid, ScanVerdict, SingularityScan};
use crate::holofunc::{FnBundle, HoloError, HoloFn};
use crate::legendre::{self, TSolver};
use crate::pde::{self, EquationId};
use crate::symmetry::{self, Gen, GeneratorParams, KillingVerdict, TableForm};

type C = Complex64;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config does not parse: {0}")]
    Json(#[from] serde_json::Error),
    #[error("function `{role}`: {source}")]
    Expression { role: String, source: HoloError },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid grid `{0}`, expected min:max:steps")]
    Grid(String),
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Constant {
    Real(f64),
    Complex([f64; 2]),
}

impl Constant {
    pub fn value(self) -> C {
        match self {
            Constant::Real(x) => C::new(x, 0.0),
            Constant::Complex([re, im]) => C::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormChoice {
    #[default]
    Closed,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Pde,
    Legendre,
    Geometry,
    Symmetry,
    Foliation,
    All,
}

impl SuiteName {
    pub const RUNNABLE: [SuiteName; 5] = [
        SuiteName::Pde,
        SuiteName::Legendre,
        SuiteName::Geometry,
        SuiteName::Symmetry,
        SuiteName::Foliation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::Pde => "pde",
            SuiteName::Legendre => "legendre",
            SuiteName::Geometry => "geometry",
            SuiteName::Symmetry => "symmetry",
            SuiteName::Foliation => "foliation",
            SuiteName::All => "all",
        }
    }

    fn salt(self) -> u64 {
        match self {
            SuiteName::Pde => 1,
            SuiteName::Legendre => 2,
            SuiteName::Geometry => 3,
            SuiteName::Symmetry => 4,
            SuiteName::Foliation => 5,
            SuiteName::All => 0,
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn default_count() -> usize {
    100
}

fn default_threshold() -> f64 {
    1e-6
}

fn default_suites() -> Vec<SuiteName> {
    vec![SuiteName::All]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Overrides of the default window, by coordinate name.
    #[serde(default)]
    pub windows: BTreeMap<String, Range>,
    /// Points with `|Δ|` below this fraction of its scale are skipped.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub family: Family,
    pub functions: BTreeMap<String, String>,
    #[serde(default)]
    pub constants: BTreeMap<String, Constant>,
    #[serde(default)]
    pub family_c_form: FormChoice,
    pub sampling: Sampling,
    #[serde(default = "default_suites")]
    pub suites: Vec<SuiteName>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, CliError> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bundle(&self) -> Result<FnBundle, CliError> {
        let mut b = FnBundle::new();
        for (role, src) in &self.functions {
            let f = HoloFn::parse(src).map_err(|source| CliError::Expression {
                role: role.clone(),
                source,
            })?;
            b.insert(role, f);
        }
        Ok(b)
    }

    pub fn spec(&self) -> Result<SolutionSpec, CliError> {
        let mut spec = SolutionSpec::new(self.family, self.bundle()?).with_form(match self.family_c_form {
            FormChoice::Closed => FamilyCForm::CLOSED,
            FormChoice::Printed => FamilyCForm::PRINTED,
        });
        for (k, v) in &self.constants {
            spec = spec.with_constant(k, v.value());
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.spec()?;
        if self.sampling.count == 0 {
            return Err(CliError::Invalid("sampling.count must be positive".into()));
        }
        if !(self.sampling.threshold >= 0.0) {
            return Err(CliError::Invalid("sampling.threshold must be non-negative".into()));
        }
        let known: Vec<String> = [
            Chart::heavenly(),
            Chart::rotational(),
            Chart::parametric(),
            Chart::reduced(),
            Chart::extended(),
        ]
        .iter()
        .flat_map(|c| c.coords().to_vec())
        .collect();
        for (name, r) in &self.sampling.windows {
            if !known.contains(name) {
                return Err(CliError::Invalid(format!("window for unknown coordinate `{name}`")));
            }
            let (lo, hi) = match r {
                Range::Real(x) => (*x, [0.0, 0.0]),
                Range::Complex { re, im } => (*re, *im),
            };
            if lo[0] > lo[1] || hi[0] > hi[1] || lo.iter().chain(&hi).any(|x| !x.is_finite()) {
                return Err(CliError::Invalid(format!("window for `{name}` is not an interval")));
            }
            if name == "z2" && lo[0] <= 0.0 {
                return Err(CliError::Invalid("window for `z2` must keep Re z² > 0".into()));
            }
            if name == "t" && lo[0] <= 0.0 && self.family != Family::Zerocom {
                return Err(CliError::Invalid("window for `t` must keep t > 0".into()));
            }
        }
        for key in self.tolerances.keys() {
            if default_tolerance(key).is_none() {
                return Err(CliError::Invalid(format!("unknown tolerance `{key}`")));
            }
        }
        Ok(())
    }

    fn window(&self, chart: &Chart) -> Window {
        let mut w = Window::for_chart(chart);
        for (name, r) in &self.sampling.windows {
            if w.ranges.contains_key(name) {
                w.ranges.insert(name.clone(), *r);
            }
        }
        w
    }

    fn tol(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| default_tolerance(key))
            .expect("tolerance key listed")
    }

    fn suites(&self) -> Vec<SuiteName> {
        let mut out: Vec<SuiteName> = if self.suites.contains(&SuiteName::All) {
            SuiteName::RUNNABLE
                .into_iter()
                .filter(|s| applicable(*s, self.family))
                .collect()
        } else {
            self.suites.clone()
        };
        out.sort();
        out.dedup();
        out
    }
}

const TOLERANCES: &[(&str, f64)] = &[
    ("pde.bf_system", 1e-9),
    ("pde.rot_system", 1e-8),
    ("pde.lift", 1e-8),
    ("pde.cma_param", 1e-9),
    ("legendre.forward_1d", 1e-9),
    ("legendre.forward_2d", 1e-10),
    ("legendre.metric", 1e-9),
    ("geometry.det", 1e-9),
    ("geometry.hermitian", 1e-10),
    ("geometry.ricci", 1e-8),
    ("geometry.chirality", 1e-7),
    ("geometry.p_independence", 1e-8),
    ("geometry.r11", 1e-8),
    ("geometry.r13", 1e-7),
    ("geometry.pattern", 1e-9),
    ("symmetry.table", 1e-10),
    ("symmetry.jacobi", 1e-10),
    ("symmetry.heavenly", 1e-10),
    ("symmetry.witness", symmetry::WITNESS_THRESHOLD),
    ("foliation.equations", 1e-9),
    ("foliation.commutators", 1e-8),
    ("foliation.flows", 1e-9),
    ("foliation.automorphic", 1e-6),
];

pub fn default_tolerance(key: &str) -> Option<f64> {
    TOLERANCES.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn has_profile(family: Family) -> bool {
    matches!(family, Family::Zeroc | Family::URot | Family::Omega)
}

fn is_heavenly(family: Family) -> bool {
    matches!(family, Family::Zeroc | Family::Zerocom | Family::FamilyC)
}

pub fn applicable(suite: SuiteName, family: Family) -> bool {
    match suite {
        SuiteName::Pde | SuiteName::Symmetry | SuiteName::All => true,
        SuiteName::Legendre => family != Family::Zerocom,
        SuiteName::Geometry => has_profile(family),
        SuiteName::Foliation => is_heavenly(family),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub anchor: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(id: impl Into<String>, anchor: &str, value: f64, tol: f64) -> Check {
        Check {
            id: id.into(),
            anchor: anchor.to_string(),
            value,
            tol,
            pass: value <= tol,
        }
    }

    fn above(id: impl Into<String>, anchor: &str, value: f64, tol: f64) -> Check {
        Check {
            id: id.into(),
            anchor: anchor.to_string(),
            value,
            tol,
            pass: value > tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: Config,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn errored(&self) -> bool {
        self.suites.iter().any(|s| s.error.is_some())
    }

    pub fn exit_code(&self) -> i32 {
        if self.errored() {
            EXIT_ERROR
        } else if self.pass {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.suites.iter().flat_map(|s| &s.checks).find(|c| c.id == id)
    }
}

/// Runs every selected suite. Domain errors mark a suite as errored.
pub fn verify(config: &Config) -> Result<Report, CliError> {
    let start = Instant::now();
    let spec = config.spec()?;
    let mut suites = Vec::new();
    for suite in config.suites() {
        let mut checks = Vec::new();
        let outcome = if applicable(suite, config.family) {
            run_suite(suite, config, &spec, &mut checks)
        } else {
            Err(CliError::Invalid(format!(
                "suite `{suite}` does not apply to family {}",
                config.family.name()
            )))
        };
        suites.push(SuiteReport {
            name: suite.name().to_string(),
            checks,
            error: outcome.err().map(|e| e.to_string()),
        });
    }
    let pass = suites.iter().all(SuiteReport::pass);
    Ok(Report {
        config: config.clone(),
        suites,
        pass,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn run_suite(suite: SuiteName, cfg: &Config, spec: &SolutionSpec, out: &mut Vec<Check>) -> Result<(), CliError> {
    let seed = cfg.sampling.seed.wrapping_mul(31).wrapping_add(suite.salt());
    let mut cat = Catalog::new(seed);
    match suite {
        SuiteName::Pde => pde_suite(cfg, spec, &mut cat, out),
        SuiteName::Legendre => legendre_suite(cfg, spec, &mut cat, out),
        SuiteName::Geometry => geometry_suite(cfg, spec, &mut cat, out),
        SuiteName::Symmetry => symmetry_suite(cfg, spec, &mut cat, out),
        SuiteName::Foliation => foliation_suite(cfg, spec, &mut cat, out),
        SuiteName::All => unreachable!("expanded before running"),
    }
}

fn profile_spec(spec: &SolutionSpec, family: Family) -> Result<SolutionSpec, FieldError> {
    let mut b = FnBundle::new();
    for role in family.roles() {
        b.insert(role, spec.bundle.get(role)?.clone());
    }
    Ok(SolutionSpec::new(family, b))
}

fn points(cfg: &Config, cat: &mut Catalog, field: &PotentialField, n: usize) -> Result<Vec<Vec<C>>, FieldError> {
    cat.points(field, &cfg.window(field.chart()), n)
}

/// Points of a parametric or rotational field whose `Δ(σ)` clears the
/// configured threshold.
fn regular_points(cfg: &Config, cat: &mut Catalog, field: &PotentialField, bundle: &FnBundle, n: usize) -> Result<Vec<Vec<C>>, CliError> {
    let chart = field.chart().clone();
    let (is, isb) = (chart.index("sigma")?, chart.index("sigmab")?);
    let a = bundle.get("a").map_err(FieldError::from)?;
    let ab = a.conjugate();
    let mut out = Vec::new();
    for _ in 0..20 {
        for pt in points(cfg, cat, field, n)? {
            let x = a.derivatives(pt[is], 2).map_err(FieldError::from)?;
            let y = ab.derivatives(pt[isb], 2).map_err(FieldError::from)?;
            let (delta, scale) = legendre::delta_with_scale(&[x[0], x[1], x[2]], &[y[0], y[1], y[2]]);
            if delta.norm() > cfg.sampling.threshold * scale.max(1.0) {
                out.push(pt);
            }
            if out.len() == n {
                return Ok(out);
            }
        }
    }
    Err(CliError::Invalid(format!(
        "fewer than {n} sample points clear the singularity threshold"
    )))
}

fn residual_check(id: &str, anchor: &str, eq: EquationId, field: &PotentialField, pts: &[Vec<C>], tol: f64) -> Result<Check, FieldError> {
    let r = pde::residual(eq, field, pts)?;
    Ok(Check::at_most(id, anchor, r.max_rel, tol))
}

fn pde_suite(cfg: &Config, spec: &SolutionSpec, cat: &mut Catalog, out: &mut Vec<Check>) -> Result<(), CliError> {
    let n = cfg.sampling.count;
    if is_heavenly(cfg.family) {
        let v = build_potential(spec)?;
        let pts = points(cfg, cat, &v, n)?;
        out.push(residual_check(
            "bf_system",
            "v_qq̄ = 2e^{−v_tt/2}, v_qq + v_tz = v_tq²/4, v_q̄z = v_tq e^{−v_tt/2}, v_zz̄ = ½v_tq v_tq̄ e^{−v_tt/2} − e^{−v_tt} and conjugates",
            EquationId::BfSystem,
            &v,
            &pts,
            cfg.tol("pde.bf_system"),
        )?);
    }
    if has_profile(cfg.family) {
        let m = n.min(50);
        let u = build_potential(&profile_spec(spec, Family::URot)?)?;
        let pts = points(cfg, cat, &u, m)?;
        let tol = cfg.tol("pde.rot_system");
        out.push(residual_check("rot_system", "rotationally reduced system", EquationId::RotSystem, &u, &pts, tol)?);
        let lifted = lift_rotational(&u)?;
        let pts = points(cfg, cat, &lifted, m)?;
        let tol = cfg.tol("pde.lift");
        out.push(residual_check("lift_cma", "u₁₁̄u₂₂̄ − u₁₂̄u₂₁̄ = 1", EquationId::Cma, &lifted, &pts, tol)?);
        out.push(residual_check(
            "lift_reduced_system",
            "Monge–Ampère with recursion pairs after eliminating τ",
            EquationId::ReducedSystem,
            &lifted,
            &pts,
            tol,
        )?);
        let extended = lift_extended(&u)?;
        let pts = points(cfg, cat, &extended, m)?;
        out.push(residual_check(
            "lift_six_system",
            "six-equation system with group parameters τ, σ",
            EquationId::SixSystem,
            &extended,
            &pts,
            tol,
        )?);
        let omega = build_potential(&profile_spec(spec, Family::Omega)?)?;
        let pts = regular_points(cfg, cat, &omega, &spec.bundle, n)?;
        out.push(residual_check(
            "cma_param",
            "Ω_pp̄Ω_σσ̄ − Ω_pσ̄Ω_σp̄ = e^{ρ/2}",
            EquationId::CmaParam,
            &omega,
            &pts,
            cfg.tol("pde.cma_param"),
        )?);
    }
    Ok(())
}

fn rel_gap(a: C, b: C) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

fn legendre_suite(cfg: &Config, spec: &SolutionSpec, cat: &mut Catalog, out: &mut Vec<Check>) -> Result<(), CliError> {
    let n = cfg.sampling.count.min(20);
    if is_heavenly(cfg.family) {
        let v = build_potential(spec)?;
        let u = legendre::forward_1d(&v, TSolver::Newton)?;
        let pts = points(cfg, cat, &u, n)?;
        out.push(residual_check(
            "forward_1d_rot_system",
            "t ↔ ρ Legendre image solves the rotationally reduced system",
            EquationId::RotSystem,
            &u,
            &pts,
            cfg.tol("legendre.forward_1d"),
        )?);
        if cfg.family == Family::Zeroc {
            let closed = legendre::forward_1d(&v, legendre::liouville_t(&spec.bundle))?;
            let urot = build_potential(&profile_spec(spec, Family::URot)?)?;
            let mut worst: f64 = 0.0;
            for pt in &pts {
                let a = closed.jet(pt, 2)?;
                let b = u.jet(pt, 2)?;
                let r = urot.jet(pt, 2)?;
                for ((x, y), z) in a.coeffs().iter().zip(b.coeffs()).zip(r.coeffs()) {
                    worst = worst.max(rel_gap(*x, *y)).max(rel_gap(*x, *z));
                }
            }
            out.push(Check::at_most(
                "forward_1d_closed_form",
                "t = (a+ā)e^{ρ/2}/√(a′ā′) and the closed rotational potential",
                worst,
                cfg.tol("legendre.forward_1d"),
            ));
        }
    }
    if has_profile(cfg.family) {
        let u = build_potential(&profile_spec(spec, Family::URot)?)?;
        let omega = build_potential(&profile_spec(spec, Family::Omega)?)?;
        let sub = legendre::forward_2d(&u)?;
        let pts = regular_points(cfg, cat, &omega, &spec.bundle, n)?;
        let mut worst: f64 = 0.0;
        for pt in &pts {
            worst = worst.max(rel_gap(omega.value(pt)?, sub.value(pt)?));
        }
        out.push(Check::at_most(
            "forward_2d_closed_form",
            "Ω from q = ᾱp + βp̄ + γ substitution against its closed form",
            worst,
            cfg.tol("legendre.forward_2d"),
        ));
        let pts = points(cfg, cat, &u, n)?;
        let mut worst: f64 = 0.0;
        for pt in &pts {
            let a = geometry::legendre_metric(&u, pt)?.tensor;
            let b = geometry::pullback_metric(&omega, &u, pt)?;
            let scale = b.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                worst = worst.max((x - y).norm() / scale);
            }
        }
        out.push(Check::at_most(
            "dual_metric_pullback",
            "metric written through u_qq, u_qq̄, u_q̄q̄ with factor 2/Δ₋",
            worst,
            cfg.tol("legendre.metric"),
        ));
    }
    Ok(())
}

/// Rejects profiles on which Δ vanishes identically.
pub fn singular_family_guard(bundle: &FnBundle, window: &Window) -> Result<(), CliError> {
    let (lo, hi) = match window.ranges.get("sigma") {
        Some(Range::Complex { re, im }) => (re[0].min(im[0]), re[1].max(im[1])),
        Some(Range::Real(r)) => (r[0], r[1]),
        None => (-0.5, 0.5),
    };
    let scan = geometry::singularity_scan(bundle, Grid { min: lo, max: hi, steps: 7 })?;
    if scan.verdict == ScanVerdict::SingularFamily {
        let which = if second_derivative_vanishes(bundle, lo, hi)? {
            "a″ = ā″ = 0"
        } else if scan.max_abs_flatness < 1e-10 {
            "a = −4/(k(kσ + l))"
        } else {
            "Δ ≡ 0"
        };
        return Err(CliError::Field(FieldError::InvalidSpec(format!(
            "profile `a` lies in a singular family ({which}): Δ vanishes identically and the metric degenerates"
        ))));
    }
    Ok(())
}

fn second_derivative_vanishes(bundle: &FnBundle, lo: f64, hi: f64) -> Result<bool, FieldError> {
    let a = bundle.get("a")?;
    for x in [lo, 0.5 * (lo + hi), hi] {
        for y in [lo, hi] {
            let d = a.derivatives(C::new(x, y), 2)?;
            if d[2].norm() > 1e-12 * (1.0 + d[1].norm()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn geometry_suite(cfg: &Config, spec: &SolutionSpec, cat: &mut Catalog, out: &mut Vec<Check>) -> Result<(), CliError> {
    let omega = build_potential(&profile_spec(spec, Family::Omega)?)?;
    singular_family_guard(&spec.bundle, &cfg.window(omega.chart()))?;
    let n = cfg.sampling.count.min(30);
    let pts = regular_points(cfg, cat, &omega, &spec.bundle, n)?;
    let (mut det, mut herm, mut ricci, mut chir, mut r11, mut r13, mut pattern) = (0f64, 0f64, 0f64, 0f64, 0f64, 0f64, 0f64);
    let mut indefinite = 0usize;
    for pt in &pts {
        let g = geometry::metric(&omega, pt)?;
        let rho = pt[4].re;
        det = det.max((g.det - C::new((rho / 2.0).exp(), 0.0)).norm() / (rho / 2.0).exp());
        herm = herm.max(g.hermiticity_defect());
        if !g.is_positive_definite() {
            indefinite += 1;
        }
        let r = geometry::curvature(&omega, pt)?;
        let scale = r.r11.coefficient.norm().max(1e-300);
        ricci = ricci.max(r.max_ricci());
        chir = chir.max(r.chirality.ratio());
        let closed = geometry::closed_form_r11(&spec.bundle, pt[1], pt[3], rho)?;
        r11 = r11.max((r.r11.coefficient - closed).norm() / closed.norm());
        let printed = geometry::closed_form_r13(&spec.bundle, pt[1], pt[3], rho)?[1];
        r13 = r13.max((r.r13[1] - printed).norm() / printed.norm());
        for (a, b) in [(0, 1), (0, 3), (1, 0), (1, 2), (2, 1), (2, 3), (3, 0), (3, 2)] {
            pattern = pattern.max(geometry::form_norm(&r.two_form(a, b)) / scale);
        }
        let x = r.r11.coefficient;
        for (a, sign) in [(1, -1.0), (2, -1.0), (3, 1.0)] {
            let f = r.two_form(a, a);
            pattern = pattern
                .max((f[0][1] - x * sign).norm() / scale)
                .max((f[2][3] + x * sign).norm() / scale);
        }
    }
    let p_ind = geometry::p_independence(&omega, &pts[..pts.len().min(5)])?;
    out.push(Check::at_most("det_g", "det g_{ij̄} = e^{ρ/2}", det, cfg.tol("geometry.det")));
    out.push(Check::at_most("hermitian", "g_{ij̄} Hermitian on the real slice", herm, cfg.tol("geometry.hermitian")));
    out.push(Check::at_most("positive_definite", "metric positive definite on the real slice", indefinite as f64, 0.0));
    out.push(Check::at_most("ricci", "R_{ij̄} = 0", ricci, cfg.tol("geometry.ricci")));
    out.push(Check::at_most("chirality", "‖SD‖/‖ASD‖ of the curvature two-forms", chir, cfg.tol("geometry.chirality")));
    out.push(Check::at_most("p_independence", "∂_p K_{ij̄kl̄} = ∂_p̄ K_{ij̄kl̄} = 0", p_ind, cfg.tol("geometry.p_independence")));
    out.push(Check::at_most(
        "r11_closed_form",
        "R¹₁ = 2e^{−ρ/2}(a′ā′)^{5/2}Δ^{−3}(2a‴a′ − 3a″²)(2ā‴ā′ − 3ā″²)(e¹∧e² − e³∧e⁴)",
        r11,
        cfg.tol("geometry.r11"),
    ));
    out.push(Check::at_most(
        "r13_e14_printed",
        "R¹₃ coefficient of e¹∧e⁴: −2e^{−ρ/2}a′²√ā′Δ^{−3}(2a‴a′ − 3a″²)(2ā‴ā′ − 3ā″²)",
        r13,
        cfg.tol("geometry.r13"),
    ));
    out.push(Check::at_most(
        "two_form_pattern",
        "R²₂ = R³₃ = −R¹₁ = −R⁴₄, remaining off-diagonal two-forms vanish",
        pattern,
        cfg.tol("geometry.pattern"),
    ));
    Ok(())
}

/// Number of parameter draws for the bracket table.
pub const TABLE_DRAWS: usize = 3;

fn symmetry_suite(cfg: &Config, spec: &SolutionSpec, cat: &mut Catalog, out: &mut Vec<Check>) -> Result<(), CliError> {
    let tol = cfg.tol("symmetry.table");
    let mut printed: BTreeMap<(Gen, Gen), (String, f64)> = BTreeMap::new();
    let mut corrected: f64 = 0.0;
    let mut jacobi: f64 = 0.0;
    for _ in 0..TABLE_DRAWS {
        let params = GeneratorParams::random(cat.rng()).map_err(FieldError::from)?;
        let pts = symmetry::sample_points(cat.rng(), 4)?;
        for e in symmetry::verify_table(&params, &pts, TableForm::Printed)? {
            let rel = e.deviation / e.bracket_size.max(1.0);
            let slot = printed.entry((e.row, e.col)).or_insert((e.template.clone(), 0.0));
            slot.1 = slot.1.max(rel);
        }
        for e in symmetry::verify_table(&params, &pts, TableForm::Corrected)? {
            corrected = corrected.max(e.deviation / e.bracket_size.max(1.0));
        }
        for (i, &x) in Gen::ALL.iter().enumerate() {
            for (j, &y) in Gen::ALL.iter().enumerate().skip(i + 1) {
                for &z in &Gen::ALL[j + 1..] {
                    let d = symmetry::jacobi_defect(&params.generator(x), &params.generator(y), &params.generator(z), &pts)?;
                    jacobi = jacobi.max(d);
                }
            }
        }
    }
    for ((row, col), (template, dev)) in &printed {
        out.push(Check::at_most(
            format!("table[{},{}]", row.name(), col.name()),
            &format!("[{}, {}] = {}", row.name(), col.name(), template),
            *dev,
            tol,
        ));
    }
    out.push(Check::at_most(
        "table_corrected",
        "[X, W] = W_{a(4h_ρ − h)} with the remaining entries as tabulated",
        corrected,
        tol,
    ));
    out.push(Check::at_most("jacobi", "[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] = 0", jacobi, cfg.tol("symmetry.jacobi")));

    {
        use symmetry::heavenly::*;
        let pts = sample_points(cat.rng(), 10)?;
        let br = symmetry::lie_bracket(&x1(), &x2(), &pts)?;
        let span = x1().scale(2.0).add(&x7(&holo(&HoloFn::constant(-4.0))))?;
        let d1 = br.deviation(&span)?;
        let f = holo(&HoloFn::parse("exp(0.5*z) + z^3").map_err(FieldError::from)?);
        let g = holo(&HoloFn::parse("1/(z + 3) + (0.2 + 0.1*i)*z^4").map_err(FieldError::from)?);
        let br = symmetry::lie_bracket(&x11(&f), &x11(&g), &pts)?;
        let d2 = br.deviation(&x11(&wronskian(&f, &g)))?;
        let tol = cfg.tol("symmetry.heavenly");
        out.push(Check::at_most("heavenly_x1_x2", "[X₁, X₂] = 2X₁ + X₇(−4)", d1, tol));
        out.push(Check::at_most("heavenly_x11", "[X₁₁(f), X₁₁(g)] = X₁₁(fg′ − gf′)", d2, tol));
    }

    if has_profile(cfg.family) {
        let omega = build_potential(&profile_spec(spec, Family::Omega)?)?;
        let pts = regular_points(cfg, cat, &omega, &spec.bundle, cfg.sampling.count.min(10))?;
        let thr = cfg.tol("symmetry.witness");
        let min_witness = |r: &symmetry::KillingReport| {
            r.witnesses
                .iter()
                .filter(|w| !w.residual.degenerate)
                .map(|w| w.residual.max_abs)
                .fold(f64::INFINITY, f64::min)
        };
        let generic = symmetry::killing_verdict(&omega, &pts)?;
        let mut c = Check::above("noninvariance_witnessed", "X(f − Ω)|_{Ω=f} ≠ 0 for every catalog generator", min_witness(&generic), thr);
        c.pass &= generic.verdict == KillingVerdict::NoninvariantWitnessed;
        out.push(c);
        let flat = PotentialField::new(Chart::parametric(), "flat", |x| Ok(&x[0] * &x[2] + &x[1] * &x[3]));
        let control = symmetry::killing_verdict(&flat, &pts)?;
        let mut c = Check::at_most("flat_control_inconclusive", "flat potential admits Killing vectors", min_witness(&control), thr);
        c.pass = control.verdict == KillingVerdict::Inconclusive;
        out.push(c);
    }
    Ok(())
}

fn foliation_suite(cfg: &Config, spec: &SolutionSpec, cat: &mut Catalog, out: &mut Vec<Check>) -> Result<(), CliError> {
    let v = build_potential(spec)?;
    let pts = points(cfg, cat, &v, cfg.sampling.count.min(20))?;
    let tol = cfg.tol("foliation.equations");
    for (k, eq) in foliation::invariant_equations(&v, &pts)?.into_iter().enumerate() {
        out.push(Check::at_most(format!("invariant_equation_{}", k + 1), eq.statement, eq.max_abs, tol));
    }
    let few = &pts[..pts.len().min(5)];
    let tol = cfg.tol("foliation.commutators");
    for rep in foliation::verify_commutators(&v, few)? {
        out.push(Check::at_most(
            format!("commutator_{}", relation_id(rep.relation)),
            rep.statement,
            rep.max_rel,
            tol,
        ));
    }
    let probes = [Invariant::W1, Invariant::W2, Invariant::W3];
    let tol = cfg.tol("foliation.flows");
    let eps = 0.05;
    for (id, anchor, flow) in [
        ("flow_translation", "z → z + εc leaves ω₁, ω₂, ω₃ unchanged", Flow::Translation(C::new(1.0, 0.5))),
        ("flow_scaling", "z → e^ε z, q → e^{ε/2} q, v → v + εt²/2 leaves ω₁, ω₂, ω₃ unchanged", Flow::Scaling),
    ] {
        out.push(Check::at_most(id, anchor, foliation::flow_invariance(&v, flow, eps, &probes, &pts)?, tol));
    }
    let auto = foliation::automorphic_check(&v, Flow::Scaling, eps, &pts)?;
    out.push(Check::at_most(
        "automorphic_unknowns",
        "F, G, Ḡ agree where (t, ω₁, ω₂, ω₃, ω̄₃) agree",
        auto.max_frame_gap.max(auto.max_unknown_gap),
        cfg.tol("foliation.automorphic"),
    ));
    Ok(())
}

fn relation_id(r: Relation) -> &'static str {
    match r {
        Relation::DeltaDq => "delta_dq",
        Relation::DeltaDqb => "delta_dqb",
        Relation::DeltaDz => "delta_dz",
        Relation::DeltaDzb => "delta_dzb",
        Relation::DqDz => "dq_dz",
        Relation::DqbDzb => "dqb_dzb",
        Relation::DqDqb => "dq_dqb",
        Relation::DqDzb => "dq_dzb",
        Relation::DqbDz => "dqb_dz",
        Relation::DzDzb => "dz_dzb",
    }
}

/// `min:max:steps`.
pub fn parse_grid(s: &str) -> Result<Grid, CliError> {
    let bad = || CliError::Grid(s.to_string());
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(min.is_finite() && max.is_finite()) || min > max || steps == 0 {
        return Err(bad());
    }
    Ok(Grid { min, max, steps })
}

pub fn scan(config: &Config, grid: Grid) -> Result<SingularityScan, CliError> {
    let spec = config.spec()?;
    if !spec.bundle.contains("a") {
        return Err(CliError::Invalid(format!(
            "family {} has no profile `a` to scan",
            config.family.name()
        )));
    }
    Ok(geometry::singularity_scan(&spec.bundle, grid)?)
}

#[derive(Debug, Parser)]
#[command(name = "cma-lift", version, about = "Verify explicit heavenly and Monge–Ampère solutions")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and write a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        suite: Option<SuiteName>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate Δ and the flatness residual on a σ grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            use std::io::Write;
            // a closed pipe (e.g. `| head`) is not an error
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            Ok(())
        }
    }
}

/// Executes parsed arguments and returns the process exit code.
pub fn execute(args: Args) -> i32 {
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run(args: Args) -> Result<i32, CliError> {
    match args.command {
        Command::Verify { config, suite, report, seed } => {
            let mut cfg = Config::load(&config)?;
            if let Some(s) = suite {
                cfg.suites = vec![s];
            }
            if let Some(s) = seed {
                cfg.sampling.seed = s;
            }
            let rep = verify(&cfg)?;
            for s in &rep.suites {
                for c in &s.checks {
                    eprintln!(
                        "{} {}.{} value={:.3e} tol={:.1e}",
                        if c.pass { "PASS" } else { "FAIL" },
                        s.name,
                        c.id,
                        c.value,
                        c.tol
                    );
                }
                if let Some(e) = &s.error {
                    eprintln!("ERROR {}: {e}", s.name);
                }
            }
            write_json(&rep, report.as_deref())?;
            Ok(rep.exit_code())
        }
        Command::Scan { config, grid } => {
            let cfg = Config::load(&config)?;
            let scan = scan(&cfg, parse_grid(&grid)?)?;
            write_json(&scan, None)?;
            Ok(EXIT_PASS)
        }
    }
}

pub fn main() -> i32 {
    execute(Args::parse())
}
