//! Coordinate charts, the explicit potentials, and the lifts between charts.
//!
//! A [`PotentialField`] is a chart together with an evaluator that takes one
//! jet per chart coordinate and returns the jet of the potential. Since the
//! evaluator composes with arbitrary coordinate jets, changes of variables
//! are built by mapping coordinate jets and calling the inner evaluator.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::holofunc::{FnBundle, HoloError, HoloFn};
use crate::jets::{Jet, JetError, JetSpace};
use crate::legendre;

/// Magnitude below which a quantity required to be nonzero is treated as zero.
pub const EXISTENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Holo(#[from] HoloError),
    #[error("existence condition `{condition}` violated (value {value})")]
    Existence { condition: &'static str, value: Complex64 },
    #[error("singular inverse Legendre data: Δ = {delta} vanishes (relative scale {scale:e})")]
    Singular { delta: Complex64, scale: f64 },
    #[error("degenerate transform: {what} = {value} vanishes")]
    Degenerate { what: &'static str, value: Complex64 },
    #[error("point leaves the principal-branch window: {0}")]
    BranchWindow(String),
    #[error("chart mismatch: expected `{expected}`, got `{found}`")]
    ChartMismatch { expected: String, found: String },
    #[error("invalid solution spec: {0}")]
    InvalidSpec(String),
    #[error("expected {expected} coordinates, got {found}")]
    Arity { expected: usize, found: usize },
}

/// Named coordinates with an involutive conjugation pairing. Self-paired
/// coordinates are real on the real slice.
#[derive(Clone, PartialEq, Eq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    partner: Vec<usize>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chart({}: {})", self.name, self.coords.join(","))
    }
}

impl Chart {
    /// Builds a chart; `pairs` lists holomorphic/antiholomorphic partners and
    /// every coordinate not listed is real.
    pub fn new(name: &str, coords: &[&str], pairs: &[(&str, &str)]) -> Result<Self, FieldError> {
        let coords: Vec<String> = coords.iter().map(|c| c.to_string()).collect();
        let idx = |n: &str| {
            coords
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| FieldError::InvalidSpec(format!("`{n}` is not a coordinate")))
        };
        let mut partner: Vec<usize> = (0..coords.len()).collect();
        for (a, b) in pairs {
            let (i, j) = (idx(a)?, idx(b)?);
            if i == j || partner[i] != i || partner[j] != j {
                return Err(FieldError::InvalidSpec(format!(
                    "pairing {a}↔{b} is not an involution"
                )));
            }
            partner[i] = j;
            partner[j] = i;
        }
        Ok(Chart {
            name: name.to_string(),
            coords,
            partner,
        })
    }

    /// `(t, q, q̄, z, z̄)` of the reduced heavenly system.
    pub fn heavenly() -> Self {
        Chart::new("heavenly", &["t", "q", "qb", "z", "zb"], &[("q", "qb"), ("z", "zb")])
            .expect("static chart")
    }

    /// `(ρ, q, q̄, σ, σ̄)` of the rotationally reduced system.
    pub fn rotational() -> Self {
        Chart::new(
            "rotational",
            &["rho", "q", "qb", "sigma", "sigmab"],
            &[("q", "qb"), ("sigma", "sigmab")],
        )
        .expect("static chart")
    }

    /// `(p, σ, p̄, σ̄, ρ)` of the parameter-dependent Monge–Ampère equation.
    pub fn parametric() -> Self {
        Chart::new(
            "parametric",
            &["p", "sigma", "pb", "sigmab", "rho"],
            &[("p", "pb"), ("sigma", "sigmab")],
        )
        .expect("static chart")
    }

    /// `(p, σ, p̄, σ̄)` without parameter.
    pub fn legendre_plane() -> Self {
        Chart::new(
            "legendre-plane",
            &["p", "sigma", "pb", "sigmab"],
            &[("p", "pb"), ("sigma", "sigmab")],
        )
        .expect("static chart")
    }

    /// `(z¹, z², z̄¹, z̄²)`.
    pub fn monge_ampere() -> Self {
        Chart::new(
            "monge-ampere",
            &["z1", "z2", "z1b", "z2b"],
            &[("z1", "z1b"), ("z2", "z2b")],
        )
        .expect("static chart")
    }

    /// `(z¹, z², z̄¹, z̄², σ, σ̄)`.
    pub fn reduced() -> Self {
        Chart::new(
            "reduced",
            &["z1", "z2", "z1b", "z2b", "sigma", "sigmab"],
            &[("z1", "z1b"), ("z2", "z2b"), ("sigma", "sigmab")],
        )
        .expect("static chart")
    }

    /// `(z¹, z², z̄¹, z̄², τ, τ̄, σ, σ̄)`.
    pub fn extended() -> Self {
        Chart::new(
            "extended",
            &["z1", "z2", "z1b", "z2b", "tau", "taub", "sigma", "sigmab"],
            &[("z1", "z1b"), ("z2", "z2b"), ("tau", "taub"), ("sigma", "sigmab")],
        )
        .expect("static chart")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn index(&self, name: &str) -> Result<usize, FieldError> {
        self.coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| FieldError::InvalidSpec(format!("`{name}` is not a coordinate of {}", self.name)))
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partner[i]
    }

    pub fn partner_name(&self, name: &str) -> Result<&str, FieldError> {
        Ok(&self.coords[self.partner[self.index(name)?]])
    }

    pub fn is_real(&self, i: usize) -> bool {
        self.partner[i] == i
    }

    /// Coordinates that are real or listed first in their pair.
    pub fn independent(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.partner[i] >= i).collect()
    }

    /// A real-slice point from values of the independent coordinates;
    /// partners are filled with conjugates.
    pub fn real_point(&self, values: &[(&str, Complex64)]) -> Result<Vec<Complex64>, FieldError> {
        let mut point = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut set = vec![false; self.dim()];
        for (name, v) in values {
            let i = self.index(name)?;
            let j = self.partner[i];
            if i == j && v.im != 0.0 {
                return Err(FieldError::InvalidSpec(format!("`{name}` must be real")));
            }
            point[i] = *v;
            point[j] = v.conj();
            set[i] = true;
            set[j] = true;
        }
        if let Some(missing) = set.iter().position(|s| !s) {
            return Err(FieldError::InvalidSpec(format!(
                "no value for `{}`",
                self.coords[missing]
            )));
        }
        Ok(point)
    }

    pub fn on_real_slice(&self, point: &[Complex64], tol: f64) -> bool {
        point.len() == self.dim()
            && (0..self.dim()).all(|i| {
                let j = self.partner[i];
                (point[i] - point[j].conj()).norm() <= tol * (1.0 + point[i].norm())
            })
    }

    /// Seeds one jet per coordinate at `point`.
    pub fn seed(&self, point: &[Complex64], order: usize) -> Result<Vec<Jet>, FieldError> {
        if point.len() != self.dim() {
            return Err(FieldError::Arity {
                expected: self.dim(),
                found: point.len(),
            });
        }
        let space = JetSpace::new(&self.coords, order)?;
        Ok(point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet::seed_index(&space, i, v))
            .collect())
    }
}

/// Sampling range for one independent coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    Real([f64; 2]),
    Complex { re: [f64; 2], im: [f64; 2] },
}

impl Range {
    fn sample(&self, rng: &mut impl Rng) -> Complex64 {
        let pick = |r: [f64; 2], rng: &mut dyn rand::RngCore| {
            if r[0] == r[1] {
                r[0]
            } else {
                rng.gen_range(r[0]..r[1])
            }
        };
        match *self {
            Range::Real(r) => Complex64::new(pick(r, rng), 0.0),
            Range::Complex { re, im } => Complex64::new(pick(re, rng), pick(im, rng)),
        }
    }
}

/// Per-coordinate sampling window on the real slice of a chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub ranges: BTreeMap<String, Range>,
}

impl Window {
    pub fn new(ranges: &[(&str, Range)]) -> Self {
        Window {
            ranges: ranges.iter().map(|(k, r)| (k.to_string(), *r)).collect(),
        }
    }

    /// The default window of a built-in chart.
    pub fn for_chart(chart: &Chart) -> Self {
        let disk = |r: f64| Range::Complex {
            re: [-r, r],
            im: [-r, r],
        };
        match chart.name() {
            "heavenly" => Window::new(&[
                ("t", Range::Real([0.5, 2.0])),
                ("q", disk(1.0)),
                ("z", disk(0.5)),
            ]),
            "rotational" => Window::new(&[
                ("rho", Range::Real([-1.0, 1.0])),
                ("q", disk(1.0)),
                ("sigma", disk(0.5)),
            ]),
            "parametric" => Window::new(&[
                ("p", disk(1.0)),
                ("sigma", disk(0.5)),
                ("rho", Range::Real([-1.0, 1.0])),
            ]),
            "legendre-plane" => Window::new(&[("p", disk(1.0)), ("sigma", disk(0.5))]),
            "monge-ampere" => Window::new(&[
                ("z1", disk(1.0)),
                (
                    "z2",
                    Range::Complex {
                        re: [0.5, 1.5],
                        im: [-0.5, 0.5],
                    },
                ),
            ]),
            "reduced" => Window::new(&[
                ("z1", disk(1.0)),
                (
                    "z2",
                    Range::Complex {
                        re: [0.5, 1.5],
                        im: [-0.5, 0.5],
                    },
                ),
                ("sigma", disk(0.5)),
            ]),
            "extended" => Window::new(&[
                ("z1", disk(1.0)),
                (
                    "z2",
                    Range::Complex {
                        re: [0.5, 1.5],
                        im: [-0.5, 0.5],
                    },
                ),
                ("tau", disk(0.3)),
                ("sigma", disk(0.5)),
            ]),
            _ => Window {
                ranges: chart
                    .independent()
                    .into_iter()
                    .map(|i| {
                        let r = if chart.is_real(i) {
                            Range::Real([-1.0, 1.0])
                        } else {
                            disk(1.0)
                        };
                        (chart.coords()[i].clone(), r)
                    })
                    .collect(),
            },
        }
    }

    /// One real-slice point.
    pub fn sample(&self, chart: &Chart, rng: &mut impl Rng) -> Result<Vec<Complex64>, FieldError> {
        let mut values = Vec::new();
        for i in chart.independent() {
            let name = &chart.coords()[i];
            let range = self.ranges.get(name).ok_or_else(|| {
                FieldError::InvalidSpec(format!("window has no range for `{name}`"))
            })?;
            values.push((name.as_str(), range.sample(rng)));
        }
        chart.real_point(&values)
    }
}

type Evaluator = dyn Fn(&[Jet]) -> Result<Jet, FieldError> + Send + Sync;

/// A scalar potential on a chart, evaluable to any jet order.
#[derive(Clone)]
pub struct PotentialField {
    chart: Chart,
    label: String,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialField")
            .field("label", &self.label)
            .field("chart", &self.chart)
            .finish()
    }
}

impl PotentialField {
    pub fn new<F>(chart: Chart, label: &str, eval: F) -> Self
    where
        F: Fn(&[Jet]) -> Result<Jet, FieldError> + Send + Sync + 'static,
    {
        PotentialField {
            chart,
            label: label.to_string(),
            eval: Arc::new(eval),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Evaluates on arbitrary coordinate jets (one per chart coordinate).
    pub fn compose(&self, coords: &[Jet]) -> Result<Jet, FieldError> {
        if coords.len() != self.chart.dim() {
            return Err(FieldError::Arity {
                expected: self.chart.dim(),
                found: coords.len(),
            });
        }
        (self.eval)(coords)
    }

    /// The jet of the potential at `point`.
    pub fn jet(&self, point: &[Complex64], order: usize) -> Result<Jet, FieldError> {
        self.compose(&self.chart.seed(point, order)?)
    }

    pub fn value(&self, point: &[Complex64]) -> Result<Complex64, FieldError> {
        Ok(self.jet(point, 1)?.value())
    }

    pub fn require_chart(&self, chart: &Chart) -> Result<(), FieldError> {
        if &self.chart == chart {
            Ok(())
        } else {
            Err(FieldError::ChartMismatch {
                expected: chart.name().to_string(),
                found: self.chart.name().to_string(),
            })
        }
    }

    /// `self + extra`, where `extra` receives the coordinate jets.
    pub fn plus<F>(&self, label: &str, extra: F) -> PotentialField
    where
        F: Fn(&[Jet]) -> Result<Jet, FieldError> + Send + Sync + 'static,
    {
        let base = self.clone();
        PotentialField::new(self.chart.clone(), label, move |x| {
            Ok(base.compose(x)? + extra(x)?)
        })
    }

    /// Pulls the field back along `map`, which turns coordinate jets of
    /// `chart` into coordinate jets of `self.chart()`.
    pub fn pull_back<F>(&self, chart: Chart, label: &str, map: F) -> PotentialField
    where
        F: Fn(&[Jet]) -> Result<Vec<Jet>, FieldError> + Send + Sync + 'static,
    {
        let base = self.clone();
        PotentialField::new(chart, label, move |x| base.compose(&map(x)?))
    }
}

/// The explicit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// Quadratic in `t`, built from κ, σ, ν, ρ.
    Zerocom,
    /// Logarithmic in `t + C` with a real linear `a`.
    FamilyC,
    /// Built from a Liouville-type `a` together with d, φ₀, ρ₁, ψ₀.
    Zeroc,
    /// The one-dimensional Legendre image of `Zeroc` on the rotational chart.
    URot,
    /// The inverse-Legendre image of `URot` on the parametric chart.
    Omega,
}

impl Family {
    pub fn roles(self) -> &'static [&'static str] {
        match self {
            Family::Zerocom => &["kappa", "sigma", "nu", "rho"],
            Family::FamilyC => &["d", "phi0", "rho1", "psi0"],
            Family::Zeroc => &["a", "d", "phi0", "rho1", "psi0"],
            Family::URot | Family::Omega => &["a", "d", "phi0"],
        }
    }

    pub fn chart(self) -> Chart {
        match self {
            Family::Zerocom | Family::FamilyC | Family::Zeroc => Chart::heavenly(),
            Family::URot => Chart::rotational(),
            Family::Omega => Chart::parametric(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Zerocom => "ZEROCOM",
            Family::FamilyC => "FAMILY_C",
            Family::Zeroc => "ZEROC",
            Family::URot => "U_ROT",
            Family::Omega => "OMEGA",
        }
    }
}

/// How the logarithmic family is transcribed. The printed variant keeps the
/// formula exactly as typeset, the closed variant applies the four
/// corrections that make it solve the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCForm {
    /// `a = c₁z + c̄₁z̄ + c₀` (true) or `a = c̄₁z + c̄₁z̄ + c₀` (false).
    pub conjugate_linear_form: bool,
    /// `½ ln(c₁c̄₁)` (true) or `½ ln(c₁ + c̄₁)` (false) in the `t²` bracket.
    pub log_of_product: bool,
    /// Sign in front of `√c̄₁(d − d̄)/a` in the `q̄` bracket: `+` when true.
    pub plus_in_qbar_bracket: bool,
    /// Keeps the `−2Cc₁/a` term inside the `q²/2` bracket (and its conjugate).
    pub keep_c_term: bool,
}

impl FamilyCForm {
    pub const PRINTED: FamilyCForm = FamilyCForm {
        conjugate_linear_form: false,
        log_of_product: false,
        plus_in_qbar_bracket: false,
        keep_c_term: true,
    };
    pub const CLOSED: FamilyCForm = FamilyCForm {
        conjugate_linear_form: true,
        log_of_product: true,
        plus_in_qbar_bracket: true,
        keep_c_term: false,
    };
}

impl Default for FamilyCForm {
    fn default() -> Self {
        FamilyCForm::CLOSED
    }
}

/// Family, functional parameters and constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSpec {
    pub family: Family,
    pub bundle: FnBundle,
    pub constants: BTreeMap<String, Complex64>,
    pub family_c_form: FamilyCForm,
}

impl SolutionSpec {
    pub fn new(family: Family, bundle: FnBundle) -> Self {
        SolutionSpec {
            family,
            bundle,
            constants: BTreeMap::new(),
            family_c_form: FamilyCForm::default(),
        }
    }

    pub fn with_constant(mut self, name: &str, value: impl Into<Complex64>) -> Self {
        self.constants.insert(name.to_string(), value.into());
        self
    }

    pub fn with_form(mut self, form: FamilyCForm) -> Self {
        self.family_c_form = form;
        self
    }

    pub fn constant(&self, name: &str) -> Result<Complex64, FieldError> {
        self.constants
            .get(name)
            .copied()
            .ok_or_else(|| FieldError::InvalidSpec(format!("missing constant `{name}`")))
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        self.bundle.require(self.family.roles())?;
        if self.family == Family::FamilyC {
            let c = self.constant("C")?;
            if c.im != 0.0 || c.re == 0.0 {
                return Err(FieldError::InvalidSpec(format!(
                    "C must be a nonzero real constant, got {c}"
                )));
            }
            let c1 = self.constant("c1")?;
            if c1.norm() == 0.0 {
                return Err(FieldError::InvalidSpec("c1 must be nonzero".into()));
            }
            let c0 = self.constant("c0")?;
            if self.family_c_form.conjugate_linear_form && c0.im != 0.0 {
                return Err(FieldError::InvalidSpec(
                    "c0 must be real for a real linear form".into(),
                ));
            }
        }
        Ok(())
    }
}

fn nonzero(condition: &'static str, x: &Jet) -> Result<(), FieldError> {
    if x.value().norm() <= EXISTENCE_TOL {
        Err(FieldError::Existence {
            condition,
            value: x.value(),
        })
    } else {
        Ok(())
    }
}

/// Jets of `f, f′, …, f^(upto)` at `arg`.
pub(crate) fn derivs(f: &HoloFn, arg: &Jet, upto: usize) -> Result<Vec<Jet>, FieldError> {
    Ok(f.eval_derivs(arg, upto)?)
}

/// A holomorphic parameter with its conjugate partner, both as derivative
/// jets along the holomorphic and antiholomorphic coordinate.
pub(crate) struct Paired {
    pub f: Vec<Jet>,
    pub fb: Vec<Jet>,
}

impl Paired {
    pub fn new(bundle: &FnBundle, role: &str, z: &Jet, zb: &Jet, upto: usize) -> Result<Self, FieldError> {
        let f = bundle.get(role)?;
        Ok(Paired {
            f: derivs(f, z, upto)?,
            fb: derivs(&f.conjugate(), zb, upto)?,
        })
    }
}

fn zeroc_potential(bundle: &FnBundle, x: &[Jet]) -> Result<Jet, FieldError> {
    let (t, q, qb, z, zb) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
    let a = Paired::new(bundle, "a", z, zb, 3)?;
    let d = Paired::new(bundle, "d", z, zb, 2)?;
    let phi = Paired::new(bundle, "phi0", z, zb, 1)?;
    let rho1 = Paired::new(bundle, "rho1", z, zb, 0)?;
    let psi = Paired::new(bundle, "psi0", z, zb, 0)?;
    let (a0, a1, a2, a3) = (&a.f[0], &a.f[1], &a.f[2], &a.f[3]);
    let (b0, b1, b2, b3) = (&a.fb[0], &a.fb[1], &a.fb[2], &a.fb[3]);
    nonzero("a′·ā′ ≠ 0", &(a1 * b1))?;
    let s = a0 + b0;
    nonzero("a + ā ≠ 0", &s)?;
    let dd = &d.f[0] - &d.fb[0];
    let sqa = a1.sqrt()?;
    let sqb = b1.sqrt()?;
    let sqab = (a1 * b1).sqrt()?;
    let inv_s = s.recip()?;
    let inv_a1 = a1.recip()?;
    let inv_b1 = b1.recip()?;

    let t2 = t * t;
    let log_part = t.ln()? + (a1.ln()? + b1.ln()?) * 0.5 - s.ln()? - 1.5;
    let q2 = q * q;
    let qb2 = qb * qb;
    let linear_t = 2.0 * q * qb * &sqab * &inv_s
        + &q2 * (a2 * &inv_a1 * 0.5 - a1 * &inv_s)
        + &qb2 * (b2 * &inv_b1 * 0.5 - b1 * &inv_s)
        + q * (&d.f[1] * sqa.recip()? - &sqa * &dd * &inv_s)
        + qb * (&d.fb[1] * sqb.recip()? + &sqb * &dd * &inv_s)
        - &dd * &dd * &inv_s * 0.25
        + &phi.f[0]
        + &phi.fb[0];
    let quartic = |f2: &Jet, f3: &Jet, inv1: &Jet| -> Jet {
        f2 * f2 * inv1 * inv1 * (1.0 / 16.0) - f3 * inv1 * (1.0 / 24.0)
    };
    let cubic = |f2: &Jet, sq: &Jet, inv1: &Jet, d1: &Jet, d2: &Jet| -> Result<Jet, FieldError> {
        let inv_sq = sq.recip()?;
        Ok((f2 * d1 * inv1 * &inv_sq - d2 * &inv_sq) * (1.0 / 6.0))
    };
    let q3 = &q2 * q;
    let qb3 = &qb2 * qb;
    let holo = &q2 * &q2 * quartic(a2, a3, &inv_a1)
        + &q3 * cubic(a2, &sqa, &inv_a1, &d.f[1], &d.f[2])?
        + &q2 * (&d.f[1] * &d.f[1] * &inv_a1 * 0.125 - &phi.f[1] * 0.5)
        + q * &rho1.f[0]
        + &psi.f[0];
    let antiholo = &qb2 * &qb2 * quartic(b2, b3, &inv_b1)
        + &qb3 * cubic(b2, &sqb, &inv_b1, &d.fb[1], &d.fb[2])?
        + &qb2 * (&d.fb[1] * &d.fb[1] * &inv_b1 * 0.125 - &phi.fb[1] * 0.5)
        + qb * &rho1.fb[0]
        + &psi.fb[0];
    Ok(-(t2 * log_part) + t * linear_t + holo + antiholo)
}

fn zerocom_potential(bundle: &FnBundle, x: &[Jet]) -> Result<Jet, FieldError> {
    let (t, q, qb, z, zb) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
    let k = Paired::new(bundle, "kappa", z, zb, 3)?;
    let sig = Paired::new(bundle, "sigma", z, zb, 1)?;
    let nu = Paired::new(bundle, "nu", z, zb, 0)?;
    let rho = Paired::new(bundle, "rho", z, zb, 0)?;
    let (k0, k1, k2, k3) = (&k.f[0], &k.f[1], &k.f[2], &k.f[3]);
    let (l0, l1, l2, l3) = (&k.fb[0], &k.fb[1], &k.fb[2], &k.fb[3]);
    nonzero("κ′·κ̄′ ≠ 0", &(k1 * l1))?;
    let inv_k1 = k1.recip()?;
    let inv_l1 = l1.recip()?;
    let q2 = q * q;
    let qb2 = qb * qb;
    let v = -(t * t * (k1.ln()? + l1.ln()?) * 0.5)
        + t * (&sig.f[0] + &q2 * k2 * &inv_k1 * 0.5 + &sig.fb[0] + &qb2 * l2 * &inv_l1 * 0.5)
        + 2.0 * q * qb * (k1 * l1).sqrt()?
        - k0 * l0
        + &q2 * &q2 * (3.0 * k2 * k2 - 2.0 * k1 * k3) * &inv_k1 * &inv_k1 * (1.0 / 48.0)
        + &qb2 * &qb2 * (3.0 * l2 * l2 - 2.0 * l1 * l3) * &inv_l1 * &inv_l1 * (1.0 / 48.0)
        - &q2 * &sig.f[1] * 0.5
        - &qb2 * &sig.fb[1] * 0.5
        + q * &nu.f[0]
        + qb * &nu.fb[0]
        + &rho.f[0]
        + &rho.fb[0];
    Ok(v)
}

fn family_c_potential(spec: &SolutionSpec, x: &[Jet]) -> Result<Jet, FieldError> {
    let form = spec.family_c_form;
    let bundle = &spec.bundle;
    let (t, q, qb, z, zb) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
    let big_c = spec.constant("C")?.re;
    let c1 = spec.constant("c1")?;
    let c1b = c1.conj();
    let c0 = spec.constant("c0")?;
    let d = Paired::new(bundle, "d", z, zb, 2)?;
    let phi = Paired::new(bundle, "phi0", z, zb, 1)?;
    let rho1 = Paired::new(bundle, "rho1", z, zb, 0)?;
    let psi = Paired::new(bundle, "psi0", z, zb, 0)?;

    let a = if form.conjugate_linear_form {
        z * c1 + zb * c1b + c0
    } else {
        z * c1b + zb * c1b + c0
    };
    nonzero("a ≠ 0", &a)?;
    let tc = t + big_c;
    nonzero("t + C ≠ 0", &tc)?;
    let ln_a = a.ln()?;
    let inv_a = a.recip()?;
    let dd = &d.f[0] - &d.fb[0];
    let sc = c1.sqrt();
    let scb = c1b.sqrt();
    let log_const = if form.log_of_product {
        (c1 * c1b).ln()
    } else {
        (c1 + c1b).ln()
    };
    let qb_sign = if form.plus_in_qbar_bracket { 1.0 } else { -1.0 };
    let c_term = if form.keep_c_term { 1.0 } else { 0.0 };
    let q2 = q * q;
    let qb2 = qb * qb;
    let dd2a = &dd * &dd * &inv_a * 0.25;

    let v = -(&tc * &tc * (tc.ln()? - 0.5))
        - t * t * ((&ln_a * -1.0) + log_const * 0.5 - 1.0)
        + t * (&ln_a * (2.0 * big_c) - &dd2a + &phi.f[0] + &phi.fb[0])
        + &ln_a * (big_c * big_c)
        - &dd2a * big_c
        + &psi.f[0]
        + &psi.fb[0]
        + &tc
            * (q * qb * &inv_a * (2.0 * (c1 * c1b).sqrt())
                - &q2 * &inv_a * c1
                + q * (&d.f[1] * (1.0 / sc) - &dd * &inv_a * sc)
                - &qb2 * &inv_a * c1b
                + qb * (&d.fb[1] * (1.0 / scb) + &dd * &inv_a * (scb * qb_sign)))
        - &q2 * q * &d.f[2] * (1.0 / (6.0 * sc))
        + &q2 * (&d.f[1] * &d.f[1] * (1.0 / (4.0 * c1)) - &inv_a * (2.0 * big_c * c1 * c_term) - &phi.f[1]) * 0.5
        - &qb2 * qb * &d.fb[2] * (1.0 / (6.0 * scb))
        + &qb2 * (&d.fb[1] * &d.fb[1] * (1.0 / (4.0 * c1b)) - &inv_a * (2.0 * big_c * c1b * c_term) - &phi.fb[1]) * 0.5
        + q * &rho1.f[0]
        + qb * &rho1.fb[0];
    Ok(v)
}

fn urot_potential(bundle: &FnBundle, x: &[Jet]) -> Result<Jet, FieldError> {
    let (rho, q, qb, s, sb) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
    let a = Paired::new(bundle, "a", s, sb, 2)?;
    let d = Paired::new(bundle, "d", s, sb, 1)?;
    let phi = Paired::new(bundle, "phi0", s, sb, 0)?;
    let (a0, a1, a2) = (&a.f[0], &a.f[1], &a.f[2]);
    let (b0, b1, b2) = (&a.fb[0], &a.fb[1], &a.fb[2]);
    nonzero("a′·ā′ ≠ 0", &(a1 * b1))?;
    let sum = a0 + b0;
    nonzero("a + ā ≠ 0", &sum)?;
    let inv_s = sum.recip()?;
    let sqab = (a1 * b1).sqrt()?;
    let sqa = a1.sqrt()?;
    let sqb = b1.sqrt()?;
    let dd = &d.f[0] - &d.fb[0];
    let u = 2.0 * &sum * sqab.recip()? * (rho * 0.5).exp()
        + 2.0 * q * qb * &sqab * &inv_s
        + q * q * (a2 * a1.recip()? * 0.5 - a1 * &inv_s)
        + qb * qb * (b2 * b1.recip()? * 0.5 - b1 * &inv_s)
        + q * (&d.f[1] * sqa.recip()? - &sqa * &dd * &inv_s)
        + qb * (&d.fb[1] * sqb.recip()? + &sqb * &dd * &inv_s)
        - &dd * &dd * &inv_s * 0.25
        + &phi.f[0]
        + &phi.fb[0];
    Ok(u)
}

fn omega_potential(bundle: &FnBundle, x: &[Jet]) -> Result<Jet, FieldError> {
    let (p, s, pb, sb, rho) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
    let c = legendre::coefficient_jets(bundle, s, sb)?;
    let phi = Paired::new(bundle, "phi0", s, sb, 0)?;
    let sum = &c.a + &c.ab;
    let dd = &c.d - &c.db;
    let quad = &c.alpha_bar * p * p * 0.5 + &c.alpha * pb * pb * 0.5 + &c.beta * p * pb
        + &c.gamma * p
        + &c.gamma_bar * pb;
    let shift = &c.delta
        * (&c.alpha * &c.gamma * &c.gamma + &c.alpha_bar * &c.gamma_bar * &c.gamma_bar
            - 2.0 * &c.beta * &c.gamma * &c.gamma_bar)
        * (2.0 * &c.a1 * &c.ab1 * &sum).recip()?;
    let omega = quad + shift - &dd * &dd * sum.recip()? * 0.25
        + 2.0 * &sum * (&c.a1 * &c.ab1).sqrt()?.recip()? * (rho * 0.5).exp()
        + &phi.f[0]
        + &phi.fb[0];
    Ok(omega)
}

/// Builds the potential of a family.
pub fn build_potential(spec: &SolutionSpec) -> Result<PotentialField, FieldError> {
    spec.validate()?;
    let family = spec.family;
    let label = family.name();
    let chart = family.chart();
    Ok(match family {
        Family::Zeroc => {
            let b = spec.bundle.clone();
            PotentialField::new(chart, label, move |x| zeroc_potential(&b, x))
        }
        Family::Zerocom => {
            let b = spec.bundle.clone();
            PotentialField::new(chart, label, move |x| zerocom_potential(&b, x))
        }
        Family::FamilyC => {
            let s = spec.clone();
            PotentialField::new(chart, label, move |x| family_c_potential(&s, x))
        }
        Family::URot => {
            let b = spec.bundle.clone();
            PotentialField::new(chart, label, move |x| urot_potential(&b, x))
        }
        Family::Omega => {
            let b = spec.bundle.clone();
            PotentialField::new(chart, label, move |x| omega_potential(&b, x))
        }
    })
}

fn branch_window(name: &str, w: &Jet) -> Result<(), FieldError> {
    if w.value().re <= 0.0 {
        Err(FieldError::BranchWindow(format!(
            "Re {name} = {} must be positive",
            w.value().re
        )))
    } else {
        Ok(())
    }
}

/// `ρ = ln z² + ln z̄²`, `q = z¹(z²)^{1/2}`, `q̄ = z̄¹(z̄²)^{1/2}`.
fn rotational_coords(z1: &Jet, z2: &Jet, z1b: &Jet, z2b: &Jet) -> Result<[Jet; 3], FieldError> {
    branch_window("z²", z2)?;
    branch_window("z̄²", z2b)?;
    let rho = z2.ln()? + z2b.ln()?;
    let q = z1 * z2.pow_half()?;
    let qb = z1b * z2b.pow_half()?;
    Ok([rho, q, qb])
}

/// Pulls a field on the rotational chart back to `(z¹, z², z̄¹, z̄², σ, σ̄)`.
pub fn lift_rotational(field: &PotentialField) -> Result<PotentialField, FieldError> {
    field.require_chart(&Chart::rotational())?;
    Ok(field.pull_back(
        Chart::reduced(),
        &format!("{} lifted", field.label()),
        |x| {
            let [rho, q, qb] = rotational_coords(&x[0], &x[1], &x[2], &x[3])?;
            Ok(vec![rho, q, qb, x[4].clone(), x[5].clone()])
        },
    ))
}

/// Adds the translation parameters `τ, τ̄` through `z¹ → z¹ + τ`,
/// `z̄¹ → z̄¹ + τ̄`.
pub fn lift_extended(field: &PotentialField) -> Result<PotentialField, FieldError> {
    field.require_chart(&Chart::rotational())?;
    Ok(field.pull_back(
        Chart::extended(),
        &format!("{} extended", field.label()),
        |x| {
            let z1 = &x[0] + &x[4];
            let z1b = &x[2] + &x[5];
            let [rho, q, qb] = rotational_coords(&z1, &x[1], &z1b, &x[3])?;
            Ok(vec![rho, q, qb, x[6].clone(), x[7].clone()])
        },
    ))
}

/// Kinds of functions drawn by the catalog sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Polynomial,
    Exponential,
    ShiftedReciprocal,
}

/// Seeded generator of parameter functions.
pub struct Catalog {
    rng: ChaCha8Rng,
}

fn fmt_c(c: Complex64) -> String {
    format!("({:.6} + {:.6}*i)", c.re, c.im)
}

impl Catalog {
    pub fn new(seed: u64) -> Self {
        Catalog {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn coeff(&mut self) -> Complex64 {
        Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
    }

    /// A polynomial of degree ≤ 3 with coefficients in `[−1, 1]²`.
    pub fn polynomial(&mut self) -> String {
        let c: Vec<Complex64> = (0..4).map(|_| self.coeff()).collect();
        format!(
            "{} + {}*z + {}*z^2 + {}*z^3",
            fmt_c(c[0]),
            fmt_c(c[1]),
            fmt_c(c[2]),
            fmt_c(c[3])
        )
    }

    /// A generic profile of the given shape. On `|Re z|, |Im z| ≤ 1/2` its
    /// derivative stays near the positive real axis, `Re a > 0`, and
    /// `Δ = a″ā″(a+ā) − 2a″ā′² − 2ā″a′²` stays positive, so every family is
    /// regular and its inverse-Legendre metric is positive definite.
    pub fn profile(&mut self, shape: Shape) -> String {
        let small = |c: Complex64| c * 0.1;
        match shape {
            Shape::Polynomial => {
                let c1 = Complex64::new(1.0, 0.0) + small(self.coeff());
                let c2 = Complex64::new(-0.6, 0.0) + small(self.coeff());
                let c3 = small(self.coeff());
                format!(
                    "2 + {}*z + {}*z^2 + {}*z^3",
                    fmt_c(c1),
                    fmt_c(c2),
                    fmt_c(c3)
                )
            }
            Shape::Exponential => {
                let k = self.rng.gen_range(0.6..1.4);
                let c = self.rng.gen_range(2.5..3.5);
                format!("{c:.6} + exp({k:.6}*z)")
            }
            Shape::ShiftedReciprocal => {
                let c = self.rng.gen_range(1.0..2.0);
                let s = self.rng.gen_range(2.0..3.0);
                let lambda = self.rng.gen_range(-0.5..0.5);
                format!("{c:.6} + {lambda:.6}*i - 1/(z + {s:.6})")
            }
        }
    }

    pub fn shape(&mut self) -> Shape {
        match self.rng.gen_range(0..3) {
            0 => Shape::Polynomial,
            1 => Shape::Exponential,
            _ => Shape::ShiftedReciprocal,
        }
    }

    /// A bundle for `family` with every required role filled.
    pub fn bundle(&mut self, family: Family) -> Result<FnBundle, FieldError> {
        let mut bundle = FnBundle::new();
        for role in family.roles() {
            let src = match *role {
                "a" | "kappa" => {
                    let shape = self.shape();
                    self.profile(shape)
                }
                _ => self.polynomial(),
            };
            bundle.insert(role, HoloFn::parse(&src)?);
        }
        Ok(bundle)
    }

    /// A complete spec; constants for the logarithmic family are drawn too.
    pub fn spec(&mut self, family: Family) -> Result<SolutionSpec, FieldError> {
        let mut spec = SolutionSpec::new(family, self.bundle(family)?);
        if family == Family::FamilyC {
            let c = self.rng.gen_range(0.5..1.5);
            let c1 = Complex64::new(self.rng.gen_range(0.3..1.0), self.rng.gen_range(-0.5..0.5));
            let c0 = self.rng.gen_range(2.5..3.5);
            spec = spec
                .with_constant("C", c)
                .with_constant("c1", c1)
                .with_constant("c0", c0);
        }
        Ok(spec)
    }

    /// `n` real-slice points of `field` inside `window` at which the field
    /// evaluates without a domain error.
    pub fn points(
        &mut self,
        field: &PotentialField,
        window: &Window,
        n: usize,
    ) -> Result<Vec<Vec<Complex64>>, FieldError> {
        let mut out = Vec::with_capacity(n);
        let mut last_err = None;
        let mut attempts = 0;
        while out.len() < n {
            attempts += 1;
            if attempts > 20 * n + 100 {
                return Err(last_err.unwrap_or_else(|| {
                    FieldError::InvalidSpec("could not find admissible points".into())
                }));
            }
            let point = window.sample(field.chart(), &mut self.rng)?;
            match field.value(&point) {
                Ok(_) => out.push(point),
                Err(e) => last_err = Some(e),
            }
        }
        Ok(out)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zeroc_exp() -> SolutionSpec {
        let bundle = FnBundle::from_sources([
            ("a", "exp(z)"),
            ("d", "0"),
            ("phi0", "0"),
            ("rho1", "0"),
            ("psi0", "0"),
        ])
        .unwrap();
        SolutionSpec::new(Family::Zeroc, bundle)
    }

    #[test]
    fn zeroc_hand_value() {
        let field = build_potential(&zeroc_exp()).unwrap();
        let chart = field.chart().clone();
        let pt = chart
            .real_point(&[("t", c(1.0, 0.0)), ("q", c(0.0, 0.0)), ("z", c(0.0, 0.0))])
            .unwrap();
        let v = field.value(&pt).unwrap();
        let expect = std::f64::consts::LN_2 + 1.5;
        assert!((v - c(expect, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn zeroc_constant_a_violates_existence() {
        let mut spec = zeroc_exp();
        spec.bundle.insert("a", HoloFn::parse("1").unwrap());
        let field = build_potential(&spec).unwrap();
        let pt = field
            .chart()
            .real_point(&[("t", c(1.0, 0.0)), ("q", c(0.1, 0.0)), ("z", c(0.0, 0.0))])
            .unwrap();
        match field.value(&pt).unwrap_err() {
            FieldError::Existence { condition, .. } => assert!(condition.contains("a′")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_role_is_rejected() {
        let spec = SolutionSpec::new(Family::Zeroc, FnBundle::from_sources([("a", "z")]).unwrap());
        assert!(matches!(build_potential(&spec), Err(FieldError::Holo(HoloError::MissingRole(_)))));
    }

    #[test]
    fn family_c_needs_real_nonzero_c() {
        let mut cat = Catalog::new(3);
        let spec = cat.spec(Family::FamilyC).unwrap();
        let bad = spec.clone().with_constant("C", 0.0);
        assert!(matches!(build_potential(&bad), Err(FieldError::InvalidSpec(_))));
        let bad = spec.clone().with_constant("C", c(1.0, 0.5));
        assert!(matches!(build_potential(&bad), Err(FieldError::InvalidSpec(_))));
        let bad = spec.with_constant("c0", c(3.0, 0.1));
        assert!(matches!(build_potential(&bad), Err(FieldError::InvalidSpec(_))));
    }

    #[test]
    fn rotational_lift_is_relabeling_at_unit_z2() {
        let mut cat = Catalog::new(11);
        let spec = cat.spec(Family::URot).unwrap();
        let u = build_potential(&spec).unwrap();
        let lifted = lift_rotational(&u).unwrap();
        let z1 = c(0.3, -0.2);
        let sigma = c(0.1, 0.05);
        let pt = Chart::reduced()
            .real_point(&[("z1", z1), ("z2", c(1.0, 0.0)), ("sigma", sigma)])
            .unwrap();
        let base = Chart::rotational()
            .real_point(&[("rho", c(0.0, 0.0)), ("q", z1), ("sigma", sigma)])
            .unwrap();
        let a = lifted.value(&pt).unwrap();
        let b = u.value(&base).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn lift_rejects_cut() {
        let mut cat = Catalog::new(12);
        let u = build_potential(&cat.spec(Family::URot).unwrap()).unwrap();
        let lifted = lift_rotational(&u).unwrap();
        let pt = Chart::reduced()
            .real_point(&[("z1", c(0.3, 0.0)), ("z2", c(-1.0, 0.0)), ("sigma", c(0.0, 0.0))])
            .unwrap();
        assert!(matches!(lifted.value(&pt), Err(FieldError::BranchWindow(_))));
    }

    #[test]
    fn extended_lift_matches_at_zero_translation_and_shifts() {
        let mut cat = Catalog::new(13);
        let u = build_potential(&cat.spec(Family::URot).unwrap()).unwrap();
        let lifted = lift_rotational(&u).unwrap();
        let ext = lift_extended(&u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let window = Window::for_chart(&Chart::extended());
        for _ in 0..20 {
            let pt = window.sample(&Chart::extended(), &mut rng).unwrap();
            let jet = ext.jet(&pt, 1).unwrap();
            let diff = jet.d(&["tau"]).unwrap() - jet.d(&["z1"]).unwrap();
            assert!(diff.norm() < 1e-12 * (1.0 + jet.d(&["z1"]).unwrap().norm()));
            let diffb = jet.d(&["taub"]).unwrap() - jet.d(&["z1b"]).unwrap();
            assert!(diffb.norm() < 1e-12 * (1.0 + jet.d(&["z1b"]).unwrap().norm()));
            let mut at_zero = pt.clone();
            at_zero[4] = c(0.0, 0.0);
            at_zero[5] = c(0.0, 0.0);
            let reduced = vec![pt[0], pt[1], pt[2], pt[3], pt[6], pt[7]];
            let a = ext.value(&at_zero).unwrap();
            let b = lifted.value(&reduced).unwrap();
            assert!((a - b).norm() < 1e-13 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn potentials_are_real_on_the_real_slice() {
        let mut cat = Catalog::new(21);
        for family in [Family::Zerocom, Family::FamilyC, Family::Zeroc, Family::URot, Family::Omega] {
            for _ in 0..3 {
                let spec = cat.spec(family).unwrap();
                let field = build_potential(&spec).unwrap();
                let window = Window::for_chart(field.chart());
                for pt in cat.points(&field, &window, 10).unwrap() {
                    let v = field.value(&pt).unwrap();
                    assert!(v.im.abs() < 1e-10 * (1.0 + v.norm()), "{family:?}: {v}");
                }
            }
        }
    }

    #[test]
    fn zerocom_is_quadratic_in_t() {
        let mut cat = Catalog::new(31);
        let field = build_potential(&cat.spec(Family::Zerocom).unwrap()).unwrap();
        let window = Window::for_chart(field.chart());
        for pt in cat.points(&field, &window, 10).unwrap() {
            let jet = field.jet(&pt, 3).unwrap();
            assert_eq!(jet.d(&["t", "t", "t"]).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn logarithmic_families_satisfy_the_ansatz() {
        let mut cat = Catalog::new(41);
        for family in [Family::FamilyC, Family::Zeroc] {
            let field = build_potential(&cat.spec(family).unwrap()).unwrap();
            let window = Window::for_chart(field.chart());
            for pt in cat.points(&field, &window, 10).unwrap() {
                let jet = field.jet(&pt, 3).unwrap();
                assert!(jet.d(&["t", "t", "q"]).unwrap().norm() < 1e-11);
                assert!(jet.d(&["t", "t", "qb"]).unwrap().norm() < 1e-11);
            }
        }
    }

    #[test]
    fn chart_pairing() {
        assert!(Chart::new("x", &["a", "b", "c"], &[("a", "b"), ("b", "c")]).is_err());
        let ch = Chart::heavenly();
        assert_eq!(ch.partner_name("q").unwrap(), "qb");
        assert!(ch.is_real(0));
        let pt = ch
            .real_point(&[("t", c(1.0, 0.0)), ("q", c(0.5, 0.5)), ("z", c(0.1, -0.2))])
            .unwrap();
        assert!(ch.on_real_slice(&pt, 1e-15));
        assert!(ch.real_point(&[("t", c(1.0, 1.0))]).is_err());
    }

    #[test]
    fn smooth_under_small_base_shifts() {
        let mut cat = Catalog::new(51);
        let field = build_potential(&cat.spec(Family::Zeroc).unwrap()).unwrap();
        let window = Window::for_chart(field.chart());
        for pt in cat.points(&field, &window, 5).unwrap() {
            let a = field.jet(&pt, 3).unwrap();
            let mut moved = pt.clone();
            moved[3] += c(1e-6, 0.0);
            moved[4] += c(1e-6, 0.0);
            let b = field.jet(&moved, 3).unwrap();
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).norm() < 1e-4 * (1.0 + x.norm()));
            }
        }
    }
}
