//! Point-symmetry generators as vector fields with jet-valued coefficients,
//! Lie brackets, the commutator table of the parameter-dependent equation,
//! and invariance conditions for solutions.
//!
//! Brackets use `[X, Y]^i = X(Yⁱ) − Y(Xⁱ)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fields::{Chart, FieldError, PotentialField, Range, Window};
use crate::holofunc::{HoloError, HoloFn, SeparableFn};
use crate::jets::{Jet, JetSpace};

type C = Complex64;

/// A scalar coefficient: coordinate jets in, jet out.
pub type Coeff = Arc<dyn Fn(&[Jet]) -> Result<Jet, FieldError> + Send + Sync>;

/// Derivatives `[f, f′, …, f⁽ⁿ⁾]` of a function of one coordinate, evaluated
/// on a jet.
pub type ZFn = Arc<dyn Fn(&Jet, usize) -> Result<Vec<Jet>, FieldError> + Send + Sync>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub mod coeff {
    //! Combinators for [`Coeff`](super::Coeff).
    use super::*;

    pub fn constant(k: impl Into<C>) -> Coeff {
        let k = k.into();
        Arc::new(move |x: &[Jet]| Ok(Jet::constant(x[0].space(), k)))
    }

    pub fn coord(i: usize) -> Coeff {
        Arc::new(move |x: &[Jet]| Ok(x[i].clone()))
    }

    pub fn add(a: &Coeff, b: &Coeff) -> Coeff {
        let (a, b) = (a.clone(), b.clone());
        Arc::new(move |x: &[Jet]| Ok(a(x)? + b(x)?))
    }

    pub fn sub(a: &Coeff, b: &Coeff) -> Coeff {
        let (a, b) = (a.clone(), b.clone());
        Arc::new(move |x: &[Jet]| Ok(a(x)? - b(x)?))
    }

    pub fn mul(a: &Coeff, b: &Coeff) -> Coeff {
        let (a, b) = (a.clone(), b.clone());
        Arc::new(move |x: &[Jet]| Ok(a(x)? * b(x)?))
    }

    pub fn scale(a: &Coeff, k: impl Into<C>) -> Coeff {
        let (a, k) = (a.clone(), k.into());
        Arc::new(move |x: &[Jet]| Ok(a(x)? * k))
    }

    /// `∂f/∂xⁱ`, evaluated by perturbing coordinate `i` with an auxiliary jet
    /// variable one order higher, so the result keeps the input order.
    pub fn partial(f: &Coeff, i: usize) -> Coeff {
        let f = f.clone();
        Arc::new(move |x: &[Jet]| {
            let space = x[0].space().clone();
            let aux = format!("__d{}", space.num_vars());
            let mut vars = space.vars().to_vec();
            vars.push(aux.clone());
            let big = JetSpace::new(&vars, space.order() + 1)?;
            let mut y = x.iter().map(|j| j.embed(&big)).collect::<Result<Vec<_>, _>>()?;
            y[i] = &y[i] + &Jet::seed(&big, &aux, 0.0)?;
            Ok(f(&y)?.slice(&aux, 1, &space)?)
        })
    }

    /// A function of the single coordinate `i`.
    pub fn of_coord(f: &HoloFn, i: usize) -> Coeff {
        let f = f.clone();
        Arc::new(move |x: &[Jet]| Ok(f.eval_jet(&x[i])?))
    }

    /// A separable function whose argument names are coordinates of `chart`.
    pub fn separable(f: &SeparableFn, chart: &Chart) -> Result<Coeff, FieldError> {
        let mut idx = Vec::new();
        for term in &f.terms {
            for (arg, _) in &term.factors {
                idx.push((arg.clone(), chart.index(arg)?));
            }
        }
        let f = f.clone();
        Ok(Arc::new(move |x: &[Jet]| {
            let lookup = |name: &str| idx.iter().find(|(n, _)| n == name).map(|(_, i)| x[*i].clone());
            Ok(f.eval_jet(x[0].space(), &lookup)?)
        }))
    }
}

/// A vector field on a chart; absent components are zero.
#[derive(Clone)]
pub struct VectorField {
    chart: Chart,
    label: String,
    comps: Vec<Option<Coeff>>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set: Vec<&str> = self
            .comps
            .iter()
            .zip(self.chart.coords())
            .filter(|(c, _)| c.is_some())
            .map(|(_, n)| n.as_str())
            .collect();
        write!(f, "VectorField({}: ∂ along {})", self.label, set.join(","))
    }
}

impl VectorField {
    pub fn zero(chart: &Chart, label: &str) -> Self {
        VectorField {
            chart: chart.clone(),
            label: label.to_string(),
            comps: vec![None; chart.dim()],
        }
    }

    pub fn with(mut self, coord: &str, k: Coeff) -> Result<Self, FieldError> {
        let i = self.chart.index(coord)?;
        self.comps[i] = Some(k);
        Ok(self)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn scale(&self, k: impl Into<C>) -> Self {
        let k = k.into();
        VectorField {
            chart: self.chart.clone(),
            label: format!("{k}·{}", self.label),
            comps: self.comps.iter().map(|c| c.as_ref().map(|c| coeff::scale(c, k))).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<Self, FieldError> {
        self.same_chart(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| match (a, b) {
                (Some(a), Some(b)) => Some(coeff::add(a, b)),
                (Some(a), None) | (None, Some(a)) => Some(a.clone()),
                (None, None) => None,
            })
            .collect();
        Ok(VectorField {
            chart: self.chart.clone(),
            label: format!("{} + {}", self.label, other.label),
            comps,
        })
    }

    /// The image under the conjugation involution: component `i` moves to the
    /// partner of `i` and every coefficient `k` becomes `x ↦ conj(k(conj(swap x)))`.
    pub fn conjugate(&self) -> Self {
        let chart = self.chart.clone();
        let mut comps: Vec<Option<Coeff>> = vec![None; chart.dim()];
        for (i, k) in self.comps.iter().enumerate() {
            if let Some(k) = k {
                let k = k.clone();
                let swap = chart.clone();
                comps[chart.partner(i)] = Some(Arc::new(move |x: &[Jet]| {
                    let y: Vec<Jet> = (0..x.len()).map(|j| x[swap.partner(j)].conj()).collect();
                    Ok(k(&y)?.conj())
                }));
            }
        }
        VectorField {
            label: format!("conj({})", self.label),
            chart,
            comps,
        }
    }

    fn same_chart(&self, other: &VectorField) -> Result<(), FieldError> {
        if self.chart != other.chart {
            return Err(FieldError::ChartMismatch {
                expected: self.chart.name().to_string(),
                found: other.chart.name().to_string(),
            });
        }
        Ok(())
    }

    /// Component jets at `point`, all of order `order`.
    pub fn components(&self, point: &[C], order: usize) -> Result<Vec<Jet>, FieldError> {
        let x = self.chart.seed(point, order)?;
        self.comps
            .iter()
            .map(|k| match k {
                Some(k) => k(&x),
                None => Ok(Jet::zero(x[0].space())),
            })
            .collect()
    }

    pub fn values(&self, point: &[C]) -> Result<Vec<C>, FieldError> {
        Ok(self.components(point, 1)?.iter().map(Jet::value).collect())
    }

    /// `X(f)` for a scalar coefficient.
    pub fn apply(&self, f: &Coeff, point: &[C]) -> Result<C, FieldError> {
        let x = self.chart.seed(point, 1)?;
        let fj = f(&x)?;
        let mut acc = c(0.0, 0.0);
        for (j, k) in self.comps.iter().enumerate() {
            if let Some(k) = k {
                acc += k(&x)?.value() * fj.partial(j)?.value();
            }
        }
        Ok(acc)
    }
}

/// `[X, Y]` from component jets of order ≥ 2; the result is one order lower.
pub fn bracket_jets(x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>, FieldError> {
    let n = x.len();
    let m = x[0].order() - 1;
    let tr = |j: &Jet| j.truncate(m);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let space = x[0].space().with_order(m)?;
        let (mut fwd, mut back) = (Jet::zero(&space), Jet::zero(&space));
        for j in 0..n {
            fwd += &(tr(&x[j])? * y[i].partial(j)?);
            back += &(tr(&y[j])? * x[i].partial(j)?);
        }
        // One subtraction keeps [Y, X] = −[X, Y] exact.
        out.push(fwd - back);
    }
    Ok(out)
}

/// Values of `[X, Y]` at sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketResult {
    pub label: String,
    pub points: Vec<Vec<C>>,
    pub values: Vec<Vec<C>>,
}

impl BracketResult {
    /// Largest componentwise deviation from `template`.
    pub fn deviation(&self, template: &VectorField) -> Result<f64, FieldError> {
        let mut worst: f64 = 0.0;
        for (pt, vals) in self.points.iter().zip(&self.values) {
            let t = template.values(pt)?;
            for (a, b) in vals.iter().zip(&t) {
                worst = worst.max((a - b).norm());
            }
        }
        Ok(worst)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Label of the first candidate matching within `tol` (relative to the
    /// bracket's size, floored at 1).
    pub fn matched<'a>(&self, candidates: &'a [VectorField], tol: f64) -> Result<Option<&'a str>, FieldError> {
        let scale = self.max_abs().max(1.0);
        for cand in candidates {
            if self.deviation(cand)? <= tol * scale {
                return Ok(Some(cand.label()));
            }
        }
        Ok(None)
    }
}

pub fn lie_bracket(x: &VectorField, y: &VectorField, points: &[Vec<C>]) -> Result<BracketResult, FieldError> {
    x.same_chart(y)?;
    let mut values = Vec::with_capacity(points.len());
    for pt in points {
        let b = bracket_jets(&x.components(pt, 2)?, &y.components(pt, 2)?)?;
        values.push(b.iter().map(Jet::value).collect());
    }
    Ok(BracketResult {
        label: format!("[{}, {}]", x.label(), y.label()),
        points: points.to_vec(),
        values,
    })
}

/// Largest `|[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]|` over the points.
pub fn jacobi_defect(x: &VectorField, y: &VectorField, z: &VectorField, points: &[Vec<C>]) -> Result<f64, FieldError> {
    x.same_chart(y)?;
    y.same_chart(z)?;
    let mut worst: f64 = 0.0;
    for pt in points {
        let (xc, yc, zc) = (x.components(pt, 3)?, y.components(pt, 3)?, z.components(pt, 3)?);
        let low = |v: &[Jet]| v.iter().map(|j| j.truncate(2)).collect::<Result<Vec<_>, _>>();
        let a = bracket_jets(&bracket_jets(&xc, &yc)?, &low(&zc)?)?;
        let b = bracket_jets(&bracket_jets(&yc, &zc)?, &low(&xc)?)?;
        let d = bracket_jets(&bracket_jets(&zc, &xc)?, &low(&yc)?)?;
        for i in 0..a.len() {
            worst = worst.max((a[i].value() + b[i].value() + d[i].value()).norm());
        }
    }
    Ok(worst)
}

/// `(p, σ, p̄, σ̄, ρ, Ω)`: independent and dependent variables of the
/// parameter-dependent equation.
pub fn cma_param_chart() -> Chart {
    Chart::new(
        "cma_param_jet",
        &["p", "sigma", "pb", "sigmab", "rho", "omega"],
        &[("p", "pb"), ("sigma", "sigmab")],
    )
    .expect("static chart")
}

/// `(t, q, q̄, z, z̄, v)` of the heavenly system.
pub fn bf_chart() -> Chart {
    Chart::new("bf_jet", &["t", "q", "qb", "z", "zb", "v"], &[("q", "qb"), ("z", "zb")]).expect("static chart")
}

const P: usize = 0;
const SIGMA: usize = 1;
const PB: usize = 2;
const SIGMAB: usize = 3;
const RHO: usize = 4;
const OMEGA: usize = 5;

/// The seven generator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Gen {
    X,
    Y,
    Z,
    V,
    Vb,
    W,
    Wb,
}

impl Gen {
    pub const ALL: [Gen; 7] = [Gen::X, Gen::Y, Gen::Z, Gen::V, Gen::Vb, Gen::W, Gen::Wb];

    pub fn name(self) -> &'static str {
        match self {
            Gen::X => "X_a",
            Gen::Y => "Y_b",
            Gen::Z => "Z_c",
            Gen::V => "V_g",
            Gen::Vb => "V̄_ḡ",
            Gen::W => "W_h",
            Gen::Wb => "W̄_h̄",
        }
    }
}

/// `a(ρ)(4∂_ρ + Ω∂_Ω)`.
pub fn gen_x(a: &Coeff) -> VectorField {
    let v = VectorField::zero(&cma_param_chart(), "X");
    v.with("rho", coeff::scale(a, 4.0))
        .and_then(|v| v.with("omega", coeff::mul(a, &coeff::coord(OMEGA))))
        .expect("static coordinates")
}

/// `b(ρ)(p∂_p + p̄∂_p̄ + Ω∂_Ω)`.
pub fn gen_y(b: &Coeff) -> VectorField {
    let mut v = VectorField::zero(&cma_param_chart(), "Y");
    for (name, i) in [("p", P), ("pb", PB), ("omega", OMEGA)] {
        v = v.with(name, coeff::mul(b, &coeff::coord(i))).expect("static coordinates");
    }
    v
}

/// `i c(ρ)(σ∂_σ − σ̄∂_σ̄)`.
pub fn gen_z(k: &Coeff) -> VectorField {
    let i = c(0.0, 1.0);
    VectorField::zero(&cma_param_chart(), "Z")
        .with("sigma", coeff::scale(&coeff::mul(k, &coeff::coord(SIGMA)), i))
        .and_then(|v| v.with("sigmab", coeff::scale(&coeff::mul(k, &coeff::coord(SIGMAB)), -i)))
        .expect("static coordinates")
}

/// `g_p ∂_σ − g_σ ∂_p`.
pub fn gen_v(g: &Coeff) -> VectorField {
    VectorField::zero(&cma_param_chart(), "V")
        .with("sigma", coeff::partial(g, P))
        .and_then(|v| v.with("p", coeff::scale(&coeff::partial(g, SIGMA), -1.0)))
        .expect("static coordinates")
}

/// `ḡ_p̄ ∂_σ̄ − ḡ_σ̄ ∂_p̄`.
pub fn gen_vb(g: &Coeff) -> VectorField {
    VectorField::zero(&cma_param_chart(), "V̄")
        .with("sigmab", coeff::partial(g, PB))
        .and_then(|v| v.with("pb", coeff::scale(&coeff::partial(g, SIGMAB), -1.0)))
        .expect("static coordinates")
}

/// `h ∂_Ω`.
pub fn gen_w(h: &Coeff) -> VectorField {
    VectorField::zero(&cma_param_chart(), "W")
        .with("omega", h.clone())
        .expect("static coordinates")
}

/// Functional parameters of the seven generators. `a`, `b`, `c` are real
/// functions of ρ; `g`, `h` depend on `(p, σ, ρ)` and their conjugates on
/// `(p̄, σ̄, ρ)`.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub a: HoloFn,
    pub b: HoloFn,
    pub c: HoloFn,
    pub g: SeparableFn,
    pub gb: SeparableFn,
    pub h: SeparableFn,
    pub hb: SeparableFn,
}

fn bar_name(n: &str) -> String {
    match n {
        "p" => "pb".into(),
        "sigma" => "sigmab".into(),
        other => other.into(),
    }
}

impl GeneratorParams {
    /// Parameters with `ḡ`, `h̄` obtained by conjugation.
    pub fn new(a: &str, b: &str, c: &str, g: SeparableFn, h: SeparableFn) -> Result<Self, HoloError> {
        Ok(GeneratorParams {
            a: HoloFn::parse_in(a, "rho")?,
            b: HoloFn::parse_in(b, "rho")?,
            c: HoloFn::parse_in(c, "rho")?,
            gb: g.conjugate_with(bar_name),
            hb: h.conjugate_with(bar_name),
            g,
            h,
        })
    }

    /// A random draw: real quadratics in ρ, and `g`, `h` built from
    /// polynomial and exponential factors.
    pub fn random(rng: &mut impl Rng) -> Result<Self, HoloError> {
        let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        let mut quad = || format!("{:.6} + {:.6}*rho + {:.6}*rho^2", r(0.5, 1.5), r(-1.0, 1.0), r(-0.5, 0.5));
        let (a, b, k) = (quad(), quad(), quad());
        let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
        let mut cx = || format!("({:.6} + {:.6}*i)", r(-1.0, 1.0), r(-1.0, 1.0));
        let g = SeparableFn::zero()
            .term(&[("p", &format!("{}*p^2", cx())), ("sigma", &format!("1 + {}*sigma", cx()))])?
            .term(&[("sigma", &format!("exp({}*sigma)", cx())), ("rho", &format!("1 + {}*rho", cx()))])?
            .term(&[("p", &format!("{}*p", cx())), ("rho", "rho^2")])?;
        let h = SeparableFn::zero()
            .term(&[("p", &format!("{}*p^3", cx())), ("rho", &format!("exp({}*rho)", cx()))])?
            .term(&[("p", "p"), ("sigma", &format!("{}*sigma^2", cx()))])?
            .term(&[("sigma", &format!("{}*sigma", cx())), ("rho", "rho")])?;
        GeneratorParams::new(&a, &b, &k, g, h)
    }

    pub fn coeff_a(&self) -> Coeff {
        coeff::of_coord(&self.a, RHO)
    }

    pub fn coeff_b(&self) -> Coeff {
        coeff::of_coord(&self.b, RHO)
    }

    pub fn coeff_c(&self) -> Coeff {
        coeff::of_coord(&self.c, RHO)
    }

    fn sep(&self, f: &SeparableFn) -> Coeff {
        coeff::separable(f, &cma_param_chart()).expect("parameter arguments are chart coordinates")
    }

    pub fn coeff_g(&self) -> Coeff {
        self.sep(&self.g)
    }

    pub fn coeff_gb(&self) -> Coeff {
        self.sep(&self.gb)
    }

    pub fn coeff_h(&self) -> Coeff {
        self.sep(&self.h)
    }

    pub fn coeff_hb(&self) -> Coeff {
        self.sep(&self.hb)
    }

    pub fn generator(&self, gen: Gen) -> VectorField {
        match gen {
            Gen::X => gen_x(&self.coeff_a()),
            Gen::Y => gen_y(&self.coeff_b()),
            Gen::Z => gen_z(&self.coeff_c()),
            Gen::V => gen_v(&self.coeff_g()),
            Gen::Vb => gen_vb(&self.coeff_gb()),
            Gen::W => gen_w(&self.coeff_h()),
            Gen::Wb => gen_w(&self.coeff_hb()),
        }
        .relabel(gen.name())
    }
}

/// Which reading of a table entry to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TableForm {
    Printed,
    /// Printed table with the `(X, W)` and `(X, W̄)` entries replaced by
    /// `W_{a(4h_ρ − h)}` and its conjugate.
    Corrected,
}

/// Template for `[row, col]` from the commutator table.
pub fn table_entry(row: Gen, col: Gen, p: &GeneratorParams, form: TableForm) -> Option<(String, VectorField)> {
    use coeff::{coord, mul, partial, scale, sub};
    let (a, b, k) = (p.coeff_a(), p.coeff_b(), p.coeff_c());
    let (g, gb, h, hb) = (p.coeff_g(), p.coeff_gb(), p.coeff_h(), p.coeff_hb());
    let i = c(0.0, 1.0);
    let e = |name: &str, v: VectorField| Some((name.to_string(), v.relabel(name)));
    match (row, col) {
        (Gen::X, Gen::Y) => e("4Y_{ab′}", gen_y(&scale(&mul(&a, &partial(&b, RHO)), 4.0))),
        (Gen::X, Gen::Z) => e("4Z_{ac′}", gen_z(&scale(&mul(&a, &partial(&k, RHO)), 4.0))),
        (Gen::X, Gen::V) => e("4V_{ag_ρ}", gen_v(&scale(&mul(&a, &partial(&g, RHO)), 4.0))),
        (Gen::X, Gen::Vb) => e("4V̄_{aḡ_ρ}", gen_vb(&scale(&mul(&a, &partial(&gb, RHO)), 4.0))),
        (Gen::X, Gen::W) | (Gen::X, Gen::Wb) => {
            let hh = if col == Gen::W { &h } else { &hb };
            let bar = if col == Gen::W { "" } else { "̄" };
            match form {
                TableForm::Printed => e(&format!("4W{bar}_{{ah_ρ}}"), gen_w(&scale(&mul(&a, &partial(hh, RHO)), 4.0))),
                TableForm::Corrected => e(
                    &format!("W{bar}_{{a(4h_ρ − h)}}"),
                    gen_w(&mul(&a, &sub(&scale(&partial(hh, RHO), 4.0), hh))),
                ),
            }
        }
        (Gen::Y, Gen::V) => e("V_{b(pg_p − g)}", gen_v(&mul(&b, &sub(&mul(&coord(P), &partial(&g, P)), &g)))),
        (Gen::Y, Gen::Vb) => e(
            "V̄_{b(p̄ḡ_p̄ − ḡ)}",
            gen_vb(&mul(&b, &sub(&mul(&coord(PB), &partial(&gb, PB)), &gb))),
        ),
        (Gen::Y, Gen::W) => e("W_{b(ph_p − h)}", gen_w(&mul(&b, &sub(&mul(&coord(P), &partial(&h, P)), &h)))),
        (Gen::Y, Gen::Wb) => e(
            "W̄_{b(p̄h̄_p̄ − h̄)}",
            gen_w(&mul(&b, &sub(&mul(&coord(PB), &partial(&hb, PB)), &hb))),
        ),
        (Gen::Z, Gen::V) => e(
            "iV_{c(σg_σ − g)}",
            gen_v(&mul(&k, &sub(&mul(&coord(SIGMA), &partial(&g, SIGMA)), &g))).scale(i),
        ),
        (Gen::Z, Gen::Vb) => e(
            "−iV̄_{c(σ̄ḡ_σ̄ − ḡ)}",
            gen_vb(&mul(&k, &sub(&mul(&coord(SIGMAB), &partial(&gb, SIGMAB)), &gb))).scale(-i),
        ),
        (Gen::Z, Gen::W) => e("iW_{cσh_σ}", gen_w(&mul(&k, &mul(&coord(SIGMA), &partial(&h, SIGMA)))).scale(i)),
        (Gen::Z, Gen::Wb) => e(
            "−iW̄_{cσ̄h̄_σ̄}",
            gen_w(&mul(&k, &mul(&coord(SIGMAB), &partial(&hb, SIGMAB)))).scale(-i),
        ),
        (Gen::V, Gen::W) => e(
            "W_{V_g(h)}",
            gen_w(&sub(&mul(&partial(&g, P), &partial(&h, SIGMA)), &mul(&partial(&g, SIGMA), &partial(&h, P)))),
        ),
        (Gen::Vb, Gen::Wb) => e(
            "W̄_{V̄_ḡ(h̄)}",
            gen_w(&sub(
                &mul(&partial(&gb, PB), &partial(&hb, SIGMAB)),
                &mul(&partial(&gb, SIGMAB), &partial(&hb, PB)),
            )),
        ),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    pub row: Gen,
    pub col: Gen,
    pub template: String,
    pub deviation: f64,
    pub bracket_size: f64,
}

impl EntryCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.deviation <= tol * self.bracket_size.max(1.0)
    }
}

/// All 28 upper-triangle entries (diagonal included) for one parameter draw.
pub fn verify_table(params: &GeneratorParams, points: &[Vec<C>], form: TableForm) -> Result<Vec<EntryCheck>, FieldError> {
    let mut out = Vec::new();
    for (r, &row) in Gen::ALL.iter().enumerate() {
        for &col in &Gen::ALL[r..] {
            let br = lie_bracket(&params.generator(row), &params.generator(col), points)?;
            let (template, deviation) = match table_entry(row, col, params, form) {
                Some((name, t)) => (name, br.deviation(&t)?),
                None => ("0".to_string(), br.max_abs()),
            };
            out.push(EntryCheck {
                row,
                col,
                template,
                deviation,
                bracket_size: br.max_abs(),
            });
        }
    }
    Ok(out)
}

/// Random real-slice points of the `(p, σ, p̄, σ̄, ρ, Ω)` chart.
pub fn sample_points(rng: &mut impl Rng, n: usize) -> Result<Vec<Vec<C>>, FieldError> {
    let chart = cma_param_chart();
    let w = Window::new(&[
        ("p", Range::Complex { re: [-1.0, 1.0], im: [-1.0, 1.0] }),
        ("sigma", Range::Complex { re: [-1.0, 1.0], im: [-1.0, 1.0] }),
        ("rho", Range::Real([-1.0, 1.0])),
        ("omega", Range::Real([-1.0, 1.0])),
    ]);
    (0..n).map(|_| w.sample(&chart, rng)).collect()
}

/// Invariance-condition cases: `I` has `b = c̃ = 0`, `II` has `ã = g = ḡ = h = h̄ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
}

/// The generator combination entering the invariance condition for `case`.
pub fn case_generator(params: &GeneratorParams, case: Case) -> Result<VectorField, FieldError> {
    let gens: &[Gen] = match case {
        Case::I => &[Gen::X, Gen::V, Gen::Vb, Gen::W, Gen::Wb],
        Case::II => &[Gen::Y, Gen::Z],
    };
    let mut x = params.generator(gens[0]);
    for g in &gens[1..] {
        x = x.add(&params.generator(*g))?;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceResidual {
    pub case: Case,
    pub max_abs: f64,
    /// The generator itself vanishes at every point, so a zero residual
    /// certifies nothing.
    pub degenerate: bool,
}

fn point_with_omega(field: &PotentialField, point: &[C]) -> Result<(Vec<C>, Jet), FieldError> {
    let chart = field.chart();
    let f = field.jet(point, 1)?;
    let get = |n: &str| -> Result<C, FieldError> { Ok(point[chart.index(n)?]) };
    Ok((
        vec![get("p")?, get("sigma")?, get("pb")?, get("sigmab")?, get("rho")?, f.value()],
        f,
    ))
}

/// The printed left-hand side for `case`, evaluated on a parametric-chart
/// field `f(p, σ, p̄, σ̄, ρ)`.
pub fn invariance_lhs(field: &PotentialField, case: Case, params: &GeneratorParams, point: &[C]) -> Result<C, FieldError> {
    let (full, f) = point_with_omega(field, point)?;
    let d = |n: &str| -> Result<C, FieldError> { Ok(f.d(&[n])?) };
    let x = cma_param_chart().seed(&full, 1)?;
    let val = |k: &Coeff| -> Result<C, FieldError> { Ok(k(&x)?.value()) };
    let fv = f.value();
    let (p, pb, s, sb) = (full[P], full[PB], full[SIGMA], full[SIGMAB]);
    match case {
        Case::I => {
            let (g, gb) = (params.coeff_g(), params.coeff_gb());
            let a = val(&params.coeff_a())?;
            Ok(val(&coeff::partial(&g, P))? * d("sigma")? - val(&coeff::partial(&g, SIGMA))? * d("p")?
                + val(&coeff::partial(&gb, PB))? * d("sigmab")?
                - val(&coeff::partial(&gb, SIGMAB))? * d("pb")?
                + a * (4.0 * d("rho")? - fv)
                - val(&params.coeff_h())?
                - val(&params.coeff_hb())?)
        }
        Case::II => {
            let b = val(&params.coeff_b())?;
            let k = val(&params.coeff_c())?;
            Ok(b * (p * d("p")? + pb * d("pb")? - fv) + c(0.0, 1.0) * k * (s * d("sigma")? - sb * d("sigmab")?))
        }
    }
}

/// `X(f − Ω)|_{Ω=f}` with `X` the case generator, computed from the vector
/// field directly.
pub fn invariance_from_generator(field: &PotentialField, case: Case, params: &GeneratorParams, point: &[C]) -> Result<C, FieldError> {
    let (full, f) = point_with_omega(field, point)?;
    let x = case_generator(params, case)?;
    let comps = x.values(&full)?;
    let names = ["p", "sigma", "pb", "sigmab", "rho"];
    let mut acc = -comps[OMEGA];
    for (i, n) in names.iter().enumerate() {
        acc += comps[i] * f.d(&[n])?;
    }
    Ok(acc)
}

/// Relative size under which a generator counts as vanishing.
pub const DEGENERATE_TOL: f64 = 1e-13;

pub fn invariance_residual(
    field: &PotentialField,
    case: Case,
    params: &GeneratorParams,
    points: &[Vec<C>],
) -> Result<InvarianceResidual, FieldError> {
    let x = case_generator(params, case)?;
    let mut max_abs: f64 = 0.0;
    let mut gen_size: f64 = 0.0;
    for pt in points {
        max_abs = max_abs.max(invariance_lhs(field, case, params, pt)?.norm());
        let (full, _) = point_with_omega(field, pt)?;
        gen_size = gen_size.max(x.values(&full)?.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    Ok(InvarianceResidual {
        case,
        max_abs,
        degenerate: gen_size <= DEGENERATE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KillingVerdict {
    NoninvariantWitnessed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub case: Case,
    pub label: String,
    pub residual: InvarianceResidual,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingReport {
    pub verdict: KillingVerdict,
    pub witnesses: Vec<Witness>,
}

/// Residual a witness must exceed somewhere.
pub const WITNESS_THRESHOLD: f64 = 1e-6;

/// The fixed low-degree witness catalog.
pub fn witness_catalog() -> Result<Vec<(Case, String, GeneratorParams)>, HoloError> {
    let sep = |terms: &[&[(&str, &str)]]| -> Result<SeparableFn, HoloError> {
        terms.iter().try_fold(SeparableFn::zero(), |s, t| s.term(t))
    };
    let none = SeparableFn::zero;
    let mut out = Vec::new();
    for (a, g, h, label) in [
        ("1", none(), none(), "ã=1"),
        ("1", sep(&[&[("p", "p"), ("sigma", "sigma")]])?, none(), "ã=1, g=pσ"),
        ("rho", sep(&[&[("sigma", "sigma^2")]])?, sep(&[&[("p", "p")]])?, "ã=ρ, g=σ², h=p"),
        ("1", sep(&[&[("p", "p^2")]])?, sep(&[&[("sigma", "sigma")]])?, "ã=1, g=p², h=σ"),
        ("1 + rho^2", sep(&[&[("p", "p")], &[("sigma", "sigma")]])?, sep(&[&[("p", "1")]])?, "ã=1+ρ², g=p+σ, h=1"),
    ] {
        out.push((Case::I, label.to_string(), GeneratorParams::new(a, "0", "0", g, h)?));
    }
    for (b, k, label) in [("1", "0", "b=1"), ("0", "1", "c̃=1"), ("1", "1", "b=c̃=1"), ("rho", "1 - rho", "b=ρ, c̃=1−ρ")] {
        out.push((Case::II, label.to_string(), GeneratorParams::new("0", b, k, none(), none())?));
    }
    Ok(out)
}

/// One-sided: can only witness noninvariance.
pub fn killing_verdict(field: &PotentialField, points: &[Vec<C>]) -> Result<KillingReport, FieldError> {
    let mut witnesses = Vec::new();
    for (case, label, params) in witness_catalog()? {
        witnesses.push(Witness {
            case,
            label,
            residual: invariance_residual(field, case, &params, points)?,
        });
    }
    let all = witnesses
        .iter()
        .filter(|w| !w.residual.degenerate)
        .all(|w| w.residual.max_abs > WITNESS_THRESHOLD);
    Ok(KillingReport {
        verdict: if all {
            KillingVerdict::NoninvariantWitnessed
        } else {
            KillingVerdict::Inconclusive
        },
        witnesses,
    })
}

pub mod heavenly {
    //! Generators of the heavenly system on `(t, q, q̄, z, z̄, v)`.
    use super::*;

    const T: usize = 0;
    const Q: usize = 1;
    const Z: usize = 3;
    const V: usize = 5;

    pub fn holo(f: &HoloFn) -> ZFn {
        let f = f.clone();
        Arc::new(move |z: &Jet, n: usize| Ok(f.eval_derivs(z, n)?))
    }

    /// `f g′ − g f′` with derivatives by Leibniz.
    pub fn wronskian(f: &ZFn, g: &ZFn) -> ZFn {
        let (f, g) = (f.clone(), g.clone());
        Arc::new(move |z: &Jet, n: usize| {
            let fd = f(z, n + 1)?;
            let gd = g(z, n + 1)?;
            let mut out = Vec::with_capacity(n + 1);
            for k in 0..=n {
                let mut acc = Jet::zero(z.space());
                let mut binom = 1.0;
                for j in 0..=k {
                    acc += &((&fd[j] * &gd[k - j + 1] - &gd[j] * &fd[k - j + 1]) * binom);
                    binom = binom * (k - j) as f64 / (j + 1) as f64;
                }
                out.push(acc);
            }
            Ok(out)
        })
    }

    pub fn x1() -> VectorField {
        VectorField::zero(&bf_chart(), "X₁")
            .with("t", coeff::constant(1.0))
            .expect("static coordinates")
    }

    /// `q∂_q + q̄∂_q̄ + 2t∂_t + (4v − 2t²)∂_v`.
    pub fn x2() -> VectorField {
        let v = Arc::new(|x: &[Jet]| Ok(&x[V] * 4.0 - &x[T] * &x[T] * 2.0)) as Coeff;
        VectorField::zero(&bf_chart(), "X₂")
            .with("q", coeff::coord(Q))
            .and_then(|f| f.with("qb", coeff::coord(2)))
            .and_then(|f| f.with("t", coeff::scale(&coeff::coord(T), 2.0)))
            .and_then(|f| f.with("v", v))
            .expect("static coordinates")
    }

    /// `(t c(z) − q² c′(z)/2)∂_v`.
    pub fn x7(k: &ZFn) -> VectorField {
        let k = k.clone();
        let v = Arc::new(move |x: &[Jet]| {
            let d = k(&x[Z], 1)?;
            Ok(&x[T] * &d[0] - &x[Q] * &x[Q] * &d[1] * 0.5)
        }) as Coeff;
        VectorField::zero(&bf_chart(), "X₇").with("v", v).expect("static coordinates")
    }

    /// `½f′q∂_q + f∂_z + (q⁴f‴/24 − tq²f″/2 + t²f′/2)∂_v`.
    pub fn x11(f: &ZFn) -> VectorField {
        let (f1, f2, f3) = (f.clone(), f.clone(), f.clone());
        let cq = Arc::new(move |x: &[Jet]| Ok(&f1(&x[Z], 1)?[1] * &x[Q] * 0.5)) as Coeff;
        let cz = Arc::new(move |x: &[Jet]| Ok(f2(&x[Z], 0)?[0].clone())) as Coeff;
        let cv = Arc::new(move |x: &[Jet]| {
            let d = f3(&x[Z], 3)?;
            let q2 = &x[Q] * &x[Q];
            Ok(&q2 * &q2 * &d[3] * (1.0 / 24.0) - &x[T] * &q2 * &d[2] * 0.5 + &x[T] * &x[T] * &d[1] * 0.5)
        }) as Coeff;
        VectorField::zero(&bf_chart(), "X₁₁")
            .with("q", cq)
            .and_then(|v| v.with("z", cz))
            .and_then(|v| v.with("v", cv))
            .expect("static coordinates")
    }

    /// Random real-slice points of the heavenly chart.
    pub fn sample_points(rng: &mut impl Rng, n: usize) -> Result<Vec<Vec<C>>, FieldError> {
        let chart = bf_chart();
        let w = Window::new(&[
            ("t", Range::Real([0.5, 2.0])),
            ("q", Range::Complex { re: [-1.0, 1.0], im: [-1.0, 1.0] }),
            ("z", Range::Complex { re: [-1.0, 1.0], im: [-1.0, 1.0] }),
            ("v", Range::Real([-1.0, 1.0])),
        ]);
        (0..n).map(|_| w.sample(&chart, rng)).collect()
    }
}

/// Seeded RNG used for parameter draws and sample points.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
