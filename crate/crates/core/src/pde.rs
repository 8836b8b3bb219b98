//! Residuals of the equations along the reduction chain.
//!
//! Every equation is a list of scalar residuals, each written as a sum of
//! terms so that the relative residual `|Σ terms| / max(1, max |term|)` can be
//! reported next to the absolute one.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::fields::{Chart, FieldError, PotentialField};
use crate::jets::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EquationId {
    /// `u₁₁̄u₂₂̄ − u₁₂̄u₂₁̄ = 1`.
    Cma,
    /// `Ω_pp̄Ω_σσ̄ − Ω_pσ̄Ω_σp̄ = e^{ρ/2}`.
    CmaParam,
    /// `v_pp̄v_σσ̄ − v_pσ̄v_σp̄ = 1`.
    CmaLegendre,
    /// Monge–Ampère, the two recursion pairs and the integrability condition
    /// in the presence of the group parameters `τ, σ`.
    SixSystem,
    /// Equations implied by the six-equation system.
    SixConsequences,
    /// Monge–Ampère with the recursion pairs and the second-order condition
    /// after eliminating `τ`.
    ReducedSystem,
    /// The rotationally reduced system and its conjugates.
    RotSystem,
    /// The four reduced heavenly equations and their conjugates.
    BfSystem,
}

impl EquationId {
    pub const ALL: [EquationId; 8] = [
        EquationId::Cma,
        EquationId::CmaParam,
        EquationId::CmaLegendre,
        EquationId::SixSystem,
        EquationId::SixConsequences,
        EquationId::ReducedSystem,
        EquationId::RotSystem,
        EquationId::BfSystem,
    ];

    /// Chart the equation is written on. `Cma` accepts any chart holding
    /// `z¹, z², z̄¹, z̄²`.
    pub fn chart(self) -> Chart {
        match self {
            EquationId::Cma => Chart::monge_ampere(),
            EquationId::CmaParam => Chart::parametric(),
            EquationId::CmaLegendre => Chart::legendre_plane(),
            EquationId::SixSystem | EquationId::SixConsequences => Chart::extended(),
            EquationId::ReducedSystem => Chart::reduced(),
            EquationId::RotSystem => Chart::rotational(),
            EquationId::BfSystem => Chart::heavenly(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EquationId::Cma => "CMA",
            EquationId::CmaParam => "CMA_PARAM",
            EquationId::CmaLegendre => "CMA_LEGENDRE",
            EquationId::SixSystem => "SIX_SYSTEM",
            EquationId::SixConsequences => "SIX_CONSEQUENCES",
            EquationId::ReducedSystem => "REDUCED_SYSTEM",
            EquationId::RotSystem => "ROT_SYSTEM",
            EquationId::BfSystem => "BF_SYSTEM",
        }
    }

    /// Highest derivative order appearing.
    pub fn order(self) -> usize {
        2
    }

    fn accepts(self, chart: &Chart) -> bool {
        match self {
            EquationId::Cma => ["z1", "z2", "z1b", "z2b"].iter().all(|c| chart.index(c).is_ok()),
            _ => *chart == self.chart(),
        }
    }

    /// Residual terms at a point, from a derivative accessor taking a list of
    /// coordinate names.
    pub fn terms(self, d: &dyn Fn(&[&str]) -> Result<Complex64, FieldError>) -> Result<Vec<Residual>, FieldError> {
        let one = Complex64::new(1.0, 0.0);
        let mut out = Vec::new();
        let mut push = |name: &'static str, terms: Vec<Complex64>| out.push(Residual::new(name, terms));
        match self {
            EquationId::Cma => {
                push("cma", det_terms(d, ["z1", "z1b", "z2", "z2b"], one)?);
            }
            EquationId::CmaParam => {
                let e = (d(&["@rho"])? * 0.5).exp();
                push("cma_param", det_terms(d, ["p", "pb", "sigma", "sigmab"], e)?);
            }
            EquationId::CmaLegendre => {
                push("cma_legendre", det_terms(d, ["p", "pb", "sigma", "sigmab"], one)?);
            }
            EquationId::BfSystem => bf_terms(d, &mut push)?,
            EquationId::RotSystem => rot_terms(d, &mut push)?,
            EquationId::ReducedSystem => reduced_terms(d, &mut push)?,
            EquationId::SixSystem => six_terms(d, &mut push)?,
            EquationId::SixConsequences => six_consequence_terms(d, &mut push)?,
        }
        Ok(out)
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn det_terms(
    d: &dyn Fn(&[&str]) -> Result<Complex64, FieldError>,
    [x, xb, y, yb]: [&str; 4],
    rhs: Complex64,
) -> Result<Vec<Complex64>, FieldError> {
    Ok(vec![
        d(&[x, xb])? * d(&[y, yb])?,
        -d(&[x, yb])? * d(&[y, xb])?,
        -rhs,
    ])
}

type Push<'a> = dyn FnMut(&'static str, Vec<Complex64>) + 'a;
type Acc<'a> = dyn Fn(&[&str]) -> Result<Complex64, FieldError> + 'a;

fn bf_terms(d: &Acc, push: &mut Push) -> Result<(), FieldError> {
    let e = (-d(&["t", "t"])? * 0.5).exp();
    let vtq = d(&["t", "q"])?;
    let vtqb = d(&["t", "qb"])?;
    push("e1", vec![d(&["q", "qb"])?, -2.0 * e]);
    push("e2", vec![d(&["q", "q"])?, d(&["t", "z"])?, -vtq * vtq / 4.0]);
    push("be2", vec![d(&["qb", "qb"])?, d(&["t", "zb"])?, -vtqb * vtqb / 4.0]);
    push("e3", vec![d(&["qb", "z"])?, -vtq * e]);
    push("be3", vec![d(&["q", "zb"])?, -vtqb * e]);
    push("e4", vec![d(&["z", "zb"])?, e * e, -0.5 * vtq * vtqb * e]);
    Ok(())
}

fn rot_terms(d: &Acc, push: &mut Push) -> Result<(), FieldError> {
    let e = (d(&["@rho"])? * 0.5).exp();
    let uqqb = d(&["q", "qb"])?;
    let uqq = d(&["q", "q"])?;
    let uqbqb = d(&["qb", "qb"])?;
    let urr = d(&["rho", "rho"])?;
    let urq = d(&["rho", "q"])?;
    let urqb = d(&["rho", "qb"])?;
    let uq = d(&["q"])?;
    let uqb = d(&["qb"])?;
    push("cmarot", vec![uqqb * urr, -urq * urqb, -e]);
    push("Ia", vec![d(&["sigma", "qb"])?, -uqqb * (urq + uq / 2.0), uqq * urqb]);
    push("bIa", vec![d(&["sigmab", "q"])?, -uqqb * (urqb + uqb / 2.0), uqbqb * urq]);
    push("IIa", vec![d(&["sigma", "rho"])?, -urq * (urq + uq / 2.0), uqq * urr]);
    push("bIIa", vec![d(&["sigmab", "rho"])?, -urqb * (urqb + uqb / 2.0), uqbqb * urr]);
    push(
        "8a",
        vec![
            uqqb * d(&["sigma", "sigmab"])?,
            -d(&["sigma", "qb"])? * d(&["sigmab", "q"])?,
            -e * uqq * uqbqb,
            e * uqqb * uqqb,
        ],
    );
    Ok(())
}

struct Cma2 {
    u11b: Complex64,
    u12b: Complex64,
    u21b: Complex64,
    u22b: Complex64,
}

fn cma2(d: &Acc) -> Result<Cma2, FieldError> {
    Ok(Cma2 {
        u11b: d(&["z1", "z1b"])?,
        u12b: d(&["z1", "z2b"])?,
        u21b: d(&["z2", "z1b"])?,
        u22b: d(&["z2", "z2b"])?,
    })
}

fn reduced_terms(d: &Acc, push: &mut Push) -> Result<(), FieldError> {
    let m = cma2(d)?;
    let (u11, u12) = (d(&["z1", "z1"])?, d(&["z1", "z2"])?);
    let (v11, v12) = (d(&["z1b", "z1b"])?, d(&["z1b", "z2b"])?);
    push("cma", vec![m.u11b * m.u22b, -m.u12b * m.u21b, -Complex64::new(1.0, 0.0)]);
    push("I", vec![d(&["sigma", "z1b"])?, -m.u11b * u12, m.u21b * u11]);
    push("II", vec![d(&["sigma", "z2b"])?, -m.u12b * u12, m.u22b * u11]);
    push("bI", vec![d(&["sigmab", "z1"])?, -m.u11b * v12, m.u12b * v11]);
    push("bII", vec![d(&["sigmab", "z2"])?, -m.u21b * v12, m.u22b * v11]);
    push(
        "8",
        vec![
            m.u11b * d(&["sigma", "sigmab"])?,
            -d(&["z1", "sigmab"])? * d(&["z1b", "sigma"])?,
            -u11 * v11,
            m.u11b * m.u11b,
        ],
    );
    Ok(())
}

fn six_terms(d: &Acc, push: &mut Push) -> Result<(), FieldError> {
    let m = cma2(d)?;
    let (ut1, ut2) = (d(&["tau", "z1"])?, d(&["tau", "z2"])?);
    let (vt1, vt2) = (d(&["taub", "z1b"])?, d(&["taub", "z2b"])?);
    push("cma", vec![m.u11b * m.u22b, -m.u12b * m.u21b, -Complex64::new(1.0, 0.0)]);
    push("12a_1", vec![d(&["sigma", "z1b"])?, -m.u11b * ut2, m.u21b * ut1]);
    push("12a_2", vec![d(&["sigma", "z2b"])?, -m.u12b * ut2, m.u22b * ut1]);
    push("b12a_1", vec![d(&["sigmab", "z1"])?, -m.u11b * vt2, m.u12b * vt1]);
    push("b12a_2", vec![d(&["sigmab", "z2"])?, -m.u21b * vt2, m.u22b * vt1]);
    push(
        "integrability",
        vec![
            m.u11b * d(&["tau", "taub"])?,
            m.u11b * d(&["sigma", "sigmab"])?,
            -ut1 * vt1,
            -d(&["sigma", "z1b"])? * d(&["sigmab", "z1"])?,
        ],
    );
    Ok(())
}

fn six_consequence_terms(d: &Acc, push: &mut Push) -> Result<(), FieldError> {
    let m = cma2(d)?;
    let (us1b, us2b) = (d(&["sigma", "z1b"])?, d(&["sigma", "z2b"])?);
    let (vs1, vs2) = (d(&["sigmab", "z1"])?, d(&["sigmab", "z2"])?);
    push("34a_1", vec![d(&["tau", "z1"])?, -m.u12b * us1b, m.u11b * us2b]);
    push("34a_2", vec![d(&["tau", "z2"])?, -m.u22b * us1b, m.u21b * us2b]);
    push("b34a_1", vec![d(&["taub", "z1b"])?, -m.u21b * vs1, m.u11b * vs2]);
    push("b34a_2", vec![d(&["taub", "z2b"])?, -m.u22b * vs1, m.u12b * vs2]);
    push(
        "integrability_2",
        vec![
            m.u22b * d(&["tau", "taub"])?,
            m.u22b * d(&["sigma", "sigmab"])?,
            -d(&["tau", "z2"])? * d(&["taub", "z2b"])?,
            -us2b * vs2,
        ],
    );
    Ok(())
}

/// One scalar residual at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: &'static str,
    pub value: Complex64,
    pub scale: f64,
}

impl Residual {
    fn new(name: &'static str, terms: Vec<Complex64>) -> Self {
        let value = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
        Residual { name, value, scale }
    }

    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    pub fn rel(&self) -> f64 {
        self.value.norm() / self.scale
    }
}

/// Derivative accessor over a jet; the reserved name `@rho` yields the value
/// of the `rho` coordinate at the base point.
pub fn jet_accessor<'a>(jet: &'a Jet, point: &'a [Complex64], chart: &'a Chart) -> impl Fn(&[&str]) -> Result<Complex64, FieldError> + 'a {
    move |names: &[&str]| {
        if names == ["@rho"] {
            return Ok(point[chart.index("rho")?]);
        }
        Ok(jet.d(names)?)
    }
}

/// Residuals at a single point.
pub fn residual_at(eq: EquationId, field: &PotentialField, point: &[Complex64]) -> Result<Vec<Residual>, FieldError> {
    if !eq.accepts(field.chart()) {
        return Err(FieldError::ChartMismatch {
            expected: eq.chart().name().to_string(),
            found: field.chart().name().to_string(),
        });
    }
    let jet = field.jet(point, eq.order())?;
    let acc = jet_accessor(&jet, point, field.chart());
    let out = eq.terms(&acc);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentReport {
    pub name: &'static str,
    pub max_abs: f64,
    pub max_rel: f64,
    pub worst_point: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: EquationId,
    pub points: usize,
    pub components: Vec<ComponentReport>,
    pub max_abs: f64,
    pub max_rel: f64,
}

/// Aggregates residuals over `points`.
pub fn residual(eq: EquationId, field: &PotentialField, points: &[Vec<Complex64>]) -> Result<ResidualReport, FieldError> {
    let mut components: Vec<ComponentReport> = Vec::new();
    for point in points {
        for (k, r) in residual_at(eq, field, point)?.into_iter().enumerate() {
            if components.len() <= k {
                components.push(ComponentReport {
                    name: r.name,
                    max_abs: 0.0,
                    max_rel: 0.0,
                    worst_point: point.clone(),
                });
            }
            let c = &mut components[k];
            c.max_abs = c.max_abs.max(r.abs());
            if r.rel() >= c.max_rel {
                c.max_rel = r.rel();
                c.worst_point = point.clone();
            }
        }
    }
    Ok(ResidualReport {
        equation: eq,
        points: points.len(),
        max_abs: components.iter().map(|c| c.max_abs).fold(0.0, f64::max),
        max_rel: components.iter().map(|c| c.max_rel).fold(0.0, f64::max),
        components,
    })
}

/// A symmetry characteristic `φ` built from the jet of `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Characteristic {
    Constant(Complex64),
    /// `u₁`.
    U1,
    /// `u₂`.
    U2,
    /// `u·u₁`, not a symmetry.
    UTimesU1,
}

impl Characteristic {
    /// `φ` as a jet one order below `u`.
    fn apply(self, u: &Jet) -> Result<Jet, FieldError> {
        let u1 = u.partial_by("z1")?;
        Ok(match self {
            Characteristic::Constant(c) => Jet::constant(u1.space(), c),
            Characteristic::U1 => u1,
            Characteristic::U2 => u.partial_by("z2")?,
            Characteristic::UTimesU1 => u.truncate(u1.order())? * &u1,
        })
    }
}

struct Linearized {
    u: Jet,
    phi: Jet,
}

impl Linearized {
    fn new(field: &PotentialField, point: &[Complex64], phi: Characteristic) -> Result<Self, FieldError> {
        if !EquationId::Cma.accepts(field.chart()) {
            return Err(FieldError::ChartMismatch {
                expected: Chart::monge_ampere().name().to_string(),
                found: field.chart().name().to_string(),
            });
        }
        let u = field.jet(point, 4)?;
        let phi = phi.apply(&u)?;
        Ok(Linearized { u, phi })
    }

    fn d(&self, j: &Jet, names: &[&str]) -> Result<Jet, FieldError> {
        let mut out = j.clone();
        for n in names {
            out = out.partial_by(n)?;
        }
        Ok(out)
    }
}

/// `D₂̄(u₁₁̄φ₂ − u₂₁̄φ₁) − D₁̄(u₁₂̄φ₂ − u₂₂̄φ₁)`, maximised over `points`.
pub fn divergence_identity(field: &PotentialField, phi: Characteristic, points: &[Vec<Complex64>]) -> Result<f64, FieldError> {
    let mut worst: f64 = 0.0;
    for point in points {
        let l = Linearized::new(field, point, phi)?;
        let u = &l.u;
        let p1 = l.d(&l.phi, &["z1"])?;
        let p2 = l.d(&l.phi, &["z2"])?;
        let first = l.d(u, &["z1", "z1b"])? * &p2 - l.d(u, &["z2", "z1b"])? * &p1;
        let second = l.d(u, &["z1", "z2b"])? * &p2 - l.d(u, &["z2", "z2b"])? * &p1;
        let value = first.partial_by("z2b")?.value() - second.partial_by("z1b")?.value();
        worst = worst.max(value.norm());
    }
    Ok(worst)
}

/// `u₁₁̄φ₂₂̄ + u₂₂̄φ₁₁̄ − u₁₂̄φ₂₁̄ − u₂₁̄φ₁₂̄`, maximised over `points`.
pub fn symmetry_condition(field: &PotentialField, phi: Characteristic, points: &[Vec<Complex64>]) -> Result<f64, FieldError> {
    let mut worst: f64 = 0.0;
    for point in points {
        let l = Linearized::new(field, point, phi)?;
        let (u, f) = (&l.u, &l.phi);
        let v = |j: &Jet, a: &str, b: &str| -> Result<Complex64, FieldError> { Ok(j.d(&[a, b])?) };
        let value = v(u, "z1", "z1b")? * v(f, "z2", "z2b")? + v(u, "z2", "z2b")? * v(f, "z1", "z1b")?
            - v(u, "z1", "z2b")? * v(f, "z2", "z1b")?
            - v(u, "z2", "z1b")? * v(f, "z1", "z2b")?;
        worst = worst.max(value.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_potential, lift_extended, lift_rotational, Catalog, Family, FamilyCForm, Window};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat() -> PotentialField {
        PotentialField::new(Chart::monge_ampere(), "flat", |x| Ok(&x[0] * &x[2] + &x[1] * &x[3]))
    }

    fn quartic() -> PotentialField {
        PotentialField::new(Chart::monge_ampere(), "(z¹z̄¹)²", |x| {
            let w = &x[0] * &x[2];
            Ok(&w * &w)
        })
    }

    fn ma_point(z1: Complex64, z2: Complex64) -> Vec<Complex64> {
        Chart::monge_ampere().real_point(&[("z1", z1), ("z2", z2)]).unwrap()
    }

    #[test]
    fn flat_and_non_solution() {
        let pt = ma_point(c(0.3, 0.1), c(1.0, 0.0));
        let r = residual_at(EquationId::Cma, &flat(), &pt).unwrap();
        assert_eq!(r[0].value, c(0.0, 0.0));
        let r = residual_at(EquationId::Cma, &quartic(), &ma_point(c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!((r[0].value - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn chart_mismatch() {
        let mut cat = Catalog::new(1);
        let v = build_potential(&cat.spec(Family::Zeroc).unwrap()).unwrap();
        let pt = Window::for_chart(v.chart()).sample(v.chart(), cat.rng()).unwrap();
        assert!(matches!(residual_at(EquationId::RotSystem, &v, &pt), Err(FieldError::ChartMismatch { .. })));
    }

    #[test]
    fn heavenly_families_solve_the_system() {
        let mut cat = Catalog::new(2);
        for family in [Family::Zeroc, Family::Zerocom, Family::FamilyC] {
            let v = build_potential(&cat.spec(family).unwrap()).unwrap();
            let pts = cat.points(&v, &Window::for_chart(v.chart()), 20).unwrap();
            let rep = residual(EquationId::BfSystem, &v, &pts).unwrap();
            assert!(rep.max_rel < 1e-9, "{family:?}: {rep:?}");
        }
    }

    #[test]
    fn each_printed_family_c_reading_fails() {
        let mut cat = Catalog::new(3);
        let spec = cat.spec(Family::FamilyC).unwrap();
        let closed = FamilyCForm::CLOSED;
        let variants = [
            FamilyCForm { conjugate_linear_form: false, ..closed },
            FamilyCForm { log_of_product: false, ..closed },
            FamilyCForm { plus_in_qbar_bracket: false, ..closed },
            FamilyCForm { keep_c_term: true, ..closed },
            FamilyCForm::PRINTED,
        ];
        for form in variants {
            let v = build_potential(&spec.clone().with_form(form)).unwrap();
            let pts = cat.points(&v, &Window::for_chart(v.chart()), 20).unwrap();
            let rep = residual(EquationId::BfSystem, &v, &pts).unwrap();
            assert!(rep.max_rel > 1e-4, "{form:?}: {}", rep.max_rel);
        }
    }

    #[test]
    fn perturbation_is_detected() {
        let mut cat = Catalog::new(4);
        let v = build_potential(&cat.spec(Family::Zeroc).unwrap()).unwrap();
        let bumped = v.plus("bumped", |x| Ok(&x[1] * &x[1] * 1e-3));
        let pts = cat.points(&v, &Window::for_chart(v.chart()), 20).unwrap();
        assert!(residual(EquationId::BfSystem, &bumped, &pts).unwrap().max_abs > 1e-4);
    }

    #[test]
    fn reduction_ladder() {
        let mut cat = Catalog::new(5);
        let u = build_potential(&cat.spec(Family::URot).unwrap()).unwrap();
        let pts = cat.points(&u, &Window::for_chart(u.chart()), 10).unwrap();
        assert!(residual(EquationId::RotSystem, &u, &pts).unwrap().max_rel < 1e-9);
        let lifted = lift_rotational(&u).unwrap();
        let pts = cat.points(&lifted, &Window::for_chart(lifted.chart()), 10).unwrap();
        assert!(residual(EquationId::ReducedSystem, &lifted, &pts).unwrap().max_rel < 1e-9);
        assert!(residual(EquationId::Cma, &lifted, &pts).unwrap().max_rel < 1e-9);
        let ext = lift_extended(&u).unwrap();
        let pts = cat.points(&ext, &Window::for_chart(ext.chart()), 10).unwrap();
        let six = residual(EquationId::SixSystem, &ext, &pts).unwrap();
        assert!(six.max_rel < 1e-9);
        let cons = residual(EquationId::SixConsequences, &ext, &pts).unwrap();
        assert!(cons.max_rel < 10.0 * six.max_rel.max(1e-12), "{cons:?}");
    }

    #[test]
    fn conjugate_residuals_are_conjugate() {
        let mut cat = Catalog::new(6);
        let u = build_potential(&cat.spec(Family::URot).unwrap()).unwrap();
        let bumped = u.plus("bumped", |x| Ok(&x[1] * &x[1] * &x[3] * 0.1 + &x[2] * &x[2] * &x[4] * 0.1));
        for pt in cat.points(&u, &Window::for_chart(u.chart()), 5).unwrap() {
            let r = residual_at(EquationId::RotSystem, &bumped, &pt).unwrap();
            let get = |n: &str| r.iter().find(|x| x.name == n).unwrap().value;
            assert!(get("Ia").norm() > 1e-6);
            assert!((get("Ia") - get("bIa").conj()).norm() < 1e-12);
            assert!((get("IIa") - get("bIIa").conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn divergence_and_symmetry_conditions() {
        let pts = vec![ma_point(c(0.3, 0.1), c(1.0, 0.2)), ma_point(c(1.0, 0.0), c(1.0, 0.0))];
        assert_eq!(divergence_identity(&flat(), Characteristic::U1, &pts).unwrap(), 0.0);
        assert_eq!(symmetry_condition(&flat(), Characteristic::Constant(c(2.0, 0.0)), &pts).unwrap(), 0.0);
        // det u_{ij̄} ≡ 0 for (z¹z̄¹)², so its z¹-derivative vanishes as well.
        assert!(divergence_identity(&quartic(), Characteristic::U1, &pts).unwrap() < 1e-12);
        let off_shell = quartic().plus("(z¹z̄¹)² + z²z̄²", |x| Ok(&x[1] * &x[3]));
        assert!(divergence_identity(&off_shell, Characteristic::U1, &pts).unwrap() > 1e-3);
        assert!(symmetry_condition(&off_shell, Characteristic::U1, &pts).unwrap() > 1e-3);

        let mut cat = Catalog::new(8);
        let lifted = lift_rotational(&build_potential(&cat.spec(Family::URot).unwrap()).unwrap()).unwrap();
        let pts = cat.points(&lifted, &Window::for_chart(lifted.chart()), 10).unwrap();
        assert!(divergence_identity(&lifted, Characteristic::U1, &pts).unwrap() < 1e-9);
        assert!(divergence_identity(&lifted, Characteristic::U2, &pts).unwrap() < 1e-9);
        assert!(symmetry_condition(&lifted, Characteristic::U1, &pts).unwrap() < 1e-9);
        assert!(symmetry_condition(&lifted, Characteristic::UTimesU1, &pts).unwrap() > 1e-3);
    }
}
