//! Differential invariants of the heavenly system under the `X₁₁, X̄₁₁`
//! subgroup, operators of invariant differentiation, their commutator
//! algebra on solutions, and finite flows of `X₁₁`.
//!
//! Everything is evaluated on position jets of `v(t, q, q̄, z, z̄)`: a total
//! derivative of an expression is the partial derivative of its jet.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::fields::{Chart, FieldError, PotentialField};
use crate::jets::{Jet, JetError, JetSpace};

type C = Complex64;

const T: usize = 0;
const Q: usize = 1;
const QB: usize = 2;
const Z: usize = 3;
const ZB: usize = 4;

/// A position jet together with how many derivatives it can still take.
#[derive(Clone)]
struct Tj {
    jet: Jet,
    ord: usize,
}

impl Tj {
    fn new(jet: Jet) -> Self {
        let ord = jet.order();
        Tj { jet, ord }
    }

    fn d(&self, var: usize) -> Result<Tj, FieldError> {
        if self.ord == 0 {
            return Err(FieldError::Jet(JetError::OrderOverflow {
                degree: 1,
                order: 0,
            }));
        }
        Ok(Tj {
            jet: self.jet.partial(var)?,
            ord: self.ord - 1,
        })
    }

    fn dd(&self, vars: &[usize]) -> Result<Tj, FieldError> {
        vars.iter().try_fold(self.clone(), |acc, &v| acc.d(v))
    }

    fn value(&self) -> C {
        self.jet.value()
    }

    fn exp(&self) -> Tj {
        Tj { jet: self.jet.exp(), ord: self.ord }
    }

    fn align(a: &Tj, b: &Tj) -> (Jet, Jet, usize) {
        let ord = a.ord.min(b.ord);
        let m = a.jet.order().min(b.jet.order());
        let cut = |j: &Jet| j.truncate(m).expect("lower order");
        (cut(&a.jet), cut(&b.jet), ord)
    }
}

macro_rules! tj_op {
    ($tr:ident, $f:ident) => {
        impl $tr<&Tj> for &Tj {
            type Output = Tj;
            fn $f(self, o: &Tj) -> Tj {
                let (a, b, ord) = Tj::align(self, o);
                Tj { jet: a.$f(b), ord }
            }
        }
        impl $tr<Tj> for Tj {
            type Output = Tj;
            fn $f(self, o: Tj) -> Tj {
                (&self).$f(&o)
            }
        }
        impl $tr<&Tj> for Tj {
            type Output = Tj;
            fn $f(self, o: &Tj) -> Tj {
                (&self).$f(o)
            }
        }
        impl $tr<Tj> for &Tj {
            type Output = Tj;
            fn $f(self, o: Tj) -> Tj {
                self.$f(&o)
            }
        }
    };
}

tj_op!(Add, add);
tj_op!(Sub, sub);
tj_op!(Mul, mul);

impl Mul<f64> for Tj {
    type Output = Tj;
    fn mul(self, k: f64) -> Tj {
        Tj { jet: self.jet * k, ord: self.ord }
    }
}

impl Mul<f64> for &Tj {
    type Output = Tj;
    fn mul(self, k: f64) -> Tj {
        self.clone() * k
    }
}

impl Neg for Tj {
    type Output = Tj;
    fn neg(self) -> Tj {
        Tj { jet: -self.jet, ord: self.ord }
    }
}

/// Jets of `v` and of the coordinates at one point.
struct Ctx {
    v: Tj,
    x: Vec<Tj>,
}

impl Ctx {
    fn new(field: &PotentialField, point: &[C], order: usize) -> Result<Self, FieldError> {
        field.require_chart(&Chart::heavenly())?;
        let x = Chart::heavenly().seed(point, order)?;
        let v = field.compose(&x)?;
        Ok(Ctx {
            v: Tj::new(v),
            x: x.into_iter().map(Tj::new).collect(),
        })
    }

    fn from_jets(v: Jet, x: Vec<Jet>) -> Self {
        Ctx {
            v: Tj::new(v),
            x: x.into_iter().map(Tj::new).collect(),
        }
    }

    fn v(&self, vars: &[usize]) -> Result<Tj, FieldError> {
        self.v.dd(vars)
    }
}

/// Operators of invariant differentiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Op {
    /// `δ = D_t`
    Delta,
    /// `Δ^q = q D_q`
    Dq,
    /// `Δ̄^q = q̄ D_q̄`
    Dqb,
    /// `Δ^z = q²(2D_z − v_tq D_q)`
    Dz,
    /// `Δ̄^z = q̄²(2D_z̄ − v_tq̄ D_q̄)`
    Dzb,
}

impl Op {
    pub const ALL: [Op; 5] = [Op::Delta, Op::Dq, Op::Dqb, Op::Dz, Op::Dzb];

    pub fn name(self) -> &'static str {
        match self {
            Op::Delta => "δ",
            Op::Dq => "Δ^q",
            Op::Dqb => "Δ̄^q",
            Op::Dz => "Δ^z",
            Op::Dzb => "Δ̄^z",
        }
    }

    fn apply(self, ctx: &Ctx, e: &Tj) -> Result<Tj, FieldError> {
        let x = &ctx.x;
        Ok(match self {
            Op::Delta => e.d(T)?,
            Op::Dq => &x[Q] * e.d(Q)?,
            Op::Dqb => &x[QB] * e.d(QB)?,
            Op::Dz => &x[Q] * &x[Q] * (e.d(Z)? * 2.0 - ctx.v(&[T, Q])? * e.d(Q)?),
            Op::Dzb => &x[QB] * &x[QB] * (e.d(ZB)? * 2.0 - ctx.v(&[T, QB])? * e.d(QB)?),
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scalars evaluated on the jet of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Invariant {
    T,
    W1,
    W2,
    W3,
    W3b,
    W4,
    W5,
    W6,
    W6b,
    W7,
    W7b,
    W8,
    W9,
    W9b,
    Wtt,
    Wtz,
    Wtzb,
    Wqz,
    Wqzb,
    /// `v` itself, not an invariant.
    V,
}

impl Invariant {
    /// The twelve second-order invariants.
    pub const SECOND_ORDER: [Invariant; 12] = [
        Invariant::W2,
        Invariant::W3,
        Invariant::W3b,
        Invariant::W4,
        Invariant::W5,
        Invariant::W6,
        Invariant::W6b,
        Invariant::W7,
        Invariant::W7b,
        Invariant::W8,
        Invariant::W9,
        Invariant::W9b,
    ];

    fn eval(self, c: &Ctx) -> Result<Tj, FieldError> {
        let x = &c.x;
        let (t, q, qb) = (&x[T], &x[Q], &x[QB]);
        let v = |d: &[usize]| c.v(d);
        // qv_qq + q̄v_qq̄ + 2tv_tq − 3v_q and its conjugate
        let inner = || -> Result<Tj, FieldError> {
            Ok(q * v(&[Q, Q])? + qb * v(&[Q, QB])? + t * v(&[T, Q])? * 2.0 - v(&[Q])? * 3.0)
        };
        let inner_b = || -> Result<Tj, FieldError> {
            Ok(qb * v(&[QB, QB])? + q * v(&[Q, QB])? + t * v(&[T, QB])? * 2.0 - v(&[QB])? * 3.0)
        };
        Ok(match self {
            Invariant::T => t.clone(),
            Invariant::V => v(&[])?,
            Invariant::W1 => q * v(&[Q])? + qb * v(&[QB])? + t * v(&[T])? * 2.0 - v(&[])? * 4.0,
            Invariant::W2 => q * qb * (v(&[T, T])? * -0.5).exp(),
            Invariant::W3 => q * inner()?,
            Invariant::W3b => qb * inner_b()?,
            Invariant::W4 => q * v(&[T, Q])? + qb * v(&[T, QB])? + t * v(&[T, T])? * 2.0 - v(&[T])? * 2.0,
            Invariant::W5 => q * qb * v(&[Q, QB])?,
            Invariant::W6 => q * q * qb * (v(&[QB, Z])? * 2.0 - v(&[Q, QB])? * v(&[T, Q])?),
            Invariant::W6b => q * qb * qb * (v(&[Q, ZB])? * 2.0 - v(&[Q, QB])? * v(&[T, QB])?),
            Invariant::W7 => {
                let vtq = v(&[T, Q])?;
                q * q * (v(&[T, Z])? + v(&[Q, Q])? - &vtq * &vtq * 0.25)
            }
            Invariant::W7b => {
                let vtq = v(&[T, QB])?;
                qb * qb * (v(&[T, ZB])? + v(&[QB, QB])? - &vtq * &vtq * 0.25)
            }
            Invariant::W8 => {
                let q3 = q * q * q;
                let qb3 = qb * qb * qb;
                q3 * qb3 * (v(&[Q, QB])? * v(&[Z, ZB])? - v(&[Q, ZB])? * v(&[QB, Z])?)
            }
            Invariant::W9 => {
                q * q
                    * (t * v(&[T, Z])? * 4.0 + q * v(&[Q, Z])? * 2.0 + qb * v(&[QB, Z])? * 2.0
                        - v(&[Z])? * 8.0
                        - v(&[T, Q])? * inner()?)
            }
            Invariant::W9b => {
                qb * qb
                    * (t * v(&[T, ZB])? * 4.0 + qb * v(&[QB, ZB])? * 2.0 + q * v(&[Q, ZB])? * 2.0
                        - v(&[ZB])? * 8.0
                        - v(&[T, QB])? * inner_b()?)
            }
            Invariant::Wtt => v(&[T, T, T])?,
            Invariant::Wtz => q * v(&[T, T, Q])?,
            Invariant::Wtzb => qb * v(&[T, T, QB])?,
            Invariant::Wqz => q * q * v(&[T, Q, Q])? - q * v(&[T, Q])?,
            Invariant::Wqzb => qb * qb * v(&[T, QB, QB])? - qb * v(&[T, QB])?,
        })
    }
}

/// Jet order used for invariant values.
pub const FRAME_ORDER: usize = 4;
/// Jet order used for double operator application to second-order probes.
pub const COMMUTATOR_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantFrame {
    pub t: C,
    pub w1: C,
    pub w2: C,
    pub w3: C,
    pub w3b: C,
    pub w4: C,
    pub w5: C,
    pub w6: C,
    pub w6b: C,
    pub w7: C,
    pub w7b: C,
    pub w8: C,
    pub w9: C,
    pub w9b: C,
    pub wtt: C,
    pub wtz: C,
    pub wtzb: C,
    pub wqz: C,
    pub wqzb: C,
}

impl InvariantFrame {
    /// The independent invariant variables `(t, ω₁, ω₂, ω₃, ω̄₃)`.
    pub fn base(&self) -> [C; 5] {
        [self.t, self.w1, self.w2, self.w3, self.w3b]
    }

    /// The automorphic unknowns `(F, G, Ḡ) = (ω₄, ω₉, ω̄₉)`.
    pub fn unknowns(&self) -> [C; 3] {
        [self.w4, self.w9, self.w9b]
    }
}

pub fn invariant(field: &PotentialField, inv: Invariant, point: &[C]) -> Result<C, FieldError> {
    let ctx = Ctx::new(field, point, FRAME_ORDER)?;
    Ok(inv.eval(&ctx)?.value())
}

pub fn invariants_at(field: &PotentialField, point: &[C]) -> Result<InvariantFrame, FieldError> {
    let ctx = Ctx::new(field, point, FRAME_ORDER)?;
    let e = |i: Invariant| -> Result<C, FieldError> { Ok(i.eval(&ctx)?.value()) };
    Ok(InvariantFrame {
        t: e(Invariant::T)?,
        w1: e(Invariant::W1)?,
        w2: e(Invariant::W2)?,
        w3: e(Invariant::W3)?,
        w3b: e(Invariant::W3b)?,
        w4: e(Invariant::W4)?,
        w5: e(Invariant::W5)?,
        w6: e(Invariant::W6)?,
        w6b: e(Invariant::W6b)?,
        w7: e(Invariant::W7)?,
        w7b: e(Invariant::W7b)?,
        w8: e(Invariant::W8)?,
        w9: e(Invariant::W9)?,
        w9b: e(Invariant::W9b)?,
        wtt: e(Invariant::Wtt)?,
        wtz: e(Invariant::Wtz)?,
        wtzb: e(Invariant::Wtzb)?,
        wqz: e(Invariant::Wqz)?,
        wqzb: e(Invariant::Wqzb)?,
    })
}

/// `ops[0](ops[1](…(inv)))` at `point`.
pub fn apply_operators(field: &PotentialField, ops: &[Op], inv: Invariant, point: &[C]) -> Result<C, FieldError> {
    let ctx = Ctx::new(field, point, COMMUTATOR_ORDER)?;
    let mut e = inv.eval(&ctx)?;
    for op in ops.iter().rev() {
        e = op.apply(&ctx, &e)?;
    }
    Ok(e.value())
}

pub fn apply_operator(field: &PotentialField, op: Op, inv: Invariant, point: &[C]) -> Result<C, FieldError> {
    apply_operators(field, &[op], inv, point)
}

/// The ten relations of the operator algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    DeltaDq,
    DeltaDqb,
    DeltaDz,
    DeltaDzb,
    DqDz,
    DqbDzb,
    DqDqb,
    DqDzb,
    DqbDz,
    DzDzb,
}

impl Relation {
    pub const ALL: [Relation; 10] = [
        Relation::DeltaDq,
        Relation::DeltaDqb,
        Relation::DeltaDz,
        Relation::DeltaDzb,
        Relation::DqDz,
        Relation::DqbDzb,
        Relation::DqDqb,
        Relation::DqDzb,
        Relation::DqbDz,
        Relation::DzDzb,
    ];

    pub fn pair(self) -> (Op, Op) {
        use Op::*;
        match self {
            Relation::DeltaDq => (Delta, Dq),
            Relation::DeltaDqb => (Delta, Dqb),
            Relation::DeltaDz => (Delta, Dz),
            Relation::DeltaDzb => (Delta, Dzb),
            Relation::DqDz => (Dq, Dz),
            Relation::DqbDzb => (Dqb, Dzb),
            Relation::DqDqb => (Dq, Dqb),
            Relation::DqDzb => (Dq, Dzb),
            Relation::DqbDz => (Dqb, Dz),
            Relation::DzDzb => (Dz, Dzb),
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Relation::DeltaDq => "[δ, Δ^q] = 0",
            Relation::DeltaDqb => "[δ, Δ̄^q] = 0",
            Relation::DeltaDz => "[δ, Δ^z] = −ω_tz Δ^q",
            Relation::DeltaDzb => "[δ, Δ̄^z] = −ω̄_tz Δ̄^q",
            Relation::DqDz => "[Δ^q, Δ^z] = 2Δ^z − ω_qz Δ^q",
            Relation::DqbDzb => "[Δ̄^q, Δ̄^z] = 2Δ̄^z − ω̄_qz Δ̄^q",
            Relation::DqDqb => "[Δ^q, Δ̄^q] = 0",
            Relation::DqDzb => "[Δ^q, Δ̄^z] = ω₂ω_tt Δ̄^q",
            Relation::DqbDz => "[Δ̄^q, Δ^z] = ω₂ω_tt Δ^q",
            Relation::DzDzb => "[Δ^z, Δ̄^z] = 2ω₂(ω̄_tz Δ^q − ω_tz Δ̄^q)",
        }
    }

    /// Right-hand side applied to `e`.
    fn rhs(self, ctx: &Ctx, e: &Tj) -> Result<Tj, FieldError> {
        let inv = |i: Invariant| i.eval(ctx);
        let ap = |op: Op| op.apply(ctx, e);
        let zero = e * 0.0;
        Ok(match self {
            Relation::DeltaDq | Relation::DeltaDqb | Relation::DqDqb => zero,
            Relation::DeltaDz => -(inv(Invariant::Wtz)? * ap(Op::Dq)?),
            Relation::DeltaDzb => -(inv(Invariant::Wtzb)? * ap(Op::Dqb)?),
            Relation::DqDz => ap(Op::Dz)? * 2.0 - inv(Invariant::Wqz)? * ap(Op::Dq)?,
            Relation::DqbDzb => ap(Op::Dzb)? * 2.0 - inv(Invariant::Wqzb)? * ap(Op::Dqb)?,
            Relation::DqDzb => inv(Invariant::W2)? * inv(Invariant::Wtt)? * ap(Op::Dqb)?,
            Relation::DqbDz => inv(Invariant::W2)? * inv(Invariant::Wtt)? * ap(Op::Dq)?,
            Relation::DzDzb => {
                inv(Invariant::W2)?
                    * 2.0
                    * (inv(Invariant::Wtzb)? * ap(Op::Dq)? - inv(Invariant::Wtz)? * ap(Op::Dqb)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub relation: Relation,
    pub statement: &'static str,
    pub max_abs: f64,
    pub max_rel: f64,
}

/// Probes used for commutator checks.
pub const PROBES: [Invariant; 2] = [Invariant::W1, Invariant::W2];

/// Deviation `|[A, B](ω) − rhs(ω)|` per relation over probes and points;
/// relative to `max(1, |AB ω|, |BA ω|, |rhs|)`.
pub fn verify_commutators(field: &PotentialField, points: &[Vec<C>]) -> Result<Vec<RelationReport>, FieldError> {
    let mut out: Vec<RelationReport> = Relation::ALL
        .iter()
        .map(|&r| RelationReport {
            relation: r,
            statement: r.statement(),
            max_abs: 0.0,
            max_rel: 0.0,
        })
        .collect();
    for pt in points {
        let ctx = Ctx::new(field, pt, COMMUTATOR_ORDER)?;
        for probe in PROBES {
            let e = probe.eval(&ctx)?;
            for rep in out.iter_mut() {
                let (a, b) = rep.relation.pair();
                let ab = a.apply(&ctx, &b.apply(&ctx, &e)?)?.value();
                let ba = b.apply(&ctx, &a.apply(&ctx, &e)?)?.value();
                let rhs = rep.relation.rhs(&ctx, &e)?.value();
                let dev = (ab - ba - rhs).norm();
                let scale = 1f64.max(ab.norm()).max(ba.norm()).max(rhs.norm());
                rep.max_abs = rep.max_abs.max(dev);
                rep.max_rel = rep.max_rel.max(dev / scale);
            }
        }
    }
    Ok(out)
}

/// The heavenly system written through invariants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantEquation {
    pub statement: &'static str,
    pub max_abs: f64,
}

pub fn invariant_equations(field: &PotentialField, points: &[Vec<C>]) -> Result<Vec<InvariantEquation>, FieldError> {
    let mut out = vec![
        InvariantEquation { statement: "ω₅ = 2ω₂", max_abs: 0.0 },
        InvariantEquation { statement: "ω₇ = 0", max_abs: 0.0 },
        InvariantEquation { statement: "ω̄₇ = 0", max_abs: 0.0 },
        InvariantEquation { statement: "ω₆ = 0", max_abs: 0.0 },
        InvariantEquation { statement: "ω̄₆ = 0", max_abs: 0.0 },
        InvariantEquation { statement: "ω₈ = −2ω₂³", max_abs: 0.0 },
    ];
    for pt in points {
        let f = invariants_at(field, pt)?;
        let vals = [f.w5 - 2.0 * f.w2, f.w7, f.w7b, f.w6, f.w6b, f.w8 + 2.0 * f.w2 * f.w2 * f.w2];
        for (eq, v) in out.iter_mut().zip(vals) {
            eq.max_abs = eq.max_abs.max(v.norm());
        }
    }
    Ok(out)
}

/// One-parameter flows of `X₁₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Flow {
    /// `f = c`: `z → z + εc`.
    Translation(C),
    /// `f = z`: `z → e^ε z`, `q → e^{ε/2} q`, `v → v + εt²/2`.
    Scaling,
}

impl Flow {
    /// Image of a point under the flow at parameter `eps`.
    pub fn map_point(&self, eps: f64, point: &[C]) -> Vec<C> {
        let mut p = point.to_vec();
        match *self {
            Flow::Translation(c) => p[Z] += c * eps,
            Flow::Scaling => {
                p[Z] *= eps.exp();
                p[Q] *= (eps / 2.0).exp();
            }
        }
        p
    }

    /// The transformed solution `v′(x′) = v(x) + Δv`.
    pub fn transform(&self, field: &PotentialField, eps: f64) -> PotentialField {
        let flow = *self;
        let base = field.clone();
        PotentialField::new(Chart::heavenly(), &format!("{}∘flow", field.label()), move |x: &[Jet]| {
            let mut y = x.to_vec();
            match flow {
                Flow::Translation(c) => y[Z] = &x[Z] - c * eps,
                Flow::Scaling => {
                    y[Z] = &x[Z] * (-eps).exp();
                    y[Q] = &x[Q] * (-eps / 2.0).exp();
                }
            }
            let v = base.compose(&y)?;
            Ok(match flow {
                Flow::Translation(_) => v,
                Flow::Scaling => v + &x[T] * &x[T] * (eps / 2.0),
            })
        })
    }
}

/// Largest `|I(v′)(x′) − I(v)(x)|` over probes and points.
pub fn flow_invariance(
    field: &PotentialField,
    flow: Flow,
    eps: f64,
    probes: &[Invariant],
    points: &[Vec<C>],
) -> Result<f64, FieldError> {
    let moved = flow.transform(field, eps);
    let mut worst: f64 = 0.0;
    for pt in points {
        let image = flow.map_point(eps, pt);
        for &inv in probes {
            let before = invariant(field, inv, pt)?;
            let after = invariant(&moved, inv, &image)?;
            worst = worst.max((after - before).norm());
        }
    }
    Ok(worst)
}

/// Frames and automorphic unknowns of a solution and its flow image at
/// corresponding points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutomorphicCheck {
    pub max_frame_gap: f64,
    pub max_unknown_gap: f64,
}

pub fn automorphic_check(field: &PotentialField, flow: Flow, eps: f64, points: &[Vec<C>]) -> Result<AutomorphicCheck, FieldError> {
    let moved = flow.transform(field, eps);
    let mut out = AutomorphicCheck {
        max_frame_gap: 0.0,
        max_unknown_gap: 0.0,
    };
    for pt in points {
        let a = invariants_at(field, pt)?;
        let b = invariants_at(&moved, &flow.map_point(eps, pt))?;
        for (x, y) in a.base().iter().zip(b.base()) {
            out.max_frame_gap = out.max_frame_gap.max((x - y).norm());
        }
        for (x, y) in a.unknowns().iter().zip(b.unknowns()) {
            out.max_unknown_gap = out.max_unknown_gap.max((x - y).norm());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Relative cut for counting singular values.
pub const RANK_TOL: f64 = 1e-6;

/// Which second-jet coordinates the Jacobian is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JetCoords {
    /// `v, v_i, v_ij` (21 columns).
    Fibre,
    /// `x_i, v, v_i, v_ij` (26 columns).
    Full,
}

fn multi_indices() -> Vec<[u8; 5]> {
    let mut out: Vec<[u8; 5]> = vec![[0; 5]];
    for i in 0..5 {
        let mut m = [0; 5];
        m[i] = 1;
        out.push(m);
    }
    for i in 0..5 {
        for j in i..5 {
            let mut m = [0; 5];
            m[i] += 1;
            m[j] += 1;
            out.push(m);
        }
    }
    out
}

/// Rank of the Jacobian of `invariants` on the second jet space at the
/// 2-jet of `field` at `point`. The 2-jet is replaced by its quadratic
/// Taylor polynomial in displacements `h`; one column at a time is moved
/// by `ε` and the derivative in `ε` is read off exactly.
pub fn jet_rank(
    field: &PotentialField,
    point: &[C],
    invariants: &[Invariant],
    coords: JetCoords,
) -> Result<RankReport, FieldError> {
    let chart = Chart::heavenly();
    field.require_chart(&chart)?;
    let names: Vec<String> = chart.coords().to_vec();
    let base = field.compose(&chart.seed(point, 2)?)?;
    let multis = multi_indices();
    let coeffs: Vec<C> = multis
        .iter()
        .map(|m| {
            let idx: Vec<&str> = m
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat(names[i].as_str()).take(k as usize))
                .collect();
            base.d(&idx)
        })
        .collect::<Result<_, _>>()?;

    let mut vars = names.clone();
    vars.push("eps".into());
    let space = JetSpace::new(&vars, 3)?;
    let eps = Jet::seed(&space, "eps", 0.0)?;
    let h: Vec<Jet> = (0..5).map(|i| Jet::seed_index(&space, i, C::new(0.0, 0.0))).collect();
    let eps_idx = space.var_index("eps")?;

    let n_coord = if coords == JetCoords::Full { 5 } else { 0 };
    let cols = n_coord + multis.len();
    let mut jac = DMatrix::<C>::zeros(invariants.len(), cols);
    for col in 0..cols {
        let x: Vec<Jet> = (0..5)
            .map(|i| {
                let xi = &h[i] + point[i];
                if col == i && col < n_coord { xi + &eps } else { xi }
            })
            .collect();
        let mut v = Jet::zero(&space);
        for (k, (m, &cf)) in multis.iter().zip(&coeffs).enumerate() {
            let mut mono = Jet::constant(&space, 1.0);
            let mut fact = 1.0;
            for (i, &p) in m.iter().enumerate() {
                for n in 0..p {
                    mono = mono * &h[i];
                    fact *= (n + 1) as f64;
                }
            }
            let mut c = Jet::constant(&space, cf);
            if col == n_coord + k {
                c = c + &eps;
            }
            v = v + c * mono * (1.0 / fact);
        }
        let ctx = Ctx::from_jets(v, x);
        for (row, inv) in invariants.iter().enumerate() {
            jac[(row, col)] = inv.eval(&ctx)?.jet.partial(eps_idx)?.value();
        }
    }
    let sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    Ok(RankReport {
        rows: invariants.len(),
        cols,
        rank: sv.iter().filter(|&&s| s > RANK_TOL * top).count(),
        singular_values: sv,
    })
}

/// Rank of the twelve second-order invariants against `v, v_i, v_ij`.
pub fn second_order_rank(field: &PotentialField, point: &[C]) -> Result<RankReport, FieldError> {
    jet_rank(field, point, &Invariant::SECOND_ORDER, JetCoords::Fibre)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_potential, Catalog, Family, Window};

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn zeroc(seed: u64, n: usize) -> (PotentialField, Vec<Vec<C>>) {
        let mut cat = Catalog::new(seed);
        let f = build_potential(&cat.spec(Family::Zeroc).unwrap()).unwrap();
        let pts = cat.points(&f, &Window::for_chart(f.chart()), n).unwrap();
        (f, pts)
    }

    fn toy() -> PotentialField {
        PotentialField::new(Chart::heavenly(), "t²", |x| Ok(&x[0] * &x[0]))
    }

    fn pt(t: f64, q: C, z: C) -> Vec<C> {
        Chart::heavenly()
            .real_point(&[("t", c(t, 0.0)), ("q", q), ("z", z)])
            .unwrap()
    }

    #[test]
    fn toy_values() {
        let p = pt(0.7, c(0.3, 0.4), c(0.1, 0.2));
        let f = invariants_at(&toy(), &p).unwrap();
        assert!(f.w1.norm() < 1e-15);
        assert!((f.w2 - c(0.25 * (-1f64).exp(), 0.0)).norm() < 1e-15);
        assert_eq!(apply_operator(&toy(), Op::Dq, Invariant::T, &p).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn invariant_form_of_the_system() {
        let (f, pts) = zeroc(1, 20);
        for eq in invariant_equations(&f, &pts).unwrap() {
            assert!(eq.max_abs < 1e-9, "{eq:?}");
        }
    }

    #[test]
    fn reality_pairings() {
        let (f, pts) = zeroc(2, 10);
        for p in &pts {
            let fr = invariants_at(&f, p).unwrap();
            for r in [fr.w1, fr.w2, fr.w4, fr.w5, fr.w8, fr.wtt] {
                assert!(r.im.abs() < 1e-12 * (1.0 + r.norm()));
            }
            for (a, b) in [(fr.w3, fr.w3b), (fr.w6, fr.w6b), (fr.w7, fr.w7b), (fr.w9, fr.w9b), (fr.wtz, fr.wtzb), (fr.wqz, fr.wqzb)] {
                assert!((a - b.conj()).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn operators_generate_listed_invariants() {
        let (f, pts) = zeroc(3, 20);
        for p in &pts {
            let fr = invariants_at(&f, p).unwrap();
            let ap = |op| apply_operator(&f, op, Invariant::W1, p).unwrap();
            assert!((ap(Op::Delta) - fr.w4).norm() < 1e-10 * (1.0 + fr.w4.norm()));
            assert!((ap(Op::Dq) - fr.w3).norm() < 1e-10 * (1.0 + fr.w3.norm()));
            assert!((ap(Op::Dz) - fr.w9).norm() < 1e-10 * (1.0 + fr.w9.norm()));
            assert!((ap(Op::Dzb) - fr.w9b).norm() < 1e-10 * (1.0 + fr.w9b.norm()));
        }
    }

    #[test]
    fn operator_matches_finite_difference() {
        let (f, pts) = zeroc(4, 3);
        for p in &pts {
            let exact = apply_operator(&f, Op::Delta, Invariant::W2, p).unwrap();
            let h = 1e-5;
            let at = |dt: f64| {
                let mut q = p.clone();
                q[T] += dt;
                invariant(&f, Invariant::W2, &q).unwrap()
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert!((exact - fd).norm() < 1e-7 * (1.0 + exact.norm()));
        }
    }

    #[test]
    fn commutator_algebra_on_solutions() {
        let (f, pts) = zeroc(5, 5);
        for rep in verify_commutators(&f, &pts).unwrap() {
            assert!(rep.max_rel < 1e-8, "{rep:?}");
        }
    }

    #[test]
    fn order_overflow_is_an_error() {
        let (f, pts) = zeroc(6, 1);
        let ops = [Op::Delta; 6];
        assert!(apply_operators(&f, &ops, Invariant::W2, &pts[0]).is_err());
    }

    #[test]
    fn flows() {
        let (f, pts) = zeroc(7, 10);
        let probes = [Invariant::W1, Invariant::W2, Invariant::W3];
        for flow in [Flow::Translation(c(1.0, 0.5)), Flow::Scaling] {
            assert!(flow_invariance(&f, flow, 0.05, &probes, &pts).unwrap() < 1e-9);
        }
        let drift = flow_invariance(&f, Flow::Scaling, 0.05, &[Invariant::V], &pts[..1]).unwrap();
        let t = pts[0][T].re;
        assert!((drift - 0.05 * t * t / 2.0).abs() < 1e-12);
    }

    #[test]
    fn automorphic_unknowns_follow_frames() {
        let (f, pts) = zeroc(8, 10);
        let r = automorphic_check(&f, Flow::Scaling, 0.05, &pts).unwrap();
        assert!(r.max_frame_gap < 1e-9 && r.max_unknown_gap < 1e-9, "{r:?}");
    }

    fn degenerate_probe() -> PotentialField {
        PotentialField::new(Chart::heavenly(), "probe", |x| {
            let (t, q, qb, z, zb) = (&x[0], &x[1], &x[2], &x[3], &x[4]);
            Ok(t * t + q * q * q + qb * qb * qb + z * z * zb * zb + t * q * z * 0.3 + t * qb * zb * 0.3 + q * zb * 0.2 + qb * z * 0.2)
        })
    }

    #[test]
    fn twelve_independent_second_order_invariants() {
        let probe = degenerate_probe().plus("qq̄", |x| Ok(&x[1] * &x[2] * 0.7));
        let p = pt(0.8, c(0.4, 0.3), c(0.5, -0.2));
        let r = second_order_rank(&probe, &p).unwrap();
        assert_eq!(r.rank, 12, "{:?}", r.singular_values);
        let mut all = vec![Invariant::T, Invariant::W1];
        all.extend(Invariant::SECOND_ORDER);
        assert_eq!(jet_rank(&probe, &p, &all, JetCoords::Full).unwrap().rank, 14);
    }

    #[test]
    fn rank_drops_where_v_q_qbar_vanishes() {
        // ω₈ then lies in the span of ω₅, ω₆, ω̄₆
        let p = pt(0.8, c(0.4, 0.3), c(0.5, -0.2));
        assert_eq!(second_order_rank(&degenerate_probe(), &p).unwrap().rank, 11);
    }
}
