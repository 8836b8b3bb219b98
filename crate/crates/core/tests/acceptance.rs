//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Two criteria fail against the printed formulas they pin: the e¹∧e⁴
//! coefficient of R¹₃ and two entries of the bracket table. The run succeeds
//! only if those fail in exactly the documented way and every other check
//! passes.

use cma_lift::fields::{
    build_potential, lift_extended, lift_rotational, Catalog, Family, FieldError, PotentialField, Shape, SolutionSpec,
    Window,
};
use cma_lift::foliation::{flow_invariance, invariant_equations, verify_commutators, Flow, Invariant, PROBES};
use cma_lift::geometry::{closed_form_r11, closed_form_r13, curvature, metric, p_independence, singularity_scan, Grid};
use cma_lift::holofunc::{FnBundle, HoloFn};
use cma_lift::legendre::{delta_with_scale, forward_2d};
use cma_lift::pde::{residual, EquationId};
use cma_lift::symmetry::{
    jacobi_defect, killing_verdict, rng, sample_points, verify_table, Gen, GeneratorParams, KillingVerdict, TableForm,
};
use num_complex::Complex64 as C;
use rand::Rng;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

const SEEDS: [u64; 3] = [101, 202, 303];

struct Part {
    label: String,
    value: f64,
    tol: f64,
    pass: bool,
}

fn below(label: impl Into<String>, value: f64, tol: f64) -> Part {
    Part { label: label.into(), value, tol, pass: value < tol }
}

fn above(label: impl Into<String>, value: f64, tol: f64) -> Part {
    Part { label: label.into(), value, tol, pass: value > tol }
}

struct Criterion {
    n: usize,
    title: &'static str,
    parts: Vec<Part>,
    /// Parts expected to fail, with the reason.
    known: Vec<(&'static str, &'static str)>,
    notes: Vec<String>,
}

impl Criterion {
    fn pass(&self) -> bool {
        self.parts.iter().all(|p| p.pass)
    }

    /// Whether the outcome is the predicted one.
    fn as_expected(&self) -> bool {
        self.parts.iter().all(|p| {
            let known = self.known.iter().any(|(l, _)| *l == p.label);
            p.pass != known
        })
    }
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn pts(cat: &mut Catalog, f: &PotentialField, n: usize) -> Result<Vec<Vec<C>>, FieldError> {
    cat.points(f, &Window::for_chart(f.chart()), n)
}

/// Parametric potential with a curved (non-flat) profile.
fn curved_omega(seed: u64, shape: Shape) -> Res<(SolutionSpec, PotentialField, Catalog)> {
    let mut cat = Catalog::new(seed);
    let mut spec = cat.spec(Family::Omega)?;
    spec.bundle.insert("a", HoloFn::parse(&cat.profile(shape))?);
    let f = build_potential(&spec)?;
    Ok((spec, f, cat))
}

fn shape_for(i: usize) -> Shape {
    if i % 2 == 0 { Shape::Polynomial } else { Shape::Exponential }
}

/// Points where |Δ| clears 1e-6 of its scale.
fn regular(cat: &mut Catalog, f: &PotentialField, bundle: &FnBundle, n: usize) -> Res<Vec<Vec<C>>> {
    let a = bundle.get("a")?;
    let ab = a.conjugate();
    let mut out = Vec::new();
    while out.len() < n {
        for p in pts(cat, f, n)? {
            let x = a.derivatives(p[1], 2)?;
            let y = ab.derivatives(p[3], 2)?;
            let (d, s) = delta_with_scale(&[x[0], x[1], x[2]], &[y[0], y[1], y[2]]);
            if d.norm() > 1e-6 * s.max(1.0) && out.len() < n {
                out.push(p);
            }
        }
    }
    Ok(out)
}

fn c1_solutions() -> Res<Criterion> {
    let mut parts = Vec::new();
    for seed in SEEDS {
        let mut cat = Catalog::new(seed);
        let v = build_potential(&cat.spec(Family::Zeroc)?)?;
        let p = pts(&mut cat, &v, 100)?;
        parts.push(below(format!("ZEROC seed {seed} BF system"), residual(EquationId::BfSystem, &v, &p)?.max_rel, 1e-9));
    }
    for family in [Family::Zerocom, Family::FamilyC] {
        let mut cat = Catalog::new(SEEDS[0]);
        let v = build_potential(&cat.spec(family)?)?;
        let p = pts(&mut cat, &v, 100)?;
        parts.push(below(format!("{} BF system", family.name()), residual(EquationId::BfSystem, &v, &p)?.max_rel, 1e-9));
    }
    Ok(Criterion { n: 1, title: "solution residuals", parts, known: vec![], notes: vec![] })
}

fn c2_chain() -> Res<Criterion> {
    let mut parts = Vec::new();
    for seed in SEEDS {
        let mut cat = Catalog::new(seed);
        let u = build_potential(&cat.spec(Family::URot)?)?;
        let lifted = lift_rotational(&u)?;
        let ext = lift_extended(&u)?;
        let checks = [
            ("ROT_SYSTEM", EquationId::RotSystem, &u),
            ("CMA", EquationId::Cma, &lifted),
            ("REDUCED_SYSTEM", EquationId::ReducedSystem, &lifted),
            ("SIX_SYSTEM", EquationId::SixSystem, &ext),
        ];
        for (name, eq, f) in checks {
            let p = pts(&mut cat, f, 50)?;
            parts.push(below(format!("seed {seed} {name}"), residual(eq, f, &p)?.max_rel, 1e-8));
        }
    }
    Ok(Criterion { n: 2, title: "reduction-chain transport", parts, known: vec![], notes: vec![] })
}

fn c3_omega() -> Res<Criterion> {
    let mut parts = Vec::new();
    for seed in SEEDS {
        let mut cat = Catalog::new(seed);
        let spec = cat.spec(Family::URot)?;
        let u = build_potential(&spec)?;
        let omega = build_potential(&SolutionSpec::new(Family::Omega, spec.bundle.clone()))?;
        let sub = forward_2d(&u)?;
        let p = regular(&mut cat, &omega, &spec.bundle, 20)?;
        let (mut gap, mut det) = (0.0f64, 0.0f64);
        for x in &p {
            gap = gap.max(rel(sub.value(x)?, omega.value(x)?));
            let target = C::new((x[4].re / 2.0).exp(), 0.0);
            det = det.max(rel(metric(&omega, x)?.det, target));
        }
        parts.push(below(format!("seed {seed} substitution vs closed form"), gap, 1e-10));
        parts.push(below(format!("seed {seed} det g = e^(ρ/2)"), det, 1e-9));
    }
    Ok(Criterion { n: 3, title: "parametric potential", parts, known: vec![], notes: vec![] })
}

fn c4_geometry() -> Res<Criterion> {
    let (mut ricci, mut chir, mut pind) = (0.0f64, 0.0f64, 0.0f64);
    let mut indefinite = 0;
    for (i, seed) in SEEDS.iter().enumerate() {
        let (spec, f, mut cat) = curved_omega(*seed, shape_for(i))?;
        let p = regular(&mut cat, &f, &spec.bundle, 10)?;
        for x in &p {
            let r = curvature(&f, x)?;
            ricci = ricci.max(r.max_ricci());
            chir = chir.max(r.chirality.ratio());
            if !metric(&f, x)?.is_positive_definite() {
                indefinite += 1;
            }
        }
        pind = pind.max(p_independence(&f, &p[..5])?);
    }
    let parts = vec![
        below("max |R_ij̄|", ricci, 1e-8),
        below("self-dual / anti-self-dual", chir, 1e-7),
        below("points where g is not positive definite", indefinite as f64, 0.5),
        below("frame curvature change under p shifts", pind, 1e-8),
    ];
    Ok(Criterion { n: 4, title: "geometry", parts, known: vec![], notes: vec![] })
}

const R13_PRINTED: &str = "R¹₃ e¹∧e⁴ vs printed";
const R13_REASON: &str = "numeric coefficient is −R¹₁; printed prefactor is short by √a′·ā′²";

fn c5_closed_forms() -> Res<Criterion> {
    let (mut r11, mut r13, mut r13_rescaled) = (0.0f64, 0.0f64, 0.0f64);
    for (i, seed) in SEEDS.iter().enumerate() {
        let (spec, f, mut cat) = curved_omega(*seed, shape_for(i))?;
        let a = spec.bundle.get("a")?;
        for x in regular(&mut cat, &f, &spec.bundle, 10)? {
            let r = curvature(&f, &x)?;
            r11 = r11.max(rel(r.r11.coefficient, closed_form_r11(&spec.bundle, x[1], x[3], x[4].re)?));
            let printed = closed_form_r13(&spec.bundle, x[1], x[3], x[4].re)?[1];
            r13 = r13.max(rel(r.r13[1], printed));
            let a1 = a.derivatives(x[1], 1)?[1];
            let ab1 = a.conjugate().derivatives(x[3], 1)?[1];
            r13_rescaled = r13_rescaled.max(rel(r.r13[1], printed * a1.sqrt() * ab1 * ab1));
        }
    }
    let parts = vec![
        below("R¹₁ vs closed form (30 points)", r11, 1e-8),
        below(R13_PRINTED, r13, 1e-7),
        below("R¹₃ e¹∧e⁴ vs printed × √a′·ā′²", r13_rescaled, 1e-7),
    ];
    Ok(Criterion { n: 5, title: "closed-form curvature", parts, known: vec![(R13_PRINTED, R13_REASON)], notes: vec![] })
}

fn c6_singular() -> Res<Criterion> {
    let grid = Grid { min: -1.0, max: 1.0, steps: 11 };
    let mut r = rng(6);
    let (mut lin, mut rec, mut flat_delta, mut flat_res) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..3 {
        let mut c = || C::new(r.gen_range(0.3..1.0), r.gen_range(-0.3..0.3));
        let (a1, a0, k) = (c(), c(), c());
        let l = 2.0 + c();
        let lambda: f64 = 0.7;
        let s = |b: &str| -> Res<_> { Ok(singularity_scan(&FnBundle::from_sources([("a", b)])?, grid)?) };
        let fmt = |z: C| format!("({} + {}*i)", z.re, z.im);
        lin = lin.max(s(&format!("{}*z + {}", fmt(a1), fmt(a0)))?.max_abs_delta);
        rec = rec.max(s(&format!("{lambda}*i - 1/({}*z + {})", fmt(a1), fmt(3.0 + a0)))?.max_abs_delta);
        let f = s(&format!("-4/({}*({}*z + {}))", fmt(k), fmt(k), fmt(l)))?;
        flat_delta = flat_delta.max(f.max_abs_delta);
        flat_res = flat_res.max(f.max_abs_flatness);
    }
    let parts = vec![
        below("Δ on a″ = ā″ = 0", lin, 1e-10),
        below("Δ on a = iλ − 1/(a₁σ + a₀)", rec, 1e-10),
        below("Δ on a = −4/(k(kσ + l))", flat_delta, 1e-10),
        below("flatness residual on a = −4/(k(kσ + l))", flat_res, 1e-10),
    ];
    Ok(Criterion { n: 6, title: "singular and flat profiles", parts, known: vec![], notes: vec![] })
}

const TABLE_PRINTED: &str = "28 printed entries";
const TABLE_REASON: &str = "[X_a, W_h] is W_{a(4h_ρ − h)}, not 4W_{ah_ρ} (and conjugate)";

fn c7_algebra() -> Res<Criterion> {
    let (mut printed, mut corrected, mut jacobi) = (0usize, 0usize, 0.0f64);
    let mut mismatched = Vec::new();
    for seed in 0..3 {
        let mut r = rng(700 + seed);
        let params = GeneratorParams::random(&mut r)?;
        let points = sample_points(&mut r, 4)?;
        for e in verify_table(&params, &points, TableForm::Printed)? {
            if e.passes(1e-10) {
                printed += 1;
            } else {
                mismatched.push(format!("[{}, {}]", e.row.name(), e.col.name()));
            }
        }
        corrected += verify_table(&params, &points, TableForm::Corrected)?.iter().filter(|e| e.passes(1e-10)).count();
        for i in 0..7 {
            for j in (i + 1)..7 {
                for k in (j + 1)..7 {
                    let g = |n: usize| params.generator(Gen::ALL[n]);
                    jacobi = jacobi.max(jacobi_defect(&g(i), &g(j), &g(k), &points)?);
                }
            }
        }
    }
    mismatched.sort();
    mismatched.dedup();
    let parts = vec![
        below(TABLE_PRINTED, (84 - printed) as f64, 0.5),
        below("28 entries with the corrected [X, W], [X, W̄]", (84 - corrected) as f64, 0.5),
        below("Jacobi identity, 35 triples", jacobi, 1e-10),
    ];
    Ok(Criterion { n: 7, title: "symmetry algebra", parts, known: vec![(TABLE_PRINTED, TABLE_REASON)],
        notes: vec![format!("mismatched printed entries: {}", mismatched.join(" "))],
    })
}

fn c8_noninvariance() -> Res<Criterion> {
    let mut parts = Vec::new();
    for (i, seed) in SEEDS.iter().enumerate() {
        let (spec, f, mut cat) = curved_omega(*seed, shape_for(i))?;
        let p = regular(&mut cat, &f, &spec.bundle, 10)?;
        let k = killing_verdict(&f, &p)?;
        let weakest = k.witnesses.iter().map(|w| w.residual.max_abs).fold(f64::INFINITY, f64::min);
        parts.push(above(format!("seed {seed} weakest witness residual"), weakest, 1e-6));
        parts.push(Part {
            label: format!("seed {seed} verdict NONINVARIANT_WITNESSED"),
            value: 0.0,
            tol: 0.0,
            pass: k.verdict == KillingVerdict::NoninvariantWitnessed,
        });
    }
    let mut cat = Catalog::new(8);
    let omega = build_potential(&cat.spec(Family::Omega)?)?;
    let p = pts(&mut cat, &omega, 10)?;
    let flat = PotentialField::new(omega.chart().clone(), "flat", |x| Ok(&x[0] * &x[2] + &x[1] * &x[3]));
    parts.push(Part {
        label: "flat control INCONCLUSIVE".into(),
        value: 0.0,
        tol: 0.0,
        pass: killing_verdict(&flat, &p)?.verdict == KillingVerdict::Inconclusive,
    });
    Ok(Criterion { n: 8, title: "noninvariance", parts, known: vec![], notes: vec![] })
}

fn c9_foliation() -> Res<Criterion> {
    let mut parts = Vec::new();
    let mut cat = Catalog::new(SEEDS[0]);
    let v = build_potential(&cat.spec(Family::Zeroc)?)?;
    let p = pts(&mut cat, &v, 10)?;
    for eq in invariant_equations(&v, &p)? {
        parts.push(below(eq.statement.to_string(), eq.max_abs, 1e-9));
    }
    let worst = verify_commutators(&v, &p[..5])?.iter().map(|r| r.max_rel).fold(0.0, f64::max);
    parts.push(below(format!("10 commutators on {:?}", PROBES), worst, 1e-8));
    let probes = [Invariant::W1, Invariant::W2, Invariant::W3];
    parts.push(below("translation flow drift", flow_invariance(&v, Flow::Translation(C::new(0.6, -0.3)), 0.05, &probes, &p)?, 1e-9));
    parts.push(below("scaling flow drift", flow_invariance(&v, Flow::Scaling, 0.05, &probes, &p)?, 1e-9));
    Ok(Criterion { n: 9, title: "foliation", parts, known: vec![], notes: vec![] })
}

/// Random expression in `z` built from the parser's operations.
fn random_expr(r: &mut impl Rng, depth: usize) -> String {
    let num = |r: &mut dyn rand::RngCore| format!("{:.3}", r.gen_range(0.2..1.5));
    if depth == 0 {
        return if r.gen_bool(0.6) { "z".into() } else { num(r) };
    }
    let a = random_expr(r, depth - 1);
    let b = random_expr(r, depth - 1);
    match r.gen_range(0..10) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 => format!("({a})*({b})"),
        3 => format!("({a})/(2 + ({b})^2)"),
        4 => format!("exp(0.5*({a}))"),
        5 => format!("exp(i*({a})) - ({b})"),
        6 => format!("1/(3 + ({a})*({b}))"),
        7 => format!("ln(3 + ({a})^2)"),
        8 => format!("sqrt(4 + ({a})^2)"),
        _ => format!("({a})^{}", r.gen_range(2..4)),
    }
}

fn c10_engine() -> Res<Criterion> {
    let mut r = rng(10);
    let (mut worst, mut done) = (0.0f64, 0);
    let (h, k) = (1e-4, 1e-3);
    while done < 200 {
        let depth = r.gen_range(2..4);
        let src = random_expr(&mut r, depth);
        let f = HoloFn::parse(&src)?;
        let w = C::new(r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5));
        let Ok(d) = f.derivatives(w, 2) else { continue };
        let e = |x: C| f.eval(x);
        let stencil = |s: C| -> Option<[C; 4]> { Some([e(w + s).ok()?, e(w - s).ok()?, e(w + 2.0 * s).ok()?, e(w - 2.0 * s).ok()?]) };
        let (Some(x), Some(y), Some(x2)) = (stencil(C::new(h, 0.0)), stencil(C::new(0.0, h)), stencil(C::new(k, 0.0))) else {
            continue;
        };
        // fourth-order central differences along both axes
        let fx = (8.0 * (x[0] - x[1]) - (x[2] - x[3])) / (12.0 * h);
        let fy = (8.0 * (y[0] - y[1]) - (y[2] - y[3])) / (12.0 * h) * C::new(0.0, -1.0);
        let fxx = (16.0 * (x2[0] + x2[1]) - (x2[2] + x2[3]) - 30.0 * d[0]) / (12.0 * k * k);
        worst = worst.max((d[1] - fx).norm() / d[1].norm().max(1.0));
        worst = worst.max((d[1] - fy).norm() / d[1].norm().max(1.0));
        worst = worst.max((d[2] - fxx).norm() / d[2].norm().max(1.0));
        done += 1;
    }
    Ok(Criterion {
        n: 10,
        title: "engine soundness",
        parts: vec![below("200 expressions, jet vs central differences", worst, 1e-7)],
        known: vec![],
        notes: vec![],
    })
}

fn main() {
    let runs: [fn() -> Res<Criterion>; 10] = [
        c1_solutions,
        c2_chain,
        c3_omega,
        c4_geometry,
        c5_closed_forms,
        c6_singular,
        c7_algebra,
        c8_noninvariance,
        c9_foliation,
        c10_engine,
    ];
    let mut ok = true;
    for run in runs {
        match run() {
            Ok(c) => {
                println!("criterion {:>2} {} {}", c.n, if c.pass() { "PASS" } else { "FAIL" }, c.title);
                for p in &c.parts {
                    println!("    {} {:<48} {:.2e} (tol {:.0e})", if p.pass { "ok  " } else { "FAIL" }, p.label, p.value, p.tol);
                }
                for n in &c.notes {
                    println!("    {n}");
                }
                for (label, why) in &c.known {
                    println!("    expected failure of `{label}`: {why}");
                }
                ok &= c.as_expected();
            }
            Err(e) => {
                println!("criterion error: {e}");
                ok = false;
            }
        }
    }
    if !ok {
        println!("acceptance outcome differs from the recorded analysis");
        std::process::exit(1);
    }
}
