//! Legendre transforms along the reduction chain and the explicit
//! inverse-Legendre coefficients.
//!
//! The one-dimensional transform exchanges `t` with `ρ` through `w = v_t`,
//! `ρ = −w_t`, `u = w − t w_t`. The two-dimensional transform exchanges
//! `(q, q̄)` with `(p, p̄) = (−u_q, −u_q̄)` and `Ω = u − q u_q − q̄ u_q̄`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::fields::{Chart, FieldError, Paired, PotentialField};
use crate::holofunc::FnBundle;
use crate::jets::{Jet, JetSpace};

/// Relative size under which Δ, `v_ttt` or the quadratic block determinant
/// count as zero.
pub const INVERTIBILITY_TOL: f64 = 1e-9;

/// Coefficient block of the inverse map `q = αp + βp̄ + γ` as jets in
/// `(σ, σ̄)`, together with the Taylor data of `a` and `d` it was built from.
#[derive(Debug, Clone)]
pub struct CoefficientJets {
    pub a: Jet,
    pub ab: Jet,
    pub a1: Jet,
    pub ab1: Jet,
    pub a2: Jet,
    pub ab2: Jet,
    pub d: Jet,
    pub db: Jet,
    pub big_a: Jet,
    pub big_ab: Jet,
    pub big_b: Jet,
    pub big_c: Jet,
    pub big_cb: Jet,
    pub big_d: Jet,
    pub big_db: Jet,
    pub delta: Jet,
    pub alpha: Jet,
    pub alpha_bar: Jet,
    pub beta: Jet,
    pub gamma: Jet,
    pub gamma_bar: Jet,
}

/// `Δ = a″ā″(a+ā) − 2a″ā′² − 2ā″a′²` together with the magnitude of its
/// largest term.
pub fn delta_with_scale(a: &[Complex64; 3], ab: &[Complex64; 3]) -> (Complex64, f64) {
    let t1 = a[2] * ab[2] * (a[0] + ab[0]);
    let t2 = 2.0 * a[2] * ab[1] * ab[1];
    let t3 = 2.0 * ab[2] * a[1] * a[1];
    (t1 - t2 - t3, t1.norm().max(t2.norm()).max(t3.norm()))
}

pub(crate) fn check_delta(delta: Complex64, scale: f64) -> Result<(), FieldError> {
    if delta.norm() <= INVERTIBILITY_TOL * scale || delta.norm() == 0.0 {
        Err(FieldError::Singular { delta, scale })
    } else {
        Ok(())
    }
}

/// Coefficient jets at the point carried by the jets `s = σ`, `sb = σ̄`.
pub fn coefficient_jets(bundle: &FnBundle, s: &Jet, sb: &Jet) -> Result<CoefficientJets, FieldError> {
    let a = Paired::new(bundle, "a", s, sb, 2)?;
    let d = Paired::new(bundle, "d", s, sb, 1)?;
    let [a0, a1, a2] = [&a.f[0], &a.f[1], &a.f[2]];
    let [b0, b1, b2] = [&a.fb[0], &a.fb[1], &a.fb[2]];
    let (d0, d1) = (&d.f[0], &d.f[1]);
    let (e0, e1) = (&d.fb[0], &d.fb[1]);
    let ab11 = a1 * b1;
    if ab11.value().norm() <= crate::fields::EXISTENCE_TOL {
        return Err(FieldError::Existence {
            condition: "a′·ā′ ≠ 0",
            value: ab11.value(),
        });
    }
    let sum = a0 + b0;
    if sum.value().norm() <= crate::fields::EXISTENCE_TOL {
        return Err(FieldError::Existence {
            condition: "a + ā ≠ 0",
            value: sum.value(),
        });
    }
    let delta = a2 * b2 * &sum - 2.0 * a2 * b1 * b1 - 2.0 * b2 * a1 * a1;
    let (_, scale) = delta_with_scale(
        &[a0.value(), a1.value(), a2.value()],
        &[b0.value(), b1.value(), b2.value()],
    );
    check_delta(delta.value(), scale)?;

    let dd = d0 - e0;
    let big_a = b1 * (2.0 * a1 * a1 - a2 * &sum);
    let big_ab = a1 * (2.0 * b1 * b1 - b2 * &sum);
    let big_b = 2.0 * &ab11 * ab11.sqrt()?;
    let big_d = b1 * (2.0 * a1 * d1 - a2 * &dd);
    let big_db = a1 * (2.0 * b1 * e1 + b2 * &dd);
    let big_c = (d1 * &big_ab + a1 * &big_db) * a1.sqrt()?.recip()?;
    let big_cb = (e1 * &big_a + b1 * &big_d) * b1.sqrt()?.recip()?;
    let inv = delta.recip()?;
    Ok(CoefficientJets {
        alpha: &big_a * &inv,
        alpha_bar: &big_ab * &inv,
        beta: &big_b * &inv,
        gamma: &big_c * &inv,
        gamma_bar: &big_cb * &inv,
        a: a0.clone(),
        ab: b0.clone(),
        a1: a1.clone(),
        ab1: b1.clone(),
        a2: a2.clone(),
        ab2: b2.clone(),
        d: d0.clone(),
        db: e0.clone(),
        big_a,
        big_ab,
        big_b,
        big_c,
        big_cb,
        big_d,
        big_db,
        delta,
    })
}

/// The thirteen coefficient scalars at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseLegendreCoeffs {
    pub alpha: Complex64,
    pub alpha_bar: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub gamma_bar: Complex64,
    pub big_a: Complex64,
    pub big_ab: Complex64,
    pub big_b: Complex64,
    pub big_c: Complex64,
    pub big_cb: Complex64,
    pub big_d: Complex64,
    pub big_db: Complex64,
    pub delta: Complex64,
}

/// Coefficients at `(σ, σ̄)`.
pub fn coeffs(bundle: &FnBundle, sigma: Complex64, sigmab: Complex64) -> Result<InverseLegendreCoeffs, FieldError> {
    let space = JetSpace::new(&["sigma", "sigmab"], 1)?;
    let s = Jet::seed_index(&space, 0, sigma);
    let sb = Jet::seed_index(&space, 1, sigmab);
    let c = coefficient_jets(bundle, &s, &sb)?;
    Ok(InverseLegendreCoeffs {
        alpha: c.alpha.value(),
        alpha_bar: c.alpha_bar.value(),
        beta: c.beta.value(),
        gamma: c.gamma.value(),
        gamma_bar: c.gamma_bar.value(),
        big_a: c.big_a.value(),
        big_ab: c.big_ab.value(),
        big_b: c.big_b.value(),
        big_c: c.big_c.value(),
        big_cb: c.big_cb.value(),
        big_d: c.big_d.value(),
        big_db: c.big_db.value(),
        delta: c.delta.value(),
    })
}

impl InverseLegendreCoeffs {
    /// `(q, q̄)` from `(p, p̄)`: `q = ᾱp + βp̄ + γ`, `q̄ = αp̄ + βp + γ̄`.
    /// This is `q = Ω_p` for the closed `Ω`; pairing `α` with `p` instead
    /// does not invert `p = −u_q` unless `α` is real.
    pub fn q_of_p(&self, p: Complex64, pb: Complex64) -> (Complex64, Complex64) {
        (
            self.alpha_bar * p + self.beta * pb + self.gamma,
            self.alpha * pb + self.beta * p + self.gamma_bar,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransformKind {
    OneDimRhoT,
    TwoDimQP,
}

/// The two charts a transform connects.
#[derive(Debug, Clone)]
pub struct LegendrePair {
    pub forward: Chart,
    pub backward: Chart,
    pub kind: TransformKind,
}

impl LegendrePair {
    pub fn heavenly_to_rotational() -> Self {
        LegendrePair {
            forward: Chart::heavenly(),
            backward: Chart::rotational(),
            kind: TransformKind::OneDimRhoT,
        }
    }

    pub fn rotational_to_parametric() -> Self {
        LegendrePair {
            forward: Chart::rotational(),
            backward: Chart::parametric(),
            kind: TransformKind::TwoDimQP,
        }
    }
}

/// Two-dimensional transform of a field quadratic in the pair `(x, x̄)`.
/// The result lives on `target`, whose pair `(y, ȳ)` replaces `(x, x̄)` via
/// `y = −f_x`; all other coordinates are matched by name.
pub fn legendre_2d(
    field: &PotentialField,
    source_pair: (&str, &str),
    target: Chart,
    target_pair: (&str, &str),
) -> Result<PotentialField, FieldError> {
    let src = field.chart().clone();
    let xi = src.index(source_pair.0)?;
    let xbi = src.index(source_pair.1)?;
    let yi = target.index(target_pair.0)?;
    let ybi = target.index(target_pair.1)?;
    let mut route = Vec::with_capacity(src.dim());
    for (i, name) in src.coords().iter().enumerate() {
        route.push(if i == xi || i == xbi {
            None
        } else {
            let j = target.index(name)?;
            if j == yi || j == ybi {
                return Err(FieldError::InvalidSpec(format!("`{name}` appears on both sides")));
            }
            Some(j)
        });
    }
    if src.dim() != target.dim() {
        return Err(FieldError::ChartMismatch {
            expected: src.name().to_string(),
            found: target.name().to_string(),
        });
    }
    let inner = field.clone();
    let label = format!("{} transformed", field.label());
    let pair_names = format!("({}, {})", source_pair.0, source_pair.1);
    Ok(PotentialField::new(target, &label, move |y| {
        let space = y[0].space().clone();
        let at = |x: Complex64, xb: Complex64| -> Result<Jet, FieldError> {
            let args: Vec<Jet> = route
                .iter()
                .enumerate()
                .map(|(i, r)| match r {
                    Some(j) => y[*j].clone(),
                    None if i == xi => Jet::constant(&space, x),
                    None => Jet::constant(&space, xb),
                })
                .collect();
            inner.compose(&args)
        };
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let c0 = at(zero, zero)?;
        let e10 = at(one, zero)?;
        let em10 = at(-one, zero)?;
        let e01 = at(zero, one)?;
        let e0m1 = at(zero, -one)?;
        let e11 = at(one, one)?;
        let e20 = at(2.0 * one, zero)?;
        let l = (&e10 - &em10) * 0.5;
        let lb = (&e01 - &e0m1) * 0.5;
        let qa = &e10 + &em10 - 2.0 * &c0;
        let qab = &e01 + &e0m1 - 2.0 * &c0;
        let qb = &e11 - &c0 - &l - &lb - &qa * 0.5 - &qab * 0.5;
        let cubic = (&e20 - &c0 - 2.0 * &l - 2.0 * &qa).value();
        let size = c0.value().norm() + l.value().norm() + qa.value().norm() + 1.0;
        if cubic.norm() > 1e-9 * size {
            return Err(FieldError::InvalidSpec(format!(
                "field is not quadratic in {pair_names}: cubic remainder {cubic}"
            )));
        }
        let det = &qa * &qab - &qb * &qb;
        let det_scale = (qa.value() * qab.value()).norm().max(qb.value().norm_sqr());
        if det.value().norm() <= INVERTIBILITY_TOL * det_scale || det.value().norm() == 0.0 {
            return Err(FieldError::Degenerate {
                what: "quadratic block determinant",
                value: det.value(),
            });
        }
        let inv = det.recip()?;
        let p = &y[yi] + &l;
        let pb = &y[ybi] + &lb;
        let x = (-(&qab * &p) + &qb * &pb) * &inv;
        let xb = (-(&qa * &pb) + &qb * &p) * &inv;
        let args: Vec<Jet> = route
            .iter()
            .enumerate()
            .map(|(i, r)| match r {
                Some(j) => y[*j].clone(),
                None if i == xi => x.clone(),
                None => xb.clone(),
            })
            .collect();
        Ok(inner.compose(&args)? + &y[yi] * &x + &y[ybi] * &xb)
    }))
}

/// `Ω(p, σ, p̄, σ̄, ρ)` from `u(ρ, q, q̄, σ, σ̄)`.
pub fn forward_2d(u: &PotentialField) -> Result<PotentialField, FieldError> {
    u.require_chart(&Chart::rotational())?;
    legendre_2d(u, ("q", "qb"), Chart::parametric(), ("p", "pb"))
}

type TSolution = dyn Fn(&[Jet]) -> Result<Jet, FieldError> + Send + Sync;

/// How `t(ρ, …)` is obtained in the one-dimensional transform.
#[derive(Clone)]
pub enum TSolver {
    /// A closed form in the rotational coordinates.
    Closed(Arc<TSolution>),
    /// Newton iteration from `t₀ = 1`.
    Newton,
}

impl std::fmt::Debug for TSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TSolver::Closed(_) => f.write_str("Closed"),
            TSolver::Newton => f.write_str("Newton"),
        }
    }
}

/// `t = (a+ā) e^{ρ/2} / √(a′ā′)`, the closed solution for the logarithmic
/// family built on `a`.
pub fn liouville_t(bundle: &FnBundle) -> TSolver {
    let bundle = bundle.clone();
    TSolver::Closed(Arc::new(move |x: &[Jet]| {
        let a = Paired::new(&bundle, "a", &x[3], &x[4], 1)?;
        let sum = &a.f[0] + &a.fb[0];
        Ok(sum * (&x[0] * 0.5).exp() * (&a.f[1] * &a.fb[1]).sqrt()?.recip()?)
    }))
}

pub const NEWTON_MAX_STEPS: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;
const SHIFT_VAR: &str = "__h";

/// `v, v_t, v_tt, v_ttt` at `t` (a jet) with the other heavenly coordinates
/// fixed, as jets in the space of `t`.
fn t_derivatives(v: &PotentialField, t: &Jet, rest: &[Jet]) -> Result<[Jet; 4], FieldError> {
    let outer = t.space().clone();
    let mut vars: Vec<String> = outer.vars().to_vec();
    vars.push(SHIFT_VAR.to_string());
    let big = JetSpace::new(&vars, outer.order() + 3)?;
    let h = Jet::seed(&big, SHIFT_VAR, 0.0)?;
    let mut args = vec![t.embed(&big)? + &h];
    for r in rest {
        args.push(r.embed(&big)?);
    }
    let f = v.compose(&args)?;
    let mut out: [Jet; 4] = std::array::from_fn(|_| Jet::zero(&outer));
    let mut fact = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *slot = f.slice(SHIFT_VAR, k, &outer)?.scale(fact);
    }
    Ok(out)
}

/// Solves `v_tt(t) = −ρ` at the base values, Newton from `t₀ = 1` with
/// step halving when the iterate leaves the domain.
pub fn solve_t_scalar(v: &PotentialField, rho: Complex64, rest: &[Complex64]) -> Result<Complex64, FieldError> {
    let space = JetSpace::new(&["t"], 1)?;
    let consts: Vec<Jet> = rest.iter().map(|&c| Jet::constant(&space, c)).collect();
    let eval = |t: Complex64| -> Result<(Complex64, Complex64), FieldError> {
        let d = t_derivatives(v, &Jet::constant(&space, t), &consts)?;
        Ok((d[2].value() + rho, d[3].value()))
    };
    let mut t = Complex64::new(1.0, 0.0);
    let (mut f, mut fp) = eval(t)?;
    for _ in 0..NEWTON_MAX_STEPS {
        if f.norm() <= NEWTON_TOL * rho.norm().max(1.0) {
            return Ok(t);
        }
        if fp.norm() <= INVERTIBILITY_TOL * f.norm().max(1.0) {
            return Err(FieldError::Degenerate { what: "w_tt = v_ttt", value: fp });
        }
        let step = f / fp;
        let mut lambda = 1.0;
        loop {
            let trial = t - step * lambda;
            match eval(trial) {
                Ok((nf, nfp)) if trial.re > 0.0 => {
                    t = trial;
                    f = nf;
                    fp = nfp;
                    break;
                }
                _ if lambda > 1e-6 => lambda *= 0.5,
                Ok(_) => return Err(FieldError::BranchWindow(format!("Newton iterate {trial} left t > 0"))),
                Err(e) => return Err(e),
            }
        }
    }
    if f.norm() <= NEWTON_TOL * rho.norm().max(1.0) {
        Ok(t)
    } else {
        Err(FieldError::Degenerate {
            what: "Newton residual after 50 steps",
            value: f,
        })
    }
}

/// Taylor jet of `t(ρ, q, q̄, σ, σ̄)` solving `v_tt = −ρ`.
pub fn solve_t(v: &PotentialField, x: &[Jet]) -> Result<Jet, FieldError> {
    let rest: Vec<Jet> = x[1..].to_vec();
    let base: Vec<Complex64> = rest.iter().map(Jet::value).collect();
    let t0 = solve_t_scalar(v, x[0].value(), &base)?;
    let space = x[0].space().clone();
    let mut t = Jet::constant(&space, t0);
    let mut correct = 0usize;
    while correct <= space.order() {
        let d = t_derivatives(v, &t, &rest)?;
        t = &t - (&d[2] + &x[0]) * d[3].recip()?;
        correct = 2 * correct + 1;
    }
    Ok(t)
}

/// `u(ρ, q, q̄, σ, σ̄) = w − t w_t` with `w = v_t` and `t` from `solver`.
pub fn forward_1d(v: &PotentialField, solver: TSolver) -> Result<PotentialField, FieldError> {
    v.require_chart(&Chart::heavenly())?;
    let inner = v.clone();
    let label = format!("{} (ρ, t) transformed", v.label());
    Ok(PotentialField::new(Chart::rotational(), &label, move |x| {
        let t = match &solver {
            TSolver::Closed(f) => f(x)?,
            TSolver::Newton => solve_t(&inner, x)?,
        };
        let rest: Vec<Jet> = x[1..].to_vec();
        let d = t_derivatives(&inner, &t, &rest)?;
        let vttt = d[3].value();
        if vttt.norm() <= INVERTIBILITY_TOL * d[2].value().norm().max(1.0) {
            return Err(FieldError::Degenerate { what: "w_tt = v_ttt", value: vttt });
        }
        Ok(&d[1] - &t * &d[2])
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_potential, Catalog, Family, SolutionSpec, Window};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hand_values_for_exponential_profile() {
        let bundle = FnBundle::from_sources([("a", "exp(z)"), ("d", "0")]).unwrap();
        let k = coeffs(&bundle, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(k.big_a.norm() < 1e-15);
        assert!((k.big_b - c(2.0, 0.0)).norm() < 1e-15);
        assert!((k.delta - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((k.beta - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(k.big_d, c(0.0, 0.0));
        assert_eq!(k.big_c, c(0.0, 0.0));
        assert_eq!(k.gamma, c(0.0, 0.0));
    }

    #[test]
    fn singular_profile_is_rejected() {
        let bundle = FnBundle::from_sources([("a", "-1/(2*z + 3)"), ("d", "z")]).unwrap();
        assert!(matches!(
            coeffs(&bundle, c(0.1, 0.2), c(0.1, -0.2)),
            Err(FieldError::Singular { .. })
        ));
        let linear = FnBundle::from_sources([("a", "2*z + 1"), ("d", "z")]).unwrap();
        assert!(matches!(
            coeffs(&linear, c(0.1, 0.2), c(0.1, -0.2)),
            Err(FieldError::Singular { .. })
        ));
    }

    #[test]
    fn conjugated_bundle_gives_conjugated_coeffs() {
        let mut cat = Catalog::new(7);
        for _ in 0..5 {
            let bundle = cat.bundle(Family::Omega).unwrap();
            let s = c(0.2, -0.1);
            let k = coeffs(&bundle, s, s.conj()).unwrap();
            let kc = coeffs(&bundle.conjugated(), s.conj(), s).unwrap();
            assert!((kc.alpha - k.alpha.conj()).norm() < 1e-12);
            assert!((kc.gamma - k.gamma.conj()).norm() < 1e-12);
            assert!((kc.big_c - k.big_c.conj()).norm() < 1e-12);
            assert!((k.alpha_bar - k.alpha.conj()).norm() < 1e-12);
            assert!((k.gamma_bar - k.gamma.conj()).norm() < 1e-12);
            assert!(k.beta.im.abs() < 1e-12 && k.delta.im.abs() < 1e-12);
        }
    }

    #[test]
    fn substitution_matches_closed_family() {
        let mut cat = Catalog::new(9);
        let spec = cat.spec(Family::URot).unwrap();
        let u = build_potential(&spec).unwrap();
        let omega = build_potential(&SolutionSpec::new(Family::Omega, spec.bundle.clone())).unwrap();
        let sub = forward_2d(&u).unwrap();
        let window = Window::for_chart(omega.chart());
        for pt in cat.points(&omega, &window, 20).unwrap() {
            let a = omega.value(&pt).unwrap();
            let b = sub.value(&pt).unwrap();
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn momentum_roundtrip() {
        let mut cat = Catalog::new(10);
        let spec = cat.spec(Family::URot).unwrap();
        let u = build_potential(&spec).unwrap();
        let ch = Chart::rotational();
        for i in 0..10 {
            let x = i as f64 / 10.0;
            let (p, s) = (c(0.3 - x, -0.4 + 0.5 * x), c(0.1, 0.2 - 0.3 * x));
            let k = coeffs(&spec.bundle, s, s.conj()).unwrap();
            let (q, qb) = k.q_of_p(p, p.conj());
            let pt = ch
                .real_point(&[("rho", c(0.2, 0.0)), ("q", q), ("sigma", s)])
                .unwrap();
            assert!((qb - q.conj()).norm() < 1e-12);
            let j = u.jet(&pt, 1).unwrap();
            assert!((-j.d(&["q"]).unwrap() - p).norm() < 1e-10);
            assert!((-j.d(&["qb"]).unwrap() - p.conj()).norm() < 1e-10);
            let swapped = k.alpha * p + k.beta * p.conj() + k.gamma;
            let pt = ch
                .real_point(&[("rho", c(0.2, 0.0)), ("q", swapped), ("sigma", s)])
                .unwrap();
            let j = u.jet(&pt, 1).unwrap();
            assert!((-j.d(&["q"]).unwrap() - p).norm() > 1e-3);
        }
    }

    #[test]
    fn newton_agrees_with_closed_form_and_rot_family() {
        let mut cat = Catalog::new(12);
        let spec = cat.spec(Family::Zeroc).unwrap();
        let v = build_potential(&spec).unwrap();
        let closed = forward_1d(&v, liouville_t(&spec.bundle)).unwrap();
        let newton = forward_1d(&v, TSolver::Newton).unwrap();
        let mut rot_bundle = FnBundle::new();
        for role in ["a", "d", "phi0"] {
            rot_bundle.insert(role, spec.bundle.get(role).unwrap().clone());
        }
        let urot = build_potential(&SolutionSpec::new(Family::URot, rot_bundle)).unwrap();
        let window = Window::for_chart(&Chart::rotational());
        for pt in cat.points(&urot, &window, 10).unwrap() {
            let a = closed.jet(&pt, 2).unwrap();
            let b = newton.jet(&pt, 2).unwrap();
            let r = urot.jet(&pt, 2).unwrap();
            for ((x, y), z) in a.coeffs().iter().zip(b.coeffs()).zip(r.coeffs()) {
                assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
                assert!((x - z).norm() < 1e-9 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn quadratic_t_is_degenerate() {
        let v = PotentialField::new(Chart::heavenly(), "t²", |x| Ok(&x[0] * &x[0]));
        let u = forward_1d(&v, TSolver::Newton).unwrap();
        let pt = Chart::rotational()
            .real_point(&[("rho", c(0.0, 0.0)), ("q", c(0.1, 0.0)), ("sigma", c(0.0, 0.0))])
            .unwrap();
        assert!(matches!(u.value(&pt), Err(FieldError::Degenerate { .. })));
    }

    #[test]
    fn double_transform_reflects() {
        let mut cat = Catalog::new(14);
        let u = build_potential(&cat.spec(Family::URot).unwrap()).unwrap();
        let omega = forward_2d(&u).unwrap();
        let back = legendre_2d(&omega, ("p", "pb"), Chart::rotational(), ("q", "qb")).unwrap();
        let window = Window::for_chart(&Chart::rotational());
        for pt in cat.points(&u, &window, 10).unwrap() {
            let mut reflected = pt.clone();
            reflected[1] = -pt[1];
            reflected[2] = -pt[2];
            let a = u.value(&reflected).unwrap();
            let b = back.value(&pt).unwrap();
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}
