//! Kähler geometry of a potential: metric, curvature in complex coordinates
//! and in the null coframe, chirality, closed-form curvature scalars,
//! singular loci and the metric written through the Legendre-dual potential.
//!
//! Four-dimensional tensors use the coordinate order `(x¹, x², x̄¹, x̄²)` and
//! `ds² = 2 g_{ij̄} dxⁱ dx̄ʲ = G_AB dx^A dx^B`, so `G_{i,2+j} = g_{ij̄}`. The
//! Riemann tensor follows `R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}`
//! and the curvature two-forms are `R^a_b = ½ R^a_{bcd} e^c ∧ e^d`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::fields::{FieldError, PotentialField};
use crate::holofunc::FnBundle;
use crate::jets::Jet;
use crate::legendre::{check_delta, delta_with_scale};

/// `ε_{1234}` in the null coframe. With this sign `e¹∧e² − e³∧e⁴`,
/// `e¹∧e⁴` and `e²∧e³` span the anti-self-dual two-forms.
pub const ORIENTATION: f64 = -1.0;

/// Jet order needed for curvature values.
pub const CURVATURE_ORDER: usize = 4;

type C = Complex64;
type Quad<T> = [[[[T; 2]; 2]; 2]; 2];
type Tensor4 = [[[[C; 4]; 4]; 4]; 4];

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Names of the holomorphic and antiholomorphic coordinates the metric is
/// built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KahlerCoords {
    pub holo: [&'static str; 2],
    pub anti: [&'static str; 2],
}

impl KahlerCoords {
    pub const PARAMETRIC: KahlerCoords = KahlerCoords {
        holo: ["p", "sigma"],
        anti: ["pb", "sigmab"],
    };
    pub const MONGE_AMPERE: KahlerCoords = KahlerCoords {
        holo: ["z1", "z2"],
        anti: ["z1b", "z2b"],
    };

    fn for_field(field: &PotentialField) -> Result<Self, FieldError> {
        for c in [KahlerCoords::PARAMETRIC, KahlerCoords::MONGE_AMPERE] {
            if c.holo.iter().chain(&c.anti).all(|n| field.chart().index(n).is_ok()) {
                return Ok(c);
            }
        }
        Err(FieldError::ChartMismatch {
            expected: "a chart holding (p, σ, p̄, σ̄) or (z¹, z², z̄¹, z̄²)".into(),
            found: field.chart().name().to_string(),
        })
    }
}

/// `g_{ij̄}` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KahlerMetric {
    pub g: [[C; 2]; 2],
    pub det: C,
}

impl KahlerMetric {
    pub fn hermiticity_defect(&self) -> f64 {
        let g = &self.g;
        (g[0][0].im.abs())
            .max(g[1][1].im.abs())
            .max((g[0][1] - g[1][0].conj()).norm())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.g[0][0].re;
        let d = self.g[1][1].re;
        let b = (self.g[0][1] + self.g[1][0].conj()) * 0.5;
        let mean = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.eigenvalues()[0] > 0.0
    }

    /// The symmetric 4×4 tensor `G_AB`.
    pub fn full(&self) -> [[C; 4]; 4] {
        let mut m = [[zero(); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][2 + j] = self.g[i][j];
                m[2 + j][i] = self.g[i][j];
            }
        }
        m
    }
}

struct MetricJets {
    /// `g_{kl̄}`, order `n − 2`.
    g: [[Jet; 2]; 2],
    /// `∂_i g_{kl̄}`, order `n − 3`.
    dg: [[[Jet; 2]; 2]; 2],
    /// `∂_j̄ g_{kl̄}`.
    dbg: [[[Jet; 2]; 2]; 2],
    /// `∂_i ∂_j̄ g_{kl̄}`, order `n − 4`.
    ddg: Quad<Jet>,
}

fn tr(j: &Jet, order: usize) -> Jet {
    j.truncate(order).expect("truncation to a lower order")
}

impl MetricJets {
    fn new(field: &PotentialField, point: &[C], order: usize) -> Result<Self, FieldError> {
        let k = KahlerCoords::for_field(field)?;
        let f = field.jet(point, order)?;
        let d = |j: &Jet, n: &str| -> Result<Jet, FieldError> { Ok(j.partial_by(n)?) };
        let gk = |a: usize, b: usize| -> Result<Jet, FieldError> { d(&d(&f, k.holo[a])?, k.anti[b]) };
        let g = [[gk(0, 0)?, gk(0, 1)?], [gk(1, 0)?, gk(1, 1)?]];
        let mut dg: [[[Jet; 2]; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| g[0][0].clone())));
        let mut dbg = dg.clone();
        let mut ddg: Quad<Jet> = std::array::from_fn(|_| dg.clone());
        for i in 0..2 {
            for kk in 0..2 {
                for l in 0..2 {
                    dg[i][kk][l] = d(&g[kk][l], k.holo[i])?;
                    dbg[i][kk][l] = d(&g[kk][l], k.anti[i])?;
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for kk in 0..2 {
                    for l in 0..2 {
                        ddg[i][j][kk][l] = d(&dg[i][kk][l], k.anti[j])?;
                    }
                }
            }
        }
        Ok(MetricJets { g, dg, dbg, ddg })
    }

    fn det(&self) -> Jet {
        &self.g[0][0] * &self.g[1][1] - &self.g[0][1] * &self.g[1][0]
    }

    /// `(g⁻¹)[n][m]` with `Σ_n g_{kn̄} (g⁻¹)[n][m] = δ_km`.
    fn inverse(&self) -> Result<[[Jet; 2]; 2], FieldError> {
        let inv = self.det().recip()?;
        let g = &self.g;
        Ok([
            [&g[1][1] * &inv, -(&g[0][1] * &inv)],
            [-(&g[1][0] * &inv), &g[0][0] * &inv],
        ])
    }

    /// `K_{ij̄kl̄} = −∂_i∂_j̄ g_{kl̄} + g^{n̄m} (∂_i g_{kn̄})(∂_j̄ g_{ml̄})`.
    fn riemann(&self) -> Result<Quad<Jet>, FieldError> {
        let m = self.ddg[0][0][0][0].order();
        let inv = self.inverse()?;
        let mut out = self.ddg.clone();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let mut acc = -&tr(&self.ddg[i][j][k][l], m);
                        for n in 0..2 {
                            for mm in 0..2 {
                                acc += &(tr(&inv[n][mm], m)
                                    * tr(&self.dg[i][k][n], m)
                                    * tr(&self.dbg[j][mm][l], m));
                            }
                        }
                        out[i][j][k][l] = acc;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `R_{ij̄} = −∂_i∂_j̄ ln det g`.
    fn ricci(&self) -> Result<[[Jet; 2]; 2], FieldError> {
        let ln = self.det().ln()?;
        let mut out: [[Jet; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| ln.clone()));
        for (i, row) in out.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = -ln.partial(self.holo_index(i))?.partial(self.anti_index(j))?;
            }
        }
        Ok(out)
    }

    fn holo_index(&self, i: usize) -> usize {
        self.index_of(i, true)
    }

    fn anti_index(&self, j: usize) -> usize {
        self.index_of(j, false)
    }

    fn index_of(&self, i: usize, holo: bool) -> usize {
        let space = self.g[0][0].space();
        let k = if space.var_index("p").is_ok() {
            KahlerCoords::PARAMETRIC
        } else {
            KahlerCoords::MONGE_AMPERE
        };
        let name = if holo { k.holo[i] } else { k.anti[i] };
        space.var_index(name).expect("metric coordinate present")
    }
}

fn values2(j: &[[Jet; 2]; 2]) -> [[C; 2]; 2] {
    [[j[0][0].value(), j[0][1].value()], [j[1][0].value(), j[1][1].value()]]
}

fn values4(j: &Quad<Jet>) -> Quad<C> {
    let mut out = [[[[zero(); 2]; 2]; 2]; 2];
    for i in 0..2 {
        for a in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[i][a][k][l] = j[i][a][k][l].value();
                }
            }
        }
    }
    out
}

/// `g_{ij̄}` at `point`.
pub fn metric(field: &PotentialField, point: &[C]) -> Result<KahlerMetric, FieldError> {
    let m = MetricJets::new(field, point, 2)?;
    Ok(KahlerMetric {
        g: values2(&m.g),
        det: m.det().value(),
    })
}

/// Anti-self-dual and self-dual norms of a set of two-forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chirality {
    pub self_dual: f64,
    pub anti_self_dual: f64,
}

impl Chirality {
    /// `‖SD‖ / ‖ASD‖`.
    pub fn ratio(&self) -> f64 {
        self.self_dual / self.anti_self_dual
    }
}

/// The frame two-form `R¹₁` decomposed against `e¹∧e² − e³∧e⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct R11Projection {
    pub coefficient: C,
    /// Norm of what is left after removing the `e¹∧e² − e³∧e⁴` part.
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub ricci: [[C; 2]; 2],
    /// `K_{ij̄kl̄}`.
    pub riemann: Quad<C>,
    /// `R^a_{bcd}` in the null coframe (indices 0..4 for e¹…e⁴).
    pub frame: Tensor4,
    pub chirality: Chirality,
    pub r11: R11Projection,
    /// Coefficients of `R¹₃` on `e²∧e³` and `e¹∧e⁴`.
    pub r13: [C; 2],
}

impl CurvatureReport {
    /// Largest deviation from `K_{ij̄kl̄} = K_{kj̄il̄} = K_{il̄kj̄}`.
    pub fn kahler_symmetry_defect(&self) -> f64 {
        let k = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for l in 0..2 {
                        worst = worst
                            .max((k[i][j][a][l] - k[a][j][i][l]).norm())
                            .max((k[i][j][a][l] - k[i][l][a][j]).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn max_ricci(&self) -> f64 {
        self.ricci.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Frame two-form `R^a_b` as an antisymmetric 4×4 matrix of coefficients.
    pub fn two_form(&self, a: usize, b: usize) -> [[C; 4]; 4] {
        self.frame[a][b]
    }
}

/// The all-lower four-dimensional tensor `R_ABCD` from the Kähler components.
pub fn lower_riemann(k: &Quad<C>) -> Tensor4 {
    let mut r = [[[[zero(); 4]; 4]; 4]; 4];
    // R_{m̄ j i l̄} = K_{i l̄ j m̄}, then the antisymmetries in each pair.
    for m in 0..2 {
        for j in 0..2 {
            for i in 0..2 {
                for l in 0..2 {
                    let v = k[i][l][j][m];
                    let (mb, lb) = (2 + m, 2 + l);
                    r[mb][j][i][lb] = v;
                    r[j][mb][i][lb] = -v;
                    r[mb][j][lb][i] = -v;
                    r[j][mb][lb][i] = v;
                }
            }
        }
    }
    r
}

fn inverse4(m: &[[C; 4]; 4]) -> Result<[[C; 4]; 4], FieldError> {
    let mat = Matrix4::from_fn(|i, j| m[i][j]);
    let inv = mat.try_inverse().ok_or(FieldError::Degenerate {
        what: "metric determinant",
        value: zero(),
    })?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

/// Null coframe `e^a = E^a_A dx^A`:
/// `e¹ = dx¹ + (g_{2 1̄}/g_{1 1̄}) dx²`, `e² = g_{1 1̄} dx̄¹ + g_{1 2̄} dx̄²`,
/// `e³ = (det g / g_{1 1̄}) dx²`, `e⁴ = dx̄²`. On solutions `det g = e^{ρ/2}`.
pub fn coframe(g: &KahlerMetric) -> [[C; 4]; 4] {
    let m = &g.g;
    [
        [C::new(1.0, 0.0), m[1][0] / m[0][0], zero(), zero()],
        [zero(), zero(), m[0][0], m[0][1]],
        [zero(), g.det / m[0][0], zero(), zero()],
        [zero(), zero(), zero(), C::new(1.0, 0.0)],
    ]
}

/// `η_ab` with `ds² = 2(e¹e² + e³e⁴)`.
pub fn frame_metric() -> [[C; 4]; 4] {
    let mut eta = [[zero(); 4]; 4];
    for (a, b) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        eta[a][b] = C::new(1.0, 0.0);
    }
    eta
}

fn levi_civita(idx: [usize; 4]) -> f64 {
    let mut sign = 1.0;
    let mut v = idx;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if v[i] == v[j] {
                return 0.0;
            }
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    v.sort_unstable();
    sign
}

/// Hodge dual of a frame two-form given as an antisymmetric matrix.
pub fn hodge(f: &[[C; 4]; 4]) -> [[C; 4]; 4] {
    let eta = frame_metric();
    let mut up = [[zero(); 4]; 4];
    for c in 0..4 {
        for d in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    up[c][d] += eta[c][a] * eta[d][b] * f[a][b];
                }
            }
        }
    }
    let mut out = [[zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let e = levi_civita([a, b, c, d]);
                    if e != 0.0 {
                        out[a][b] += up[c][d] * (0.5 * e * ORIENTATION);
                    }
                }
            }
        }
    }
    out
}

/// The unit two-form `e^a ∧ e^b` as an antisymmetric matrix.
pub fn wedge(a: usize, b: usize) -> [[C; 4]; 4] {
    let mut f = [[zero(); 4]; 4];
    f[a][b] = C::new(1.0, 0.0);
    f[b][a] = C::new(-1.0, 0.0);
    f
}

pub fn form_norm(f: &[[C; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            s += f[a][b].norm_sqr();
        }
    }
    s.sqrt()
}

/// Self-dual and anti-self-dual norms of `f`.
pub fn chirality_of(f: &[[C; 4]; 4]) -> Chirality {
    let star = hodge(f);
    let mut sd = [[zero(); 4]; 4];
    let mut asd = [[zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            sd[a][b] = (f[a][b] + star[a][b]) * 0.5;
            asd[a][b] = (f[a][b] - star[a][b]) * 0.5;
        }
    }
    Chirality {
        self_dual: form_norm(&sd),
        anti_self_dual: form_norm(&asd),
    }
}

/// Curvature report at `point`.
pub fn curvature(field: &PotentialField, point: &[C]) -> Result<CurvatureReport, FieldError> {
    let mj = MetricJets::new(field, point, CURVATURE_ORDER)?;
    let km = KahlerMetric {
        g: values2(&mj.g),
        det: mj.det().value(),
    };
    let riemann = values4(&mj.riemann()?);
    let ricci = values2(&mj.ricci()?);
    let frame = frame_riemann(&km, &riemann)?;

    let mut sd = 0.0;
    let mut asd = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let c = chirality_of(&frame[a][b]);
            sd += c.self_dual * c.self_dual;
            asd += c.anti_self_dual * c.anti_self_dual;
        }
    }
    let r11 = &frame[0][0];
    let coefficient = (r11[0][1] - r11[2][3]) * 0.5;
    let mut rest = *r11;
    for (a, b, s) in [(0, 1, 1.0), (2, 3, -1.0)] {
        rest[a][b] -= coefficient * s;
        rest[b][a] += coefficient * s;
    }
    Ok(CurvatureReport {
        ricci,
        riemann,
        r13: [frame[0][2][1][2], frame[0][2][0][3]],
        frame,
        chirality: Chirality {
            self_dual: sd.sqrt(),
            anti_self_dual: asd.sqrt(),
        },
        r11: R11Projection {
            coefficient,
            remainder: form_norm(&rest),
        },
    })
}

/// `R^A_{BCD}` in coordinates.
pub fn coordinate_riemann(g: &KahlerMetric, k: &Quad<C>) -> Result<Tensor4, FieldError> {
    let lower = lower_riemann(k);
    let ginv = inverse4(&g.full())?;
    let mut up = [[[[zero(); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    for e in 0..4 {
                        up[a][b][c][d] += ginv[a][e] * lower[e][b][c][d];
                    }
                }
            }
        }
    }
    Ok(up)
}

fn frame_riemann(g: &KahlerMetric, k: &Quad<C>) -> Result<Tensor4, FieldError> {
    let up = coordinate_riemann(g, k)?;
    let e = coframe(g);
    let einv = inverse4(&e)?;
    // Contract one index at a time.
    let mut t1 = [[[[zero(); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for bb in 0..4 {
            for cc in 0..4 {
                for dd in 0..4 {
                    for aa in 0..4 {
                        t1[a][bb][cc][dd] += e[a][aa] * up[aa][bb][cc][dd];
                    }
                }
            }
        }
    }
    let mut t2 = [[[[zero(); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                for dd in 0..4 {
                    for bb in 0..4 {
                        t2[a][b][cc][dd] += t1[a][bb][cc][dd] * einv[bb][b];
                    }
                }
            }
        }
    }
    let mut t3 = [[[[zero(); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for dd in 0..4 {
                    for cc in 0..4 {
                        t3[a][b][c][dd] += t2[a][b][cc][dd] * einv[cc][c];
                    }
                }
            }
        }
    }
    let mut out = [[[[zero(); 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    for dd in 0..4 {
                        out[a][b][c][d] += t3[a][b][c][dd] * einv[dd][d];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Scalar Taylor data `a, a′, …, a⁗` and the conjugate profile at `σ̄`.
struct Profile {
    a: Vec<C>,
    ab: Vec<C>,
}

impl Profile {
    fn new(bundle: &FnBundle, sigma: C, sigmab: C) -> Result<Self, FieldError> {
        let f = bundle.get("a")?;
        Ok(Profile {
            a: f.derivatives(sigma, 4)?,
            ab: f.conjugate().derivatives(sigmab, 4)?,
        })
    }

    fn delta(&self) -> Result<C, FieldError> {
        let (delta, scale) = delta_with_scale(
            &[self.a[0], self.a[1], self.a[2]],
            &[self.ab[0], self.ab[1], self.ab[2]],
        );
        check_delta(delta, scale)?;
        Ok(delta)
    }

    fn existence(&self) -> Result<(), FieldError> {
        let v = self.a[1] * self.ab[1];
        if v.norm() <= crate::fields::EXISTENCE_TOL {
            return Err(FieldError::Existence {
                condition: "a′·ā′ ≠ 0",
                value: v,
            });
        }
        Ok(())
    }

    /// `(2a‴a′ − 3a″²)(2ā‴ā′ − 3ā″²)`.
    fn schwarzian_product(&self) -> C {
        let s = |f: &[C]| 2.0 * f[3] * f[1] - 3.0 * f[2] * f[2];
        s(&self.a) * s(&self.ab)
    }
}

/// `2e^{−ρ/2} (a′ā′)^{5/2} / Δ³ · (2a‴a′ − 3a″²)(2ā‴ā′ − 3ā″²)`.
pub fn closed_form_r11(bundle: &FnBundle, sigma: C, sigmab: C, rho: f64) -> Result<C, FieldError> {
    let p = Profile::new(bundle, sigma, sigmab)?;
    p.existence()?;
    let delta = p.delta()?;
    let aa = p.a[1] * p.ab[1];
    Ok(2.0 * (-rho / 2.0).exp() * aa * aa * aa.sqrt() / (delta * delta * delta) * p.schwarzian_product())
}

/// Coefficients of `R¹₃` on `e²∧e³` and `e¹∧e⁴` as printed.
pub fn closed_form_r13(bundle: &FnBundle, sigma: C, sigmab: C, rho: f64) -> Result<[C; 2], FieldError> {
    let p = Profile::new(bundle, sigma, sigmab)?;
    p.existence()?;
    let delta = p.delta()?;
    let (a, b) = (&p.a, &p.ab);
    let d3 = delta * delta * delta;
    let e23 = b[1] * b[1] * b[1] * (-rho).exp() / (a[1].sqrt() * d3)
        * (a[2] * (4.0 * a[3] * a[1] - 3.0 * a[2] * a[2]) * (5.0 * delta + 18.0 * a[1] * a[1] * b[2])
            - 12.0 * a[1] * a[1] * a[3] * a[3] * ((a[0] + b[0]) * b[2] - 2.0 * b[1] * b[1])
            + 4.0 * a[1] * a[1] * a[4] * delta);
    let e14 = -2.0 * (-rho / 2.0).exp() * a[1] * a[1] * b[1].sqrt() / d3 * p.schwarzian_product();
    Ok([e23, e14])
}

/// Largest `|∂_p K|`, `|∂_p̄ K|` over the coordinate components `K_{ij̄kl̄}`.
/// These move with `p` because the metric does.
pub fn coordinate_p_derivative(field: &PotentialField, points: &[Vec<C>]) -> Result<f64, FieldError> {
    let mut worst: f64 = 0.0;
    for point in points {
        let mj = MetricJets::new(field, point, CURVATURE_ORDER + 1)?;
        let k = mj.riemann()?;
        let (ip, ipb) = (mj.holo_index(0), mj.anti_index(0));
        for c in k.iter().flatten().flatten().flatten() {
            worst = worst
                .max(c.partial(ip)?.value().norm())
                .max(c.partial(ipb)?.value().norm());
        }
    }
    Ok(worst)
}

/// Shifts of `p` used by [`p_independence`].
pub const P_SHIFTS: [C; 3] = [C::new(0.3, -0.2), C::new(-0.5, 0.1), C::new(0.15, 0.4)];

/// Largest change of the frame components `R^a_{bcd}` when `p` moves with
/// `σ, ρ` held fixed, relative to their size at the base point.
pub fn p_independence(field: &PotentialField, points: &[Vec<C>]) -> Result<f64, FieldError> {
    let chart = field.chart();
    let (ip, ipb) = (chart.index("p")?, chart.index("pb")?);
    let flat = |r: &CurvatureReport| -> Vec<C> { r.frame.iter().flatten().flatten().flatten().copied().collect() };
    let mut worst: f64 = 0.0;
    for point in points {
        let base = flat(&curvature(field, point)?);
        let scale = base.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        for dp in P_SHIFTS {
            let mut moved = point.clone();
            moved[ip] += dp;
            moved[ipb] = moved[ip].conj();
            let other = flat(&curvature(field, &moved)?);
            for (x, y) in base.iter().zip(&other) {
                worst = worst.max((x - y).norm() / scale);
            }
        }
    }
    Ok(worst)
}

/// Grid over the real slice `σ = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn nodes(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|k| self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScanVerdict {
    SingularFamily,
    Regular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanNode {
    pub sigma: C,
    pub delta: C,
    /// `a‴ − 3a″²/(2a′)`.
    pub flatness: C,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityScan {
    pub nodes: Vec<ScanNode>,
    pub max_abs_delta: f64,
    pub min_abs_delta: f64,
    pub max_abs_flatness: f64,
    pub verdict: ScanVerdict,
}

/// Relative size under which Δ counts as zero in scans.
pub const SCAN_TOL: f64 = 1e-10;

/// Evaluates Δ and the flatness residual on a square grid of `σ`.
pub fn singularity_scan(bundle: &FnBundle, grid: Grid) -> Result<SingularityScan, FieldError> {
    let f = bundle.get("a")?;
    let fb = f.conjugate();
    let mut nodes = Vec::new();
    for x in grid.nodes() {
        for y in grid.nodes() {
            let sigma = C::new(x, y);
            let a = f.derivatives(sigma, 3)?;
            let ab = fb.derivatives(sigma.conj(), 3)?;
            let (delta, scale) = delta_with_scale(&[a[0], a[1], a[2]], &[ab[0], ab[1], ab[2]]);
            let flatness = a[3] - 3.0 * a[2] * a[2] / (2.0 * a[1]);
            nodes.push(ScanNode {
                sigma,
                delta,
                flatness,
                singular: delta.norm() <= SCAN_TOL * scale.max(1.0),
            });
        }
    }
    let abs: Vec<f64> = nodes.iter().map(|n| n.delta.norm()).collect();
    let verdict = if nodes.iter().all(|n| n.singular) {
        ScanVerdict::SingularFamily
    } else {
        ScanVerdict::Regular
    };
    Ok(SingularityScan {
        max_abs_delta: abs.iter().cloned().fold(0.0, f64::max),
        min_abs_delta: abs.iter().cloned().fold(f64::INFINITY, f64::min),
        max_abs_flatness: nodes.iter().map(|n| n.flatness.norm()).fold(0.0, f64::max),
        nodes,
        verdict,
    })
}

/// The metric written through a potential `u(q, q̄, z, z̄)` of the dual
/// equation, as the ten printed coefficients and as `G_AB` in the order
/// `(q, z, q̄, z̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LegendreMetric {
    pub delta_minus: C,
    pub delta_plus: C,
    pub tensor: [[C; 4]; 4],
}

/// Coordinate names `(q, z, q̄, z̄)` of a dual potential.
pub const DUAL_COORDS: [&str; 4] = ["q", "sigma", "qb", "sigmab"];

pub fn legendre_metric(u: &PotentialField, point: &[C]) -> Result<LegendreMetric, FieldError> {
    let j = u.jet(point, 2)?;
    let [q, z, qb, zb] = DUAL_COORDS;
    let d = |a: &str, b: &str| -> Result<C, FieldError> { Ok(j.d(&[a, b])?) };
    let (uqq, uqbqb, uqqb) = (d(q, q)?, d(qb, qb)?, d(q, qb)?);
    let (uqbz, uqzb, uzzb) = (d(qb, z)?, d(q, zb)?, d(z, zb)?);
    let dm = uqq * uqbqb - uqqb * uqqb;
    let dp = uqq * uqbqb + uqqb * uqqb;
    if dm.norm() <= crate::legendre::INVERTIBILITY_TOL * dp.norm() || dm.norm() == 0.0 {
        return Err(FieldError::Degenerate { what: "Δ₋", value: dm });
    }
    let k = 2.0 / dm;
    // Indices: 0 = q, 1 = z, 2 = q̄, 3 = z̄.
    let mut t = [[zero(); 4]; 4];
    let mut set = |a: usize, b: usize, coeff: C| {
        if a == b {
            t[a][a] += coeff * k;
        } else {
            t[a][b] += coeff * k * 0.5;
            t[b][a] += coeff * k * 0.5;
        }
    };
    set(0, 0, uqqb * uqqb * uqq);
    set(2, 2, uqqb * uqqb * uqbqb);
    set(0, 2, dp * uqqb);
    set(1, 1, uqq * uqbz * uqbz);
    set(3, 3, uqbqb * uqzb * uqzb);
    set(1, 3, dm * uzzb + 2.0 * uqqb * uqzb * uqbz);
    set(0, 1, 2.0 * uqqb * uqq * uqbz);
    set(2, 3, 2.0 * uqqb * uqbqb * uqzb);
    set(0, 3, dp * uqzb);
    set(2, 1, dp * uqbz);
    Ok(LegendreMetric {
        delta_minus: dm,
        delta_plus: dp,
        tensor: t,
    })
}

/// `G_AB` of `omega` at `p = −u_q`, pulled back to `(q, z, q̄, z̄)`.
/// `u` lives on the rotational chart and `omega` on the parametric one.
pub fn pullback_metric(omega: &PotentialField, u: &PotentialField, point: &[C]) -> Result<[[C; 4]; 4], FieldError> {
    let j = u.jet(point, 2)?;
    let [q, z, qb, zb] = DUAL_COORDS;
    let d1 = |a: &str| -> Result<C, FieldError> { Ok(j.d(&[a])?) };
    let d2 = |a: &str, b: &str| -> Result<C, FieldError> { Ok(j.d(&[a, b])?) };
    let rho = point[u.chart().index("rho")?];
    let p = -d1(q)?;
    let pb = -d1(qb)?;
    let sigma = point[u.chart().index(z)?];
    let sigmab = point[u.chart().index(zb)?];
    let opoint = omega
        .chart()
        .coords()
        .iter()
        .map(|n| match n.as_str() {
            "p" => Ok(p),
            "pb" => Ok(pb),
            "sigma" => Ok(sigma),
            "sigmab" => Ok(sigmab),
            "rho" => Ok(rho),
            other => Err(FieldError::InvalidSpec(format!("unexpected coordinate `{other}`"))),
        })
        .collect::<Result<Vec<C>, _>>()?;
    let g = metric(omega, &opoint)?.full();
    let one = C::new(1.0, 0.0);
    let jac = [
        [-d2(q, q)?, -d2(q, z)?, -d2(q, qb)?, -d2(q, zb)?],
        [zero(), one, zero(), zero()],
        [-d2(qb, q)?, -d2(qb, z)?, -d2(qb, qb)?, -d2(qb, zb)?],
        [zero(), zero(), zero(), one],
    ];
    let mut out = [[zero(); 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    out[a][b] += jac[c][a] * g[c][d] * jac[d][b];
                }
            }
        }
    }
    Ok(out)
}
