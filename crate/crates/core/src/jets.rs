//! Multivariate truncated Taylor arithmetic over complex scalars.
//!
//! A [`Jet`] stores the Taylor coefficients of a function at a base point up
//! to a fixed total degree. The coefficient of the multi-index `α` equals
//! `∂^α f / α!`, so partial derivatives of any composite expression are read
//! off exactly instead of being approximated by differences.
//!
//! Coefficients are kept densely in graded order. Every [`JetSpace`] owns a
//! precomputed multi-index table and a product table; spaces are interned, so
//! two jets built from the same variables and order share their tables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

/// Maximum number of variables in one space.
pub const MAX_VARS: usize = 8;
/// Maximum total degree of a multivariate jet.
pub const MAX_ORDER: usize = 8;
/// Maximum degree of a single-variable jet, used for the Taylor data of
/// holomorphic parameter functions.
pub const MAX_UNIVARIATE_ORDER: usize = 16;

/// Distance from the negative real axis (relative to `max(1, |w|)`) under
/// which `ln` and `sqrt` refuse their argument.
pub const BRANCH_GUARD: f64 = 1e-9;

type Exponents = [u8; MAX_VARS];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("operands live in different jet spaces")]
    SpaceMismatch,
    #[error("division by a jet whose constant term is zero")]
    DivisionByZero,
    #[error("`{func}` argument {value} is zero or within the branch-cut guard of the negative real axis")]
    BranchCut { func: &'static str, value: Complex64 },
    #[error("derivative of total degree {degree} exceeds the jet order {order}")]
    OrderOverflow { degree: usize, order: usize },
    #[error("invalid jet space: {0}")]
    InvalidSpace(String),
}

struct SpaceInner {
    vars: Vec<String>,
    order: usize,
    exps: Vec<Exponents>,
    degree: Vec<usize>,
    lookup: HashMap<Exponents, usize>,
    /// `α!` for each monomial.
    factorial: Vec<f64>,
    /// For monomial `i`, `products[prod_start[i]..prod_start[i + 1]]` lists
    /// `(j, k)` with `x^i · x^j = x^k` and `deg k ≤ order`.
    prod_start: Vec<usize>,
    products: Vec<(u32, u32)>,
}

/// Variables and truncation order shared by a family of jets.
#[derive(Clone)]
pub struct JetSpace {
    inner: Arc<SpaceInner>,
}

impl PartialEq for JetSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.order == other.inner.order && self.inner.vars == other.inner.vars)
    }
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("vars", &self.inner.vars)
            .field("order", &self.inner.order)
            .finish()
    }
}

fn space_cache() -> &'static Mutex<HashMap<(Vec<String>, usize), JetSpace>> {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<String>, usize), JetSpace>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JetSpace {
    pub fn new<S: AsRef<str>>(vars: &[S], order: usize) -> Result<Self, JetError> {
        let vars: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        if vars.is_empty() || vars.len() > MAX_VARS {
            return Err(JetError::InvalidSpace(format!(
                "expected 1..={MAX_VARS} variables, got {}",
                vars.len()
            )));
        }
        let cap = if vars.len() == 1 { MAX_UNIVARIATE_ORDER } else { MAX_ORDER };
        if order == 0 || order > cap {
            return Err(JetError::InvalidSpace(format!(
                "order must lie in 1..={cap}, got {order}"
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(JetError::InvalidSpace(format!("duplicate variable `{v}`")));
            }
        }
        let key = (vars, order);
        let mut cache = space_cache().lock().expect("jet space cache poisoned");
        if let Some(space) = cache.get(&key) {
            return Ok(space.clone());
        }
        let space = JetSpace {
            inner: Arc::new(SpaceInner::build(key.0.clone(), order)),
        };
        cache.insert(key, space.clone());
        Ok(space)
    }

    /// Same variables, different order.
    pub fn with_order(&self, order: usize) -> Result<Self, JetError> {
        JetSpace::new(&self.inner.vars, order)
    }

    pub fn vars(&self) -> &[String] {
        &self.inner.vars
    }

    pub fn order(&self) -> usize {
        self.inner.order
    }

    pub fn num_vars(&self) -> usize {
        self.inner.vars.len()
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.inner.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.exps.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, JetError> {
        self.inner
            .vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| JetError::UnknownVariable(name.to_string()))
    }

    /// Exponent vector of the monomial stored at `index`.
    pub fn exponents(&self, index: usize) -> &[u8] {
        &self.inner.exps[index][..self.num_vars()]
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.inner.degree[index]
    }

    /// Storage index of a multi-index, if it respects the order.
    pub fn index_of(&self, multi: &[u8]) -> Result<usize, JetError> {
        let n = self.num_vars();
        if multi.len() != n {
            return Err(JetError::InvalidSpace(format!(
                "multi-index has {} entries, space has {n} variables",
                multi.len()
            )));
        }
        let degree: usize = multi.iter().map(|&e| e as usize).sum();
        if degree > self.order() {
            return Err(JetError::OrderOverflow {
                degree,
                order: self.order(),
            });
        }
        let mut key = [0u8; MAX_VARS];
        key[..n].copy_from_slice(multi);
        Ok(self.inner.lookup[&key])
    }

    /// Multi-index from a list of variable names, repeated names counting
    /// multiply: `["q", "q", "t"]` is `∂²_q ∂_t`.
    pub fn multi_index(&self, names: &[&str]) -> Result<Vec<u8>, JetError> {
        let mut multi = vec![0u8; self.num_vars()];
        for name in names {
            multi[self.var_index(name)?] += 1;
        }
        Ok(multi)
    }
}

impl SpaceInner {
    fn build(vars: Vec<String>, order: usize) -> Self {
        let n = vars.len();
        let mut exps: Vec<Exponents> = Vec::new();
        let mut degree = Vec::new();
        for d in 0..=order {
            let mut current = [0u8; MAX_VARS];
            push_compositions(n, d, 0, &mut current, &mut exps);
            degree.resize(exps.len(), d);
        }
        let lookup: HashMap<Exponents, usize> =
            exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| factorial(k as usize)).product())
            .collect();

        let mut prod_start = Vec::with_capacity(exps.len() + 1);
        let mut products = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            prod_start.push(products.len());
            let room = order - degree[i];
            for (j, ej) in exps.iter().enumerate() {
                if degree[j] > room {
                    break;
                }
                let mut sum = [0u8; MAX_VARS];
                for v in 0..n {
                    sum[v] = ei[v] + ej[v];
                }
                products.push((j as u32, lookup[&sum] as u32));
            }
        }
        prod_start.push(products.len());

        SpaceInner {
            vars,
            order,
            exps,
            degree,
            lookup,
            factorial,
            prod_start,
            products,
        }
    }
}

/// All exponent vectors of `n` variables with total degree `remaining`,
/// leftmost variable varying slowest.
fn push_compositions(
    n: usize,
    remaining: usize,
    pos: usize,
    current: &mut Exponents,
    out: &mut Vec<Exponents>,
) {
    if pos + 1 == n {
        current[pos] = remaining as u8;
        out.push(*current);
        current[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k as u8;
        push_compositions(n, remaining - k, pos + 1, current, out);
    }
    current[pos] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn near_cut(w: Complex64) -> bool {
    w.norm() == 0.0 || (w.re <= 0.0 && w.im.abs() <= BRANCH_GUARD * w.norm().max(1.0))
}

/// Truncated Taylor expansion of a scalar function at a base point.
#[derive(Clone)]
pub struct Jet {
    space: JetSpace,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                map.entry(&self.space.exponents(i), c);
            }
        }
        map.finish()
    }
}

impl Jet {
    pub fn zero(space: &JetSpace) -> Self {
        Jet {
            space: space.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); space.len()],
        }
    }

    pub fn constant(space: &JetSpace, value: impl Into<Complex64>) -> Self {
        let mut jet = Jet::zero(space);
        jet.coeffs[0] = value.into();
        jet
    }

    /// The coordinate function `name`, expanded at `base`.
    pub fn seed(space: &JetSpace, name: &str, base: impl Into<Complex64>) -> Result<Self, JetError> {
        let v = space.var_index(name)?;
        Ok(Jet::seed_index(space, v, base.into()))
    }

    pub fn seed_index(space: &JetSpace, var: usize, base: Complex64) -> Self {
        let mut jet = Jet::constant(space, base);
        let mut e = vec![0u8; space.num_vars()];
        e[var] = 1;
        let idx = space.index_of(&e).expect("order >= 1");
        jet.coeffs[idx] = Complex64::new(1.0, 0.0);
        jet
    }

    /// Builds a jet from raw coefficients in the space's storage order.
    pub fn from_coeffs(space: &JetSpace, coeffs: Vec<Complex64>) -> Result<Self, JetError> {
        if coeffs.len() != space.len() {
            return Err(JetError::InvalidSpace(format!(
                "expected {} coefficients, got {}",
                space.len(),
                coeffs.len()
            )));
        }
        Ok(Jet {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coefficient(&self, multi: &[u8]) -> Result<Complex64, JetError> {
        Ok(self.coeffs[self.space.index_of(multi)?])
    }

    /// Raw partial derivative `∂^α f` at the base point.
    pub fn derivative(&self, multi: &[u8]) -> Result<Complex64, JetError> {
        let idx = self.space.index_of(multi)?;
        Ok(self.coeffs[idx] * self.space.inner.factorial[idx])
    }

    /// Partial derivative named by variables, e.g. `d(&["q", "qb"])`.
    pub fn d(&self, names: &[&str]) -> Result<Complex64, JetError> {
        self.derivative(&self.space.multi_index(names)?)
    }

    /// The jet of `∂f/∂x_var`, one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet, JetError> {
        let order = self.order();
        if order == 0 {
            return Err(JetError::OrderOverflow { degree: 1, order });
        }
        if order == 1 {
            // an order-0 space is not representable; the derivative's value
            // is kept as the constant of an order-1 jet with zero slope
            let space = self.space.clone();
            let mut e = vec![0u8; space.num_vars()];
            e[var] = 1;
            let c = self.coeffs[space.index_of(&e)?];
            return Ok(Jet::constant(&space, c));
        }
        let target = self.space.with_order(order - 1)?;
        let mut out = Jet::zero(&target);
        let n = target.num_vars();
        for (i, slot) in out.coeffs.iter_mut().enumerate() {
            let mut e = [0u8; MAX_VARS];
            e[..n].copy_from_slice(target.exponents(i));
            let k = e[var] as f64 + 1.0;
            e[var] += 1;
            *slot = self.coeffs[self.space.inner.lookup[&e]] * k;
        }
        Ok(out)
    }

    pub fn partial_by(&self, name: &str) -> Result<Jet, JetError> {
        self.partial(self.space.var_index(name)?)
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet, JetError> {
        if order > self.order() {
            return Err(JetError::OrderOverflow {
                degree: order,
                order: self.order(),
            });
        }
        if order == self.order() {
            return Ok(self.clone());
        }
        let space = self.space.with_order(order)?;
        let coeffs = self.coeffs[..space.len()].to_vec();
        Ok(Jet { space, coeffs })
    }

    /// Re-expresses the jet in a space whose variables include all of ours.
    /// Terms above the target order are dropped.
    pub fn embed(&self, target: &JetSpace) -> Result<Jet, JetError> {
        let map: Vec<usize> = self
            .space
            .vars()
            .iter()
            .map(|v| target.var_index(v))
            .collect::<Result<_, _>>()?;
        let mut out = Jet::zero(target);
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.space.degree_of(i) > target.order() {
                break;
            }
            let mut key = [0u8; MAX_VARS];
            for (v, &e) in self.space.exponents(i).iter().enumerate() {
                key[map[v]] = e;
            }
            out.coeffs[target.inner.lookup[&key]] = *c;
        }
        Ok(out)
    }

    /// The Taylor coefficient of `var^k` as a jet over the remaining
    /// variables, which must form `target` (any order up to `order − k`).
    pub fn slice(&self, var: &str, k: usize, target: &JetSpace) -> Result<Jet, JetError> {
        let vi = self.space.var_index(var)?;
        if k + target.order() > self.order() {
            return Err(JetError::OrderOverflow {
                degree: k + target.order(),
                order: self.order(),
            });
        }
        let map: Vec<usize> = target
            .vars()
            .iter()
            .map(|v| self.space.var_index(v))
            .collect::<Result<_, _>>()?;
        if map.contains(&vi) || map.len() + 1 != self.space.num_vars() {
            return Err(JetError::InvalidSpace(format!(
                "slice target must hold every variable except `{var}`"
            )));
        }
        let mut out = Jet::zero(target);
        for (i, slot) in out.coeffs.iter_mut().enumerate() {
            let mut key = [0u8; MAX_VARS];
            key[vi] = k as u8;
            for (v, &e) in target.exponents(i).iter().enumerate() {
                key[map[v]] = e;
            }
            *slot = self.coeffs[self.space.inner.lookup[&key]];
        }
        Ok(out)
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scale(&self, k: impl Into<Complex64>) -> Jet {
        let k = k.into();
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_space(&self, other: &Jet) -> Result<(), JetError> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(JetError::SpaceMismatch)
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_space(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet {
            space: self.space.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_space(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Jet {
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Cauchy product truncated at the space order.
    pub fn try_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_space(other)?;
        let inner = &self.space.inner;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == zero {
                continue;
            }
            for &(j, k) in &inner.products[inner.prod_start[i]..inner.prod_start[i + 1]] {
                out[k as usize] += a * other.coeffs[j as usize];
            }
        }
        Ok(Jet {
            space: self.space.clone(),
            coeffs: out,
        })
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_space(other)?;
        self.try_mul(&other.recip()?)
    }

    /// `Σ_k derivs[k] / k! · h^k` where `h` is the nonconstant part:
    /// composition with a scalar function whose derivatives at the constant
    /// term are `derivs`.
    pub fn compose(&self, derivs: &[Complex64]) -> Jet {
        let order = self.order();
        debug_assert!(derivs.len() > order);
        let mut h = self.clone();
        h.coeffs[0] = Complex64::new(0.0, 0.0);
        let mut acc = Jet::constant(&self.space, derivs[order] / factorial(order));
        for k in (0..order).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += derivs[k] / factorial(k);
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if a0.norm() == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let inv = a0.inv();
        let mut term = inv;
        for k in 0..=self.order() {
            derivs.push(term);
            term = term * inv * -((k + 1) as f64);
        }
        Ok(self.compose(&derivs))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if near_cut(a0) {
            return Err(JetError::BranchCut { func: "ln", value: a0 });
        }
        let mut derivs = vec![a0.ln()];
        let inv = a0.inv();
        let mut term = inv;
        for k in 1..=self.order() {
            derivs.push(term);
            term = term * inv * -(k as f64);
        }
        Ok(self.compose(&derivs))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a0 = self.value();
        if near_cut(a0) {
            return Err(JetError::BranchCut { func: "sqrt", value: a0 });
        }
        let inv = a0.inv();
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut term = a0.sqrt();
        for k in 0..=self.order() {
            derivs.push(term);
            term = term * inv * (0.5 - k as f64);
        }
        Ok(self.compose(&derivs))
    }

    /// `w^{1/2}` as `exp(½ ln w)`.
    pub fn pow_half(&self) -> Result<Jet, JetError> {
        Ok(self.ln()?.scale(0.5).exp())
    }

    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            /// Panics if the operands live in different spaces.
            fn $method(self, rhs: &Jet) -> Jet {
                self.$checked(rhs).expect("jet operands must share a space")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);

macro_rules! jet_scalar_op {
    ($scalar:ty) => {
        impl Add<$scalar> for &Jet {
            type Output = Jet;
            fn add(self, rhs: $scalar) -> Jet {
                let mut out = self.clone();
                out.coeffs[0] += Complex64::from(rhs);
                out
            }
        }
        impl Add<$scalar> for Jet {
            type Output = Jet;
            fn add(self, rhs: $scalar) -> Jet {
                &self + rhs
            }
        }
        impl Sub<$scalar> for &Jet {
            type Output = Jet;
            fn sub(self, rhs: $scalar) -> Jet {
                let mut out = self.clone();
                out.coeffs[0] -= Complex64::from(rhs);
                out
            }
        }
        impl Sub<$scalar> for Jet {
            type Output = Jet;
            fn sub(self, rhs: $scalar) -> Jet {
                &self - rhs
            }
        }
        impl Mul<$scalar> for &Jet {
            type Output = Jet;
            fn mul(self, rhs: $scalar) -> Jet {
                self.scale(rhs)
            }
        }
        impl Mul<$scalar> for Jet {
            type Output = Jet;
            fn mul(self, rhs: $scalar) -> Jet {
                self.scale(rhs)
            }
        }
        impl Mul<&Jet> for $scalar {
            type Output = Jet;
            fn mul(self, rhs: &Jet) -> Jet {
                rhs.scale(self)
            }
        }
        impl Mul<Jet> for $scalar {
            type Output = Jet;
            fn mul(self, rhs: Jet) -> Jet {
                rhs.scale(self)
            }
        }
        impl Add<&Jet> for $scalar {
            type Output = Jet;
            fn add(self, rhs: &Jet) -> Jet {
                rhs + self
            }
        }
        impl Add<Jet> for $scalar {
            type Output = Jet;
            fn add(self, rhs: Jet) -> Jet {
                &rhs + self
            }
        }
        impl Sub<&Jet> for $scalar {
            type Output = Jet;
            fn sub(self, rhs: &Jet) -> Jet {
                -rhs + self
            }
        }
        impl Sub<Jet> for $scalar {
            type Output = Jet;
            fn sub(self, rhs: Jet) -> Jet {
                -rhs + self
            }
        }
    };
}

jet_scalar_op!(f64);
jet_scalar_op!(Complex64);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs).expect("jet operands must share a space");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_space(rhs).expect("jet operands must share a space");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl MulAssign<&Jet> for Jet {
    fn mul_assign(&mut self, rhs: &Jet) {
        *self = &*self * rhs;
    }
}

/// One of the four binary arithmetic operations or negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
}

/// Dispatching form of the arithmetic operations; `Neg` ignores `b`.
pub fn arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Div => a.try_div(b),
        ArithOp::Neg => Ok(-a),
    }
}

/// Elementary functions applicable to a jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Exp,
    Ln,
    Sqrt,
    PowInt(i32),
    PowHalf,
}

pub fn elem(f: Elementary, a: &Jet) -> Result<Jet, JetError> {
    match f {
        Elementary::Exp => Ok(a.exp()),
        Elementary::Ln => a.ln(),
        Elementary::Sqrt => a.sqrt(),
        Elementary::PowInt(n) => a.powi(n),
        Elementary::PowHalf => a.pow_half(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn seeded_variable_has_unit_slope() {
        let sp = JetSpace::new(&["x", "y"], 2).unwrap();
        let x = Jet::seed(&sp, "x", 3.0).unwrap();
        assert_eq!(x.coefficient(&[0, 0]).unwrap(), c(3.0, 0.0));
        assert_eq!(x.coefficient(&[1, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(x.coefficient(&[0, 1]).unwrap(), c(0.0, 0.0));
        assert_eq!(x.coefficient(&[2, 0]).unwrap(), c(0.0, 0.0));
        let y = Jet::seed(&sp, "y", 0.0).unwrap();
        assert_eq!(y.d(&["x"]).unwrap(), c(0.0, 0.0));
        let w = Jet::seed(&sp, "x", c(1.0, 2.0)).unwrap();
        assert_eq!(w.value(), c(1.0, 2.0));
        assert!(matches!(Jet::seed(&sp, "z", 0.0), Err(JetError::UnknownVariable(_))));
    }

    #[test]
    fn square_and_mixed_partial() {
        let sp = JetSpace::new(&["x", "y"], 2).unwrap();
        let x = Jet::seed(&sp, "x", 3.0).unwrap();
        let sq = &x * &x;
        assert_eq!(sq.coefficient(&[2, 0]).unwrap(), c(1.0, 0.0));
        assert_eq!(sq.coefficient(&[1, 0]).unwrap(), c(6.0, 0.0));
        assert_eq!(sq.value(), c(9.0, 0.0));
        let y = Jet::seed(&sp, "y", -1.5).unwrap();
        assert_eq!((&x * &y).d(&["x", "y"]).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn division_by_zero_constant_fails() {
        let sp = JetSpace::new(&["x"], 3).unwrap();
        let x = Jet::seed(&sp, "x", 0.0).unwrap();
        let one = Jet::constant(&sp, 1.0);
        assert_eq!(one.try_div(&x).unwrap_err(), JetError::DivisionByZero);
        assert_eq!(
            arith(ArithOp::Div, &one, &x).unwrap_err(),
            JetError::DivisionByZero
        );
    }

    #[test]
    fn space_mismatch_is_reported() {
        let a = Jet::seed(&JetSpace::new(&["x"], 2).unwrap(), "x", 1.0).unwrap();
        let b = Jet::seed(&JetSpace::new(&["x"], 3).unwrap(), "x", 1.0).unwrap();
        assert_eq!(a.try_add(&b).unwrap_err(), JetError::SpaceMismatch);
        assert_eq!(arith(ArithOp::Mul, &a, &b).unwrap_err(), JetError::SpaceMismatch);
    }

    #[test]
    fn exp_series() {
        let sp = JetSpace::new(&["x"], 2).unwrap();
        let e = Jet::seed(&sp, "x", 0.0).unwrap().exp();
        assert!(close(e.coefficient(&[0]).unwrap(), c(1.0, 0.0), 1e-15));
        assert!(close(e.coefficient(&[1]).unwrap(), c(1.0, 0.0), 1e-15));
        assert!(close(e.coefficient(&[2]).unwrap(), c(0.5, 0.0), 1e-15));
    }

    #[test]
    fn ln_inverts_exp() {
        let sp = JetSpace::new(&["x"], 6).unwrap();
        let x = Jet::seed(&sp, "x", 0.7).unwrap();
        let back = x.exp().ln().unwrap();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn branch_cut_rejected() {
        let sp = JetSpace::new(&["x"], 2).unwrap();
        let m = Jet::constant(&sp, -1.0);
        assert!(matches!(m.sqrt(), Err(JetError::BranchCut { func: "sqrt", .. })));
        assert!(matches!(m.ln(), Err(JetError::BranchCut { func: "ln", .. })));
        assert!(Jet::constant(&sp, 0.0).ln().is_err());
        assert!(Jet::constant(&sp, c(-1.0, 1e-12)).sqrt().is_err());
        assert!(Jet::constant(&sp, c(-1.0, 1e-3)).sqrt().is_ok());
        assert!(elem(Elementary::Sqrt, &m).is_err());
    }

    #[test]
    fn derivative_read_off() {
        let sp = JetSpace::new(&["x"], 3).unwrap();
        let x = Jet::seed(&sp, "x", 2.0).unwrap();
        let cube = x.powi(3).unwrap();
        assert_eq!(cube.derivative(&[2]).unwrap(), c(12.0, 0.0));
        let sp2 = JetSpace::new(&["x"], 2).unwrap();
        let y = Jet::seed(&sp2, "x", 2.0).unwrap();
        assert!(matches!(
            y.derivative(&[3]),
            Err(JetError::OrderOverflow { degree: 3, order: 2 })
        ));
    }

    #[test]
    fn exp_derivative_matches_central_difference() {
        let sp = JetSpace::new(&["x"], 2).unwrap();
        let d = Jet::seed(&sp, "x", 1.0).unwrap().exp().d(&["x"]).unwrap();
        let h = 1e-5;
        let fd = ((1.0f64 + h).exp() - (1.0f64 - h).exp()) / (2.0 * h);
        assert!((d.re - fd).abs() / fd < 1e-8);
        assert!((d.re - std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn partial_lowers_order() {
        let sp = JetSpace::new(&["x", "y"], 4).unwrap();
        let x = Jet::seed(&sp, "x", 0.5).unwrap();
        let y = Jet::seed(&sp, "y", c(0.2, 0.1)).unwrap();
        let f = (&x * &y).exp() + x.powi(3).unwrap();
        let fx = f.partial_by("x").unwrap();
        assert_eq!(fx.order(), 3);
        let direct = f.d(&["x", "x", "y"]).unwrap();
        let via = fx.d(&["x", "y"]).unwrap();
        assert!(close(direct, via, 1e-13));
    }

    #[test]
    fn negative_powers_and_half_powers() {
        let sp = JetSpace::new(&["x"], 4).unwrap();
        let x = Jet::seed(&sp, "x", c(1.3, 0.4)).unwrap();
        let a = x.powi(-2).unwrap() * x.powi(2).unwrap();
        assert!(close(a.value(), c(1.0, 0.0), 1e-14));
        assert!(a.coeffs()[1..].iter().all(|z| z.norm() < 1e-13));
        let h = x.pow_half().unwrap();
        let s = x.sqrt().unwrap();
        for (p, q) in h.coeffs().iter().zip(s.coeffs()) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn invalid_spaces() {
        assert!(JetSpace::new(&["x", "x"], 2).is_err());
        assert!(JetSpace::new(&["x"], 0).is_err());
        assert!(JetSpace::new(&["x", "y"], 9).is_err());
        assert!(JetSpace::new(&["x"], 16).is_ok());
        assert!(JetSpace::new(&["x"], 17).is_err());
        let none: [&str; 0] = [];
        assert!(JetSpace::new(&none, 2).is_err());
    }

    #[test]
    fn embed_and_slice_roundtrip() {
        let small = JetSpace::new(&["x", "y"], 3).unwrap();
        let big = JetSpace::new(&["h", "x", "y"], 5).unwrap();
        let x = Jet::seed(&small, "x", c(0.2, 0.1)).unwrap();
        let y = Jet::seed(&small, "y", c(-0.4, 0.3)).unwrap();
        let f = (&x * &y).exp();
        let back = f.embed(&big).unwrap().slice("h", 0, &small).unwrap();
        for (p, q) in back.coeffs().iter().zip(f.coeffs()) {
            assert_eq!(p, q);
        }
        // g(h, x, y) = (x + h)^3: coefficient of h^2 is 3(x).
        let xb = Jet::seed(&big, "x", c(0.2, 0.1)).unwrap();
        let hb = Jet::seed(&big, "h", 0.0).unwrap();
        let g = (&xb + &hb).powi(3).unwrap();
        let c2 = g.slice("h", 2, &small).unwrap();
        let expect = x.scale(3.0);
        for (p, q) in c2.coeffs().iter().zip(expect.coeffs()) {
            assert!((p - q).norm() < 1e-14);
        }
        assert!(g.slice("h", 3, &small).is_err());
        assert!(g.slice("h", 3, &small.with_order(2).unwrap()).is_ok());
    }
}
