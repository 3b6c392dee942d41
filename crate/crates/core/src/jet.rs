//! Truncated multivariate Taylor polynomials ("jets") with complex coefficients.
//!
//! A jet of order `K` in `n` variables carries every Taylor coefficient
//! `f_α = ∂^α f / α!` with `|α| ≤ K`. Arithmetic and the elementary functions
//! propagate these coefficients exactly, so partial derivatives of any
//! composite expression are available to machine precision. Taking a partial
//! derivative lowers the order by one; once the order reaches zero no further
//! derivatives exist.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use smallvec::SmallVec;

/// Largest number of independent variables (chart dimension).
pub const MAX_VARS: usize = 4;
/// Largest supported jet order.
pub const MAX_ORDER: usize = 6;

type Exps = [u8; MAX_VARS];

/// Monomial bookkeeping shared by every jet with the same `(nvars, order)`.
pub struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<Exps>,
    /// `(i, j, k)`: monomial `i` times monomial `j` is monomial `k`.
    mul: Vec<(u16, u16, u16)>,
    /// For each variable and each monomial of the `order - 1` layout, the
    /// source monomial in this layout and the factor `α_v + 1`.
    deriv: Vec<Vec<(u16, f64)>>,
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Layout(n={}, K={})", self.nvars, self.order)
    }
}

fn degree(e: &Exps) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

fn enumerate(nvars: usize, order: usize) -> Vec<Exps> {
    let mut out = Vec::new();
    for d in 0..=order {
        let mut cur = [0u8; MAX_VARS];
        fill(nvars, 0, d, &mut cur, &mut out);
    }
    out
}

fn fill(nvars: usize, var: usize, remaining: usize, cur: &mut Exps, out: &mut Vec<Exps>) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(*cur);
        }
        return;
    }
    if var + 1 == nvars {
        cur[var] = remaining as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        fill(nvars, var + 1, remaining - k, cur, out);
    }
    cur[var] = 0;
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let exps = enumerate(nvars, order);
        let index: HashMap<Exps, usize> = exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let mut c = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    c[v] = a[v] + b[v];
                }
                mul.push((i as u16, j as u16, index[&c] as u16));
            }
        }
        let mut deriv = Vec::new();
        if order > 0 {
            let lower = enumerate(nvars, order - 1);
            for v in 0..nvars {
                let row = lower
                    .iter()
                    .map(|e| {
                        let mut src = *e;
                        src[v] += 1;
                        (index[&src] as u16, (e[v] as f64) + 1.0)
                    })
                    .collect();
                deriv.push(row);
            }
        }
        Layout { nvars, order, exps, mul, deriv }
    }

    /// Shared layout for `nvars` variables truncated at `order`.
    pub fn get(nvars: usize, order: usize) -> &'static Layout {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables supported");
        assert!(order <= MAX_ORDER + 1, "jet order {order} exceeds capability");
        static LAYOUTS: [[OnceLock<Layout>; MAX_ORDER + 2]; MAX_VARS + 1] =
            [const { [const { OnceLock::new() }; MAX_ORDER + 2] }; MAX_VARS + 1];
        LAYOUTS[nvars][order].get_or_init(|| Layout::build(nvars, order))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn index_of(&self, e: &Exps) -> Option<usize> {
        if degree(e) > self.order {
            return None;
        }
        self.exps.iter().position(|x| x == e)
    }
}

#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    c: SmallVec<[C64; 5]>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet{:?}{:?}", self.layout, self.c.as_slice())
    }
}

impl Jet {
    pub fn constant(layout: &'static Layout, v: C64) -> Jet {
        let mut c: SmallVec<[C64; 5]> = SmallVec::from_elem(C64::new(0.0, 0.0), layout.len());
        c[0] = v;
        Jet { layout, c }
    }

    pub fn real(layout: &'static Layout, v: f64) -> Jet {
        Jet::constant(layout, C64::new(v, 0.0))
    }

    pub fn zero(layout: &'static Layout) -> Jet {
        Jet::constant(layout, C64::new(0.0, 0.0))
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(layout: &'static Layout, var: usize, value: f64) -> Jet {
        let mut j = Jet::real(layout, value);
        if layout.order > 0 {
            // degree-one monomials follow the constant in enumeration order
            let mut e = [0u8; MAX_VARS];
            e[var] = 1;
            let idx = layout.index_of(&e).expect("degree-one monomial");
            j.c[idx] = C64::new(1.0, 0.0);
        }
        j
    }

    /// Seeds all coordinate functions at `point` with the given order.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let layout = Layout::get(point.len(), order);
        point.iter().enumerate().map(|(i, &x)| Jet::variable(layout, i, x)).collect()
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Mixed partial derivative `∂^α f` at the expansion point, or `None`
    /// when `|α|` exceeds the order.
    pub fn derivative(&self, alpha: &[u8]) -> Option<C64> {
        let mut e = [0u8; MAX_VARS];
        e[..alpha.len()].copy_from_slice(alpha);
        let idx = self.layout.index_of(&e)?;
        let fact: f64 = alpha.iter().map(|&a| (1..=a as u32).product::<u32>() as f64).product();
        Some(self.c[idx] * fact)
    }

    /// `∂f/∂x_var` as a jet of one lower order.
    pub fn partial(&self, var: usize) -> Option<Jet> {
        if self.layout.order == 0 {
            return None;
        }
        let lower = Layout::get(self.layout.nvars, self.layout.order - 1);
        let row = &self.layout.deriv[var];
        let c = row.iter().map(|&(src, f)| self.c[src as usize] * f).collect();
        Some(Jet { layout: lower, c })
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.layout.order {
            return self.clone();
        }
        let layout = Layout::get(self.layout.nvars, order);
        // lower-degree monomials form a prefix of the enumeration
        let c = self.c[..layout.len()].iter().copied().collect();
        Jet { layout, c }
    }

    fn aligned<'a>(a: &'a Jet, b: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        if std::ptr::eq(a.layout, b.layout) {
            return (Cow::Borrowed(a), Cow::Borrowed(b));
        }
        assert_eq!(a.layout.nvars, b.layout.nvars, "jets over different variable sets");
        let k = a.layout.order.min(b.layout.order);
        (Cow::Owned(a.truncate(k)), Cow::Owned(b.truncate(k)))
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet { layout: self.layout, c: self.c.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Jet {
        Jet { layout: self.layout, c: self.c.iter().map(|z| z * s).collect() }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, other);
        let layout = a.layout;
        if layout.order == 0 {
            return Jet::constant(layout, a.c[0] * b.c[0]);
        }
        let mut c: SmallVec<[C64; 5]> = SmallVec::from_elem(C64::new(0.0, 0.0), layout.len());
        for &(i, j, k) in &layout.mul {
            c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
        Jet { layout, c }
    }

    /// Evaluates `f(self)` from the derivatives `f^{(k)}(a)`, `k = 0..=K`,
    /// at the constant term `a`.
    fn compose(&self, derivs: &[C64]) -> Jet {
        let k = self.layout.order;
        debug_assert!(derivs.len() > k);
        if k == 0 {
            return Jet::constant(self.layout, derivs[0]);
        }
        let mut h = self.clone();
        h.c[0] = C64::new(0.0, 0.0);
        let mut fact = 1.0;
        let mut taylor = Vec::with_capacity(k + 1);
        for (i, d) in derivs.iter().take(k + 1).enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            taylor.push(d / fact);
        }
        let mut r = Jet::constant(self.layout, taylor[k]);
        for t in taylor[..k].iter().rev() {
            r = r.mul_jet(&h);
            r.c[0] += t;
        }
        r
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.compose(&vec![e; self.layout.order + 1])
    }

    pub fn sin(&self) -> Jet {
        let a = self.c[0];
        let (s, c) = (a.sin(), a.cos());
        let cycle = [s, c, -s, -c];
        let d: Vec<C64> = (0..=self.layout.order).map(|i| cycle[i % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let a = self.c[0];
        let (s, c) = (a.sin(), a.cos());
        let cycle = [c, -s, -c, s];
        let d: Vec<C64> = (0..=self.layout.order).map(|i| cycle[i % 4]).collect();
        self.compose(&d)
    }

    /// `x^p` for real `p` via the principal branch of the constant term.
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.c[0];
        let mut d = Vec::with_capacity(self.layout.order + 1);
        let mut coef = 1.0;
        for i in 0..=self.layout.order {
            d.push(a.powf(p - i as f64) * coef);
            coef *= p - i as f64;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let a = self.c[0];
        let inv = a.inv();
        let mut d = Vec::with_capacity(self.layout.order + 1);
        let mut p = inv;
        let mut sign = 1.0;
        let mut fact = 1.0;
        for i in 0..=self.layout.order {
            if i > 0 {
                fact *= i as f64;
                sign = -sign;
                p *= inv;
            }
            d.push(p * (sign * fact));
        }
        self.compose(&d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut result = Jet::real(self.layout, 1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        let c = a.c.iter().zip(b.c.iter()).map(|(x, y)| x + y).collect();
        Jet { layout: a.layout, c }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let (a, b) = Jet::aligned(self, rhs);
        let c = a.c.iter().zip(b.c.iter()).map(|(x, y)| x - y).collect();
        Jet { layout: a.layout, c }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { layout: self.layout, c: self.c.iter().map(|z| -z).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if std::ptr::eq(self.layout, rhs.layout) {
            for (x, y) in self.c.iter_mut().zip(rhs.c.iter()) {
                *x += y;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if std::ptr::eq(self.layout, rhs.layout) {
            for (x, y) in self.c.iter_mut().zip(rhs.c.iter()) {
                *x -= y;
            }
        } else {
            *self = &*self - rhs;
        }
    }
}
