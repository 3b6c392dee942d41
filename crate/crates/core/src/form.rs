//! Pointwise inhomogeneous differential forms.
//!
//! A [`GradedForm`] on an `n`-dimensional chart stores one coefficient per
//! subset of `{dx^0, …, dx^{n-1}}`; the subset is encoded as a bitmask whose
//! set bits are the (strictly increasing) indices of the basis covector
//! wedge. Antisymmetry is therefore exact by construction. The coefficient
//! ring is generic: plain complex numbers for values, [`Jet`]s when the
//! coefficients must also carry derivatives, or forms themselves (used for
//! matrices of forms).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::jet::Jet;

/// Commutative-enough coefficient ring for forms and Pfaffians.
///
/// `exp` and `recip` act on the ring element as a whole (for forms: the
/// terminating nilpotent series around the degree-zero part).
pub trait Coeff:
    Clone + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn scale(&self, s: C64) -> Self;
    fn exp(&self) -> Self;
    fn recip(&self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coeff for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        C64::new(1.0, 0.0)
    }
    fn scale(&self, s: C64) -> Self {
        self * s
    }
    fn exp(&self) -> Self {
        C64::exp(*self)
    }
    fn recip(&self) -> Self {
        self.inv()
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Coeff for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero(self.layout())
    }
    fn one_like(&self) -> Self {
        Jet::real(self.layout(), 1.0)
    }
    fn scale(&self, s: C64) -> Self {
        Jet::scale(self, s)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn recip(&self) -> Self {
        Jet::recip(self)
    }
    fn is_zero(&self) -> bool {
        Jet::is_zero(self)
    }
}

/// Sign of `e_a ∧ e_b = sign · e_{a|b}` for disjoint basis masks.
pub fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign picked up when moving `dx^i` past the lower-indexed factors of `mask`.
pub fn insertion_sign(mask: u32, i: usize) -> f64 {
    if (mask & ((1u32 << i) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Bitmask for the sorted index list `axes`.
pub fn mask_of(axes: &[usize]) -> u32 {
    axes.iter().fold(0u32, |m, &i| m | (1 << i))
}

#[derive(Clone, PartialEq)]
pub struct GradedForm<T> {
    dim: usize,
    coeffs: Vec<T>,
}

pub type FormValue = GradedForm<C64>;
pub type FormJet = GradedForm<Jet>;

impl<T: fmt::Debug> fmt::Debug for GradedForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter().enumerate().map(|(m, c)| (format!("{m:0w$b}", w = self.dim), c))).finish()
    }
}

impl<T: Coeff> GradedForm<T> {
    pub fn zero(dim: usize, zero: T) -> Self {
        GradedForm { dim, coeffs: vec![zero; 1 << dim] }
    }

    pub fn scalar(dim: usize, value: T) -> Self {
        let mut f = GradedForm::zero(dim, value.zero_like());
        f.coeffs[0] = value;
        f
    }

    pub fn from_coeffs(dim: usize, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), 1 << dim);
        GradedForm { dim, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, mask: u32) -> &T {
        &self.coeffs[mask as usize]
    }

    pub fn set(&mut self, mask: u32, v: T) {
        self.coeffs[mask as usize] = v;
    }

    pub fn top_mask(&self) -> u32 {
        (1u32 << self.dim) - 1
    }

    /// Coefficient of `dx^0 ∧ … ∧ dx^{n-1}`.
    pub fn top(&self) -> &T {
        &self.coeffs[self.top_mask() as usize]
    }

    pub fn degree0(&self) -> &T {
        &self.coeffs[0]
    }

    pub fn degree_part(&self, k: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| if (m as u32).count_ones() as usize == k { c.clone() } else { zero.clone() })
            .collect();
        GradedForm { dim: self.dim, coeffs }
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> GradedForm<U> {
        GradedForm { dim: self.dim, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn scale_by(&self, s: &T) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = GradedForm::zero(self.dim, self.coeffs[0].zero_like());
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if a & b != 0 || cb.is_zero() {
                    continue;
                }
                let s = wedge_sign(a as u32, b as u32);
                let term = ca.clone() * cb.clone();
                let slot = &mut out.coeffs[a | b];
                *slot = if s > 0.0 { slot.clone() + term } else { slot.clone() - term };
            }
        }
        out
    }

    /// Contraction with the vector whose chart components are `v`.
    pub fn interior(&self, v: &[T]) -> Self {
        assert_eq!(v.len(), self.dim);
        let mut out = GradedForm::zero(self.dim, self.coeffs[0].zero_like());
        for (m, c) in self.coeffs.iter().enumerate() {
            if m == 0 || c.is_zero() {
                continue;
            }
            let mask = m as u32;
            for (i, vi) in v.iter().enumerate() {
                if mask & (1 << i) == 0 || vi.is_zero() {
                    continue;
                }
                let term = c.clone() * vi.clone();
                let slot = &mut out.coeffs[(mask & !(1 << i)) as usize];
                *slot = if insertion_sign(mask, i) > 0.0 { slot.clone() + term } else { slot.clone() - term };
            }
        }
        out
    }

    /// Splits off the degree-zero part and sums the terminating series
    /// `f(a₀) Σ_k c_k a₊^k` up to `k = dim`.
    fn nilpotent_series(&self, lead: T, coeffs: impl Fn(usize, &T) -> T) -> Self {
        let mut plus = self.clone();
        plus.coeffs[0] = plus.coeffs[0].zero_like();
        let mut acc = GradedForm::scalar(self.dim, coeffs(0, &lead));
        let mut power = GradedForm::scalar(self.dim, lead.one_like());
        for k in 1..=self.dim {
            power = power.wedge(&plus);
            if power.coeffs.iter().all(Coeff::is_zero) {
                break;
            }
            acc = acc + power.scale_by(&coeffs(k, &lead));
        }
        acc
    }

    /// `exp(a₀) Σ_k a₊^k / k!`.
    pub fn exp(&self) -> Self {
        let e = self.coeffs[0].exp();
        self.nilpotent_series(e, |k, e| {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            e.scale(C64::new(1.0 / fact, 0.0))
        })
    }

    /// `(a₀ + a₊)^{-1} = a₀^{-1} Σ_k (−a₊/a₀)^k`; requires invertible `a₀`.
    pub fn inverse(&self) -> Self {
        let inv = self.coeffs[0].recip();
        self.nilpotent_series(inv, |k, inv| {
            let mut p = inv.clone();
            for _ in 0..k {
                p = p * inv.clone();
            }
            if k % 2 == 1 {
                -p
            } else {
                p
            }
        })
    }
}

impl FormValue {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn real_zero(dim: usize) -> Self {
        GradedForm::zero(dim, C64::new(0.0, 0.0))
    }

    /// Pullback to the coordinate sub-box spanned by `axes` (sorted): keeps
    /// the components built only from those differentials, re-indexed.
    pub fn restrict_to_axes(&self, axes: &[usize]) -> FormValue {
        let k = axes.len();
        let mut out = FormValue::real_zero(k);
        for sub in 0..(1u32 << k) {
            let mut full = 0u32;
            for (j, &ax) in axes.iter().enumerate() {
                if sub & (1 << j) != 0 {
                    full |= 1 << ax;
                }
            }
            out.coeffs[sub as usize] = self.coeffs[full as usize];
        }
        out
    }
}

impl FormJet {
    /// Exterior derivative; lowers the jet order by one. `None` when the
    /// coefficients carry no derivative information.
    pub fn d(&self) -> Option<FormJet> {
        let zero = self.coeffs[0].zero_like().partial(0).unwrap_or_else(|| self.coeffs[0].zero_like());
        if self.coeffs[0].order() == 0 {
            return None;
        }
        let mut out = GradedForm::zero(self.dim, zero);
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mask = m as u32;
            for i in 0..self.dim {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let di = c.partial(i)?;
                let slot = &mut out.coeffs[(mask | (1 << i)) as usize];
                if insertion_sign(mask, i) > 0.0 {
                    *slot += &di;
                } else {
                    *slot -= &di;
                }
            }
        }
        Some(out)
    }

    pub fn value(&self) -> FormValue {
        self.map(|c| c.value())
    }

    pub fn truncate(&self, order: usize) -> FormJet {
        self.map(|c| c.truncate(order))
    }

    pub fn order(&self) -> usize {
        self.coeffs[0].order()
    }
}

impl<T: Coeff> Add for GradedForm<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        GradedForm { dim: self.dim, coeffs: self.coeffs.into_iter().zip(rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Coeff> Sub for GradedForm<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        GradedForm { dim: self.dim, coeffs: self.coeffs.into_iter().zip(rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Coeff> Neg for GradedForm<T> {
    type Output = Self;
    fn neg(self) -> Self {
        GradedForm { dim: self.dim, coeffs: self.coeffs.into_iter().map(|a| -a).collect() }
    }
}

impl<T: Coeff> Mul for GradedForm<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.wedge(&rhs)
    }
}

/// Forms over a commutative ring form a ring under wedge; products are only
/// commutative on even-degree elements, which is the regime in which this
/// impl is used (matrices of curvature and moment forms).
impl<T: Coeff> Coeff for GradedForm<T> {
    fn zero_like(&self) -> Self {
        GradedForm::zero(self.dim, self.coeffs[0].zero_like())
    }
    fn one_like(&self) -> Self {
        GradedForm::scalar(self.dim, self.coeffs[0].one_like())
    }
    fn scale(&self, s: C64) -> Self {
        GradedForm::scale(self, s)
    }
    fn exp(&self) -> Self {
        GradedForm::exp(self)
    }
    fn recip(&self) -> Self {
        self.inverse()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(dim: usize, mask: u32) -> FormValue {
        let mut f = FormValue::real_zero(dim);
        f.set(mask, c(1.0));
        f
    }

    #[test]
    fn wedge_of_repeated_covector_vanishes() {
        let dx = basis(2, 0b01);
        assert!(dx.wedge(&dx).max_abs() == 0.0);
    }

    #[test]
    fn one_forms_anticommute() {
        let dx = basis(3, 0b001);
        let dy = basis(3, 0b010);
        let a = dx.wedge(&dy);
        let b = dy.wedge(&dx);
        assert_eq!(*a.get(0b011), c(1.0));
        assert_eq!(*b.get(0b011), c(-1.0));
    }

    #[test]
    fn wedge_sign_counts_inversions() {
        // dz ∧ (dx ∧ dy) = dx ∧ dy ∧ dz (two transpositions)
        assert_eq!(wedge_sign(0b100, 0b011), 1.0);
        // dy ∧ (dx ∧ dz) = -dx ∧ dy ∧ dz
        assert_eq!(wedge_sign(0b010, 0b101), -1.0);
    }

    #[test]
    fn contraction_of_area_form() {
        // i_{∂x}(dx ∧ dy) = dy ; i_{∂y}(dx ∧ dy) = -dx
        let area = basis(2, 0b11);
        let ix = area.interior(&[c(1.0), c(0.0)]);
        assert_eq!(*ix.get(0b10), c(1.0));
        let iy = area.interior(&[c(0.0), c(1.0)]);
        assert_eq!(*iy.get(0b01), c(-1.0));
        // 0-forms contract to zero
        let f = FormValue::scalar(2, c(3.0));
        assert_eq!(f.interior(&[c(1.0), c(2.0)]).max_abs(), 0.0);
    }

    #[test]
    fn exp_of_area_form_terminates() {
        let area = basis(2, 0b11);
        let e = area.exp();
        assert_eq!(*e.get(0), c(1.0));
        assert_eq!(*e.get(0b11), c(1.0));
        let shifted = FormValue::scalar(2, c(0.5)) + area;
        let e = shifted.exp();
        assert!((e.get(0) - c(0.5f64.exp())).norm() < 1e-15);
        assert!((e.get(0b11) - c(0.5f64.exp())).norm() < 1e-15);
    }

    #[test]
    fn inverse_of_inhomogeneous_form() {
        // (2 + ω)^{-1} = 1/2 - ω/4 on a surface
        let f = FormValue::scalar(2, c(2.0)) + basis(2, 0b11);
        let inv = f.inverse();
        assert!((inv.get(0) - c(0.5)).norm() < 1e-15);
        assert!((inv.get(0b11) - c(-0.25)).norm() < 1e-15);
        let one = f.wedge(&inv);
        assert!((one.get(0) - c(1.0)).norm() < 1e-15 && one.get(0b11).norm() < 1e-15);
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        let x = Jet::seed(&[0.3, 0.8], 1);
        let mut f = GradedForm::zero(2, Jet::zero(x[0].layout()));
        f.set(0b10, x[0].clone());
        let df = f.d().unwrap();
        assert!((df.get(0b11).value() - c(1.0)).norm() < 1e-15);
        assert_eq!(df.order(), 0);
        assert!(df.d().is_none());
    }

    #[test]
    fn restriction_keeps_tangential_components() {
        let mut f = FormValue::real_zero(4);
        f.set(0b1100, c(7.0));
        f.set(0b0101, c(3.0));
        f.set(0b1000, c(2.0));
        let r = f.restrict_to_axes(&[2, 3]);
        assert_eq!(*r.get(0b11), c(7.0));
        assert_eq!(*r.get(0b10), c(2.0));
        assert_eq!(*r.get(0b01), c(0.0));
    }
}
