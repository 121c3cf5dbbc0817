//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] of order `n` at a point holds the normalized coefficients
//! `c_j = f^(j)(x) / j!` for `j = 0..=n`. Products follow the Leibniz rule
//! through the Cauchy product of the coefficient sequences, so every
//! derivative obtained from a jet is exact up to floating-point rounding.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn constant(value: T, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// The identity function `x ↦ x` expanded at `x`.
    pub fn variable(x: T, order: usize) -> Self {
        let mut j = Self::constant(x, order);
        if order >= 1 {
            j.coeffs[1] = T::one();
        }
        j
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "jet needs at least the value coefficient"
        );
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `d`-th derivative, i.e. `d! * c_d`.
    pub fn derivative(&self, d: usize) -> T {
        let mut fact = T::one();
        for i in 2..=d {
            fact *= T::of_usize(i);
        }
        self.coeffs[d] * fact
    }

    /// All derivatives `f, f', …, f^(n)`.
    pub fn derivatives(&self) -> Vec<T> {
        let mut fact = T::one();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i >= 2 {
                    fact *= T::of_usize(i);
                }
                c * fact
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scale(mut self, factor: T) -> Self {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self
    }

    /// Chain rule for an inner affine map `x ↦ a x + b`: `c_j ← a^j c_j`.
    pub fn affine_chain(mut self, a: T) -> Self {
        let mut p = T::one();
        for c in &mut self.coeffs {
            *c *= p;
            p *= a;
        }
        self
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        let a0 = self.coeffs[0];
        let inv = T::one() / a0;
        let mut out = vec![T::zero(); n + 1];
        out[0] = inv;
        for k in 1..=n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j];
            }
            out[k] = -acc * inv;
        }
        Self { coeffs: out }
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut out = vec![T::zero(); n + 1];
        out[0] = self.coeffs[0].exp();
        for k in 1..=n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += T::of_usize(j) * self.coeffs[j] * out[k - j];
            }
            out[k] = acc / T::of_usize(k);
        }
        Self { coeffs: out }
    }

    pub fn div(&self, rhs: &Self) -> Self {
        self * &rhs.recip()
    }

    pub fn powi(&self, p: u32) -> Self {
        let mut acc = Self::constant(T::one(), self.order());
        for _ in 0..p {
            acc = &acc * self;
        }
        acc
    }
}

impl<'a, T: Scalar> Add for &'a Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Jet<T> {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(&a, &b)| a + b)
            .collect();
        Jet { coeffs }
    }
}

impl<'a, T: Scalar> Sub for &'a Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Jet<T> {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        Jet { coeffs }
    }
}

impl<'a, T: Scalar> Mul for &'a Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Jet<T> {
        let n = self.order().min(rhs.order());
        let mut coeffs = vec![T::zero(); n + 1];
        for (i, &a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().take(n + 1 - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Jet { coeffs }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.scale(-T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_variable_gives_exp_derivatives() {
        let j = Jet::variable(0.3_f64, 5).exp();
        for d in 0..=5 {
            assert_relative_eq!(j.derivative(d), 0.3_f64.exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn recip_matches_closed_form() {
        // 1/x: d-th derivative is (-1)^d d! / x^(d+1)
        let x = 1.7_f64;
        let j = Jet::variable(x, 4).recip();
        let mut fact = 1.0;
        for d in 0..=4 {
            if d > 0 {
                fact *= d as f64;
            }
            let expect = (-1f64).powi(d as i32) * fact / x.powi(d as i32 + 1);
            assert_relative_eq!(j.derivative(d), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn product_is_leibniz() {
        // (x^2)(x^3) = x^5
        let x = 0.9_f64;
        let v = Jet::variable(x, 6);
        let p = &v.powi(2) * &v.powi(3);
        let q = v.powi(5);
        for d in 0..=6 {
            assert_relative_eq!(
                p.derivative(d),
                q.derivative(d),
                max_relative = 1e-13,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn affine_chain_scales_derivatives() {
        let j = Jet::variable(0.0_f64, 3).exp().affine_chain(2.0);
        assert_relative_eq!(j.derivative(3), 8.0);
    }
}
