//! Iterated convolution of normalized box kernels `H_a = 1_(0,a) / a`.
//!
//! The convolution `H_{a_0} ∗ ⋯ ∗ H_{a_K}` is built exactly as a piecewise
//! polynomial: convolving with `H_a` maps `p` to `(P(x) − P(x − a)) / a`
//! where `P` is the running antiderivative of `p`.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::Scalar;

/// Piecewise polynomial with pieces `p_i(x − b_i)` on `[b_i, b_{i+1})`,
/// identically zero outside `[b_0, b_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePoly<T> {
    breaks: Vec<T>,
    pieces: Vec<Vec<T>>,
}

fn horner<T: Scalar>(p: &[T], s: T) -> T {
    p.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
}

/// Coefficients of `q(s) = p(s + delta)`.
fn taylor_shift<T: Scalar>(p: &[T], delta: T) -> Vec<T> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let hi = q[j + 1];
            q[j] += delta * hi;
        }
    }
    q
}

fn antiderivative<T: Scalar>(p: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(T::zero());
    for (i, &c) in p.iter().enumerate() {
        out.push(c / T::of_usize(i + 1));
    }
    out
}

impl<T: Scalar> PiecewisePoly<T> {
    pub fn box_kernel(a: T) -> Self {
        Self {
            breaks: vec![T::zero(), a],
            pieces: vec![vec![T::one() / a]],
        }
    }

    pub fn support(&self) -> (T, T) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(Vec::len).max().unwrap_or(1) - 1
    }

    fn piece_index(&self, x: T) -> Option<usize> {
        let (lo, hi) = self.support();
        if x < lo || x >= hi {
            return None;
        }
        let i = self.breaks.partition_point(|&b| b <= x);
        Some(i - 1)
    }

    pub fn eval(&self, x: T) -> T {
        match self.piece_index(x) {
            Some(i) => horner(&self.pieces[i], x - self.breaks[i]),
            None => T::zero(),
        }
    }

    /// Taylor coefficients at `x` up to `order` (right-sided at break points).
    pub fn jet(&self, x: T, order: usize) -> Jet<T> {
        let mut coeffs = vec![T::zero(); order + 1];
        if let Some(i) = self.piece_index(x) {
            let shifted = taylor_shift(&self.pieces[i], x - self.breaks[i]);
            for (c, s) in coeffs.iter_mut().zip(shifted) {
                *c = s;
            }
        }
        Jet::from_coeffs(coeffs)
    }

    /// Antiderivative `P(x) = ∫_{-∞}^x p`, returned as pieces plus the total mass
    /// (the constant value of `P` to the right of the support).
    fn antiderivative(&self) -> (Vec<Vec<T>>, T) {
        let mut acc = T::zero();
        let mut out = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let mut q = antiderivative(p);
            q[0] = acc;
            acc = horner(&q, self.breaks[i + 1] - self.breaks[i]);
            out.push(q);
        }
        (out, acc)
    }

    /// `(p ∗ H_a)(x) = (P(x) − P(x − a)) / a`.
    pub fn convolve_box(&self, a: T) -> Self {
        let (anti, total) = self.antiderivative();
        let eval_anti_poly = |x: T| -> Vec<T> {
            // polynomial of P in the local variable (x' − x), valid to the right of x
            let (lo, hi) = self.support();
            if x < lo {
                vec![T::zero()]
            } else if x >= hi {
                vec![total]
            } else {
                let i = self.breaks.partition_point(|&b| b <= x) - 1;
                taylor_shift(&anti[i], x - self.breaks[i])
            }
        };

        let scale = self.breaks.iter().fold(T::zero(), |m, b| m.max(b.abs())) + a;
        let tol = scale * T::epsilon() * T::of(16.0);
        let mut breaks: Vec<T> = self
            .breaks
            .iter()
            .copied()
            .chain(self.breaks.iter().map(|&b| b + a))
            .collect();
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup_by(|x, y| (*x - *y).abs() <= tol);

        let inv_a = T::one() / a;
        let mut pieces = Vec::with_capacity(breaks.len() - 1);
        for w in breaks.windows(2) {
            let c = w[0];
            let mid = (w[0] + w[1]) / T::of(2.0);
            // evaluate both terms at the piece midpoint's governing piece, re-centred at c
            let left = shifted_from(&eval_anti_poly, mid, c);
            let right = shifted_from(&eval_anti_poly, mid - a, c - a);
            let n = left.len().max(right.len());
            let piece = (0..n)
                .map(|j| {
                    let l = left.get(j).copied().unwrap_or_else(T::zero);
                    let r = right.get(j).copied().unwrap_or_else(T::zero);
                    (l - r) * inv_a
                })
                .collect();
            pieces.push(piece);
        }
        Self { breaks, pieces }
    }
}

/// Polynomial of `P` around `at`, using the piece that governs `probe`.
fn shifted_from<T: Scalar, F: Fn(T) -> Vec<T>>(anti_at: &F, probe: T, at: T) -> Vec<T> {
    // local polynomial valid near `probe`, expanded at `probe`, then shifted back to `at`
    let p = anti_at(probe);
    taylor_shift(&p, at - probe)
}

/// Validated box-convolution bump `H_{a_0} ∗ ⋯ ∗ H_{a_K}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvBumpData<T> {
    pub a: Vec<T>,
    pub level: u32,
    pub poly: PiecewisePoly<T>,
}

impl<T: Scalar> ConvBumpData<T> {
    pub fn new(a: &[T], level: u32) -> Result<Self> {
        let n = level as usize + 1;
        if a.len() < n {
            return Err(Error::InvalidSequence(format!(
                "level {level} needs {n} kernel widths, got {}",
                a.len()
            )));
        }
        let a = &a[..n];
        if !(a[0] <= T::one()) {
            return Err(Error::InvalidSequence(format!("a_0 = {} exceeds 1", a[0])));
        }
        if !(a[n - 1] > T::zero()) {
            return Err(Error::InvalidSequence("widths must be positive".into()));
        }
        if a.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(Error::InvalidSequence(
                "widths must be strictly decreasing".into(),
            ));
        }
        let mut poly = PiecewisePoly::box_kernel(a[0]);
        for &w in &a[1..] {
            poly = poly.convolve_box(w);
        }
        Ok(Self {
            a: a.to_vec(),
            level,
            poly,
        })
    }

    /// Highest derivative order that is continuous.
    pub fn max_deriv(&self) -> u32 {
        self.level.saturating_sub(1)
    }

    /// `2^d / (a_0 ⋯ a_d)`.
    pub fn derivative_bound(&self, d: usize) -> T {
        let prod = self.a.iter().take(d + 1).fold(T::one(), |p, &x| p * x);
        T::of(2.0).powi(d as i32) / prod
    }
}
