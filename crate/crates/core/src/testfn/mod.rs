//! Closed-form smooth test functions on the line.
//!
//! A [`TestFn`] is an immutable expression tree. Every node evaluates exact
//! derivatives through truncated Taylor arithmetic ([`Jet`]), so seminorms
//! of any order carry no finite-difference noise.

mod convbump;
mod partition;
mod seminorm;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compact::{CompactSet, Omega};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quad::{self, QuadOptions};
use crate::scalar::Scalar;

pub use convbump::{ConvBumpData, PiecewisePoly};
pub use partition::partition_of_unity;
pub use seminorm::{sup_derivatives, SeminormSpec, DEFAULT_DENSITY};

/// `max_deriv` of nodes that are C^∞.
pub const SMOOTH: u32 = u32::MAX;

/// Closed interval known to contain the support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportHint<T> {
    Empty,
    Interval {
        lo: T,
        hi: T,
    },
    /// Not compactly supported (constants, monomial jets and their combinations).
    Unbounded,
}

impl<T: Scalar> SupportHint<T> {
    pub fn contains(&self, x: T) -> bool {
        match *self {
            Self::Empty => false,
            Self::Interval { lo, hi } => lo <= x && x <= hi,
            Self::Unbounded => true,
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Self::Unbounded)
    }

    pub fn as_set(&self) -> Option<CompactSet<T>> {
        match *self {
            Self::Empty => Some(CompactSet::empty()),
            Self::Interval { lo, hi } => Some(CompactSet::interval(lo, hi).expect("ordered hint")),
            Self::Unbounded => None,
        }
    }

    fn union(self, other: Self) -> Self {
        match (self, other) {
            (Self::Unbounded, _) | (_, Self::Unbounded) => Self::Unbounded,
            (Self::Empty, s) | (s, Self::Empty) => s,
            (Self::Interval { lo: a, hi: b }, Self::Interval { lo: c, hi: d }) => Self::Interval {
                lo: a.min(c),
                hi: b.max(d),
            },
        }
    }

    fn intersect(self, other: Self) -> Self {
        match (self, other) {
            (Self::Empty, _) | (_, Self::Empty) => Self::Empty,
            (Self::Unbounded, s) | (s, Self::Unbounded) => s,
            (Self::Interval { lo: a, hi: b }, Self::Interval { lo: c, hi: d }) => {
                let (lo, hi) = (a.max(c), b.min(d));
                if lo <= hi {
                    Self::Interval { lo, hi }
                } else {
                    Self::Empty
                }
            }
        }
    }
}

#[derive(Debug)]
enum Node<T> {
    Zero,
    StandardBump {
        center: T,
        radius: T,
    },
    ConvBump(ConvBumpData<T>),
    Cutoff {
        set: CompactSet<T>,
        margin: T,
    },
    MonomialJet {
        y: T,
        order: u32,
        coefficient: T,
    },
    Constant(T),
    Affine {
        inner: TestFn<T>,
        scale: T,
        shift: T,
    },
    Sum(Vec<TestFn<T>>),
    Product(Vec<TestFn<T>>),
    Scaled {
        factor: T,
        inner: TestFn<T>,
    },
}

/// Smooth test function with exact derivatives up to `max_deriv`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Expr<T>", into = "Expr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TestFn<T = f64> {
    node: Arc<Node<T>>,
    max_deriv: u32,
    support: SupportHint<T>,
}

/// Serialized form of a [`TestFn`]: node type plus parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Expr<T> {
    Zero,
    StandardBump {
        center: T,
        radius: T,
    },
    ConvBump {
        a: Vec<T>,
        level: u32,
    },
    Cutoff {
        set: CompactSet<T>,
        margin: T,
    },
    MonomialJet {
        y: T,
        order: u32,
        coefficient: T,
    },
    Constant {
        value: T,
    },
    Affine {
        inner: Box<Expr<T>>,
        scale: T,
        shift: T,
    },
    Sum {
        terms: Vec<Expr<T>>,
    },
    Product {
        factors: Vec<Expr<T>>,
    },
    Scaled {
        factor: T,
        inner: Box<Expr<T>>,
    },
}

/// Top-level linear structure of a [`TestFn`].
#[derive(Clone, Copy, Debug)]
pub enum LinearView<'a, T> {
    Sum(&'a [TestFn<T>]),
    Scaled(T, &'a TestFn<T>),
    Atom,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CombineOp<T> {
    Add,
    Scale(T),
    Multiply,
}

fn smooth_step<T: Scalar>(u: T) -> T {
    if u <= T::zero() {
        T::zero()
    } else if u >= T::one() {
        T::one()
    } else {
        let a = (-u.recip()).exp();
        let b = (-(T::one() - u).recip()).exp();
        a / (a + b)
    }
}

fn smooth_step_jet<T: Scalar>(u0: T, slope: T, n: usize) -> Jet<T> {
    if u0 <= T::zero() {
        return Jet::zero(n);
    }
    if u0 >= T::one() {
        return Jet::constant(T::one(), n);
    }
    let u = Jet::variable(u0, n);
    let w = &Jet::constant(T::one(), n) - &u;
    let a = (-u.recip()).exp();
    let b = (-w.recip()).exp();
    a.div(&(&a + &b)).affine_chain(slope)
}

impl<T: Scalar> TestFn<T> {
    fn build(node: Node<T>) -> Self {
        let (max_deriv, support) = match &node {
            Node::Zero => (SMOOTH, SupportHint::Empty),
            Node::StandardBump { center, radius } => (
                SMOOTH,
                SupportHint::Interval {
                    lo: *center - *radius,
                    hi: *center + *radius,
                },
            ),
            Node::ConvBump(data) => {
                let (lo, hi) = data.poly.support();
                (data.max_deriv(), SupportHint::Interval { lo, hi })
            }
            Node::Cutoff { set, margin } => match set.hull() {
                None => (SMOOTH, SupportHint::Empty),
                Some((lo, hi)) => {
                    let c = *margin + *margin;
                    (
                        SMOOTH,
                        SupportHint::Interval {
                            lo: lo - c,
                            hi: hi + c,
                        },
                    )
                }
            },
            Node::MonomialJet { .. } | Node::Constant(_) => (SMOOTH, SupportHint::Unbounded),
            Node::Affine {
                inner,
                scale,
                shift,
            } => {
                let support = match inner.support {
                    SupportHint::Interval { lo, hi } => {
                        let a = (lo - *shift) / *scale;
                        let b = (hi - *shift) / *scale;
                        SupportHint::Interval {
                            lo: a.min(b),
                            hi: a.max(b),
                        }
                    }
                    s => s,
                };
                (inner.max_deriv, support)
            }
            Node::Sum(terms) => terms
                .iter()
                .fold((SMOOTH, SupportHint::Empty), |(m, s), t| {
                    (m.min(t.max_deriv), s.union(t.support))
                }),
            Node::Product(factors) => factors
                .iter()
                .fold((SMOOTH, SupportHint::Unbounded), |(m, s), t| {
                    (m.min(t.max_deriv), s.intersect(t.support))
                }),
            Node::Scaled { inner, .. } => (inner.max_deriv, inner.support),
        };
        Self {
            node: Arc::new(node),
            max_deriv,
            support,
        }
    }

    pub fn zero() -> Self {
        Self::build(Node::Zero)
    }

    /// `ψ((x − center)/radius)` with `ψ(s) = exp(−1/(1 − s²))` on `|s| < 1`.
    pub fn standard_bump(center: T, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !center.is_finite() || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bump radius {radius} must be positive"
            )));
        }
        Ok(Self::build(Node::StandardBump { center, radius }))
    }

    /// Truncated box convolution `H_{a_0} ∗ ⋯ ∗ H_{a_level}`.
    pub fn conv_bump(a: &[T], level: u32) -> Result<Self> {
        Ok(Self::build(Node::ConvBump(ConvBumpData::new(a, level)?)))
    }

    /// Smooth `𝒳` with `0 ≤ 𝒳 ≤ 1`, equal to 1 within `margin` of `set` and
    /// 0 at distance `≥ 2·margin`.
    pub fn cutoff(set: &CompactSet<T>, margin: T) -> Result<Self> {
        Self::cutoff_in(&Omega::default(), set, margin)
    }

    pub fn cutoff_in(omega: &Omega<T>, set: &CompactSet<T>, margin: T) -> Result<Self> {
        if !(margin > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "cutoff margin {margin} must be positive"
            )));
        }
        if let Some((lo, hi)) = set.hull() {
            let c = margin + margin;
            omega.check(lo - c)?;
            omega.check(hi + c)?;
        }
        Ok(Self::build(Node::Cutoff {
            set: set.clone(),
            margin,
        }))
    }

    /// `x ↦ coefficient · (x − y)^order / order!` (not compactly supported).
    pub fn monomial_jet(y: T, order: u32, coefficient: T) -> Self {
        Self::build(Node::MonomialJet {
            y,
            order,
            coefficient,
        })
    }

    pub fn constant(value: T) -> Self {
        if value.is_zero() {
            Self::zero()
        } else {
            Self::build(Node::Constant(value))
        }
    }

    /// `x ↦ self(scale · x + shift)`.
    pub fn affine(&self, scale: T, shift: T) -> Result<Self> {
        if scale.is_zero() || !scale.is_finite() {
            return Err(Error::InvalidArgument(
                "affine reparametrization needs nonzero scale".into(),
            ));
        }
        Ok(Self::build(Node::Affine {
            inner: self.clone(),
            scale,
            shift,
        }))
    }

    pub fn sum(terms: Vec<Self>) -> Self {
        let terms: Vec<Self> = terms
            .into_iter()
            .filter(|t| !t.is_structurally_zero())
            .collect();
        match terms.len() {
            0 => Self::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Self::build(Node::Sum(terms)),
        }
    }

    pub fn product(factors: Vec<Self>) -> Self {
        if factors.iter().any(Self::is_structurally_zero) {
            return Self::zero();
        }
        match factors.len() {
            0 => Self::constant(T::one()),
            1 => factors.into_iter().next().unwrap(),
            _ => Self::build(Node::Product(factors)),
        }
    }

    pub fn scale(&self, factor: T) -> Self {
        if factor.is_zero() || self.is_structurally_zero() {
            Self::zero()
        } else if factor == T::one() {
            self.clone()
        } else {
            Self::build(Node::Scaled {
                factor,
                inner: self.clone(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::sum(vec![self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::sum(vec![self.clone(), other.scale(-T::one())])
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::product(vec![self.clone(), other.clone()])
    }

    /// `1 − self`.
    pub fn one_minus(&self) -> Self {
        Self::constant(T::one()).sub(self)
    }

    pub fn combine(op: CombineOp<T>, args: &[Self]) -> Result<Self> {
        match op {
            CombineOp::Add => Ok(Self::sum(args.to_vec())),
            CombineOp::Multiply => Ok(Self::product(args.to_vec())),
            CombineOp::Scale(c) => match args {
                [f] => Ok(f.scale(c)),
                _ => Err(Error::InvalidArgument(
                    "scale takes exactly one operand".into(),
                )),
            },
        }
    }

    pub fn max_deriv(&self) -> u32 {
        self.max_deriv
    }

    pub fn support_hint(&self) -> SupportHint<T> {
        self.support
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.support.is_compact()
    }

    pub fn linear_view(&self) -> LinearView<'_, T> {
        match &*self.node {
            Node::Sum(terms) => LinearView::Sum(terms),
            Node::Scaled { factor, inner } => LinearView::Scaled(*factor, inner),
            _ => LinearView::Atom,
        }
    }

    /// Support hints of this node and of the summands and factors below it,
    /// all in the coordinate of `x`.
    pub fn support_pieces(&self) -> Vec<(T, T)> {
        let mut out = Vec::new();
        self.collect_pieces(&mut out);
        out
    }

    fn collect_pieces(&self, out: &mut Vec<(T, T)>) {
        if let SupportHint::Interval { lo, hi } = self.support {
            out.push((lo, hi));
        }
        match &*self.node {
            Node::Sum(ts) | Node::Product(ts) => ts.iter().for_each(|t| t.collect_pieces(out)),
            Node::Scaled { inner, .. } => inner.collect_pieces(out),
            _ => {}
        }
    }

    /// True when the tree is the literal zero node (not a numerical test).
    pub fn is_structurally_zero(&self) -> bool {
        matches!(*self.node, Node::Zero) || self.support == SupportHint::Empty
    }

    /// `∂^d φ(x)` with `x` checked against the default domain.
    pub fn eval(&self, x: T, d: u32) -> Result<T> {
        self.eval_in(&Omega::default(), x, d)
    }

    pub fn eval_in(&self, omega: &Omega<T>, x: T, d: u32) -> Result<T> {
        if d > self.max_deriv {
            return Err(Error::DerivOrderExceeded {
                requested: d,
                max: self.max_deriv,
            });
        }
        omega.check(x)?;
        if d == 0 {
            Ok(self.value(x))
        } else {
            Ok(self.jet(x, d as usize).derivative(d as usize))
        }
    }

    /// Pointwise value; no domain check.
    pub fn value(&self, x: T) -> T {
        if !self.support.contains(x) {
            return T::zero();
        }
        match &*self.node {
            Node::Zero => T::zero(),
            Node::StandardBump { center, radius } => {
                let s = (x - *center) / *radius;
                let q = T::one() - s * s;
                if q <= T::zero() {
                    T::zero()
                } else {
                    (-q.recip()).exp()
                }
            }
            Node::ConvBump(data) => data.poly.eval(x),
            Node::Cutoff { set, margin } => {
                let m = *margin;
                let two_m = m + m;
                let mut outside = T::one();
                for &(lo, hi) in set.intervals() {
                    if x < lo - two_m || x > hi + two_m {
                        continue;
                    }
                    let chi = smooth_step((x - lo + two_m) / m) * smooth_step((hi + two_m - x) / m);
                    outside *= T::one() - chi;
                }
                T::one() - outside
            }
            Node::MonomialJet {
                y,
                order,
                coefficient,
            } => {
                let mut fact = T::one();
                for i in 2..=*order {
                    fact *= T::of_usize(i as usize);
                }
                *coefficient * (x - *y).powi(*order as i32) / fact
            }
            Node::Constant(c) => *c,
            Node::Affine {
                inner,
                scale,
                shift,
            } => inner.value(*scale * x + *shift),
            Node::Sum(terms) => terms.iter().fold(T::zero(), |acc, t| acc + t.value(x)),
            Node::Product(factors) => {
                let mut acc = T::one();
                for f in factors {
                    acc *= f.value(x);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Scaled { factor, inner } => *factor * inner.value(x),
        }
    }

    /// Taylor jet of order `n` at `x`; no domain or order check.
    pub fn jet(&self, x: T, n: usize) -> Jet<T> {
        if !self.support.contains(x) {
            return Jet::zero(n);
        }
        match &*self.node {
            Node::Zero => Jet::zero(n),
            Node::StandardBump { center, radius } => {
                let s0 = (x - *center) / *radius;
                if s0.abs() >= T::one() {
                    return Jet::zero(n);
                }
                let s = Jet::variable(s0, n);
                let q = &Jet::constant(T::one(), n) - &(&s * &s);
                (-q.recip()).exp().affine_chain(radius.recip())
            }
            Node::ConvBump(data) => data.poly.jet(x, n),
            Node::Cutoff { set, margin } => {
                let m = *margin;
                let two_m = m + m;
                let one = Jet::constant(T::one(), n);
                let mut outside = one.clone();
                for &(lo, hi) in set.intervals() {
                    if x < lo - two_m || x > hi + two_m {
                        continue;
                    }
                    let left = smooth_step_jet((x - lo + two_m) / m, m.recip(), n);
                    let right = smooth_step_jet((hi + two_m - x) / m, -m.recip(), n);
                    let chi = &left * &right;
                    outside = &outside * &(&one - &chi);
                }
                &one - &outside
            }
            Node::MonomialJet {
                y,
                order,
                coefficient,
            } => {
                // c_j = z (x − y)^(α−j) / (j! (α − j)!)
                let alpha = *order as usize;
                let h = x - *y;
                let mut fact = vec![T::one(); alpha + 1];
                for i in 1..=alpha {
                    fact[i] = fact[i - 1] * T::of_usize(i);
                }
                let coeffs = (0..=n)
                    .map(|j| {
                        if j > alpha {
                            T::zero()
                        } else {
                            *coefficient * h.powi((alpha - j) as i32) / (fact[j] * fact[alpha - j])
                        }
                    })
                    .collect();
                Jet::from_coeffs(coeffs)
            }
            Node::Constant(c) => Jet::constant(*c, n),
            Node::Affine {
                inner,
                scale,
                shift,
            } => inner.jet(*scale * x + *shift, n).affine_chain(*scale),
            Node::Sum(terms) => terms
                .iter()
                .fold(Jet::zero(n), |acc, t| &acc + &t.jet(x, n)),
            Node::Product(factors) => {
                let mut acc = Jet::constant(T::one(), n);
                for f in factors {
                    acc = &acc * &f.jet(x, n);
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Node::Scaled { factor, inner } => inner.jet(x, n).scale(*factor),
        }
    }

    /// `Σ_{d≤k} sup_K |∂^d φ|` on a grid of `density` points per unit length.
    pub fn seminorm(&self, spec: &SeminormSpec<T>, density: usize) -> Result<T> {
        let sups = sup_derivatives(self, &spec.set, spec.k, density)?;
        Ok(sups.into_iter().fold(T::zero(), |a, b| a + b))
    }

    /// Grid-aligned cover of `{x : |φ(x)| > tol}`, clipped to the support hint.
    pub fn numeric_support(&self, tol: T, density: usize) -> CompactSet<T> {
        let omega = Omega::<T>::default();
        let (lo, hi) = match self.support {
            SupportHint::Empty => return CompactSet::empty(),
            SupportHint::Interval { lo, hi } => (lo, hi),
            SupportHint::Unbounded => (omega.lo, omega.hi),
        };
        if lo == hi {
            return if self.value(lo).abs() > tol {
                CompactSet::point(lo)
            } else {
                CompactSet::empty()
            };
        }
        let n = ((hi - lo) * T::of_usize(density))
            .ceil()
            .to_usize()
            .unwrap_or(1)
            .max(2);
        let step = (hi - lo) / T::of_usize(n);
        let xs: Vec<T> = (0..=n)
            .map(|i| {
                if i == n {
                    hi
                } else {
                    lo + step * T::of_usize(i)
                }
            })
            .collect();
        let flagged: Vec<bool> = xs.iter().map(|&x| self.value(x).abs() > tol).collect();
        let mut intervals = Vec::new();
        let mut i = 0;
        while i <= n {
            if !flagged[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i <= n && flagged[i] {
                i += 1;
            }
            let a = xs[start.saturating_sub(1)];
            let b = xs[i.min(n)];
            intervals.push((a, b));
        }
        CompactSet::from_intervals(intervals).expect("grid intervals are ordered")
    }

    /// Adaptive quadrature of `φ` over `[lo, hi]`, restricted to the support hint.
    pub fn integrate(&self, lo: T, hi: T, opts: &QuadOptions) -> Result<T> {
        let (a, b) = match self.support {
            SupportHint::Empty => return Ok(T::zero()),
            SupportHint::Interval { lo: s, hi: e } => (lo.max(s), hi.min(e)),
            SupportHint::Unbounded => (lo, hi),
        };
        if a >= b {
            return Ok(T::zero());
        }
        Ok(quad::integrate(|x| self.value(x), a, b, opts)?.value)
    }

    pub fn to_expr(&self) -> Expr<T> {
        match &*self.node {
            Node::Zero => Expr::Zero,
            Node::StandardBump { center, radius } => Expr::StandardBump {
                center: *center,
                radius: *radius,
            },
            Node::ConvBump(d) => Expr::ConvBump {
                a: d.a.clone(),
                level: d.level,
            },
            Node::Cutoff { set, margin } => Expr::Cutoff {
                set: set.clone(),
                margin: *margin,
            },
            Node::MonomialJet {
                y,
                order,
                coefficient,
            } => Expr::MonomialJet {
                y: *y,
                order: *order,
                coefficient: *coefficient,
            },
            Node::Constant(c) => Expr::Constant { value: *c },
            Node::Affine {
                inner,
                scale,
                shift,
            } => Expr::Affine {
                inner: Box::new(inner.to_expr()),
                scale: *scale,
                shift: *shift,
            },
            Node::Sum(t) => Expr::Sum {
                terms: t.iter().map(Self::to_expr).collect(),
            },
            Node::Product(f) => Expr::Product {
                factors: f.iter().map(Self::to_expr).collect(),
            },
            Node::Scaled { factor, inner } => Expr::Scaled {
                factor: *factor,
                inner: Box::new(inner.to_expr()),
            },
        }
    }

    pub fn from_expr(expr: &Expr<T>) -> Result<Self> {
        Ok(match expr {
            Expr::Zero => Self::zero(),
            Expr::StandardBump { center, radius } => Self::standard_bump(*center, *radius)?,
            Expr::ConvBump { a, level } => Self::conv_bump(a, *level)?,
            Expr::Cutoff { set, margin } => Self::cutoff(set, *margin)?,
            Expr::MonomialJet {
                y,
                order,
                coefficient,
            } => Self::monomial_jet(*y, *order, *coefficient),
            Expr::Constant { value } => Self::constant(*value),
            Expr::Affine {
                inner,
                scale,
                shift,
            } => Self::from_expr(inner)?.affine(*scale, *shift)?,
            Expr::Sum { terms } => {
                Self::sum(terms.iter().map(Self::from_expr).collect::<Result<_>>()?)
            }
            Expr::Product { factors } => {
                Self::product(factors.iter().map(Self::from_expr).collect::<Result<_>>()?)
            }
            Expr::Scaled { factor, inner } => Self::from_expr(inner)?.scale(*factor),
        })
    }
}

impl<T: Scalar> From<TestFn<T>> for Expr<T> {
    fn from(f: TestFn<T>) -> Self {
        f.to_expr()
    }
}

impl<T: Scalar> TryFrom<Expr<T>> for TestFn<T> {
    type Error = Error;
    fn try_from(e: Expr<T>) -> Result<Self> {
        Self::from_expr(&e)
    }
}

#[cfg(test)]
mod tests;
