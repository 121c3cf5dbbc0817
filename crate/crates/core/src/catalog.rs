//! The concrete functionals with their claimed class data.

use serde::{Deserialize, Serialize};

use crate::compact::CompactSet;
use crate::demidef::{Gamma, NbhdBall};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::testfn::{LinearView, SupportHint};
use crate::TestFunction;

/// Quadrature used inside functionals.
pub const QUAD: QuadOptions = QuadOptions {
    abs_tol: 1e-12,
    rel_tol: 1e-14,
    max_intervals: 50_000,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// Accepts compactly supported test functions only.
    CompactSupport,
    AllSmooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassClaim {
    LOnly,
    K,
    Linear,
}

/// Anything that maps test functions to scalars.
pub trait Apply: Send + Sync {
    fn name(&self) -> &str;
    fn domain_kind(&self) -> DomainKind;
    fn apply(&self, xi: &TestFunction) -> Result<f64>;
}

/// Bounded weight for integral functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant {
        value: f64,
    },
    /// `w(x) = |x|`.
    Abs,
    /// `height` on `[lo, hi]`, zero elsewhere.
    Box {
        lo: f64,
        hi: f64,
        height: f64,
    },
}

impl Weight {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Abs => x.abs(),
            Self::Box { lo, hi, height } => {
                if lo <= x && x <= hi {
                    height
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Box { lo, hi, .. } => Some((lo, hi)),
            _ => None,
        }
    }

    /// `sup |w|` over `set`.
    pub fn sup_on(&self, set: &CompactSet) -> f64 {
        match *self {
            Self::Constant { value } => value.abs(),
            Self::Abs => set
                .intervals()
                .iter()
                .map(|&(a, b)| a.abs().max(b.abs()))
                .fold(0.0, f64::max),
            Self::Box { height, .. } => height.abs(),
        }
    }

    /// Points where the weight is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match *self {
            Self::Abs => vec![0.0],
            _ => Vec::new(),
        }
    }
}

/// `h(x) = x` on `[−1, 1]`, `sign(x)(1 + β(|x| − 1))` outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HShape {
    pub beta: f64,
}

impl HShape {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.5..1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "h slope {beta} must lie in [1/2, 1)"
            )));
        }
        Ok(Self { beta })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            x
        } else {
            x.signum() * (1.0 + self.beta * (x.abs() - 1.0))
        }
    }
}

/// Class data asserted for a catalog entry.
#[derive(Clone, Debug, Serialize)]
pub struct Claims {
    pub gamma: Gamma,
    pub ball: NbhdBall,
    pub order: Option<u32>,
    pub support: Option<CompactSet>,
    pub class: ClassClaim,
    /// Constant in the order bound when known in closed form.
    pub constant: Option<f64>,
}

#[derive(Clone, Debug)]
enum Kind {
    SinIntegral,
    AbsWeight(Weight),
    ExpPoint { x0: f64 },
    SinPoint { y: f64 },
    SinAbsJet { y: f64 },
    ComposeH { h: HShape, base: Box<Functional> },
    WeightIntegral(Weight),
    Dirac { y: f64 },
    DiracDeriv { y: f64, order: u32 },
}

#[derive(Clone, Debug)]
pub struct Functional {
    name: String,
    kind: Kind,
    domain: DomainKind,
    pub claims: Claims,
}

fn integrate_over(f: impl Fn(f64) -> f64, lo: f64, hi: f64, kinks: &[f64]) -> Result<f64> {
    if lo >= hi {
        return Ok(0.0);
    }
    let mut cuts = vec![lo, hi];
    cuts.extend(kinks.iter().copied().filter(|&k| lo < k && k < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quad::integrate(&f, w[0], w[1], &QUAD)?.value;
    }
    Ok(total)
}

/// Endpoints of the support pieces of `xi` and its summands, so that narrow
/// pieces are never skipped by the quadrature nodes.
fn piece_breaks(xi: &TestFunction, extra: Vec<f64>) -> Vec<f64> {
    let mut out = extra;
    for (a, b) in xi.support_pieces() {
        out.push(a);
        out.push(b);
    }
    out
}

/// Points in `[a, b]` where `xi` crosses a multiple of `step` (or zero when
/// `step` is `None`), located on a 512-cell grid and refined by bisection.
fn level_crossings(xi: &TestFunction, a: f64, b: f64, step: Option<f64>) -> Vec<f64> {
    const CELLS: usize = 512;
    if a >= b {
        return Vec::new();
    }
    let level = |v: f64| match step {
        Some(s) => (v / s).floor(),
        None => (v > 0.0) as u8 as f64,
    };
    let root = |mut lo: f64, mut hi: f64, c: f64| {
        let below = xi.value(lo) < c;
        for _ in 0..52 {
            let mid = 0.5 * (lo + hi);
            if (xi.value(mid) < c) == below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut out = Vec::new();
    let (mut x0, mut l0) = (a, level(xi.value(a)));
    for i in 1..=CELLS {
        let x1 = a + (b - a) * i as f64 / CELLS as f64;
        let l1 = level(xi.value(x1));
        if l1 != l0 {
            let (lo, hi) = (l0.min(l1), l0.max(l1));
            let mut j = lo + 1.0;
            while j <= hi {
                out.push(root(x0, x1, step.map_or(0.0, |s| j * s)));
                j += 1.0;
            }
        }
        (x0, l0) = (x1, l1);
    }
    out
}

fn compact_range(xi: &TestFunction) -> Result<Option<(f64, f64)>> {
    match xi.support_hint() {
        SupportHint::Empty => Ok(None),
        SupportHint::Interval { lo, hi } => Ok(Some((lo, hi))),
        SupportHint::Unbounded => Err(Error::NotCompactlySupported),
    }
}

fn point(y: f64) -> CompactSet {
    CompactSet::point(y)
}

/// Evaluates a linear functional by distributing over sums and scalings, so
/// that `F(ξ + tη)` is computed exactly as `F(ξ) + t·F(η)`.
fn linear_walk(xi: &TestFunction, atom: &dyn Fn(&TestFunction) -> Result<f64>) -> Result<f64> {
    match xi.linear_view() {
        LinearView::Sum(terms) => {
            let mut total = 0.0;
            for t in terms {
                total += linear_walk(t, atom)?;
            }
            Ok(total)
        }
        LinearView::Scaled(c, inner) => Ok(c * linear_walk(inner, atom)?),
        LinearView::Atom => atom(xi),
    }
}

impl Functional {
    fn new(name: String, kind: Kind, domain: DomainKind, claims: Claims) -> Self {
        Self {
            name,
            kind,
            domain,
            claims,
        }
    }

    /// `ξ ↦ ∫_{−1}^{1} |sin|ξ(x)|| dx`.
    pub fn sin_integral() -> Self {
        let k = CompactSet::interval(-1.0, 1.0).expect("ordered");
        Self::new(
            "sin-integral".into(),
            Kind::SinIntegral,
            DomainKind::CompactSupport,
            Claims {
                gamma: Gamma::PiHalfLinear,
                ball: NbhdBall::new(k.clone(), 0, 1.0),
                order: Some(0),
                support: Some(k),
                class: ClassClaim::K,
                constant: Some(2.0),
            },
        )
    }

    /// `ξ ↦ ∫ |w ξ|`.
    pub fn abs_weight(w: Weight) -> Self {
        let support = w
            .support()
            .map(|(a, b)| CompactSet::interval(a, b).expect("ordered weight support"));
        Self::new(
            "abs-weight".into(),
            Kind::AbsWeight(w),
            DomainKind::CompactSupport,
            Claims {
                gamma: Gamma::linear(1.0),
                ball: NbhdBall::whole(),
                order: Some(0),
                support,
                class: ClassClaim::K,
                constant: None,
            },
        )
    }

    /// `ξ ↦ e^{|ξ(x0)|} − 1`, with `U` the unit sup-ball over `[0, a]`.
    pub fn exp_point(x0: f64, a: f64) -> Result<Self> {
        let k = CompactSet::interval(0.0, a)?;
        Ok(Self::new(
            format!("exp-point@{x0}"),
            Kind::ExpPoint { x0 },
            DomainKind::CompactSupport,
            Claims {
                gamma: Gamma::ELinear,
                ball: NbhdBall::new(k, 0, 1.0),
                order: None,
                support: Some(point(x0)),
                class: ClassClaim::LOnly,
                constant: None,
            },
        ))
    }

    /// `ξ ↦ sin|ξ(y)|`.
    pub fn sin_point(y: f64) -> Self {
        Self::new(
            format!("sin-point@{y}"),
            Kind::SinPoint { y },
            DomainKind::AllSmooth,
            Claims {
                gamma: Gamma::PiHalfLinear,
                ball: NbhdBall::new(point(y), 0, 1.0),
                order: Some(0),
                support: Some(point(y)),
                class: ClassClaim::K,
                constant: Some(1.0),
            },
        )
    }

    /// `ξ ↦ sin|ξ(y)| + |ξ′(y)|`.
    pub fn sin_abs_jet(y: f64) -> Self {
        Self::new(
            format!("sin-abs-jet@{y}"),
            Kind::SinAbsJet { y },
            DomainKind::AllSmooth,
            Claims {
                gamma: Gamma::PiHalfLinear,
                ball: NbhdBall::new(point(y), 1, 1.0),
                order: Some(1),
                support: Some(point(y)),
                class: ClassClaim::K,
                constant: Some(1.0),
            },
        )
    }

    /// `ξ ↦ h(|base(ξ)|)` for a linear `base` bounded by 1 on its ball.
    pub fn compose_h(h: HShape, base: Functional) -> Result<Self> {
        if base.claims.class != ClassClaim::Linear {
            return Err(Error::InvalidArgument(format!(
                "{} is not linear",
                base.name
            )));
        }
        let claims = Claims {
            gamma: Gamma::linear(1.0),
            ball: base.claims.ball.clone(),
            order: base.claims.order,
            support: base.claims.support.clone(),
            class: ClassClaim::K,
            constant: None,
        };
        Ok(Self::new(
            format!("compose-h@{}", h.beta),
            Kind::ComposeH {
                h,
                base: Box::new(base),
            },
            DomainKind::CompactSupport,
            claims,
        ))
    }

    /// `ξ ↦ ∫ w ξ`. The ball is `{ξ : sup_K |ξ| ≤ 1/(M|K|)}` with `K` the
    /// weight's support (or `[−1, 1]`) and `M = sup_K |w|`, so that
    /// `|∫ w η| ≤ 1` on it whenever `η` lives on `K`.
    pub fn weight_integral(w: Weight) -> Self {
        let support = w
            .support()
            .map(|(a, b)| CompactSet::interval(a, b).expect("ordered weight support"));
        let k = support
            .clone()
            .unwrap_or_else(|| CompactSet::interval(-1.0, 1.0).expect("ordered"));
        let bound = w.sup_on(&k) * k.measure();
        let eps = if bound > 0.0 { 1.0 / bound } else { 1.0 };
        Self::new(
            "weight-integral".into(),
            Kind::WeightIntegral(w),
            DomainKind::CompactSupport,
            Claims {
                gamma: Gamma::linear(1.0),
                ball: NbhdBall::new(k, 0, eps),
                order: Some(0),
                support,
                class: ClassClaim::Linear,
                constant: None,
            },
        )
    }

    /// `ξ ↦ ξ(y)`.
    pub fn dirac(y: f64) -> Self {
        Self::new(
            format!("dirac@{y}"),
            Kind::Dirac { y },
            DomainKind::AllSmooth,
            Claims {
                gamma: Gamma::linear(1.0),
                ball: NbhdBall::new(point(y), 0, 1.0),
                order: Some(0),
                support: Some(point(y)),
                class: ClassClaim::Linear,
                constant: Some(1.0),
            },
        )
    }

    /// `ξ ↦ ∂^j ξ(y)`.
    pub fn dirac_deriv(y: f64, order: u32) -> Self {
        Self::new(
            format!("dirac-deriv@{y},{order}"),
            Kind::DiracDeriv { y, order },
            DomainKind::AllSmooth,
            Claims {
                gamma: Gamma::linear(1.0),
                ball: NbhdBall::new(point(y), order, 1.0),
                order: Some(order),
                support: Some(point(y)),
                class: ClassClaim::Linear,
                constant: Some(1.0),
            },
        )
    }

    /// Unit box on `[0, 1]`; the base of the `h`-composites.
    pub fn unit_box() -> Weight {
        Weight::Box {
            lo: 0.0,
            hi: 1.0,
            height: 1.0,
        }
    }

    pub fn linear_baselines() -> Vec<Self> {
        vec![
            Self::weight_integral(Self::unit_box()),
            Self::weight_integral(Weight::Constant { value: 1.0 }),
            Self::dirac(0.0),
            Self::dirac_deriv(0.0, 1),
        ]
    }

    /// The same functional accepting compactly supported inputs only.
    pub fn restrict(&self) -> Self {
        let mut r = self.clone();
        r.name = format!("restrict({})", self.name);
        r.domain = DomainKind::CompactSupport;
        r
    }

    /// Looks up `name[@args]`, e.g. `sin-point@0.5` or `dirac-deriv@0,1`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, args) = match spec.split_once('@') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let nums = |expected: usize| -> Result<Vec<f64>> {
            let raw =
                args.ok_or_else(|| Error::InvalidArgument(format!("{name} needs @arguments")))?;
            let v = raw
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad arguments in {spec:?}")))?;
            if v.is_empty() || v.len() > expected || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("bad arguments in {spec:?}")));
            }
            Ok(v)
        };
        let no_args = || match args {
            None => Ok(()),
            Some(_) => Err(Error::InvalidArgument(format!("{name} takes no arguments"))),
        };
        match name {
            "sin-integral" => no_args().map(|_| Self::sin_integral()),
            "abs-weight" => no_args().map(|_| Self::abs_weight(Weight::Abs)),
            "weight-integral" => match args {
                None => Ok(Self::weight_integral(Self::unit_box())),
                Some(_) => {
                    let v = nums(2)?;
                    let hi = *v
                        .get(1)
                        .ok_or_else(|| Error::InvalidArgument("weight-integral@lo,hi".into()))?;
                    CompactSet::interval(v[0], hi)?;
                    Ok(Self::weight_integral(Weight::Box {
                        lo: v[0],
                        hi,
                        height: 1.0,
                    }))
                }
            },
            "exp-point" => {
                let v = nums(2)?;
                Self::exp_point(v[0], v.get(1).copied().unwrap_or(0.875))
            }
            "sin-point" => Ok(Self::sin_point(nums(1)?[0])),
            "sin-abs-jet" => Ok(Self::sin_abs_jet(nums(1)?[0])),
            "compose-h" => {
                let beta = nums(1)?[0];
                Self::compose_h(HShape::new(beta)?, Self::weight_integral(Self::unit_box()))
            }
            "dirac" => Ok(Self::dirac(nums(1)?[0])),
            "dirac-deriv" => {
                let v = nums(2)?;
                let j = v.get(1).copied().unwrap_or(1.0);
                if j < 0.0 || j.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "derivative order {j} must be a nonnegative integer"
                    )));
                }
                Ok(Self::dirac_deriv(v[0], j as u32))
            }
            _ => Err(Error::InvalidArgument(format!(
                "unknown functional {name:?}"
            ))),
        }
    }

    /// Point of evaluation for point-supported entries.
    pub fn point(&self) -> Option<f64> {
        match self.kind {
            Kind::ExpPoint { x0 } => Some(x0),
            Kind::SinPoint { y }
            | Kind::SinAbsJet { y }
            | Kind::Dirac { y }
            | Kind::DiracDeriv { y, .. } => Some(y),
            _ => None,
        }
    }

    pub fn base(&self) -> Option<&Functional> {
        match &self.kind {
            Kind::ComposeH { base, .. } => Some(base),
            _ => None,
        }
    }

    fn eval(&self, xi: &TestFunction) -> Result<f64> {
        match &self.kind {
            Kind::SinIntegral => match compact_range(xi)? {
                None => Ok(0.0),
                Some((a, b)) => {
                    let (a, b) = (a.max(-1.0), b.min(1.0));
                    let kinks = level_crossings(xi, a, b, Some(std::f64::consts::PI));
                    integrate_over(|x| xi.value(x).sin().abs(), a, b, &piece_breaks(xi, kinks))
                }
            },
            Kind::AbsWeight(w) => match compact_range(xi)? {
                None => Ok(0.0),
                Some((mut a, mut b)) => {
                    if let Some((s, e)) = w.support() {
                        a = a.max(s);
                        b = b.min(e);
                    }
                    let mut kinks = w.kinks();
                    kinks.extend(level_crossings(xi, a, b, None));
                    integrate_over(
                        |x| (w.eval(x) * xi.value(x)).abs(),
                        a,
                        b,
                        &piece_breaks(xi, kinks),
                    )
                }
            },
            Kind::ExpPoint { x0 } => Ok(xi.value(*x0).abs().exp_m1()),
            Kind::SinPoint { y } => Ok(xi.value(*y).abs().sin()),
            Kind::SinAbsJet { y } => {
                let j = xi.jet(*y, 1);
                Ok(j.value().abs().sin() + j.derivative(1).abs())
            }
            Kind::ComposeH { h, base } => Ok(h.eval(base.apply(xi)?.abs())),
            Kind::WeightIntegral(w) => linear_walk(xi, &|atom| {
                let (mut a, mut b) = match (atom.support_hint(), w.support()) {
                    (SupportHint::Empty, _) => return Ok(0.0),
                    (SupportHint::Interval { lo, hi }, _) => (lo, hi),
                    (SupportHint::Unbounded, Some(s)) => s,
                    (SupportHint::Unbounded, None) => return Err(Error::NotCompactlySupported),
                };
                if let Some((s, e)) = w.support() {
                    a = a.max(s);
                    b = b.min(e);
                }
                integrate_over(
                    |x| w.eval(x) * atom.value(x),
                    a,
                    b,
                    &piece_breaks(atom, w.kinks()),
                )
            }),
            Kind::Dirac { y } => linear_walk(xi, &|atom| Ok(atom.value(*y))),
            Kind::DiracDeriv { y, order } => {
                let j = *order as usize;
                linear_walk(xi, &|atom| {
                    if *order > atom.max_deriv() {
                        return Err(Error::DerivOrderExceeded {
                            requested: *order,
                            max: atom.max_deriv(),
                        });
                    }
                    Ok(atom.jet(*y, j).derivative(j))
                })
            }
        }
    }
}

impl Apply for Functional {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain_kind(&self) -> DomainKind {
        self.domain
    }

    fn apply(&self, xi: &TestFunction) -> Result<f64> {
        if self.domain == DomainKind::CompactSupport && !xi.is_compactly_supported() {
            return Err(Error::NotCompactlySupported);
        }
        if xi.is_structurally_zero() {
            return Ok(0.0);
        }
        self.eval(xi)
    }
}
