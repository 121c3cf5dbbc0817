//! Moduli `γ`, neighbourhood balls and the closed-form feasibility test
//! behind demi-linearity.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compact::CompactSet;
use crate::error::{Error, Result};
use crate::rng::sample_rng;
use crate::testfn::{SeminormSpec, DEFAULT_DENSITY};
use crate::TestFunction;

/// A modulus `γ ∈ C(0)`, evaluated on real `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gamma {
    /// `γ(t) = M t`.
    Linear {
        #[serde(rename = "M")]
        m: f64,
    },
    /// `γ(t) = (π/2) t`.
    PiHalfLinear,
    /// `γ(t) = e t`.
    ELinear,
    /// Piecewise-linear interpolation of `(t, γ(t))` pairs sorted by `t`.
    Custom { table: Vec<(f64, f64)> },
}

impl Gamma {
    pub fn linear(m: f64) -> Self {
        Self::Linear { m }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Linear { m } => m * t,
            Self::PiHalfLinear => std::f64::consts::FRAC_PI_2 * t,
            Self::ELinear => std::f64::consts::E * t,
            Self::Custom { table } => interpolate(table, t),
        }
    }

    /// `|γ(t)|`, the budget for `|r − 1|` and `|s|`.
    pub fn budget(&self, t: f64) -> f64 {
        self.eval(t).abs()
    }

    /// Slope `M` when `γ(t) = M t`.
    pub fn slope(&self) -> Option<f64> {
        match self {
            Self::Linear { m } => Some(*m),
            Self::PiHalfLinear => Some(std::f64::consts::FRAC_PI_2),
            Self::ELinear => Some(std::f64::consts::E),
            Self::Custom { .. } => None,
        }
    }

    /// Parses `linear:M`, `pi-half`, `e-linear`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pi-half" => Ok(Self::PiHalfLinear),
            "e-linear" => Ok(Self::ELinear),
            _ => match s.strip_prefix("linear:") {
                Some(m) => m
                    .parse()
                    .map(Self::linear)
                    .map_err(|_| Error::InvalidArgument(format!("bad slope in gamma spec {s:?}"))),
                None => Err(Error::InvalidArgument(format!("unknown gamma spec {s:?}"))),
            },
        }
    }
}

impl std::fmt::Display for Gamma {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Linear { m } => write!(f, "linear:{m}"),
            Self::PiHalfLinear => f.write_str("pi-half"),
            Self::ELinear => f.write_str("e-linear"),
            Self::Custom { table } => write!(f, "custom[{}]", table.len()),
        }
    }
}

fn interpolate(table: &[(f64, f64)], t: f64) -> f64 {
    match table.iter().position(|&(x, _)| x >= t) {
        None => table.last().map_or(f64::NAN, |p| p.1),
        Some(0) => table[0].1,
        Some(i) => {
            let (x0, y0) = table[i - 1];
            let (x1, y1) = table[i];
            y0 + (y1 - y0) * (t - x0) / (x1 - x0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCheck {
    pub pass: bool,
    pub violating_t: Option<f64>,
}

/// Checks `γ(0) = 0`, `|γ(t)| ≥ |t|` on `[−1, 1]` and decay along `2^{−j}`.
pub fn gamma_validate(gamma: &Gamma, samples: usize, seed: u64) -> GammaCheck {
    let fail = |t| GammaCheck {
        pass: false,
        violating_t: Some(t),
    };
    if gamma.eval(0.0) != 0.0 {
        return fail(0.0);
    }
    let n = samples.max(1);
    let grid = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64);
    let mut rng = sample_rng(seed, 0);
    let random: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    for t in grid.chain(random) {
        if !(gamma.budget(t) >= t.abs()) {
            return fail(t);
        }
    }
    // continuity at 0: the tail of the dyadic sequence must shrink
    let tail = (40..60)
        .map(|j| gamma.budget(0.5f64.powi(j)))
        .fold(0.0, f64::max);
    if !(tail <= 1e-6) {
        return fail(0.5f64.powi(40));
    }
    GammaCheck {
        pass: true,
        violating_t: None,
    }
}

/// `U = {ξ : ‖w·ξ‖_{K,k} ≤ ε}`; `w` is absent for plain seminorm balls.
///
/// A ball over the empty compact is the whole space.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NbhdBall {
    pub spec: SeminormSpec,
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<TestFunction>,
}

impl NbhdBall {
    pub fn new(set: CompactSet, k: u32, eps: f64) -> Self {
        Self {
            spec: SeminormSpec::new(set, k),
            eps,
            weight: None,
        }
    }

    pub fn whole() -> Self {
        Self::new(CompactSet::empty(), 0, 1.0)
    }

    pub fn is_whole(&self) -> bool {
        self.spec.set.is_empty()
    }

    /// Pulled-back ball `{ξ : χξ ∈ U}`.
    pub fn pulled_back(&self, chi: &TestFunction) -> Self {
        let weight = match &self.weight {
            Some(w) => w.mul(chi),
            None => chi.clone(),
        };
        Self {
            spec: self.spec.clone(),
            eps: self.eps,
            weight: Some(weight),
        }
    }

    pub fn norm_with(&self, xi: &TestFunction, grid_pts: usize) -> Result<f64> {
        if self.is_whole() {
            return Ok(0.0);
        }
        match &self.weight {
            Some(w) => w.mul(xi).seminorm(&self.spec, grid_pts),
            None => xi.seminorm(&self.spec, grid_pts),
        }
    }

    pub fn norm(&self, xi: &TestFunction) -> Result<f64> {
        self.norm_with(xi, DEFAULT_DENSITY)
    }

    pub fn contains(&self, xi: &TestFunction) -> Result<bool> {
        Ok(self.norm(xi)? <= self.eps)
    }
}

/// Margins of both feasibility systems plus a witness pair `(r, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityMargin {
    pub margin_l: f64,
    pub margin_k: f64,
    pub witness_r: Complex64,
    pub witness_s: Complex64,
}

fn margins(fx: Complex64, fu: Complex64, fxtu: Complex64, g: f64) -> (f64, f64, Complex64) {
    let delta = fxtu - fx;
    let gap = delta.norm();
    (
        g * (fx.norm() + fu.norm()) - gap,
        g * fu.norm() - gap,
        delta,
    )
}

/// Solvability of `f(x + tu) = r f(x) + s f(u)` with `|r − 1|, |s| ≤ g`.
///
/// The reachable set of `r f(x) + s f(u)` is the disk of radius
/// `g(|f(x)| + |f(u)|)` about `f(x)`; the witness splits the gap between
/// both terms in proportion to their moduli.
pub fn feasible_l(
    fx: impl Into<Complex64>,
    fu: impl Into<Complex64>,
    fxtu: impl Into<Complex64>,
    g: f64,
) -> FeasibilityMargin {
    let (fx, fu, fxtu) = (fx.into(), fu.into(), fxtu.into());
    let (margin_l, margin_k, delta) = margins(fx, fu, fxtu, g);
    let total = fx.norm() + fu.norm();
    let (mut r, mut s) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    if delta.norm() > 0.0 && total > 0.0 {
        let lambda = delta / total;
        if fx.norm() > 0.0 {
            r += lambda * fx.conj() / fx.norm();
        }
        if fu.norm() > 0.0 {
            s = lambda * fu.conj() / fu.norm();
        }
    }
    FeasibilityMargin {
        margin_l,
        margin_k,
        witness_r: r,
        witness_s: s,
    }
}

/// Solvability of `f(x + tu) = f(x) + s f(u)` with `|s| ≤ g`.
pub fn feasible_k(
    fx: impl Into<Complex64>,
    fu: impl Into<Complex64>,
    fxtu: impl Into<Complex64>,
    g: f64,
) -> FeasibilityMargin {
    let (fx, fu, fxtu) = (fx.into(), fu.into(), fxtu.into());
    let (margin_l, margin_k, delta) = margins(fx, fu, fxtu, g);
    let s = if fu.norm() > 0.0 {
        delta / fu
    } else {
        Complex64::new(0.0, 0.0)
    };
    FeasibilityMargin {
        margin_l,
        margin_k,
        witness_r: Complex64::new(1.0, 0.0),
        witness_s: s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn l_examples() {
        let m = feasible_l(1.0, 1.0, 1.1, 0.1);
        assert_relative_eq!(m.margin_l, 0.1, epsilon = 1e-15);
        assert!(m.margin_l >= 0.0);
        let m = feasible_l(0.0, 0.0, 0.5, 1.0);
        assert_eq!(m.margin_l, -0.5);
        for &(fx, fu, t) in &[(2.0, -3.0, 0.3), (-1.0, 0.5, -0.9), (0.0, 4.0, 1.0)] {
            let m = feasible_l(fx, fu, fx + t * fu, f64::abs(t));
            assert!(m.margin_l >= 0.0 && m.margin_k >= -1e-15);
        }
    }

    #[test]
    fn l_witness_matches_brute_force_disk_search() {
        let (fx, fu, fxtu, g) = (1.0, 1.0, 1.1, 0.1);
        let mut found = false;
        let n = 200;
        'outer: for i in 0..=n {
            for j in 0..=n {
                let r = 1.0 - g + 2.0 * g * i as f64 / n as f64;
                let s = -g + 2.0 * g * j as f64 / n as f64;
                if (r * fx + s * fu - fxtu).abs() < 1e-12 {
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found);
        let w = feasible_l(fx, fu, fxtu, g);
        assert!((w.witness_r - 1.0).norm() <= g + 1e-15 && w.witness_s.norm() <= g + 1e-15);
        assert_relative_eq!(
            (w.witness_r * fx + w.witness_s * fu).re,
            fxtu,
            max_relative = 1e-12
        );
    }

    #[test]
    fn k_examples() {
        let m = feasible_k(5.0, 2.0, 5.3, 0.2);
        assert_relative_eq!(m.margin_k, 0.1, epsilon = 1e-12);
        assert_relative_eq!(m.witness_s.re, 0.15, epsilon = 1e-12);
        let m = feasible_k(3.0, 0.0, 3.0, 0.5);
        assert_eq!((m.margin_k, m.witness_s.re), (0.0, 0.0));
        assert_eq!(feasible_k(0.0, 1.0, 2.0, 1.0).margin_k, -1.0);
    }

    #[test]
    fn complex_inputs() {
        let fx = Complex64::new(1.0, 2.0);
        let fu = Complex64::new(-0.5, 0.5);
        let fxtu = fx + Complex64::new(0.0, 0.3) * fu;
        let m = feasible_l(fx, fu, fxtu, 0.3);
        assert!(m.margin_l >= 0.0);
        let back = m.witness_r * fx + m.witness_s * fu;
        assert!((back - fxtu).norm() <= 1e-12 * fxtu.norm());
    }

    #[test]
    fn gamma_checks() {
        assert!(gamma_validate(&Gamma::linear(1.0), 256, 1).pass);
        let bad = gamma_validate(&Gamma::linear(0.5), 256, 1);
        assert!(!bad.pass && bad.violating_t.unwrap() != 0.0);
        assert!(gamma_validate(&Gamma::PiHalfLinear, 256, 1).pass);
        let sqrt = Gamma::Custom {
            table: (0..=64)
                .map(|i| -1.0 + i as f64 / 32.0)
                .map(|t: f64| (t, t.signum() * t.abs().sqrt()))
                .collect(),
        };
        assert!(gamma_validate(&sqrt, 256, 3).pass);
        assert_eq!(Gamma::parse("linear:2.5").unwrap(), Gamma::linear(2.5));
        assert!(Gamma::parse("quadratic").is_err());
        for g in [Gamma::linear(2.5), Gamma::PiHalfLinear, Gamma::ELinear] {
            assert_eq!(Gamma::parse(&g.to_string()).unwrap(), g);
        }
    }

    #[test]
    fn gamma_json_shape() {
        let s = serde_json::to_string(&Gamma::linear(2.0)).unwrap();
        assert_eq!(s, r#"{"kind":"linear","M":2.0}"#);
    }

    #[test]
    fn balls() {
        let psi = TestFunction::standard_bump(0.0, 1.0).unwrap();
        let u = NbhdBall::new(CompactSet::interval(-1.0, 1.0).unwrap(), 0, 0.5);
        assert!(u.contains(&psi).unwrap());
        assert!(!u.contains(&psi.scale(2.0)).unwrap());
        assert!(u.contains(&TestFunction::zero()).unwrap());
        assert!(NbhdBall::whole().contains(&psi.scale(1e9)).unwrap());
    }
}
