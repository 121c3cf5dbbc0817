//! Sampling-based falsification of class membership, and the scalar
//! characterization of `𝒦_{M,ε}` functions of one variable.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Apply, ClassClaim, DomainKind};
use crate::compact::{CompactSet, Omega};
use crate::demidef::{feasible_l, Gamma, NbhdBall};
use crate::error::{Error, Result};
use crate::probe::{Probe, ProbeFamily};
use crate::rng::sample_rng;

/// Margins below this are genuine counterexamples.
pub const PASS_TOL: f64 = -1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    pub samples: usize,
    pub seed: u64,
    /// Grid points per interval when normalizing `η` into `U`.
    pub norm_grid: usize,
    /// Number of worst triples kept in the report.
    pub witnesses: usize,
    /// Overrides the default probe family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ProbeFamily>,
}

impl Default for CertConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            norm_grid: 512,
            witnesses: 5,
            family: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: u64,
    pub xi: Probe,
    pub eta: Probe,
    pub t: f64,
    pub fx: f64,
    pub fu: f64,
    pub fxtu: f64,
    pub margin_l: f64,
    pub margin_k: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertReport {
    pub name: String,
    pub class: ClassClaim,
    pub gamma: Gamma,
    pub ball: NbhdBall,
    pub samples: usize,
    /// Triples with non-finite values (excluded from the margins).
    pub nonfinite: usize,
    pub min_margin_l: f64,
    pub min_margin_k: f64,
    pub pass_l: bool,
    pub pass_k: bool,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub seed: u64,
}

/// Probes around `focus` (inflated by 1.5 and clipped to `Ω`), or around the
/// origin when no focus is known.
pub fn default_family(domain: DomainKind, focus: Option<&CompactSet>) -> ProbeFamily {
    let omega = Omega::<f64>::default();
    let (lo, hi) = focus
        .and_then(CompactSet::hull)
        .map_or((-3.0, 3.0), |(a, b)| (a - 1.5, b + 1.5));
    let pad = 1e-3 * (omega.hi - omega.lo);
    ProbeFamily::window(
        lo.max(omega.lo + pad),
        hi.min(omega.hi - pad),
        domain == DomainKind::AllSmooth,
    )
}

struct Triple {
    index: u64,
    xi: Probe,
    eta: Probe,
    t: f64,
}

fn draw_triple(
    family: &ProbeFamily,
    ball: &NbhdBall,
    cfg: &CertConfig,
    index: u64,
    compact_only: bool,
) -> Result<Triple> {
    let mut rng = sample_rng(cfg.seed, index);
    let draw = |rng: &mut _| {
        if compact_only {
            family.draw_compact(rng)
        } else {
            family.draw(rng)
        }
    };
    let xi = draw(&mut rng);
    let eta_raw = draw(&mut rng);
    let t = if rng.gen_bool(0.75) {
        rng.gen_range(-1.0..=1.0)
    } else {
        let m = rng.gen_range((1e-6f64).ln()..=0.0).exp();
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let shrink = 1.0 - rng.gen::<f64>();
    let norm = ball.norm_with(&eta_raw.build()?, cfg.norm_grid)?;
    let eta = if norm > 0.0 {
        eta_raw.scaled(ball.eps / norm * shrink)
    } else {
        eta_raw
    };
    Ok(Triple { index, xi, eta, t })
}

/// Draws `(ξ, η, t)` with `η ∈ U` and `|t| ≤ 1` and records both feasibility
/// margins of `F(ξ + tη)` against `F(ξ)`, `F(η)` under the budget `|γ(t)|`.
pub fn certify_class(
    f: &dyn Apply,
    class: ClassClaim,
    gamma: &Gamma,
    ball: &NbhdBall,
    cfg: &CertConfig,
) -> Result<CertReport> {
    if !(ball.eps > 0.0) || !ball.eps.is_finite() {
        return Err(Error::ProbeError(format!(
            "ball radius {} admits no nonzero probe",
            ball.eps
        )));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument(
            "certification needs at least one sample".into(),
        ));
    }
    let family = cfg.family.clone().unwrap_or_else(|| {
        let focus = if ball.is_whole() {
            None
        } else {
            Some(&ball.spec.set)
        };
        default_family(f.domain_kind(), focus)
    });
    if family.windows.is_empty() {
        return Err(Error::ProbeError("probe family has no window".into()));
    }
    let compact_only = f.domain_kind() == DomainKind::CompactSupport;

    let outcomes: Vec<Result<(Triple, [f64; 5])>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let tr = draw_triple(&family, ball, cfg, i, compact_only)?;
            let xi = tr.xi.build()?;
            let eta = tr.eta.build()?;
            let fx = f.apply(&xi)?;
            let fu = f.apply(&eta)?;
            let fxtu = f.apply(&xi.add(&eta.scale(tr.t)))?;
            let m = feasible_l(fx, fu, fxtu, gamma.budget(tr.t));
            Ok((tr, [fx, fu, fxtu, m.margin_l, m.margin_k]))
        })
        .collect();

    let mut min_l = f64::INFINITY;
    let mut min_k = f64::INFINITY;
    let mut nonfinite = 0;
    let mut ranked = Vec::new();
    for o in outcomes {
        let (tr, v) = o?;
        if v.iter().any(|x| !x.is_finite()) {
            nonfinite += 1;
            continue;
        }
        min_l = min_l.min(v[3]);
        min_k = min_k.min(v[4]);
        let key = if class == ClassClaim::LOnly {
            v[3]
        } else {
            v[4]
        };
        ranked.push((key, tr, v));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.index.cmp(&b.1.index)));
    let witnesses = ranked
        .into_iter()
        .take(cfg.witnesses)
        .map(|(_, tr, v)| Witness {
            index: tr.index,
            xi: tr.xi,
            eta: tr.eta,
            t: tr.t,
            fx: v[0],
            fu: v[1],
            fxtu: v[2],
            margin_l: v[3],
            margin_k: v[4],
        })
        .collect();
    let pass_l = min_l >= PASS_TOL;
    let pass_k = min_k >= PASS_TOL;
    Ok(CertReport {
        name: f.name().to_string(),
        class,
        gamma: gamma.clone(),
        ball: ball.clone(),
        samples: cfg.samples,
        nonfinite,
        min_margin_l: min_l,
        min_margin_k: min_k,
        pass_l,
        pass_k,
        pass: if class == ClassClaim::LOnly {
            pass_l
        } else {
            pass_k
        },
        witnesses,
        seed: cfg.seed,
    })
}

/// A real scalar function `g` with `g(0) = 0`, inspected on `[−ε, ε]`.
pub struct ScalarFnProbe {
    pub name: String,
    pub g: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub eps: f64,
    /// Uniform points on `[−ε, ε]`.
    pub grid: usize,
}

impl ScalarFnProbe {
    pub fn new(name: &str, eps: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.to_string(),
            g: Box::new(g),
            eps,
            grid: 2001,
        }
    }

    /// Nonzero increments `u` with `|u| ≤ ε`: the uniform grid plus dyadic
    /// points approaching 0.
    fn increments(&self) -> Vec<f64> {
        let n = self.grid.max(3);
        let mut us: Vec<f64> = (0..n)
            .map(|i| -self.eps + 2.0 * self.eps * i as f64 / (n - 1) as f64)
            .collect();
        for j in 1..=40 {
            let u = self.eps * 0.5f64.powi(j);
            us.push(u);
            us.push(-u);
        }
        us.retain(|&u| u != 0.0);
        us
    }

    fn max_jump(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let xs: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        xs.windows(2)
            .map(|w| ((self.g)(w[1]) - (self.g)(w[0])).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarCheck {
    pub name: String,
    pub eps: f64,
    pub m: f64,
    /// Max jump between adjacent samples at `n` and `4n` points.
    pub jumps: (f64, f64),
    pub continuity: bool,
    /// First sampled zero in `0 < |z| ≤ ε`, if any.
    pub zero_at: Option<f64>,
    pub no_zero: bool,
    pub inf_ratio: f64,
    pub inf_positive: bool,
    pub sup_quotient: f64,
    pub sup_finite: bool,
    pub min_margin_k: f64,
    /// `(x, u, t)` attaining `min_margin_k`.
    pub worst: (f64, f64, f64),
    pub k_feasible: bool,
    /// Whether `g′(z₀) ≠ 0` was verified for some complex `z₀`. Only real
    /// samples are taken and `g` need not be holomorphic, so this is always
    /// `false`; `pass` does not depend on it.
    pub derivative_hypothesis_checked: bool,
    pub pass: bool,
}

fn scalar_stats(p: &ScalarFnProbe) -> (Option<f64>, f64, f64) {
    let g = &p.g;
    let us = p.increments();
    let zero_at = us.iter().copied().find(|&u| g(u) == 0.0);
    let inf_ratio = us
        .iter()
        .map(|&u| (g(u) / u).abs())
        .fold(f64::INFINITY, f64::min);
    let zs: Vec<f64> = (0..=400)
        .map(|i| -4.0 * p.eps + 8.0 * p.eps * i as f64 / 400.0)
        .collect();
    let mut sup = 0.0f64;
    for &z in &zs {
        let gz = g(z);
        for &u in &us {
            sup = sup.max(((g(z + u) - gz) / u).abs());
        }
    }
    (zero_at, inf_ratio, sup)
}

/// Evaluates continuity, absence of zeros, `inf |g(u)/u| > 0`, a finite
/// difference-quotient bound and direct `𝒦` feasibility with modulus `M t`.
pub fn check_scalar_k(p: &ScalarFnProbe, m: f64) -> ScalarCheck {
    let g = &p.g;
    let (n, span) = (p.grid.max(3), 4.0 * p.eps);
    let jumps = (p.max_jump(-span, span, n), p.max_jump(-span, span, 4 * n));
    let continuity = jumps.1 <= 0.6 * jumps.0 + 1e-12;
    let (zero_at, inf_ratio, sup_quotient) = scalar_stats(p);

    let all_us = p.increments();
    let zeros = all_us.iter().copied().filter(|&u| g(u) == 0.0);
    let us: Vec<f64> = all_us
        .iter()
        .copied()
        .step_by((all_us.len() / 160).max(1))
        .chain(all_us.iter().copied().rev().take(80))
        .chain(zeros)
        .collect();
    let xs: Vec<f64> = (0..=200)
        .map(|i| -span + 2.0 * span * i as f64 / 200.0)
        .collect();
    let ts: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let mut min_margin = f64::INFINITY;
    let mut worst = (0.0, 0.0, 0.0);
    for &x in &xs {
        let gx = g(x);
        for &u in &us {
            let gu = g(u).abs();
            for &t in &ts {
                let margin = m * t.abs() * gu - (g(x + t * u) - gx).abs();
                if margin < min_margin {
                    min_margin = margin;
                    worst = (x, u, t);
                }
            }
        }
    }
    let no_zero = zero_at.is_none();
    let inf_positive = inf_ratio > 1e-12;
    let sup_finite = sup_quotient.is_finite();
    let k_feasible = min_margin >= PASS_TOL;
    ScalarCheck {
        name: p.name.clone(),
        eps: p.eps,
        m,
        jumps,
        continuity,
        zero_at,
        no_zero,
        inf_ratio,
        inf_positive,
        sup_quotient,
        sup_finite,
        min_margin_k: min_margin,
        worst,
        k_feasible,
        derivative_hypothesis_checked: false,
        pass: continuity && no_zero && inf_positive && sup_finite && k_feasible,
    }
}

/// `M = sup |(g(z+u) − g(z))/u| / inf |g(u)/u|` over the probe grids.
pub fn estimate_m(p: &ScalarFnProbe) -> Result<f64> {
    let (_, inf_ratio, sup) = scalar_stats(p);
    if !(inf_ratio > 1e-12) {
        return Err(Error::DegenerateG(inf_ratio));
    }
    Ok(sup / inf_ratio)
}
