//! Order bounds `|F(ξ)| ≤ C Σ_{d≤k} sup_K |ξ^{(d)}|`, the scaling condition,
//! the growth counterexample, and point-supported representations.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Apply, Functional};
use crate::certify::{default_family, PASS_TOL};
use crate::compact::CompactSet;
use crate::demidef::Gamma;
use crate::error::{Error, Result};
use crate::probe::{Component, Probe, ProbeFamily};
use crate::rng::sample_rng;
use crate::testfn::sup_derivatives;
use crate::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConfig {
    pub probes: usize,
    pub seed: u64,
    /// Grid points per interval for seminorms.
    pub grid_pts: usize,
    /// Number of sweep factors `λ`, log-spaced over `[1, 10³]`.
    pub sweep: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            probes: 128,
            seed: 0,
            grid_pts: 2048,
            sweep: 13,
        }
    }
}

impl BoundConfig {
    fn lambdas(&self) -> Vec<f64> {
        let n = self.sweep.max(4);
        (0..n)
            .map(|i| 10f64.powf(3.0 * i as f64 / (n - 1) as f64))
            .collect()
    }

    /// Index of the first sweep factor `≥ 10²`.
    fn top_decade(&self) -> usize {
        self.lambdas()
            .iter()
            .position(|&l| l >= 100.0 - 1e-9)
            .expect("sweep reaches 10^3")
    }
}

fn windows(set: &CompactSet) -> Result<Vec<(f64, f64)>> {
    let w: Vec<(f64, f64)> = set
        .intervals()
        .iter()
        .copied()
        .filter(|(a, b)| b > a)
        .collect();
    if w.is_empty() {
        return Err(Error::InvalidArgument(
            "compact set has no interior for probes".into(),
        ));
    }
    Ok(w)
}

/// Plateaus filling each interval of `set`, with thin collars.
fn filling_plateaus(set: &CompactSet, amplitude: f64) -> Vec<Probe> {
    set.intervals()
        .iter()
        .filter(|(a, b)| b > a)
        .map(|&(a, b)| {
            let m = (b - a) / 64.0;
            Probe::new(vec![Component::Plateau {
                lo: a + 2.0 * m,
                hi: b - 2.0 * m,
                margin: m,
                amplitude,
            }])
        })
        .collect()
}

fn ratio(value: f64, norm: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else if norm > 0.0 {
        value.abs() / norm
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub set: CompactSet,
    pub k: u32,
    pub c: f64,
    pub probes: usize,
    pub min_slack: f64,
    pub worst: Option<Probe>,
    pub pass: bool,
}

/// `min C‖ξ‖_{K,k} − |F(ξ)|` over random probes supported in `K`.
pub fn check_bound(
    f: &dyn Apply,
    set: &CompactSet,
    k: u32,
    c: f64,
    cfg: &BoundConfig,
) -> Result<BoundCheck> {
    let family = ProbeFamily::new(windows(set)?, false).with_radius(0.02, 2.0);
    let probes: Vec<Probe> = filling_plateaus(set, 1e-2)
        .into_iter()
        .chain((0..cfg.probes as u64).map(|i| family.draw_compact(&mut sample_rng(cfg.seed, i))))
        .collect();
    let slacks: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let xi = p.build()?;
            let norm: f64 = sup_derivatives(&xi, set, k, cfg.grid_pts)?.iter().sum();
            Ok(c * norm - f.apply(&xi)?.abs())
        })
        .collect::<Result<_>>()?;
    let (mut min_slack, mut worst) = (f64::INFINITY, None);
    for (s, p) in slacks.into_iter().zip(&probes) {
        if !(s >= min_slack) {
            min_slack = s;
            worst = Some(p.clone());
        }
    }
    Ok(BoundCheck {
        set: set.clone(),
        k,
        c,
        probes: probes.len(),
        min_slack,
        worst,
        pass: min_slack >= PASS_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub set: CompactSet,
    pub k: u32,
    pub c: f64,
    pub empirical_sup_ratio: f64,
    pub probes: usize,
}

/// Running sup of the ratio for every order, one row per sweep factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub lambdas: Vec<f64>,
    /// `curves[k][i]`: sup ratio against `‖·‖_{K,k}` over all probes and
    /// sweep factors up to `lambdas[i]`.
    pub curves: Vec<Vec<f64>>,
}

impl SweepCurve {
    fn stable(&self, k: usize, top: usize) -> bool {
        let c = &self.curves[k];
        c.iter().all(|v| v.is_finite()) && c[c.len() - 1] <= 1.05 * c[top]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FitResult {
    Fit { fit: BoundFit, sweep: SweepCurve },
    NoFit { sweep: SweepCurve },
}

impl FitResult {
    pub fn fit(&self) -> Option<&BoundFit> {
        match self {
            Self::Fit { fit, .. } => Some(fit),
            Self::NoFit { .. } => None,
        }
    }
}

/// A probe together with the point it is concentrated toward in the sweep.
type Pivoted = (Probe, f64);

/// Off-center bumps around 15 interior pivots of each interval, so that the
/// concentrated probe has non-vanishing derivatives at its pivot.
fn pivot_probes(set: &CompactSet, amplitude: f64) -> Vec<Pivoted> {
    let mut out = Vec::new();
    for &(a, b) in set.intervals().iter().filter(|(a, b)| b > a) {
        let (w, mid) = (b - a, 0.5 * (a + b));
        for j in 1..16 {
            let p = a + w * j as f64 / 16.0;
            let center = if p < mid { p + w / 32.0 } else { p - w / 32.0 };
            out.push((
                Probe::new(vec![Component::Bump {
                    center,
                    radius: w / 20.0,
                    amplitude,
                }]),
                p,
            ));
        }
    }
    out
}

fn random_pivoted(
    family: &ProbeFamily,
    compact: bool,
    set: &CompactSet,
    cfg: &BoundConfig,
) -> Vec<Pivoted> {
    let iv: Vec<(f64, f64)> = set.intervals().to_vec();
    (0..cfg.probes as u64)
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let p = if compact {
                family.draw_compact(&mut rng)
            } else {
                family.draw(&mut rng)
            };
            let (a, b) = iv[rng.gen_range(0..iv.len())];
            let pivot = if b > a { rng.gen_range(a..=b) } else { a };
            (p, pivot)
        })
        .collect()
}

/// For each `λ`, the amplitude scaling `λξ` of every probe and, for compactly
/// supported probes, the concentration `λξ(p + λ(x − p))` are evaluated.
fn sweep_curves(
    f: &dyn Apply,
    set: &CompactSet,
    probes: &[Pivoted],
    k_max: u32,
    cfg: &BoundConfig,
) -> Result<SweepCurve> {
    let lambdas = cfg.lambdas();
    let rows: Vec<Vec<Vec<f64>>> = probes
        .par_iter()
        .map(|(p, pivot)| {
            lambdas
                .iter()
                .map(|&l| {
                    let mut best = vec![0.0f64; k_max as usize + 1];
                    let variants = if p.is_compact() {
                        vec![p.scaled(l), p.focus(*pivot, l)]
                    } else {
                        vec![p.scaled(l)]
                    };
                    for q in variants {
                        let xi = q.build()?;
                        let sups = sup_derivatives(&xi, set, k_max, cfg.grid_pts)?;
                        let v = f.apply(&xi)?;
                        let mut norm = 0.0;
                        for (b, s) in best.iter_mut().zip(&sups) {
                            norm += s;
                            let r = if v.is_finite() {
                                ratio(v, norm)
                            } else {
                                f64::INFINITY
                            };
                            *b = b.max(r);
                        }
                    }
                    Ok(best)
                })
                .collect::<Result<Vec<Vec<f64>>>>()
        })
        .collect::<Result<_>>()?;
    let mut curves = vec![vec![0.0f64; lambdas.len()]; k_max as usize + 1];
    for row in &rows {
        for (i, per_k) in row.iter().enumerate() {
            for (k, &r) in per_k.iter().enumerate() {
                curves[k][i] = curves[k][i].max(r);
            }
        }
    }
    for c in &mut curves {
        for i in 1..c.len() {
            c[i] = c[i].max(c[i - 1]);
        }
    }
    Ok(SweepCurve { lambdas, curves })
}

/// First order `k ≤ k_max` whose sup ratio stays finite and grows by less
/// than 5% across the top decade of the sweep factor `λ ∈ [1, 10³]`.
pub fn fit_order(
    f: &dyn Apply,
    set: &CompactSet,
    k_max: u32,
    cfg: &BoundConfig,
) -> Result<FitResult> {
    let family = ProbeFamily::new(windows(set)?, false)
        .with_amplitude(1e-3, 1.0)
        .with_radius(0.02, 2.0)
        .with_max_components(2);
    let mut probes: Vec<Pivoted> = filling_plateaus(set, 1e-3)
        .into_iter()
        .zip(set.intervals().iter().filter(|(a, b)| b > a))
        .map(|(p, &(a, b))| (p, 0.5 * (a + b)))
        .collect();
    probes.extend(pivot_probes(set, 1e-3));
    probes.extend(random_pivoted(&family, true, set, cfg));
    let sweep = sweep_curves(f, set, &probes, k_max, cfg)?;
    let top = cfg.top_decade();
    for k in 0..=k_max as usize {
        if sweep.stable(k, top) {
            let c = *sweep.curves[k].last().expect("non-empty sweep");
            let fit = BoundFit {
                set: set.clone(),
                k: k as u32,
                c,
                empirical_sup_ratio: c,
                probes: probes.len(),
            };
            return Ok(FitResult::Fit { fit, sweep });
        }
    }
    Ok(FitResult::NoFit { sweep })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalBound {
    pub set: CompactSet,
    pub k: u32,
    pub c: f64,
    pub stable: bool,
    pub sweep: SweepCurve,
}

/// Sup ratio of `|F(ξ)|` to `‖ξ‖_{L,k}` over all-smooth probes, most of them
/// not supported in `L`.
pub fn global_bound(
    f: &dyn Apply,
    set: &CompactSet,
    k: u32,
    cfg: &BoundConfig,
) -> Result<GlobalBound> {
    let family = default_family(crate::catalog::DomainKind::AllSmooth, Some(set))
        .with_amplitude(1e-3, 1.0)
        .with_radius(0.02, 2.0);
    let (lo, hi) = set
        .hull()
        .ok_or_else(|| Error::InvalidArgument("empty compact set".into()))?;
    let mid = 0.5 * (lo + hi);
    let mut probes: Vec<Pivoted> = vec![
        (Probe::new(vec![Component::Constant { value: 1e-3 }]), mid),
        (Probe::new(vec![Component::Constant { value: -1e-2 }]), mid),
    ];
    probes.extend(pivot_probes(set, 1e-3));
    probes.extend(random_pivoted(&family, false, set, cfg));
    let sweep = sweep_curves(f, set, &probes, k, cfg)?;
    let stable = sweep.stable(k as usize, cfg.top_decade());
    let c = *sweep.curves[k as usize].last().expect("non-empty sweep");
    Ok(GlobalBound {
        set: set.clone(),
        k,
        c,
        stable,
        sweep,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub eps: f64,
    pub samples: usize,
    pub min_slack: f64,
    pub worst: Option<(Probe, f64)>,
    pub pass: bool,
}

/// `min |F(tξ)| − ε|t F(ξ)|` over probes and `t > 0` log-uniform in `[10⁻³, 10³]`.
pub fn check_scaling_lower(
    f: &Functional,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<ScalingReport> {
    let focus = f
        .claims
        .support
        .clone()
        .or_else(|| Some(f.claims.ball.spec.set.clone()));
    let family = default_family(crate::catalog::DomainKind::CompactSupport, focus.as_ref());
    let rows: Vec<(f64, Probe, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let p = family.draw_compact(&mut rng);
            let t = rng.gen_range((1e-3f64).ln()..=(1e3f64).ln()).exp();
            let xi = p.build()?;
            let slack = f.apply(&xi.scale(t))?.abs() - eps * (t * f.apply(&xi)?).abs();
            Ok((
                if slack.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    slack
                },
                p,
                t,
            ))
        })
        .collect::<Result<_>>()?;
    let worst = rows.into_iter().min_by(|a, b| a.0.total_cmp(&b.0));
    let min_slack = worst.as_ref().map_or(f64::INFINITY, |w| w.0);
    Ok(ScalingReport {
        eps,
        samples,
        min_slack,
        worst: worst.map(|w| (w.1, w.2)),
        pass: min_slack >= PASS_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: u64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub c: f64,
    pub k: u32,
    pub a: Vec<f64>,
    pub level: u32,
    pub x0: f64,
    pub u_x0: f64,
    pub m0: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub curve: Vec<CurvePoint>,
}

impl Counterexample {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,lhs,rhs\n");
        for p in &self.curve {
            out.push_str(&format!("{},{:e},{:e}\n", p.m, p.lhs, p.rhs));
        }
        out
    }
}

/// Maximizer of `u` on its support: grid search polished by golden section.
fn argmax(u: &TestFunction, lo: f64, hi: f64) -> f64 {
    let n = 4096;
    let xs: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let i = (0..=n)
        .max_by(|&a, &b| u.value(xs[a]).total_cmp(&u.value(xs[b])))
        .expect("grid");
    let (mut a, mut b) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n)]);
    let r = 0.618_033_988_749_894_8;
    for _ in 0..80 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if u.value(x1) >= u.value(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let mid = 0.5 * (a + b);
    if u.value(mid) >= u.value(xs[i]) {
        mid
    } else {
        xs[i]
    }
}

/// Smallest `m` with `e^{m u(x0)} − 1 > C Σ_{j≤k} sup_{[0,a]} |(mu)^{(j)}|`,
/// where `u` is the truncated box convolution and `x0` its maximizer.
pub fn counterexample_22(c: f64, k: u32, a: &[f64], level: u32) -> Result<Counterexample> {
    if level < k + 1 {
        return Err(Error::InvalidArgument(format!(
            "level {level} must exceed the order {k}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "constant {c} must be positive"
        )));
    }
    let u = TestFunction::conv_bump(a, level)?;
    let total: f64 = a[..=level as usize].iter().sum();
    let set = CompactSet::interval(0.0, total)?;
    let x0 = argmax(&u, 0.0, total);
    let f = Functional::exp_point(x0, total)?;
    let sums = sup_derivatives(&u, &set, k, 8192)?.iter().sum::<f64>();
    let side = |m: u64| -> Result<(f64, f64)> {
        let mu = u.scale(m as f64);
        Ok((f.apply(&mu)?.abs(), c * m as f64 * sums))
    };
    let violated = |m: u64| -> Result<bool> {
        let (l, r) = side(m)?;
        Ok(l > r)
    };
    let limit = 1u64 << 60;
    let mut hi = 1u64;
    while !violated(hi)? {
        if hi >= limit {
            return Err(Error::SearchExhausted(hi));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if violated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let m0 = hi;
    let (lhs, rhs) = side(m0)?;
    let end = 2 * m0.max(8);
    let ms: Vec<u64> = if end <= 256 {
        (1..=end).collect()
    } else {
        let mut v: Vec<u64> = (0..=96)
            .map(|i| (end as f64).powf(i as f64 / 96.0).round() as u64)
            .collect();
        v.push(m0);
        v.sort_unstable();
        v.dedup();
        v
    };
    let curve = ms
        .into_iter()
        .map(|m| side(m).map(|(l, r)| CurvePoint { m, lhs: l, rhs: r }))
        .collect::<Result<_>>()?;
    Ok(Counterexample {
        c,
        k,
        a: a[..=level as usize].to_vec(),
        level,
        x0,
        u_x0: u.value(x0),
        m0,
        lhs,
        rhs,
        curve,
    })
}

/// `T_k ξ = Σ_{α≤k} ξ^{(α)}(y) (x − y)^α / α!`.
pub fn taylor_polynomial(xi: &TestFunction, y: f64, k: u32) -> Result<TestFunction> {
    if k > xi.max_deriv() {
        return Err(Error::DerivOrderExceeded {
            requested: k,
            max: xi.max_deriv(),
        });
    }
    let derivs = xi.jet(y, k as usize).derivatives();
    Ok(TestFunction::sum(
        derivs
            .iter()
            .enumerate()
            .map(|(a, &d)| TestFunction::monomial_jet(y, a as u32, d))
            .collect(),
    ))
}

/// `|F(ξ) − F(T_k ξ)|`.
pub fn taylor_reduce(f: &dyn Apply, xi: &TestFunction, y: f64, k: u32) -> Result<f64> {
    let t = taylor_polynomial(xi, y, k)?;
    Ok((f.apply(xi)? - f.apply(&t)?).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRep {
    pub y: f64,
    pub k: u32,
    pub eps: f64,
    pub m: f64,
    pub z: Vec<f64>,
    /// `g[α][i] = F(z_i (x − y)^α / α!)`.
    pub g: Vec<Vec<f64>>,
    /// `g_α(ε)`.
    pub g_eps: Vec<f64>,
    pub probes: usize,
    /// `max |F(ξ) − g_0(ξ(y))|` (order 0 only).
    pub reconstruction_error: Option<f64>,
    /// `min M Σ_α |g_α(ε)/ε| |ξ^{(α)}(y)| − |F(ξ)|`.
    pub min_bound_slack: f64,
}

impl PointRep {
    /// Each `g_α` is either identically zero on the grid or has no zero in
    /// `0 < |z| ≤ ε`.
    pub fn zero_structure_ok(&self) -> bool {
        self.g.iter().all(|ga| {
            let all_zero = ga.iter().all(|&v| v == 0.0);
            let no_zero = self
                .z
                .iter()
                .zip(ga)
                .all(|(&z, &v)| z == 0.0 || z.abs() > self.eps || v != 0.0);
            all_zero || no_zero
        })
    }

    /// Largest `|g_α(z) − g_α(u)| / (A_α|z − u|)` over grid pairs, with
    /// `A_α = (M²/ε)|g_α(ε)|`; coefficients with `g_α ≡ 0` are skipped.
    pub fn lipschitz_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for (ga, &ge) in self.g.iter().zip(&self.g_eps) {
            if ga.iter().all(|&v| v == 0.0) {
                continue;
            }
            let a = self.m * self.m / self.eps * ge.abs();
            for i in 0..self.z.len() {
                for j in 0..i {
                    let q = (ga[i] - ga[j]).abs() / (a * (self.z[i] - self.z[j]).abs());
                    worst = worst.max(q);
                }
            }
        }
        worst
    }
}

fn z_grid(eps: f64) -> Vec<f64> {
    let mut z: Vec<f64> = (0..512)
        .map(|i| -8.0 * eps + 16.0 * eps * i as f64 / 511.0)
        .collect();
    for j in 0..=30 {
        let v = eps * 0.5f64.powi(j);
        z.push(v);
        z.push(-v);
    }
    z.push(0.0);
    z.sort_by(f64::total_cmp);
    z.dedup();
    z
}

fn point_family(y: f64) -> ProbeFamily {
    default_family(
        crate::catalog::DomainKind::AllSmooth,
        Some(&CompactSet::point(y)),
    )
    .with_amplitude(1e-3, 10.0)
}

/// Samples `g_α(z) = F(z(x − y)^α/α!)` and validates the reconstruction
/// `F(ξ) = g_0(ξ(y))` (order 0) and the coefficient bound (all orders).
pub fn extract_point_rep(
    f: &dyn Apply,
    y: f64,
    k: u32,
    eps: f64,
    gamma: &Gamma,
    probes: usize,
    seed: u64,
) -> Result<PointRep> {
    let m = gamma.slope().ok_or_else(|| {
        Error::InvalidArgument("point representation needs a linear modulus".into())
    })?;
    let z = z_grid(eps);
    let g_of = |a: u32, v: f64| f.apply(&TestFunction::monomial_jet(y, a, v));
    let g = (0..=k)
        .map(|a| z.iter().map(|&v| g_of(a, v)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let g_eps = (0..=k).map(|a| g_of(a, eps)).collect::<Result<Vec<_>>>()?;
    let family = point_family(y);
    let rows: Vec<(f64, f64)> = (0..probes as u64)
        .into_par_iter()
        .map(|i| {
            let xi = family.draw(&mut sample_rng(seed, i)).build()?;
            let fx = f.apply(&xi)?;
            let derivs = xi.jet(y, k as usize).derivatives();
            let recon = if k == 0 {
                (fx - g_of(0, derivs[0])?).abs()
            } else {
                0.0
            };
            let bound: f64 = derivs
                .iter()
                .zip(&g_eps)
                .map(|(d, ge)| (ge / eps).abs() * d.abs())
                .sum::<f64>()
                * m;
            Ok((recon, bound - fx.abs()))
        })
        .collect::<Result<_>>()?;
    let recon = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    if k == 0 && !(recon <= 1e-9) {
        return Err(Error::RepMismatch {
            discrepancy: recon,
            tol: 1e-9,
        });
    }
    Ok(PointRep {
        y,
        k,
        eps,
        m,
        z,
        g,
        g_eps,
        probes,
        reconstruction_error: (k == 0).then_some(recon),
        min_bound_slack: rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub a: f64,
    pub max_quotient: f64,
    /// Largest `|F(ξ) − F(η)|` over pairs with `ξ(y) = η(y)`.
    pub max_equal_gap: f64,
    pub pairs: usize,
    pub pass: bool,
}

/// `max |F(ξ) − F(η)| / |ξ(y) − η(y)|` against `A = M²|g_0(ε)|/ε`.
pub fn lipschitz_check(
    f: &dyn Apply,
    y: f64,
    eps: f64,
    m: f64,
    samples: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    let g0 = f.apply(&TestFunction::monomial_jet(y, 0, eps))?;
    let a = m * m * g0.abs() / eps;
    let family = point_family(y);
    let rows: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let xi = family.draw(&mut rng).build()?;
            if i % 4 == 3 {
                let off =
                    TestFunction::standard_bump(y + 1.0, 0.5)?.scale(rng.gen_range(-5.0..5.0));
                let eta = xi.add(&off);
                return Ok((0.0, (f.apply(&xi)? - f.apply(&eta)?).abs()));
            }
            let eta = family.draw(&mut rng).build()?;
            let dy = (xi.value(y) - eta.value(y)).abs();
            if dy == 0.0 {
                return Ok((0.0, (f.apply(&xi)? - f.apply(&eta)?).abs()));
            }
            Ok(((f.apply(&xi)? - f.apply(&eta)?).abs() / dy, 0.0))
        })
        .collect::<Result<_>>()?;
    let max_quotient = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_equal_gap = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(LipschitzReport {
        a,
        max_quotient,
        max_equal_gap,
        pairs: samples,
        pass: max_quotient <= a + 1e-9 && max_equal_gap <= 1e-12,
    })
}

/// Largest `|F(ξ)|` over probes whose jet at `y` vanishes to order `k`.
pub fn vanishing_jet_check(f: &dyn Apply, y: f64, k: u32, trials: usize, seed: u64) -> Result<f64> {
    let family = point_family(y);
    let vals: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let xi = family.draw(&mut sample_rng(seed, i)).build()?;
            let flat = xi.mul(&TestFunction::monomial_jet(y, k + 1, 1.0));
            Ok(f.apply(&flat)?.abs())
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `max |F(ξ + 2^{−j}η) − F(ξ)|` at the end of five decaying sequences.
pub fn sequential_continuity(f: &Functional, steps: u32, seed: u64) -> Result<f64> {
    let focus = f
        .claims
        .support
        .clone()
        .or_else(|| Some(f.claims.ball.spec.set.clone()));
    let family = default_family(f.domain_kind(), focus.as_ref());
    let mut worst = 0.0f64;
    for i in 0..5 {
        let mut rng = sample_rng(seed, i);
        let xi = family.draw_compact(&mut rng).build()?;
        let eta = family.draw_compact(&mut rng).build()?;
        let fx = f.apply(&xi)?;
        let tail = f.apply(&xi.add(&eta.scale(0.5f64.powi(steps as i32))))?;
        worst = worst.max((tail - fx).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{HShape, Weight};
    use approx::assert_relative_eq;

    fn quick() -> BoundConfig {
        BoundConfig {
            probes: 24,
            seed: 3,
            grid_pts: 1024,
            sweep: 10,
        }
    }

    fn k(a: f64, b: f64) -> CompactSet {
        CompactSet::interval(a, b).unwrap()
    }

    #[test]
    fn check_bound_examples() {
        assert!(
            check_bound(&Functional::sin_integral(), &k(-1.0, 1.0), 0, 2.0, &quick())
                .unwrap()
                .pass
        );
        // K = [0.5, 1.5] in the cell L = [0, 2]: M = 2, |L| = 2
        assert!(
            check_bound(
                &Functional::abs_weight(Weight::Abs),
                &k(0.5, 1.5),
                0,
                4.0,
                &quick()
            )
            .unwrap()
            .pass
        );
        let d = check_bound(&Functional::dirac(0.0), &k(-1.0, 1.0), 0, 1.0, &quick()).unwrap();
        assert!(d.pass && d.min_slack.abs() <= 1e-12, "{}", d.min_slack);
    }

    #[test]
    fn fit_verdicts() {
        let fit = fit_order(&Functional::sin_abs_jet(0.0), &k(-1.0, 1.0), 3, &quick()).unwrap();
        assert_eq!(fit.fit().map(|b| b.k), Some(1));
        let e = fit_order(
            &Functional::exp_point(0.4375, 0.875).unwrap(),
            &k(0.0, 0.875),
            3,
            &quick(),
        )
        .unwrap();
        assert!(e.fit().is_none());
        let json = serde_json::to_value(&fit).unwrap();
        assert_eq!(json["verdict"], "fit");
    }

    #[test]
    fn global_bound_point() {
        let g = global_bound(&Functional::sin_point(0.3), &k(0.175, 0.425), 0, &quick()).unwrap();
        assert!(g.stable && g.c <= 1.0 + 1e-9 && g.c > 0.9, "{}", g.c);
    }

    #[test]
    fn counterexample_examples() {
        let a = [0.5, 0.25, 0.125, 0.0625];
        let c0 = counterexample_22(1.0, 0, &a, 2).unwrap();
        assert!(c0.lhs > c0.rhs);
        if c0.m0 > 1 {
            let prev = &c0.curve[(c0.m0 - 2) as usize];
            assert!(prev.lhs <= prev.rhs);
        }
        let c1 = counterexample_22(1.0, 1, &a, 3).unwrap();
        assert!(c1.m0 >= c0.m0);
        let c10 = counterexample_22(10.0, 0, &a, 2).unwrap();
        assert!(c10.m0 >= c0.m0, "{} {} {}", c0.m0, c1.m0, c10.m0);
        assert!(c0.to_csv().starts_with("m,lhs,rhs\n1,"));
        assert!(counterexample_22(1.0, 2, &a, 2).is_err());
    }

    #[test]
    fn taylor_reduction() {
        let xi = TestFunction::standard_bump(0.2, 0.7).unwrap().scale(2.5);
        assert_eq!(
            taylor_reduce(&Functional::sin_point(0.1), &xi, 0.1, 0).unwrap(),
            0.0
        );
        assert!(taylor_reduce(&Functional::sin_abs_jet(0.1), &xi, 0.1, 1).unwrap() <= 1e-12);
        assert_eq!(
            taylor_reduce(&Functional::dirac_deriv(0.1, 1), &xi, 0.1, 1).unwrap(),
            0.0
        );
        let u = TestFunction::conv_bump(&[0.5, 0.25], 1).unwrap();
        assert!(matches!(
            taylor_reduce(&Functional::dirac(0.3), &u, 0.3, 1),
            Err(Error::DerivOrderExceeded { .. })
        ));
    }

    #[test]
    fn point_rep_examples() {
        let sp = extract_point_rep(
            &Functional::sin_point(0.0),
            0.0,
            0,
            1.0,
            &Gamma::PiHalfLinear,
            50,
            1,
        )
        .unwrap();
        assert!(sp.reconstruction_error.unwrap() <= 1e-9);
        for (z, g) in sp.z.iter().zip(&sp.g[0]) {
            assert_eq!(*g, z.abs().sin());
        }
        let sj = extract_point_rep(
            &Functional::sin_abs_jet(0.0),
            0.0,
            1,
            1.0,
            &Gamma::PiHalfLinear,
            50,
            1,
        )
        .unwrap();
        for (z, g) in sj.z.iter().zip(&sj.g[1]) {
            assert!((g - z.abs()).abs() <= 1e-12);
        }
        assert!(
            sj.min_bound_slack >= -1e-9 && sj.zero_structure_ok() && sj.lipschitz_ratio() <= 1.0
        );
        let zero = sj.z.iter().position(|&z| z == 0.0).unwrap();
        assert!(sj.g.iter().all(|g| g[zero] == 0.0));
    }

    #[test]
    fn lipschitz_examples() {
        let r = lipschitz_check(
            &Functional::sin_point(0.0),
            0.0,
            1.0,
            std::f64::consts::FRAC_PI_2,
            200,
            4,
        )
        .unwrap();
        assert_relative_eq!(r.a, std::f64::consts::FRAC_PI_2.powi(2) * 1f64.sin());
        assert!(r.pass && r.max_quotient <= 1.0 + 1e-12);
        let d = lipschitz_check(&Functional::dirac(0.0), 0.0, 1.0, 1.0, 200, 4).unwrap();
        assert_eq!(d.a, 1.0);
        assert!(d.pass && (d.max_quotient - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn scaling_examples() {
        let h = Functional::compose_h(
            HShape::new(0.75).unwrap(),
            Functional::weight_integral(Functional::unit_box()),
        )
        .unwrap();
        assert!(check_scaling_lower(&h, 0.5, 200, 1).unwrap().pass);
        let lin = check_scaling_lower(&Functional::dirac(0.0), 1.0, 200, 1).unwrap();
        assert!(lin.min_slack.abs() <= 1e-9 * 1e6);
        let e = check_scaling_lower(&Functional::exp_point(0.4375, 0.875).unwrap(), 0.5, 200, 1)
            .unwrap();
        assert!(!e.pass);
    }

    #[test]
    fn vanishing_jets_and_continuity() {
        assert!(vanishing_jet_check(&Functional::sin_abs_jet(0.2), 0.2, 1, 50, 2).unwrap() <= 1e-9);
        assert!(sequential_continuity(&Functional::sin_integral(), 40, 3).unwrap() <= 1e-6);
    }
}
