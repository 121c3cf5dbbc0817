//! Supports of functionals, cutoff decompositions and the canonical
//! extension from compactly supported to all smooth test functions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{Apply, DomainKind, Functional};
use crate::compact::{CompactSet, Omega};
use crate::demidef::NbhdBall;
use crate::error::{Error, Result};
use crate::probe::{Component, Probe, ProbeFamily};
use crate::rng::sample_rng;
use crate::testfn::partition_of_unity;
use crate::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportConfig {
    /// Cell width; cells start every `delta / 2`.
    pub delta: f64,
    pub tol: f64,
    pub amplitudes: Vec<f64>,
}

impl Default for SupportConfig {
    fn default() -> Self {
        Self {
            delta: 0.25,
            tol: 1e-12,
            amplitudes: vec![1e-2, 1.0, 1e2],
        }
    }
}

/// A flagged cell and the bump that registered there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellHit {
    pub lo: f64,
    pub hi: f64,
    pub witness: Probe,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportEstimate {
    pub cells: Vec<CellHit>,
    pub delta: f64,
    pub tol: f64,
    pub probes_per_cell: usize,
    /// Range covered by the scan.
    pub scanned: (f64, f64),
}

impl SupportEstimate {
    /// Union of the flagged cells.
    pub fn set(&self) -> CompactSet {
        CompactSet::from_intervals(self.cells.iter().map(|c| (c.lo, c.hi)).collect())
            .expect("ordered cells")
    }

    /// True when a flagged cell reaches the first or last cell of the scan.
    pub fn touches_boundary(&self) -> bool {
        let (lo, hi) = self.scanned;
        self.cells
            .iter()
            .any(|c| c.lo < lo + self.delta || c.hi > hi - self.delta)
    }

    pub fn cell_bounds(&self) -> Vec<(f64, f64)> {
        self.cells.iter().map(|c| (c.lo, c.hi)).collect()
    }
}

fn cell_probes(lo: f64, hi: f64, amplitudes: &[f64]) -> Vec<Probe> {
    let w = hi - lo;
    let shapes = [
        (lo + 0.5 * w, 0.5 * w),
        (lo + 0.25 * w, 0.25 * w),
        (lo + 0.75 * w, 0.25 * w),
    ];
    amplitudes
        .iter()
        .flat_map(|&a| {
            shapes.iter().map(move |&(center, radius)| {
                Probe::new(vec![Component::Bump {
                    center,
                    radius,
                    amplitude: a,
                }])
            })
        })
        .collect()
}

/// Scans staggered cells of width `δ` across `Ω`; a cell is flagged when some
/// bump supported inside it has `|F(ξ)| > tol`.
pub fn functional_support(f: &dyn Apply, cfg: &SupportConfig) -> Result<SupportEstimate> {
    if !(cfg.delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cell width {} must be positive",
            cfg.delta
        )));
    }
    let omega = Omega::<f64>::default();
    let stride = 0.5 * cfg.delta;
    let count = ((omega.hi - omega.lo - cfg.delta) / stride).floor() as usize + 1;
    let hits: Vec<Option<CellHit>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let lo = omega.lo + stride * i as f64;
            let hi = lo + cfg.delta;
            for p in cell_probes(lo, hi, &cfg.amplitudes) {
                let v = f.apply(&p.build()?)?;
                if !(v.abs() <= cfg.tol) {
                    return Ok(Some(CellHit {
                        lo,
                        hi,
                        witness: p,
                        value: v,
                    }));
                }
            }
            Ok(None)
        })
        .collect::<Result<_>>()?;
    let last = omega.lo + stride * (count - 1) as f64 + cfg.delta;
    Ok(SupportEstimate {
        cells: hits.into_iter().flatten().collect(),
        delta: cfg.delta,
        tol: cfg.tol,
        probes_per_cell: 3 * cfg.amplitudes.len(),
        scanned: (omega.lo, last),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishReport {
    pub trials: usize,
    pub max_abs: f64,
    pub worst: Option<Probe>,
}

/// `max |F(ξ)|` over random compact probes whose support misses `set`.
pub fn vanish_off_support(
    f: &dyn Apply,
    set: &CompactSet,
    trials: usize,
    seed: u64,
) -> Result<VanishReport> {
    let family = ProbeFamily::avoiding(set, 1e-2, &Omega::default());
    if family.windows.is_empty() {
        return Ok(VanishReport {
            trials: 0,
            max_abs: 0.0,
            worst: None,
        });
    }
    let values: Vec<(f64, Probe)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let p = family.draw_compact(&mut sample_rng(seed, i));
            Ok((f.apply(&p.build()?)?.abs(), p))
        })
        .collect::<Result<_>>()?;
    let worst = values
        .into_iter()
        .fold(None::<(f64, Probe)>, |acc, (v, p)| match acc {
            Some((m, q)) if m >= v => Some((m, q)),
            _ => Some((v, p)),
        });
    Ok(VanishReport {
        trials,
        max_abs: worst.as_ref().map_or(0.0, |w| w.0),
        worst: worst.map(|w| w.1),
    })
}

/// `ξ = χξ + (1 − χ)ξ` with `χ = 1` on a neighbourhood of `set`.
pub fn f_decompose(
    xi: &TestFunction,
    set: &CompactSet,
    margin: f64,
) -> Result<(TestFunction, TestFunction)> {
    let chi = TestFunction::cutoff(set, margin)?;
    Ok((chi.mul(xi), chi.one_minus().mul(xi)))
}

/// `ξ ↦ base(χξ)` for a cutoff `χ` equal to 1 near `hull`.
#[derive(Clone, Debug)]
pub struct ExtendedFunctional {
    pub base: Functional,
    pub hull: CompactSet,
    pub margin: f64,
    pub chi: TestFunction,
    name: String,
}

impl ExtendedFunctional {
    /// The pulled-back ball `{ξ : χξ ∈ U}`.
    pub fn pulled_back_ball(&self, ball: &NbhdBall) -> NbhdBall {
        ball.pulled_back(&self.chi)
    }
}

impl Apply for ExtendedFunctional {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain_kind(&self) -> DomainKind {
        DomainKind::AllSmooth
    }

    fn apply(&self, xi: &TestFunction) -> Result<f64> {
        self.base.apply(&self.chi.mul(xi))
    }
}

pub fn canonical_extend(
    base: &Functional,
    hull: &CompactSet,
    margin: f64,
) -> Result<ExtendedFunctional> {
    let chi = TestFunction::cutoff(hull, margin)?;
    Ok(ExtendedFunctional {
        base: base.clone(),
        hull: hull.clone(),
        margin,
        chi,
        name: format!("ext({})", base.name()),
    })
}

/// Extension over the estimated support inflated by one cell.
pub fn extend_from_estimate(
    base: &Functional,
    est: &SupportEstimate,
    margin: f64,
) -> Result<ExtendedFunctional> {
    if est.touches_boundary() {
        return Err(Error::SupportNotCompact);
    }
    canonical_extend(base, &est.set().inflate(est.delta), margin)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub name: String,
    pub trials: usize,
    pub hull: CompactSet,
    pub margin: f64,
    pub max_discrepancy: f64,
    pub worst: Option<Probe>,
    /// Largest spread of extension values across random cutoff choices.
    pub cutoff_spread: f64,
    /// Flagged cells of the restriction and of its extension agree.
    pub support_matches: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripConfig {
    pub trials: usize,
    pub cutoff_pairs: usize,
    pub seed: u64,
    pub margin: f64,
    pub support: SupportConfig,
}

impl Default for RoundTripConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            cutoff_pairs: 20,
            seed: 0,
            margin: 0.1,
            support: SupportConfig::default(),
        }
    }
}

/// All-smooth probes around `hull`: random sums with jets and constants, led
/// by a fixed set of pure constants and monomial jets.
fn smooth_probes(hull: &CompactSet, n: usize, seed: u64) -> Vec<Probe> {
    let (lo, hi) = hull.hull().unwrap_or((-1.0, 1.0));
    let omega = Omega::<f64>::default();
    let family = ProbeFamily::window(
        (lo - 2.0).max(omega.lo + 0.05),
        (hi + 2.0).min(omega.hi - 0.05),
        true,
    );
    let mid = 0.5 * (lo + hi);
    let mut fixed = vec![
        Probe::new(vec![Component::Constant { value: 0.7 }]),
        Probe::new(vec![Component::Constant { value: -3.0 }]),
    ];
    for order in 0..=3 {
        fixed.push(Probe::new(vec![Component::Jet {
            y: mid - 0.3,
            order,
            coefficient: 1.5,
        }]));
    }
    fixed
        .into_iter()
        .chain((0..n as u64).map(|i| family.draw(&mut sample_rng(seed, i))))
        .take(n.max(1))
        .collect()
}

fn max_discrepancy(a: &dyn Apply, b: &dyn Apply, probes: &[Probe]) -> Result<(f64, Option<Probe>)> {
    let diffs: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let xi = p.build()?;
            Ok((a.apply(&xi)? - b.apply(&xi)?).abs())
        })
        .collect::<Result<_>>()?;
    let mut best = (0.0, None);
    for (d, p) in diffs.into_iter().zip(probes) {
        if d > best.0 || (d.is_nan() && best.1.is_none()) {
            best = (d, Some(p.clone()));
        }
    }
    Ok(best)
}

/// Largest disagreement among extensions built with random hulls and margins.
pub fn cutoff_spread(
    base: &Functional,
    est: &SupportEstimate,
    pairs: usize,
    probes: &[Probe],
    seed: u64,
) -> Result<f64> {
    let omega = Omega::<f64>::default();
    let core = est.set().inflate(est.delta);
    let mut rng = sample_rng(seed, u64::MAX);
    let mut exts = Vec::new();
    for _ in 0..pairs.max(2) {
        let margin = rng.gen_range(0.02..0.3);
        let room = core.hull().map_or(1.0, |(a, b)| {
            ((a - omega.lo).min(omega.hi - b) - 2.0 * margin - 1e-3).max(0.0)
        });
        let grow = rng.gen_range(0.0..=1.0f64.min(room));
        exts.push(canonical_extend(base, &core.inflate(grow), margin)?);
    }
    let mut spread = 0.0f64;
    for e in &exts[1..] {
        spread = spread.max(max_discrepancy(&exts[0], e, probes)?.0);
    }
    Ok(spread)
}

/// Restricts an all-smooth functional to compact inputs, extends it back and
/// compares both on all-smooth probes including constants and jets.
pub fn restrict_roundtrip(f: &Functional, cfg: &RoundTripConfig) -> Result<RoundTripReport> {
    if f.domain_kind() != DomainKind::AllSmooth {
        return Err(Error::InvalidArgument(format!(
            "{} is not defined on all smooth functions",
            f.name()
        )));
    }
    let restricted = f.restrict();
    let est = functional_support(&restricted, &cfg.support)?;
    let ext = extend_from_estimate(&restricted, &est, cfg.margin)?;
    let probes = smooth_probes(&ext.hull, cfg.trials, cfg.seed);
    let (max_discrepancy, worst) = max_discrepancy(f, &ext, &probes)?;
    let cutoff_spread = cutoff_spread(&restricted, &est, cfg.cutoff_pairs, &probes, cfg.seed)?;
    let ext_est = functional_support(&ext, &cfg.support)?;
    let support_matches = ext_est.cell_bounds() == est.cell_bounds();
    Ok(RoundTripReport {
        name: f.name().to_string(),
        trials: probes.len(),
        hull: ext.hull.clone(),
        margin: cfg.margin,
        max_discrepancy,
        worst,
        cutoff_spread,
        support_matches,
        pass: max_discrepancy <= 1e-9 && cutoff_spread <= 1e-9 && support_matches,
    })
}

/// Splits `ξ` over `covers` and returns the largest `|F|` of the running
/// partial sums `ξ_1`, `ξ_1 + ξ_2`, ….
pub fn partition_path(
    f: &dyn Apply,
    xi: &TestFunction,
    covers: &[(f64, f64)],
    grid_pts: usize,
) -> Result<f64> {
    let parts = partition_of_unity(xi, covers, grid_pts)?;
    let mut partial = TestFunction::zero();
    let mut worst = 0.0f64;
    for p in parts {
        partial = partial.add(&p);
        worst = worst.max(f.apply(&partial)?.abs());
    }
    Ok(worst)
}
