//! The acceptance matrix: one runner per criterion, each returning labelled
//! pass/fail checks with the measured numbers.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_bound, check_scaling_lower, counterexample_22, extract_point_rep, fit_order,
    lipschitz_check, taylor_reduce, BoundConfig, FitResult,
};
use crate::catalog::{Apply, ClassClaim, Functional, HShape, Weight};
use crate::certify::{certify_class, check_scalar_k, estimate_m, CertConfig, ScalarFnProbe};
use crate::compact::CompactSet;
use crate::demidef::Gamma;
use crate::error::Result;
use crate::probe::ProbeFamily;
use crate::rng::sample_rng;
use crate::supportx::{
    extend_from_estimate, functional_support, restrict_roundtrip, vanish_off_support,
    RoundTripConfig, SupportConfig,
};
use crate::testfn::{partition_of_unity, sup_derivatives};
use crate::TestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Samples per certification.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
        }
    }
}

pub const TITLES: [&str; 9] = [
    "class certification",
    "growth counterexample",
    "order verdicts",
    "extension round trip",
    "vanishing off support",
    "point-support representation",
    "Lipschitz constant and M",
    "scaling condition",
    "test-function substrate",
];

/// Turns an error into a failing check.
fn check(label: impl Into<String>, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let label = label.into();
    match f() {
        Ok((pass, detail)) => Check {
            label,
            pass,
            detail,
        },
        Err(e) => Check {
            label,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn report(id: u32, start: Instant, checks: Vec<Check>) -> CriterionReport {
    CriterionReport {
        id,
        title: TITLES[id as usize - 1].to_string(),
        pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
        seconds: start.elapsed().as_secs_f64(),
        checks,
    }
}

fn interval(a: f64, b: f64) -> CompactSet {
    CompactSet::interval(a, b).expect("ordered interval")
}

fn compose_family() -> Vec<Functional> {
    let mut out = Vec::new();
    for beta in [0.5, 0.75, 0.9] {
        let h = HShape::new(beta).expect("beta in range");
        for base in [
            Functional::weight_integral(Functional::unit_box()),
            Functional::dirac(0.0),
        ] {
            out.push(Functional::compose_h(h, base).expect("linear base"));
        }
    }
    out
}

pub fn criterion_1(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let mut cases = vec![
        (Functional::sin_integral(), Gamma::PiHalfLinear),
        (Functional::abs_weight(Weight::Abs), Gamma::linear(1.0)),
        (Functional::abs_weight(Weight::Abs), Gamma::ELinear),
        (
            Functional::abs_weight(Weight::Box {
                lo: -1.0,
                hi: 1.0,
                height: 2.0,
            }),
            Gamma::PiHalfLinear,
        ),
        (Functional::sin_point(0.0), Gamma::PiHalfLinear),
        (Functional::sin_abs_jet(0.0), Gamma::PiHalfLinear),
    ];
    for beta in [0.5, 0.75, 0.9] {
        let h = HShape::new(beta).expect("beta in range");
        let base = Functional::weight_integral(Functional::unit_box());
        cases.push((
            Functional::compose_h(h, base).expect("linear base"),
            Gamma::linear(1.0),
        ));
    }
    cases.extend(
        Functional::linear_baselines()
            .into_iter()
            .map(|f| (f, Gamma::linear(1.0))),
    );
    let cert = CertConfig {
        samples: cfg.samples,
        seed: cfg.seed,
        ..CertConfig::default()
    };
    let checks = cases
        .iter()
        .map(|(f, gamma)| {
            let label = format!("{} with {gamma}", f.name());
            check(label, || {
                let t = Instant::now();
                let r = certify_class(f, ClassClaim::K, gamma, &f.claims.ball, &cert)?;
                let secs = t.elapsed().as_secs_f64();
                let pass = r.pass_k && r.samples >= 10_000 && secs <= 60.0;
                Ok((
                    pass,
                    format!(
                        "min_margin_K={:e} samples={} nonfinite={} time={secs:.1}s",
                        r.min_margin_k, r.samples, r.nonfinite
                    ),
                ))
            })
        })
        .collect();
    report(1, start, checks)
}

pub fn criterion_2(_cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let a = [0.5, 0.25, 0.125, 0.0625];
    let mut checks: Vec<Check> = [(0, 2), (1, 3)]
        .into_iter()
        .map(|(k, level)| {
            check(format!("C=1 k={k} level={level}"), || {
                let r = counterexample_22(1.0, k, &a, level)?;
                let gaps: Vec<f64> = r
                    .curve
                    .iter()
                    .filter(|p| p.m >= r.m0)
                    .map(|p| p.lhs - p.rhs)
                    .collect();
                let increasing = gaps.windows(2).all(|w| w[1] > w[0]);
                Ok((
                    r.lhs > r.rhs && increasing,
                    format!(
                        "m0={} lhs={:e} rhs={:e} curve={} monotone={increasing}",
                        r.m0,
                        r.lhs,
                        r.rhs,
                        r.curve.len()
                    ),
                ))
            })
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    checks.push(Check {
        label: "runtime".into(),
        pass: secs <= 10.0,
        detail: format!("{secs:.2}s"),
    });
    report(2, start, checks)
}

fn fit_detail(r: &FitResult) -> String {
    match r {
        FitResult::Fit { fit, .. } => format!("k={} C={}", fit.k, fit.c),
        FitResult::NoFit { sweep } => format!(
            "no fit; final ratios {:?}",
            sweep
                .curves
                .iter()
                .map(|c| c[c.len() - 1])
                .collect::<Vec<_>>()
        ),
    }
}

pub fn criterion_3(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let bc = BoundConfig {
        seed: cfg.seed,
        ..BoundConfig::default()
    };
    type Verdict = fn(&FitResult) -> bool;
    let cases: Vec<(Functional, CompactSet, Verdict)> = vec![
        (Functional::sin_integral(), interval(-1.0, 1.0), |r| {
            r.fit()
                .is_some_and(|b| b.k == 0 && (1.9..=2.0 + 1e-6).contains(&b.c))
        }),
        (Functional::sin_point(0.0), interval(-1.0, 1.0), |r| {
            r.fit().is_some_and(|b| b.k == 0 && b.c <= 1.0 + 1e-6)
        }),
        (Functional::sin_abs_jet(0.0), interval(-1.0, 1.0), |r| {
            r.fit().is_some_and(|b| b.k == 1)
        }),
        (
            Functional::exp_point(0.4375, 0.875).expect("valid point"),
            interval(0.0, 0.875),
            |r| r.fit().is_none(),
        ),
    ];
    let checks = cases
        .into_iter()
        .map(|(f, set, ok)| {
            check(f.name().to_string(), || {
                let r = fit_order(&f, &set, 3, &bc)?;
                Ok((ok(&r), fit_detail(&r)))
            })
        })
        .collect();
    report(3, start, checks)
}

pub fn criterion_4(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let rt = RoundTripConfig {
        seed: cfg.seed,
        ..RoundTripConfig::default()
    };
    let checks = [
        Functional::sin_point(0.0),
        Functional::sin_abs_jet(0.0),
        Functional::dirac(0.0),
    ]
    .iter()
    .map(|f| {
        check(f.name().to_string(), || {
            let r = restrict_roundtrip(f, &rt)?;
            let pass = r.pass && r.trials >= 100 && rt.cutoff_pairs >= 20;
            Ok((
                pass,
                format!(
                    "max_discrepancy={:e} cutoff_spread={:e} support_matches={} trials={}",
                    r.max_discrepancy, r.cutoff_spread, r.support_matches, r.trials
                ),
            ))
        })
    })
    .collect();
    report(4, start, checks)
}

pub fn criterion_5(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let catalog = vec![
        Functional::sin_integral(),
        Functional::abs_weight(Weight::Abs),
        Functional::abs_weight(Weight::Box {
            lo: -1.0,
            hi: 1.0,
            height: 2.0,
        }),
        Functional::exp_point(0.4375, 0.875).expect("valid point"),
        Functional::sin_point(0.3),
        Functional::sin_abs_jet(0.3),
        Functional::weight_integral(Functional::unit_box()),
        Functional::dirac(0.3),
        Functional::dirac_deriv(0.3, 2),
    ]
    .into_iter()
    .chain(compose_family());
    let mut checks: Vec<Check> = catalog
        .filter_map(|f| f.claims.support.clone().map(|s| (f, s)))
        .map(|(f, s)| {
            check(f.name().to_string(), || {
                let r = vanish_off_support(&f, &s, 100, cfg.seed)?;
                Ok((
                    r.trials == 100 && r.max_abs <= 1e-12,
                    format!("max|F|={:e}", r.max_abs),
                ))
            })
        })
        .collect();
    checks.push(check("extension of sin-integral off its hull", || {
        let base = Functional::sin_integral();
        let est = functional_support(&base, &SupportConfig::default())?;
        let ext = extend_from_estimate(&base, &est, 0.1)?;
        let r = vanish_off_support(&ext, &ext.hull.inflate(2.0 * ext.margin), 100, cfg.seed)?;
        Ok((
            r.trials == 100 && r.max_abs <= 1e-12,
            format!("max|F|={:e}", r.max_abs),
        ))
    }));
    report(5, start, checks)
}

pub fn criterion_6(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    let sp = Functional::sin_point(0.3);
    checks.push(check("sin-point reconstruction", || {
        let r = extract_point_rep(
            &sp,
            0.3,
            0,
            sp.claims.ball.eps,
            &Gamma::PiHalfLinear,
            100,
            cfg.seed,
        )?;
        let err = r.reconstruction_error.unwrap_or(f64::INFINITY);
        Ok((
            err <= 1e-9 && r.probes == 100,
            format!("max|F(ξ) − g0(ξ(y))|={err:e}"),
        ))
    }));
    let sj = Functional::sin_abs_jet(0.3);
    checks.push(check("sin-abs-jet g1(z) = |z|", || {
        let r = extract_point_rep(
            &sj,
            0.3,
            1,
            sj.claims.ball.eps,
            &Gamma::PiHalfLinear,
            100,
            cfg.seed,
        )?;
        let dev =
            r.z.iter()
                .zip(&r.g[1])
                .map(|(z, g)| (g - z.abs()).abs())
                .fold(0.0, f64::max);
        let zero =
            r.g.iter()
                .all(|g| r.z.iter().zip(g).all(|(&z, &v)| z != 0.0 || v == 0.0));
        Ok((
            dev <= 1e-12 && zero,
            format!("max|g1 − |z||={dev:e} over {} z, g(0)=0: {zero}", r.z.len()),
        ))
    }));
    checks.push(check("Taylor reduction", || {
        let family = ProbeFamily::window(-1.5, 2.0, true);
        let cases: [(&Functional, u32); 3] =
            [(&sj, 1), (&sp, 0), (&Functional::dirac_deriv(0.3, 1), 1)];
        let mut worst = 0.0f64;
        for i in 0..100 {
            let xi = family.draw(&mut sample_rng(cfg.seed, i)).build()?;
            for (f, k) in cases {
                worst = worst.max(taylor_reduce(f, &xi, 0.3, k)?);
            }
        }
        Ok((
            worst <= 1e-12,
            format!("max discrepancy {worst:e} over 100 probes"),
        ))
    }));
    report(6, start, checks)
}

pub fn criterion_7(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let mut checks = Vec::new();
    checks.push(check("sin-point Lipschitz", || {
        let r = lipschitz_check(
            &Functional::sin_point(0.0),
            0.0,
            1.0,
            FRAC_PI_2,
            1000,
            cfg.seed,
        )?;
        let a = FRAC_PI_2 * FRAC_PI_2 * 1f64.sin();
        let pass = r.pass && (r.a - a).abs() <= 1e-12;
        Ok((
            pass,
            format!(
                "A={} quotient={} equal-gap={:e}",
                r.a, r.max_quotient, r.max_equal_gap
            ),
        ))
    }));
    checks.push(check("dirac Lipschitz", || {
        let r = lipschitz_check(&Functional::dirac(0.0), 0.0, 1.0, 1.0, 1000, cfg.seed)?;
        Ok((
            r.pass && r.a == 1.0,
            format!("A={} quotient={}", r.a, r.max_quotient),
        ))
    }));
    checks.push(check("M for sin|z|", || {
        let p = ScalarFnProbe::new("sin|z|", 1.0, |z: f64| z.abs().sin());
        let m = estimate_m(&p)?;
        let c = check_scalar_k(&p, m);
        Ok((
            (1.18..=1.20).contains(&m) && c.pass,
            format!(
                "M={m} K-check pass={} min_margin_K={:e}",
                c.pass, c.min_margin_k
            ),
        ))
    }));
    report(7, start, checks)
}

pub fn criterion_8(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let bc = BoundConfig {
        seed: cfg.seed,
        ..BoundConfig::default()
    };
    let compacta = [interval(0.0, 1.0), interval(-0.5, 0.5), interval(0.25, 1.5)];
    let checks = compose_family()
        .into_iter()
        .map(|f| {
            let label = format!("{} on {}", f.name(), f.base().map_or("?", |b| b.name()));
            check(label, || {
                let s = check_scaling_lower(&f, 0.5, 1000, cfg.seed)?;
                let fit = fit_order(&f, &interval(-1.0, 2.0), 3, &bc)?;
                let Some(b) = fit.fit() else {
                    return Ok((
                        false,
                        format!("scaling slack {:e}; {}", s.min_slack, fit_detail(&fit)),
                    ));
                };
                let mut slacks = Vec::new();
                for set in &compacta {
                    slacks.push(check_bound(&f, set, b.k, b.c, &bc)?.min_slack);
                }
                let pass = s.pass && slacks.iter().all(|&v| v >= crate::certify::PASS_TOL);
                Ok((
                    pass,
                    format!(
                        "scaling slack {:e}; fit k={} C={}; bound slacks {slacks:?}",
                        s.min_slack, b.k, b.c
                    ),
                ))
            })
        })
        .collect();
    report(8, start, checks)
}

fn random_probe(family: &ProbeFamily, seed: u64, i: u64) -> Result<TestFunction> {
    family.draw_compact(&mut sample_rng(seed, i)).build()
}

fn fd(f: &TestFunction, x: f64, d: u32) -> Result<f64> {
    let h = 1e-5;
    let g = |t: f64| f.eval(t, d - 1);
    Ok((g(x - 2.0 * h)? - 8.0 * g(x - h)? + 8.0 * g(x + h)? - g(x + 2.0 * h)?) / (12.0 * h))
}

const CONV_SEQUENCES: [&[f64]; 4] = [
    &[0.5, 0.25, 0.125, 0.0625],
    &[0.9, 0.5, 0.3, 0.2, 0.1],
    &[1.0, 0.5, 0.25],
    &[0.6, 0.35, 0.2, 0.1, 0.05],
];

pub fn criterion_9(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let family = ProbeFamily::window(-3.0, 3.0, false);
    let mut checks = Vec::new();
    checks.push(check("partition reconstruction", || {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let xi = random_probe(&family, cfg.seed, i)?;
            let (lo, hi) = xi.numeric_support(0.0, 4096).hull().unwrap_or((-1.0, 1.0));
            let mut rng = sample_rng(cfg.seed ^ 0x9e37, i);
            let cut = rng.gen_range(lo..=hi);
            let overlap = rng.gen_range(0.05..0.5);
            let covers = [(lo - 0.1, cut + overlap), (cut - overlap, hi + 0.1)];
            let parts = partition_of_unity(&xi, &covers, 2048)?;
            for j in 0..=1000 {
                let x = lo - 0.05 + (hi - lo + 0.1) * j as f64 / 1000.0;
                let sum: f64 = parts.iter().map(|p| p.value(x)).sum();
                worst = worst.max((sum - xi.value(x)).abs());
            }
        }
        Ok((
            worst <= 1e-9,
            format!("max|Σξj − ξ|={worst:e} over 100 pairs"),
        ))
    }));
    checks.push(check("Leibniz bound", || {
        let mut worst = 0.0f64;
        for i in 0..100 {
            let eta = random_probe(&family, cfg.seed, 2 * i + 1000)?;
            let xi = random_probe(&family, cfg.seed, 2 * i + 1001)?;
            let mut rng = sample_rng(cfg.seed ^ 0x5bd1, i);
            let a = rng.gen_range(-3.0..2.0);
            let set = interval(a, a + rng.gen_range(0.2..3.0));
            let k = rng.gen_range(0..=3u32);
            let lhs: f64 = sup_derivatives(&eta.mul(&xi), &set, k, 1024)?.iter().sum();
            let h = sup_derivatives(&eta, &set, k, 1024)?
                .into_iter()
                .fold(0.0, f64::max);
            let n: f64 = sup_derivatives(&xi, &set, k, 1024)?.iter().sum();
            let b = (0..=k).map(|d| 2f64.powi(d as i32)).sum::<f64>();
            if lhs > 0.0 {
                worst = worst.max(lhs / (b * h * n));
            }
        }
        Ok((worst <= 1.0 + 1e-9, format!("max lhs/bound={worst}")))
    }));
    checks.push(check("conv bump derivative bounds", || {
        let mut worst = 0.0f64;
        for a in CONV_SEQUENCES {
            let level = a.len() as u32 - 1;
            let u = TestFunction::conv_bump(a, level)?;
            let set = interval(0.0, a.iter().sum());
            let sups = sup_derivatives(&u, &set, level - 1, 8192)?;
            for (d, s) in sups.iter().enumerate() {
                let bound = 2f64.powi(d as i32) / a[..=d].iter().product::<f64>();
                worst = worst.max(s / bound);
            }
        }
        Ok((worst <= 1.0 + 1e-9, format!("max sup/bound={worst}")))
    }));
    checks.push(check("conv bump integral", || {
        let mut worst = 0.0f64;
        for a in CONV_SEQUENCES {
            let u = TestFunction::conv_bump(a, a.len() as u32 - 1)?;
            let total = u.integrate(0.0, a.iter().sum(), &crate::catalog::QUAD)?;
            worst = worst.max((total - 1.0).abs());
        }
        Ok((worst <= 1e-9, format!("max|∫u − 1|={worst:e}")))
    }));
    checks.push(check("derivatives vs finite differences", || {
        let cut = TestFunction::cutoff(&interval(0.2, 0.4), 0.1)?;
        let fns: Vec<(TestFunction, u32)> = vec![
            (TestFunction::standard_bump(0.1, 0.8)?, 3),
            (cut.clone(), 3),
            (
                TestFunction::standard_bump(0.3, 0.5)?.mul(&cut).scale(3.0),
                3,
            ),
            (TestFunction::monomial_jet(0.3, 3, 1.5), 3),
            (TestFunction::conv_bump(&[0.5, 0.25, 0.125, 0.0625], 3)?, 1),
        ];
        let mut rng = sample_rng(cfg.seed, 77);
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let x = rng.gen_range(-0.6..0.9);
            for (f, dmax) in &fns {
                for d in 1..=*dmax {
                    let exact = f.eval(x, d)?;
                    worst = worst.max((exact - fd(f, x, d)?).abs() / exact.abs().max(1.0));
                }
            }
        }
        Ok((worst <= 1e-6, format!("max scaled |exact − fd|={worst:e}")))
    }));
    report(9, start, checks)
}

pub fn run_criterion(id: u32, cfg: &SuiteConfig) -> Option<CriterionReport> {
    Some(match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        _ => return None,
    })
}

/// Runs all criteria; the last one also carries the total runtime check.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CriterionReport> {
    let start = Instant::now();
    let mut out: Vec<CriterionReport> = (1..=9).filter_map(|i| run_criterion(i, cfg)).collect();
    let total = start.elapsed().as_secs_f64();
    if let Some(last) = out.last_mut() {
        last.checks.push(Check {
            label: "full suite runtime".into(),
            pass: total <= 300.0,
            detail: format!("{total:.1}s"),
        });
        last.pass = last.checks.iter().all(|c| c.pass);
    }
    out
}

/// `[PASS] 3 order verdicts (12.1s)` style summary line.
pub fn summary_line(r: &CriterionReport) -> String {
    format!(
        "[{}] {} {} ({:.1}s)",
        if r.pass { "PASS" } else { "FAIL" },
        r.id,
        r.title,
        r.seconds
    )
}
