use demilin::bounds::{
    check_bound, extract_point_rep, global_bound, vanishing_jet_check, BoundConfig,
};
use demilin::catalog::{Apply, ClassClaim, Functional, HShape, Weight};
use demilin::certify::{certify_class, check_scalar_k, estimate_m, CertConfig, ScalarFnProbe};
use demilin::compact::CompactSet;
use demilin::demidef::{feasible_k, feasible_l, Gamma, NbhdBall};
use demilin::probe::{Component, Probe};
use demilin::supportx::{
    canonical_extend, extend_from_estimate, functional_support, partition_path, vanish_off_support,
    SupportConfig,
};
use demilin::testfn::{partition_of_unity, sup_derivatives};
use demilin::TestFunction;
use num_complex::Complex64;
use proptest::prelude::*;

fn component() -> impl Strategy<Value = Component> {
    prop_oneof![
        (-3.0..3.0f64, 0.1..2.0f64, -10.0..10.0f64).prop_map(|(center, radius, amplitude)| {
            Component::Bump {
                center,
                radius,
                amplitude,
            }
        }),
        (-3.0..2.0f64, 0.0..1.5f64, 0.05..0.5f64, -10.0..10.0f64).prop_map(
            |(lo, w, margin, amplitude)| {
                Component::Plateau {
                    lo,
                    hi: lo + w,
                    margin,
                    amplitude,
                }
            }
        ),
    ]
}

fn probe() -> impl Strategy<Value = Probe> {
    prop::collection::vec(component(), 1..=3).prop_map(Probe::new)
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-4.0..3.0f64, 0.1..3.0f64).prop_map(|(a, w)| (a, a + w))
}

fn set(a: f64, b: f64) -> CompactSet {
    CompactSet::interval(a, b).unwrap()
}

fn seminorm(phi: &TestFunction, s: &CompactSet, k: u32) -> f64 {
    sup_derivatives(phi, s, k, 1024).unwrap().iter().sum()
}

fn conv_sequence() -> impl Strategy<Value = Vec<f64>> {
    (0.3..1.0f64, prop::collection::vec(0.3..0.9f64, 1..=4)).prop_map(|(a0, ratios)| {
        let mut a = vec![a0];
        for r in ratios {
            let next = a[a.len() - 1] * r;
            a.push(next);
        }
        a
    })
}

fn catalog() -> Vec<Functional> {
    let mut v = vec![
        Functional::sin_integral(),
        Functional::abs_weight(Weight::Abs),
        Functional::abs_weight(Weight::Box {
            lo: -1.0,
            hi: 1.0,
            height: 2.0,
        }),
        Functional::exp_point(0.4375, 0.875).unwrap(),
        Functional::sin_point(0.2),
        Functional::sin_abs_jet(0.2),
        Functional::weight_integral(Functional::unit_box()),
        Functional::dirac(0.2),
        Functional::dirac_deriv(0.2, 2),
    ];
    for beta in [0.5, 0.75, 0.9] {
        v.push(Functional::compose_h(HShape::new(beta).unwrap(), Functional::dirac(0.2)).unwrap());
        v.push(
            Functional::compose_h(
                HShape::new(beta).unwrap(),
                Functional::weight_integral(Functional::unit_box()),
            )
            .unwrap(),
        );
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seminorm_is_monotone(p in probe(), (a, b) in interval(), grow in 0.0..1.0f64, k in 0u32..3, dk in 0u32..2) {
        let phi = p.build().unwrap();
        let small = seminorm(&phi, &set(a, b), k);
        let large = seminorm(&phi, &set(a - grow, b + grow), k + dk);
        prop_assert!(small <= large * (1.0 + 1e-12) + 1e-300, "{small} > {large}");
    }

    #[test]
    fn leibniz_bound(p in probe(), q in probe(), (a, b) in interval(), k in 0u32..4) {
        let (eta, xi) = (p.build().unwrap(), q.build().unwrap());
        let s = set(a, b);
        let lhs = seminorm(&eta.mul(&xi), &s, k);
        let h = sup_derivatives(&eta, &s, k, 1024).unwrap().into_iter().fold(0.0, f64::max);
        let bk: f64 = (0..=k).map(|d| 2f64.powi(d as i32)).sum();
        prop_assert!(lhs <= bk * h * seminorm(&xi, &s, k) * (1.0 + 1e-9));
    }

    #[test]
    fn conv_bump_derivative_bound(a in conv_sequence()) {
        let level = a.len() as u32 - 1;
        let u = TestFunction::conv_bump(&a, level).unwrap();
        let s = set(0.0, a.iter().sum());
        for (d, sup) in sup_derivatives(&u, &s, level - 1, 8192).unwrap().iter().enumerate() {
            let bound = 2f64.powi(d as i32) / a[..=d].iter().product::<f64>();
            prop_assert!(*sup <= bound * (1.0 + 1e-9), "d={d}: {sup} > {bound}");
        }
    }

    #[test]
    fn partition_reconstructs(p in probe(), cut in 0.0..1.0f64, overlap in 0.05..0.5f64) {
        let xi = p.build().unwrap();
        let Some((lo, hi)) = xi.numeric_support(0.0, 4096).hull() else { return Ok(()); };
        let c = lo + cut * (hi - lo);
        let covers = [(lo - 0.1, c + overlap), (c - overlap, hi + 0.1)];
        let parts = partition_of_unity(&xi, &covers, 2048).unwrap();
        for j in 0..=1000 {
            let x = lo - 0.05 + (hi - lo + 0.1) * j as f64 / 1000.0;
            let sum: f64 = parts.iter().map(|q| q.value(x)).sum();
            prop_assert!((sum - xi.value(x)).abs() <= 1e-9);
        }
    }

    #[test]
    fn partition_of_nonnegative_is_nonnegative(c in -2.0..2.0f64, r in 0.2..2.0f64, cut in 0.1..0.9f64) {
        let xi = TestFunction::standard_bump(c, r).unwrap();
        let m = c - r + 2.0 * r * cut;
        let parts = partition_of_unity(&xi, &[(c - r - 0.1, m + 0.2), (m - 0.2, c + r + 0.1)], 2048).unwrap();
        for q in &parts {
            for j in 0..=500 {
                prop_assert!(q.value(c - r + 2.0 * r * j as f64 / 500.0) >= -1e-12);
            }
        }
    }

    #[test]
    fn k_margin_never_exceeds_l_margin(fx in -5.0..5.0f64, fu in -5.0..5.0f64, fxtu in -5.0..5.0f64, g in 0.0..2.0f64) {
        let l = feasible_l(fx, fu, fxtu, g);
        let k = feasible_k(fx, fu, fxtu, g);
        prop_assert!(k.margin_k <= l.margin_l + 1e-12);
    }

    #[test]
    fn feasibility_is_scale_consistent(
        fx in -5.0..5.0f64, fu in -5.0..5.0f64, fxtu in -5.0..5.0f64, g in 0.0..2.0f64,
        re in -3.0..3.0f64, im in -3.0..3.0f64,
    ) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let base = (feasible_l(fx, fu, fxtu, g), feasible_k(fx, fu, fxtu, g));
        let scaled = (
            feasible_l(c * fx, c * fu, c * fxtu, g),
            feasible_k(c * fx, c * fu, c * fxtu, g),
        );
        let tol = 1e-9;
        for (m, n) in [(base.0.margin_l, scaled.0.margin_l), (base.1.margin_k, scaled.1.margin_k)] {
            if m.abs() > tol && n.abs() > tol {
                prop_assert_eq!(m > 0.0, n > 0.0);
            }
        }
    }

    #[test]
    fn witnesses_are_valid(fx in -5.0..5.0f64, fu in -5.0..5.0f64, fxtu in -5.0..5.0f64, g in 0.0..2.0f64) {
        let one = Complex64::new(1.0, 0.0);
        for (m, margin) in [(feasible_l(fx, fu, fxtu, g), 0), (feasible_k(fx, fu, fxtu, g), 1)] {
            let value = if margin == 0 { m.margin_l } else { m.margin_k };
            if value >= 0.0 {
                prop_assert!((m.witness_r - one).norm() <= g + 1e-12);
                prop_assert!(m.witness_s.norm() <= g + 1e-12);
                let rec = m.witness_r * fx + m.witness_s * fu;
                prop_assert!((rec - fxtu).norm() <= 1e-12 * fxtu.abs().max(1.0));
            }
        }
    }

    #[test]
    fn hshape_quotients(beta in 0.5..0.999f64, a in -5.0..5.0f64, b in -5.0..5.0f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let h = HShape::new(beta).unwrap();
        let q = (h.eval(b) - h.eval(a)) / (b - a);
        prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&q), "{q}");
    }

    #[test]
    fn scalar_m_estimate_is_sufficient(extra in 1.0..3.0f64) {
        let p = ScalarFnProbe::new("sin|z|", 1.0, |z: f64| z.abs().sin());
        let m = estimate_m(&p).unwrap();
        prop_assert!(check_scalar_k(&p, m * extra).pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn certify_is_monotone_in_gamma(seed in any::<u64>(), m in 1.0..2.0f64, dm in 0.0..2.0f64) {
        let f = Functional::compose_h(HShape::new(0.75).unwrap(), Functional::dirac(0.0)).unwrap();
        let cfg = CertConfig { samples: 300, seed, ..CertConfig::default() };
        let a = certify_class(&f, ClassClaim::K, &Gamma::linear(m), &f.claims.ball, &cfg).unwrap();
        let b = certify_class(&f, ClassClaim::K, &Gamma::linear(m + dm), &f.claims.ball, &cfg).unwrap();
        prop_assert!(b.min_margin_k >= a.min_margin_k);
        prop_assert!(b.min_margin_l >= a.min_margin_l);
        prop_assert!(!a.pass_k || b.pass_k);
    }

    #[test]
    fn certify_is_monotone_in_ball(seed in any::<u64>(), shrink in 0.05..1.0f64) {
        let f = Functional::sin_point(0.0);
        let cfg = CertConfig { samples: 300, seed, ..CertConfig::default() };
        let ball = f.claims.ball.clone();
        let smaller = NbhdBall::new(ball.spec.set.clone(), ball.spec.k, ball.eps * shrink);
        let a = certify_class(&f, ClassClaim::K, &Gamma::PiHalfLinear, &ball, &cfg).unwrap();
        let b = certify_class(&f, ClassClaim::K, &Gamma::PiHalfLinear, &smaller, &cfg).unwrap();
        prop_assert!(!a.pass_k || b.pass_k);
    }

    #[test]
    fn linear_functionals_have_exact_k_margin(seed in any::<u64>(), (a, b) in interval(), k in 0u32..3, eps in 0.01..10.0f64) {
        let ball = NbhdBall::new(set(a.max(-9.0), b.min(9.0)), k, eps);
        let cfg = CertConfig { samples: 200, seed, ..CertConfig::default() };
        for f in Functional::linear_baselines() {
            let r = certify_class(&f, ClassClaim::K, &Gamma::linear(1.0), &ball, &cfg).unwrap();
            prop_assert!(r.min_margin_k >= -1e-12, "{}: {}", r.name, r.min_margin_k);
        }
    }

    #[test]
    fn vanishing_off_claimed_support(seed in any::<u64>()) {
        for f in catalog() {
            if let Some(s) = f.claims.support.clone() {
                let r = vanish_off_support(&f, &s, 20, seed).unwrap();
                prop_assert!(r.max_abs <= 1e-12, "{}: {}", demilin::Apply::name(&f), r.max_abs);
            }
        }
    }

    #[test]
    fn partition_path_is_zero_off_support(p in probe(), shift in 4.0..6.0f64, cut in 0.2..0.8f64) {
        let xi = p.build().unwrap().affine(1.0, -shift).unwrap();
        let Some((lo, hi)) = xi.numeric_support(0.0, 4096).hull() else { return Ok(()); };
        prop_assume!(lo > 1.5 && hi < 9.5);
        let c = lo + cut * (hi - lo);
        let covers = [(lo - 0.1, c + 0.2), (c - 0.2, hi + 0.1)];
        for f in [Functional::sin_integral(), Functional::dirac(0.2), Functional::sin_point(0.2)] {
            prop_assert!(partition_path(&f, &xi, &covers, 2048).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn zero_maps_to_zero() {
    let zero = TestFunction::zero();
    for f in catalog() {
        assert_eq!(f.apply(&zero).unwrap(), 0.0, "{}", f.name());
    }
}

#[test]
fn composite_support_matches_base() {
    let cfg = SupportConfig::default();
    for base in [
        Functional::weight_integral(Functional::unit_box()),
        Functional::dirac(0.3),
    ] {
        let h = Functional::compose_h(HShape::new(0.6).unwrap(), base.clone()).unwrap();
        let a = functional_support(&h, &cfg).unwrap();
        let b = functional_support(&base, &cfg).unwrap();
        assert_eq!(a.cell_bounds(), b.cell_bounds());
    }
}

#[test]
fn extension_preserves_support_and_class() {
    let base = Functional::sin_integral();
    let est = functional_support(&base, &SupportConfig::default()).unwrap();
    let ext = extend_from_estimate(&base, &est, 0.1).unwrap();
    let ext_est = functional_support(&ext, &SupportConfig::default()).unwrap();
    assert_eq!(ext_est.cell_bounds(), est.cell_bounds());
    let ball = ext.pulled_back_ball(&base.claims.ball);
    let cfg = CertConfig {
        samples: 500,
        seed: 5,
        ..CertConfig::default()
    };
    let r = certify_class(&ext, ClassClaim::K, &Gamma::PiHalfLinear, &ball, &cfg).unwrap();
    assert!(r.pass_k, "{}", r.min_margin_k);
    let far = Probe::new(vec![Component::Jet {
        y: 0.0,
        order: 2,
        coefficient: 1.0,
    }])
    .build()
    .unwrap();
    let shifted = far.mul(&TestFunction::standard_bump(6.0, 1.0).unwrap());
    assert!(ext.apply(&shifted).unwrap().abs() <= 1e-12);
}

#[test]
fn global_bound_transfers_to_compacta() {
    let cfg = BoundConfig {
        probes: 32,
        ..BoundConfig::default()
    };
    let base = Functional::sin_integral();
    let est = functional_support(&base, &SupportConfig::default()).unwrap();
    let ext = canonical_extend(&base, &est.set().inflate(est.delta), 0.1).unwrap();
    let g = global_bound(&ext, &set(-1.0, 1.0), 0, &cfg).unwrap();
    assert!(g.stable && g.c <= 2.0 + 1e-9);
    let p = Functional::sin_point(0.3);
    let gp = global_bound(&p, &set(0.175, 0.425), 0, &cfg).unwrap();
    assert!(gp.stable);
    for (a, b) in [(-1.0, 1.0), (-0.5, 0.25), (0.1, 2.0)] {
        assert!(check_bound(&base, &set(a, b), 0, g.c, &cfg).unwrap().pass);
        if a <= 0.3 && 0.3 <= b {
            assert!(check_bound(&p, &set(a, b), 0, gp.c, &cfg).unwrap().pass);
        }
    }
}

#[test]
fn jets_vanishing_at_the_point_are_annihilated() {
    for (f, k) in [
        (Functional::sin_point(0.2), 0),
        (Functional::sin_abs_jet(0.2), 1),
        (Functional::dirac_deriv(0.2, 2), 2),
    ] {
        assert!(
            vanishing_jet_check(&f, 0.2, k, 50, 1).unwrap() <= 1e-9,
            "{}",
            f.name()
        );
    }
}

#[test]
fn point_representation_structure() {
    let cases = [
        (Functional::sin_point(0.1), 0, Gamma::PiHalfLinear),
        (Functional::sin_abs_jet(0.1), 1, Gamma::PiHalfLinear),
        (Functional::dirac(0.1), 0, Gamma::linear(1.0)),
        (Functional::dirac_deriv(0.1, 1), 1, Gamma::linear(1.0)),
    ];
    for (f, k, gamma) in cases {
        let r = extract_point_rep(&f, 0.1, k, 1.0, &gamma, 40, 2).unwrap();
        assert!(r.zero_structure_ok(), "{}", f.name());
        assert!(
            r.lipschitz_ratio() <= 1.0 + 1e-12,
            "{}: {}",
            f.name(),
            r.lipschitz_ratio()
        );
        assert!(
            r.min_bound_slack >= -1e-9,
            "{}: {}",
            f.name(),
            r.min_bound_slack
        );
        let g0 = r.g[0][r.z.iter().position(|&z| z == 0.0).unwrap()];
        assert_eq!(g0, 0.0);
    }
}
