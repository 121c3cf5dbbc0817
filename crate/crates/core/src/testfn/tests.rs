use approx::assert_relative_eq;

use super::*;

fn psi() -> TestFn {
    TestFn::standard_bump(0.0, 1.0).unwrap()
}

fn fd(f: &TestFn, x: f64, d: u32) -> f64 {
    let h = 1e-4;
    let g = |t: f64| f.eval(t, d - 1).unwrap();
    (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h)
}

fn interval(lo: f64, hi: f64) -> CompactSet {
    CompactSet::interval(lo, hi).unwrap()
}

#[test]
fn bump_values() {
    assert_relative_eq!(psi().eval(0.0, 0).unwrap(), (-1.0f64).exp());
    assert_eq!(psi().eval(1.5, 0).unwrap(), 0.0);
    assert_eq!(psi().eval(1.5, 3).unwrap(), 0.0);
    assert!(matches!(
        psi().eval(11.0, 0),
        Err(Error::DomainError { .. })
    ));
}

#[test]
fn derivatives_match_finite_differences() {
    let u = TestFn::conv_bump(&[0.5, 0.25, 0.125], 2).unwrap();
    let cut = TestFn::cutoff(&interval(0.2, 0.4), 0.1).unwrap();
    let prod = psi().affine(2.0, -0.5).unwrap().mul(&cut);
    let jet = TestFn::monomial_jet(0.3, 3, 1.5);
    let xs = [0.0312, 0.17, 0.3301, 0.5123, 0.6517];
    for &x in &xs {
        assert_relative_eq!(
            u.eval(x, 1).unwrap(),
            fd(&u, x, 1),
            max_relative = 1e-6,
            epsilon = 1e-9
        );
        for d in 1..=3 {
            assert_relative_eq!(
                prod.eval(x, d).unwrap(),
                fd(&prod, x, d),
                max_relative = 1e-6,
                epsilon = 1e-6
            );
            assert_relative_eq!(
                cut.eval(x, d).unwrap(),
                fd(&cut, x, d),
                max_relative = 1e-6,
                epsilon = 1e-6
            );
            assert_relative_eq!(
                jet.eval(x, d).unwrap(),
                fd(&jet, x, d),
                max_relative = 1e-6,
                epsilon = 1e-8
            );
        }
    }
}

#[test]
fn conv_bump_order_limit() {
    let u = TestFn::conv_bump(&[0.5, 0.25, 0.125], 2).unwrap();
    assert_eq!(u.max_deriv(), 1);
    assert_eq!(
        u.eval(0.3, 2),
        Err(Error::DerivOrderExceeded {
            requested: 2,
            max: 1
        })
    );
    assert!(matches!(
        TestFn::conv_bump(&[0.5, 0.5], 1),
        Err(Error::InvalidSequence(_))
    ));
}

#[test]
fn conv_bump_examples() {
    let opts = QuadOptions::default();
    let h1 = TestFn::conv_bump(&[1.0], 0).unwrap();
    assert_eq!(h1.eval(0.5, 0).unwrap(), 1.0);
    assert_eq!(h1.eval(1.5, 0).unwrap(), 0.0);
    assert_relative_eq!(
        h1.integrate(-1.0, 2.0, &opts).unwrap(),
        1.0,
        epsilon = 1e-12
    );

    // direct convolution integral of two boxes
    let hat = TestFn::conv_bump(&[0.5, 0.25], 1).unwrap();
    for &x in &[0.1, 0.3, 0.6, 0.7] {
        let lo = (x - 0.25f64).max(0.0);
        let hi = x.min(0.5);
        let direct = if hi > lo {
            (hi - lo) / (0.5 * 0.25)
        } else {
            0.0
        };
        assert_relative_eq!(hat.eval(x, 0).unwrap(), direct, epsilon = 1e-12);
    }
    assert_relative_eq!(
        hat.integrate(0.0, 0.75, &opts).unwrap(),
        1.0,
        epsilon = 1e-9
    );

    let u = TestFn::conv_bump(&[0.5, 0.25, 0.125], 2).unwrap();
    let sup1 = sup_derivatives(&u, &interval(0.0, 0.875), 1, 20_000).unwrap()[1];
    assert!(sup1 <= 16.0 + 1e-9, "{sup1}");
    let supp = u.numeric_support(0.0, 8192);
    assert!(supp.is_subset_of(&interval(0.0, 0.875)));
}

#[test]
fn seminorm_examples() {
    let k = SeminormSpec::new(interval(-1.0, 1.0), 0);
    assert_relative_eq!(
        psi().seminorm(&k, DEFAULT_DENSITY).unwrap(),
        (-1.0f64).exp(),
        epsilon = 1e-9
    );
    assert_eq!(
        TestFn::<f64>::zero().seminorm(&k, DEFAULT_DENSITY).unwrap(),
        0.0
    );
    let two = psi().add(&psi());
    assert_relative_eq!(
        two.seminorm(&k, DEFAULT_DENSITY).unwrap(),
        2.0 * psi().seminorm(&k, DEFAULT_DENSITY).unwrap(),
        max_relative = 1e-15
    );
    // off-grid maximum is still found
    let shifted = TestFn::standard_bump(0.123_456_7, 0.01).unwrap();
    let s = shifted
        .seminorm(&SeminormSpec::new(interval(-1.0, 1.0), 0), 64)
        .unwrap();
    assert_relative_eq!(s, (-1.0f64).exp(), max_relative = 1e-12);
    // degenerate compact
    let p = SeminormSpec::new(CompactSet::point(0.5), 1);
    let j = psi().jet(0.5, 1);
    assert_relative_eq!(
        psi().seminorm(&p, 16).unwrap(),
        j.value().abs() + j.derivative(1).abs()
    );
}

#[test]
fn numeric_support_examples() {
    let s = psi().numeric_support(0.0, 4096);
    let (lo, hi) = s.hull().unwrap();
    assert!(lo >= -1.0 && lo < -1.0 + 2.0 / 4096.0 + 1e-12, "{lo}");
    assert!(hi <= 1.0 && hi > 1.0 - 2.0 / 4096.0 - 1e-12, "{hi}");
    let cut = TestFn::cutoff(&interval(2.0, 3.0), 0.5).unwrap();
    assert!(cut
        .numeric_support(0.0, 4096)
        .is_subset_of(&interval(1.0, 4.0)));
    assert!(TestFn::<f64>::zero().numeric_support(0.0, 100).is_empty());
}

#[test]
fn cutoff_plateau_and_collar() {
    let set = CompactSet::from_intervals(vec![(-2.0, -1.0), (1.0, 1.5)]).unwrap();
    let cut = TestFn::cutoff(&set, 0.25).unwrap();
    for i in 0..=400 {
        let x = -4.0 + 8.0 * i as f64 / 400.0;
        let v = cut.eval(x, 0).unwrap();
        assert!((0.0..=1.0).contains(&v));
        let dist = set.dist_to_point(x);
        if dist <= 0.25 {
            assert_eq!(v, 1.0, "at {x}");
        }
        if dist >= 0.5 {
            assert_eq!(v, 0.0, "at {x}");
        }
    }
    let phi = TestFn::standard_bump(0.0, 3.0).unwrap();
    let rest = cut.one_minus().mul(&phi);
    assert_eq!(
        rest.seminorm(&SeminormSpec::new(set.clone(), 0), 1024)
            .unwrap(),
        0.0
    );
    assert!(matches!(
        TestFn::cutoff(&interval(8.0, 9.0), 0.75),
        Err(Error::DomainError { .. })
    ));
}

#[test]
fn monomial_jets() {
    let z = TestFn::monomial_jet(0.5, 0, 3.0);
    assert_eq!(z.eval(-7.0, 0).unwrap(), 3.0);
    let l = TestFn::monomial_jet(0.5, 1, 3.0);
    assert_eq!(l.eval(0.5, 0).unwrap(), 0.0);
    assert_eq!(l.eval(0.5, 1).unwrap(), 3.0);
    assert_eq!(TestFn::monomial_jet(0.5, 2, 2.0).eval(1.5, 0).unwrap(), 1.0);
    assert!(!l.is_compactly_supported());
}

#[test]
fn combine_rules() {
    assert!(TestFn::combine(CombineOp::Scale(0.0), &[psi()])
        .unwrap()
        .is_structurally_zero());
    let cut = TestFn::cutoff(&interval(-1.0, 1.0), 0.1).unwrap();
    let prod = TestFn::combine(CombineOp::Multiply, &[cut, psi()]).unwrap();
    for i in 0..=200 {
        let x = -1.2 + 2.4 * i as f64 / 200.0;
        assert_eq!(prod.eval(x, 0).unwrap(), psi().eval(x, 0).unwrap());
    }
    let a = TestFn::standard_bump(0.0, 1.0).unwrap();
    let b = TestFn::standard_bump(3.0, 1.0).unwrap();
    assert_eq!(
        a.add(&b).support_hint(),
        SupportHint::Interval { lo: -1.0, hi: 4.0 }
    );
    assert_eq!(a.mul(&b).support_hint(), SupportHint::Empty);
}

#[test]
fn bump_integral_matches_riemann_sum() {
    let n = 1_000_000;
    let h = 2.0 / n as f64;
    let riemann: f64 = (0..n)
        .map(|i| psi().value(-1.0 + (i as f64 + 0.5) * h))
        .sum::<f64>()
        * h;
    let q = psi().integrate(-1.0, 1.0, &QuadOptions::default()).unwrap();
    assert_relative_eq!(q, riemann, epsilon = 1e-8);
    assert_eq!(
        TestFn::<f64>::zero()
            .integrate(-1.0, 1.0, &QuadOptions::default())
            .unwrap(),
        0.0
    );
}

#[test]
fn partition_examples() {
    let single = partition_of_unity(&psi(), &[(-2.0, 2.0)], 4096).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].to_expr(), psi().to_expr());

    let covers = [(-1.5, 0.3), (-0.3, 1.5)];
    let parts = partition_of_unity(&psi(), &covers, 4096).unwrap();
    for i in 0..=1000 {
        let x = -1.2 + 2.4 * i as f64 / 1000.0;
        let total: f64 = parts.iter().map(|p| p.value(x)).sum();
        assert!((total - psi().value(x)).abs() <= 1e-12);
        for p in &parts {
            assert!(p.value(x) >= -1e-12);
        }
    }
    for (p, &(a, b)) in parts.iter().zip(&covers) {
        let (lo, hi) = p.numeric_support(0.0, 4096).hull().unwrap();
        assert!(a < lo && hi < b);
    }
    assert!(matches!(
        partition_of_unity(&psi(), &[(-2.0, 0.0), (0.1, 2.0)], 4096),
        Err(Error::CoverError(_))
    ));
}

#[test]
fn serde_round_trip() {
    let f = psi()
        .affine(2.0, 0.5)
        .unwrap()
        .mul(&TestFn::cutoff(&interval(0.0, 1.0), 0.2).unwrap())
        .add(&TestFn::conv_bump(&[0.5, 0.25], 1).unwrap().scale(-2.0))
        .add(&TestFn::monomial_jet(1.0, 2, 0.5));
    let json = serde_json::to_string(&f).unwrap();
    let back: TestFn = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_expr(), f.to_expr());
    for &x in &[-0.7, 0.1, 0.4, 2.0] {
        assert_eq!(back.eval(x, 0).unwrap(), f.eval(x, 0).unwrap());
    }
    assert!(json.contains("\"node\":\"standard_bump\""));
}

#[test]
fn single_precision() {
    let p = TestFn::<f32>::standard_bump(0.0, 1.0).unwrap();
    assert!((p.eval(0.0, 0).unwrap() - (-1.0f32).exp()).abs() < 1e-7);
    let s = p
        .seminorm(
            &SeminormSpec::new(CompactSet::interval(-1.0f32, 1.0).unwrap(), 1),
            512,
        )
        .unwrap();
    assert!(s.is_finite() && s > 0.36);
}
