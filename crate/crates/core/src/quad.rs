//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) / T::of(2.0);
    let center = (a + b) / T::of(2.0);
    let fc = f(center);
    let mut kron = fc * T::of(WGK[7]);
    let mut gauss = fc * T::of(WG[3]);
    for j in 0..7 {
        let dx = half * T::of(XGK[j]);
        let s = f(center - dx) + f(center + dx);
        kron += T::of(WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::of(WG[j / 2]) * s;
        }
    }
    let value = kron * half;
    let err = ((kron - gauss) * half).abs();
    (value, err)
}

/// `∫_lo^hi f` to `max(abs_tol, rel_tol·|I|)`; refinement bisects the
/// interval with the largest error estimate.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(
    f: F,
    lo: T,
    hi: T,
    opts: &QuadOptions,
) -> Result<QuadResult<T>> {
    if lo == hi {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    let (a, b, sign) = if lo < hi {
        (lo, hi, T::one())
    } else {
        (hi, lo, -T::one())
    };
    let floor = T::of(64.0) * T::epsilon();
    let mut parts: Vec<(T, T, T, T)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    parts.push((a, b, v, e));
    loop {
        let total: T = parts.iter().fold(T::zero(), |s, p| s + p.2);
        let err: T = parts.iter().fold(T::zero(), |s, p| s + p.3);
        let tol = T::of(opts.abs_tol).max(T::of(opts.rel_tol).max(floor) * total.abs());
        if err <= tol {
            return Ok(QuadResult {
                value: sign * total,
                error: err,
                intervals: parts.len(),
            });
        }
        if parts.len() >= opts.max_intervals {
            return Err(Error::NonConvergence {
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
                estimate: err.to_f64_lossy(),
            });
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold(
                (0, -T::one()),
                |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best },
            );
        let (pa, pb, _, _) = parts.swap_remove(idx);
        let mid = (pa + pb) / T::of(2.0);
        if !(pa < mid && mid < pb) {
            return Err(Error::NonConvergence {
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
                estimate: err.to_f64_lossy(),
            });
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        parts.push((pa, mid, v1, e1));
        parts.push((mid, pb, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x * x * x - x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn kink_converges() {
        let r = integrate(|x: f64| (x - 0.3).abs(), -1.0, 1.0, &QuadOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7, epsilon = 1e-10);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = integrate(|x: f64| x.exp(), 1.0, 0.0, &QuadOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - std::f64::consts::E, epsilon = 1e-13);
    }

    #[test]
    fn jump_reports_non_convergence_when_budget_small() {
        let opts = QuadOptions {
            max_intervals: 3,
            ..Default::default()
        };
        let r = integrate(|x: f64| if x < 0.123 { 0.0 } else { 1.0 }, 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn works_in_single_precision() {
        let opts = QuadOptions {
            abs_tol: 1e-5,
            ..Default::default()
        };
        let r = integrate(|x: f32| x.sin(), 0.0, std::f32::consts::PI, &opts).unwrap();
        assert!((r.value - 2.0).abs() < 1e-5);
    }
}
