use super::TestFn;
use crate::compact::CompactSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Depth of `x` inside the union of open covers: distance to the nearest
/// endpoint of the best cover containing it (negative when uncovered).
fn depth<T: Scalar>(covers: &[(T, T)], x: T) -> T {
    covers
        .iter()
        .map(|&(a, b)| (x - a).min(b - x))
        .fold(T::neg_infinity(), T::max)
}

/// Split `ξ` into `ξ_1 + ⋯ + ξ_m` with `ξ_j` supported in `covers[j]`.
///
/// `ξ_1 = ξ𝒳_1`, `ξ_j = ξ𝒳_j(1 − 𝒳_1)⋯(1 − 𝒳_{j−1})`, where `𝒳_j` is a cutoff
/// equal to 1 on the part of the support lying deep inside cover `j`.
pub fn partition_of_unity<T: Scalar>(
    xi: &TestFn<T>,
    covers: &[(T, T)],
    grid_pts: usize,
) -> Result<Vec<TestFn<T>>> {
    if covers.is_empty() {
        return Err(Error::CoverError(f64::NEG_INFINITY));
    }
    let support = xi.numeric_support(T::zero(), grid_pts);
    let Some((s_lo, s_hi)) = support.hull() else {
        return Ok(vec![TestFn::zero(); covers.len()]);
    };
    if let Some(j) = covers.iter().position(|&(a, b)| a < s_lo && s_hi < b) {
        let mut out = vec![TestFn::zero(); covers.len()];
        out[j] = xi.clone();
        return Ok(out);
    }

    // depth is piecewise linear; its minimum over the support sits at a breakpoint
    let mut candidates: Vec<T> = support
        .intervals()
        .iter()
        .flat_map(|&(lo, hi)| [lo, hi])
        .collect();
    for &(a, _) in covers {
        for &(_, b) in covers {
            candidates.push((a + b) * T::of(0.5));
        }
    }
    candidates.extend(covers.iter().flat_map(|&(a, b)| [a, b]));
    let min_depth = candidates
        .into_iter()
        .filter(|&x| support.contains(x))
        .map(|x| depth(covers, x))
        .fold(T::infinity(), T::min);
    if !(min_depth > T::zero()) {
        return Err(Error::CoverError(min_depth.to_f64_lossy()));
    }

    let m = min_depth / T::of(3.0);
    let inset = m * T::of(2.5);
    let mut remaining = xi.clone();
    let mut out = Vec::with_capacity(covers.len());
    for &(a, b) in covers {
        let core = if a + inset <= b - inset {
            support.intersection(&CompactSet::interval(a + inset, b - inset)?)
        } else {
            CompactSet::empty()
        };
        if core.is_empty() {
            out.push(TestFn::zero());
            continue;
        }
        let chi = TestFn::cutoff(&core, m)?;
        out.push(remaining.mul(&chi));
        remaining = remaining.mul(&chi.one_minus());
    }
    Ok(out)
}
