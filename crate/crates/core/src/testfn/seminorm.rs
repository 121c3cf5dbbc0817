use serde::{Deserialize, Serialize};

use super::{SupportHint, TestFn};
use crate::compact::CompactSet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Grid points per interval used when no explicit count is given.
pub const DEFAULT_DENSITY: usize = 4096;

const GOLDEN_STEPS: usize = 48;

/// Grid peaks polished per derivative order.
const MAX_PEAKS: usize = 32;

/// `‖·‖_{K,k}`: a compact set and a derivative order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SeminormSpec<T = f64> {
    pub set: CompactSet<T>,
    pub k: u32,
}

impl<T: Scalar> SeminormSpec<T> {
    pub fn new(set: CompactSet<T>, k: u32) -> Self {
        Self { set, k }
    }
}

/// `sup_K |∂^d φ|` for `d = 0..=k`.
///
/// Each interval of `K` (clipped to the support hint) is sampled at `grid_pts`
/// uniform points, plus `PIECE_PTS` points across every summand's own support
/// so narrow bumps inside a wide sum are not stepped over. Every grid peak within
/// half of the best sample is then polished by golden-section search over its
/// two neighbouring cells, so near-equal peaks cannot hide one another.
pub fn sup_derivatives<T: Scalar>(
    phi: &TestFn<T>,
    set: &CompactSet<T>,
    k: u32,
    grid_pts: usize,
) -> Result<Vec<T>> {
    if k > phi.max_deriv() {
        return Err(Error::DerivOrderExceeded {
            requested: k,
            max: phi.max_deriv(),
        });
    }
    let n = k as usize;
    let mut sups = vec![T::zero(); n + 1];
    let pieces = phi.support_pieces();
    for &(lo, hi) in set.intervals() {
        let (a, b) = match phi.support_hint() {
            SupportHint::Empty => continue,
            SupportHint::Interval { lo: s, hi: e } => (lo.max(s), hi.min(e)),
            SupportHint::Unbounded => (lo, hi),
        };
        if a > b {
            continue;
        }
        let mut xs = uniform(a, b, grid_pts.max(2));
        for &(s, e) in pieces.iter().skip(1) {
            let (s, e) = (s.max(a), e.min(b));
            if s < e {
                xs.extend(uniform(s, e, PIECE_PTS));
            }
        }
        xs.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
        xs.dedup();
        let mut vals = vec![Vec::with_capacity(xs.len()); n + 1];
        for &x in &xs {
            for (d, v) in phi.jet(x, n).derivatives().into_iter().enumerate() {
                vals[d].push(v.abs());
            }
        }
        let last = xs.len() - 1;
        for (d, vs) in vals.iter().enumerate() {
            let top = vs.iter().copied().fold(T::zero(), T::max);
            let mut peaks: Vec<usize> = (0..=last)
                .filter(|&i| {
                    vs[i] >= top * T::of(0.5)
                        && (i == 0 || vs[i] >= vs[i - 1])
                        && (i == last || vs[i] >= vs[i + 1])
                })
                .collect();
            peaks.sort_by(|&i, &j| vs[j].partial_cmp(&vs[i]).expect("finite samples"));
            peaks.truncate(MAX_PEAKS);
            let mut sup = top;
            for i in peaks {
                let (l, r) = (xs[i.saturating_sub(1)], xs[(i + 1).min(last)]);
                if l < r {
                    sup = sup.max(golden_max(|x| phi.jet(x, n).derivative(d).abs(), l, r));
                }
            }
            sups[d] = sups[d].max(sup);
        }
    }
    Ok(sups)
}

const PIECE_PTS: usize = 65;

fn uniform<T: Scalar>(a: T, b: T, pts: usize) -> Vec<T> {
    if a == b {
        return vec![a];
    }
    let cells = pts.max(2) - 1;
    let step = (b - a) / T::of_usize(cells);
    (0..=cells)
        .map(|i| {
            if i == cells {
                b
            } else {
                a + step * T::of_usize(i)
            }
        })
        .collect()
}

fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let r = T::of(0.618_033_988_749_894_8);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
        best = best.max(f1).max(f2);
    }
    best
}
