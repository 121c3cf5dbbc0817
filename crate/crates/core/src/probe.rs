//! Random test functions used to falsify class, support and bound claims.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compact::{CompactSet, Omega};
use crate::error::Result;
use crate::TestFunction;

/// One summand of a probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Bump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
    /// `amplitude · χ` with `χ = 1` on `[lo, hi]` and `0` beyond `2·margin`.
    Plateau {
        lo: f64,
        hi: f64,
        margin: f64,
        amplitude: f64,
    },
    Jet {
        y: f64,
        order: u32,
        coefficient: f64,
    },
    Constant {
        value: f64,
    },
}

impl Component {
    fn build(&self) -> Result<TestFunction> {
        Ok(match *self {
            Self::Bump {
                center,
                radius,
                amplitude,
            } => TestFunction::standard_bump(center, radius)?.scale(amplitude),
            Self::Plateau {
                lo,
                hi,
                margin,
                amplitude,
            } => TestFunction::cutoff(&CompactSet::interval(lo, hi)?, margin)?.scale(amplitude),
            Self::Jet {
                y,
                order,
                coefficient,
            } => TestFunction::monomial_jet(y, order, coefficient),
            Self::Constant { value } => TestFunction::constant(value),
        })
    }

    fn focus(&self, p: f64, lambda: f64) -> Self {
        let pull = |x: f64| p + (x - p) / lambda;
        match *self {
            Self::Bump {
                center,
                radius,
                amplitude,
            } => Self::Bump {
                center: pull(center),
                radius: radius / lambda,
                amplitude: amplitude * lambda,
            },
            Self::Plateau {
                lo,
                hi,
                margin,
                amplitude,
            } => Self::Plateau {
                lo: pull(lo),
                hi: pull(hi),
                margin: margin / lambda,
                amplitude: amplitude * lambda,
            },
            Self::Jet {
                y,
                order,
                coefficient,
            } => Self::Jet {
                y: pull(y),
                order,
                coefficient: coefficient * lambda.powi(order as i32 + 1),
            },
            Self::Constant { value } => Self::Constant {
                value: value * lambda,
            },
        }
    }
}

/// Serializable description of a probe `scale · Σ components`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub components: Vec<Component>,
    pub scale: f64,
}

impl Probe {
    pub fn new(components: Vec<Component>) -> Self {
        Self {
            components,
            scale: 1.0,
        }
    }

    pub fn build(&self) -> Result<TestFunction> {
        let parts = self
            .components
            .iter()
            .map(Component::build)
            .collect::<Result<Vec<_>>>()?;
        Ok(TestFunction::sum(parts).scale(self.scale))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            components: self.components.clone(),
            scale: self.scale * c,
        }
    }

    /// `x ↦ λ ξ(p + λ(x − p))`.
    pub fn focus(&self, p: f64, lambda: f64) -> Self {
        Self {
            components: self.components.iter().map(|c| c.focus(p, lambda)).collect(),
            scale: self.scale,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Component::Bump { .. } | Component::Plateau { .. }))
    }
}

/// Distribution over probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    /// Candidate regions for compact supports, chosen in proportion to length.
    pub windows: Vec<(f64, f64)>,
    /// Also draw monomial jets and constants.
    pub non_compact: bool,
    pub amplitude: (f64, f64),
    pub radius: (f64, f64),
    pub max_components: usize,
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo >= hi {
        return lo;
    }
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn signed<R: Rng>(rng: &mut R, magnitude: f64) -> f64 {
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

impl ProbeFamily {
    pub fn new(windows: Vec<(f64, f64)>, non_compact: bool) -> Self {
        Self {
            windows,
            non_compact,
            amplitude: (1e-3, 1e3),
            radius: (0.1, 2.0),
            max_components: 4,
        }
    }

    pub fn window(lo: f64, hi: f64, non_compact: bool) -> Self {
        Self::new(vec![(lo, hi)], non_compact)
    }

    /// Windows of `Ω` at distance `≥ gap` from `set`.
    pub fn avoiding(set: &CompactSet, gap: f64, omega: &Omega) -> Self {
        let edge = 1e-3 * (omega.hi - omega.lo);
        let (lo, hi) = (omega.lo + edge, omega.hi - edge);
        let mut windows = Vec::new();
        let mut cursor = lo;
        for &(a, b) in set.inflate(gap).intervals() {
            if a > cursor {
                windows.push((cursor, a.min(hi)));
            }
            cursor = cursor.max(b);
        }
        if cursor < hi {
            windows.push((cursor, hi));
        }
        windows.retain(|&(a, b)| b - a > 1e-6);
        Self::new(windows, false)
    }

    pub fn with_amplitude(mut self, lo: f64, hi: f64) -> Self {
        self.amplitude = (lo, hi);
        self
    }

    pub fn with_radius(mut self, lo: f64, hi: f64) -> Self {
        self.radius = (lo, hi);
        self
    }

    pub fn with_max_components(mut self, n: usize) -> Self {
        self.max_components = n.max(1);
        self
    }

    fn pick_window<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let total: f64 = self.windows.iter().map(|w| w.1 - w.0).sum();
        let mut u = rng.gen_range(0.0..total.max(f64::MIN_POSITIVE));
        for &w in &self.windows {
            u -= w.1 - w.0;
            if u <= 0.0 {
                return w;
            }
        }
        *self.windows.last().expect("non-empty window list")
    }

    fn bump<R: Rng>(&self, rng: &mut R) -> Component {
        let (lo, hi) = self.pick_window(rng);
        let half = 0.5 * (hi - lo);
        let radius = log_uniform(rng, (self.radius.0.min(half), self.radius.1.min(half)));
        let center = if hi - radius > lo + radius {
            rng.gen_range(lo + radius..=hi - radius)
        } else {
            0.5 * (lo + hi)
        };
        let magnitude = log_uniform(rng, self.amplitude);
        let amplitude = signed(rng, magnitude);
        Component::Bump {
            center,
            radius,
            amplitude,
        }
    }

    fn plateau<R: Rng>(&self, rng: &mut R) -> Component {
        let (lo, hi) = self.pick_window(rng);
        let width = hi - lo;
        let margin = log_uniform(rng, (width / 64.0, width / 8.0));
        let (a, b) = (lo + 2.0 * margin, hi - 2.0 * margin);
        let mut ends = [rng.gen_range(a..=b), rng.gen_range(a..=b)];
        ends.sort_by(f64::total_cmp);
        let magnitude = log_uniform(rng, self.amplitude);
        let amplitude = signed(rng, magnitude);
        Component::Plateau {
            lo: ends[0],
            hi: ends[1],
            margin,
            amplitude,
        }
    }

    fn component<R: Rng>(&self, rng: &mut R) -> Component {
        let u: f64 = rng.gen();
        if self.non_compact && u > 0.75 {
            let (lo, hi) = self.pick_window(rng);
            let magnitude = log_uniform(rng, self.amplitude);
            if u > 0.9 {
                Component::Constant {
                    value: signed(rng, magnitude),
                }
            } else {
                Component::Jet {
                    y: rng.gen_range(lo..=hi),
                    order: rng.gen_range(0..=3),
                    coefficient: signed(rng, magnitude),
                }
            }
        } else if u < 0.5 {
            self.bump(rng)
        } else {
            self.plateau(rng)
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> Probe {
        let n = rng.gen_range(1..=self.max_components);
        Probe::new((0..n).map(|_| self.component(rng)).collect())
    }

    /// Draws until the probe is compactly supported.
    pub fn draw_compact<R: Rng>(&self, rng: &mut R) -> Probe {
        let n = rng.gen_range(1..=self.max_components);
        Probe::new(
            (0..n)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        self.bump(rng)
                    } else {
                        self.plateau(rng)
                    }
                })
                .collect(),
        )
    }
}
