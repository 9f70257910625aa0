use serde::{Deserialize, Serialize};

/// Fraction of a grid treated as its tail for convergence diagnostics.
pub const TAIL_FRACTION: f64 = 0.2;

/// A sampled trace `x ↦ value` compared against a constant target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub target: f64,
    /// `sup |value - target|` over `window`.
    pub sup_deviation_tail: f64,
    pub window: [f64; 2],
}

impl Trace {
    /// Builds a trace whose tail window covers the last `TAIL_FRACTION` of
    /// the points.
    pub fn with_tail_window(xs: Vec<f64>, values: Vec<f64>, target: f64) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                xs,
                values,
                target,
                sup_deviation_tail: 0.0,
                window: [0.0, 0.0],
            };
        }
        let start = tail_start(n);
        let sup = values[start..]
            .iter()
            .map(|v| (v - target).abs())
            .fold(0.0, f64::max);
        let window = [xs[start], xs[n - 1]];
        Self {
            xs,
            values,
            target,
            sup_deviation_tail: sup,
            window,
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// `sup |value - target|` over points with `lo <= x <= hi`.
    pub fn sup_deviation_on(&self, lo: f64, hi: f64) -> f64 {
        self.xs
            .iter()
            .zip(&self.values)
            .filter(|(&x, _)| x >= lo && x <= hi)
            .map(|(_, v)| (v - self.target).abs())
            .fold(0.0, f64::max)
    }
}

/// First index of the last `TAIL_FRACTION` of `n` points.
pub(crate) fn tail_start(n: usize) -> usize {
    let keep = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n.max(1));
    n - keep
}
