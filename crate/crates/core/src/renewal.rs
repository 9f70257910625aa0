//! Renewal equation solvers.
//!
//! * Lattice case: `q_0 = 1`, `q_n = Σ_{k=1}^{n} p_k q_{n-k}`, solved by direct
//!   convolution in O(N·M).
//! * Dirichlet case: `f = e + f ⋆ g`, i.e. `f(1) = 1` and
//!   `f(n) = Σ_{d | n, d >= 2} g(d) f(n/d)`, unrolled over divisors.
//! * Non-lattice case: the density is lumped onto a fine lattice and the
//!   lattice recursion is summed into the renewal function `Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{discretize_density, ArithWeights, GridDensity, LatticeDist};
use crate::numeric::{integer_ratio, CompensatedSum};
use crate::sieve::SmallestPrimeFactors;
use crate::trace::Trace;

/// Default cap on the Dirichlet horizon `X`.
pub const DIRICHLET_CAP: usize = 10_000_000;

/// Renewal probabilities `q_n` at the lattice points `n · span`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalSeq {
    span: f64,
    q: Vec<f64>,
}

impl RenewalSeq {
    pub fn span(&self) -> f64 {
        self.span
    }

    /// `q_0, ..., q_N`.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Index `N` of the last computed term.
    pub fn last_index(&self) -> usize {
        self.q.len() - 1
    }

    /// Trace `n ↦ q_n` against the lattice renewal limit `a`.
    pub fn deviation_trace(&self, a: f64) -> Trace {
        let xs = (0..self.q.len()).map(|n| n as f64).collect();
        Trace::with_tail_window(xs, self.q.clone(), a)
    }
}

/// Solves the lattice renewal recursion up to index `n`.
pub fn renewal_sequence(d: &LatticeDist, n: usize) -> RenewalSeq {
    RenewalSeq {
        span: d.span(),
        q: lattice_recursion(d.probs(), n),
    }
}

/// Converts a signed length into `usize`, rejecting negative values.
pub fn checked_len(n: i64) -> Result<usize> {
    usize::try_from(n).map_err(|_| Error::NNegative(n))
}

pub(crate) fn lattice_recursion(probs: &[f64], n: usize) -> Vec<f64> {
    let m = probs.len();
    // Reversed masses turn each step into a contiguous dot product.
    let rev: Vec<f64> = probs.iter().rev().copied().collect();
    let mut q = Vec::with_capacity(n + 1);
    q.push(1.0);
    for i in 1..=n {
        let width = i.min(m);
        let qn = dot(&rev[m - width..], &q[i - width..i]);
        q.push(qn);
    }
    q
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        lanes[0] += x[0] * y[0];
        lanes[1] += x[1] * y[1];
        lanes[2] += x[2] * y[2];
        lanes[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

/// Solution of `f = e + f ⋆ g` on `1..=X` together with its partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithRenewal {
    /// `f[n]` for `n = 0..=X`; `f[0] = 0` is padding.
    f: Vec<f64>,
    /// `partial[n] = Σ_{m <= n} f(m)`.
    partial: Vec<f64>,
    log_moment: f64,
}

impl ArithRenewal {
    /// `f(n)` for `1 <= n <= X`.
    pub fn f(&self, n: usize) -> f64 {
        self.f[n]
    }

    /// `f(1), ..., f(X)`.
    pub fn values(&self) -> &[f64] {
        &self.f[1..]
    }

    /// `S(x) = Σ_{n <= x} f(n)` for integer `x <= X`.
    pub fn partial_sum(&self, x: usize) -> f64 {
        self.partial[x]
    }

    pub fn horizon(&self) -> usize {
        self.f.len() - 1
    }

    /// Limit of `S(x)/x` predicted by the renewal theorem,
    /// `1 / Σ g(n) ln n / n`.
    pub fn limit_target(&self) -> f64 {
        1.0 / self.log_moment
    }
}

pub fn dirichlet_renewal(w: &ArithWeights, x: usize) -> Result<ArithRenewal> {
    dirichlet_renewal_capped(w, x, DIRICHLET_CAP)
}

pub fn dirichlet_renewal_capped(w: &ArithWeights, x: usize, cap: usize) -> Result<ArithRenewal> {
    if x == 0 {
        return Err(Error::param("x", "horizon must be at least 1"));
    }
    if x > cap {
        return Err(Error::XTooLarge { requested: x, cap });
    }
    let mut g = vec![0.0; x + 1];
    let mut support = Vec::new();
    for (n, weight) in w.iter() {
        if n as usize <= x {
            g[n as usize] = weight;
            support.push(n as usize);
        }
    }
    let mut f = vec![0.0; x + 1];
    f[1] = 1.0;
    if support.len() <= 16 {
        for n in 2..=x {
            let mut acc = 0.0;
            for &d in &support {
                if d > n {
                    break;
                }
                if n % d == 0 {
                    acc += g[d] * f[n / d];
                }
            }
            f[n] = acc;
        }
    } else {
        let sieve = SmallestPrimeFactors::new(x);
        let (mut factors, mut divisors) = (Vec::new(), Vec::new());
        for n in 2..=x {
            sieve.divisors(n, &mut factors, &mut divisors);
            let mut acc = 0.0;
            for &d in &divisors {
                if d >= 2 && g[d] > 0.0 {
                    acc += g[d] * f[n / d];
                }
            }
            f[n] = acc;
        }
    }
    let mut partial = Vec::with_capacity(x + 1);
    let mut acc = CompensatedSum::new();
    for &v in &f {
        acc.add(v);
        partial.push(acc.value());
    }
    Ok(ArithRenewal {
        f,
        partial,
        log_moment: w.log_moment(),
    })
}

/// Renewal function `Q(kδ)`, `k = 0..=N`, including the unit atom at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalGrid {
    step: f64,
    q_cum: Vec<f64>,
}

impl RenewalGrid {
    /// Cumulative sums of a lattice renewal sequence, on the grid of its span.
    pub fn from_sequence(seq: &RenewalSeq) -> Self {
        Self {
            step: seq.span(),
            q_cum: cumulative(seq.q()),
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `Q(0), Q(δ), ..., Q(Nδ)`.
    pub fn values(&self) -> &[f64] {
        &self.q_cum
    }

    pub fn x_max(&self) -> f64 {
        (self.q_cum.len() - 1) as f64 * self.step
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.q_cum.len()).map(move |k| k as f64 * self.step)
    }
}

fn cumulative(q: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    q.iter()
        .map(|&v| {
            acc.add(v);
            acc.value()
        })
        .collect()
}

/// Renewal function of a gridded density on `[0, x_max]`, on the density's
/// own grid.
pub fn continuous_renewal(p: &GridDensity, x_max: f64) -> Result<RenewalGrid> {
    if !(x_max.is_finite() && x_max >= 0.0) {
        return Err(Error::param("x_max", format!("must be non-negative, got {x_max}")));
    }
    let steps = (x_max / p.step() * (1.0 + 1e-12)).floor() as usize;
    if steps as f64 * p.step() > p.x_max() * (1.0 + 1e-12) && p.tail_mass() > 0.0 {
        return Err(Error::param(
            "x_max",
            "horizon extends past the sampled density while tail mass is declared",
        ));
    }
    let lattice = discretize_density(p, p.step())?;
    let seq = renewal_sequence(&lattice, steps);
    Ok(RenewalGrid {
        step: p.step(),
        q_cum: cumulative(seq.q()),
    })
}

/// `x ↦ Q(x + h) - Q(x)` on the grid, against the Blackwell limit `h / mean`.
/// The tail window is the last fifth of the grid.
pub fn blackwell_increments(grid: &RenewalGrid, h: f64, mean: f64) -> Result<Trace> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::param("mean", format!("must be positive, got {mean}")));
    }
    let shift = integer_ratio(h, grid.step).ok_or(Error::HNotGridAligned { h, step: grid.step })?;
    let q = &grid.q_cum;
    if shift >= q.len() {
        return Err(Error::param("h", "window is longer than the renewal grid"));
    }
    let count = q.len() - shift;
    let xs = (0..count).map(|k| k as f64 * grid.step).collect();
    let inc = (0..count).map(|k| q[k + shift] - q[k]).collect();
    Ok(Trace::with_tail_window(xs, inc, h / mean))
}

/// Per-decade spread of `S(x)/x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeSpread {
    pub lo: usize,
    pub hi: usize,
    pub min: f64,
    pub max: f64,
}

impl DecadeSpread {
    pub fn amplitude(&self) -> f64 {
        self.max - self.min
    }
}

/// `S(x)/x` diagnostics for a Dirichlet renewal solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioTrace {
    /// `S(x)/x` on a logarithmic output grid.
    pub trace: Trace,
    /// Spread over each complete decade `[10^k, 10^{k+1}]` inside `[1, X]`.
    pub decades: Vec<DecadeSpread>,
}

const POINTS_PER_DECADE: usize = 40;

/// `x ↦ S(x)/x` against `1 / Σ g(n) ln n / n`. The reported deviation is the
/// maximum over every integer of the last decade `[max(1, X/10), X]`.
pub fn partial_sum_ratio(a: &ArithRenewal) -> RatioTrace {
    let x_max = a.horizon();
    let ratio = |x: usize| a.partial[x] / x as f64;
    let mut grid: Vec<usize> = Vec::new();
    let decades_total = (x_max as f64).log10();
    let steps = (decades_total * POINTS_PER_DECADE as f64).floor() as usize;
    for i in 0..=steps {
        let x = 10f64.powf(i as f64 / POINTS_PER_DECADE as f64).round() as usize;
        if x >= 1 && x <= x_max && grid.last() != Some(&x) {
            grid.push(x);
        }
    }
    if grid.last() != Some(&x_max) {
        grid.push(x_max);
    }
    let target = a.limit_target();
    let lo = (x_max / 10).max(1);
    let sup = (lo..=x_max).map(|x| (ratio(x) - target).abs()).fold(0.0, f64::max);
    let xs: Vec<f64> = grid.iter().map(|&x| x as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| ratio(x)).collect();
    let trace = Trace {
        xs,
        values,
        target,
        sup_deviation_tail: sup,
        window: [lo as f64, x_max as f64],
    };
    let mut decades = Vec::new();
    let mut start = 1usize;
    while let Some(end) = start.checked_mul(10).filter(|&e| e <= x_max) {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in start..=end {
            let r = ratio(x);
            min = min.min(r);
            max = max.max(r);
        }
        decades.push(DecadeSpread {
            lo: start,
            hi: end,
            min,
            max,
        });
        start = end;
    }
    RatioTrace { trace, decades }
}
