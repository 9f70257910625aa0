//! Small numerical kernels shared by the other modules: compensated
//! summation, trapezoid and Simpson quadrature, Aitken's Δ² transform,
//! sliding-window minima and a least-squares slope.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(step: f64, values: &[f64]) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let mut acc = CompensatedSum::new();
            acc.add(0.5 * values[0]);
            for &v in &values[1..n - 1] {
                acc.add(v);
            }
            acc.add(0.5 * values[n - 1]);
            step * acc.value()
        }
    }
}

/// Composite Simpson rule on uniformly spaced samples. The number of
/// intervals (`values.len() - 1`) must be even.
pub fn simpson(step: f64, values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Ok(0.0);
    }
    let intervals = values.len() - 1;
    if intervals % 2 != 0 {
        return Err(Error::OddIntervals(intervals));
    }
    let mut acc = CompensatedSum::new();
    acc.add(values[0]);
    acc.add(values[intervals]);
    for (i, &v) in values.iter().enumerate().take(intervals).skip(1) {
        acc.add(if i % 2 == 1 { 4.0 * v } else { 2.0 * v });
    }
    Ok(step / 3.0 * acc.value())
}

const MAX_ADAPTIVE_DEPTH: u32 = 60;

/// Adaptive Simpson quadrature over `[a, b]`, started from `panels` equal
/// panels so that oscillatory integrands are not under-sampled on the first
/// pass. `tol` is an absolute tolerance distributed by panel width.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { a + width * (p + 1) as f64 };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let local_tol = tol * (hi - lo) / (b - a);
        acc.add(refine(&f, lo, hi, flo, fmid, fhi, whole, local_tol, 0));
    }
    acc.value()
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Absolute tolerances halve with depth; below the rounding level of the
    // panel's own magnitude further refinement cannot help.
    let magnitude = (b - a) / 12.0 * (fa.abs() + 4.0 * flm.abs() + 2.0 * fm.abs() + 4.0 * frm.abs() + fb.abs());
    let floor = 64.0 * f64::EPSILON * magnitude;
    if depth >= MAX_ADAPTIVE_DEPTH || delta.abs() <= 15.0 * tol.max(floor) || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// Aitken's Δ² transform of a sequence. The returned vector has
/// `values.len() - 2` entries. A vanishing second difference means the
/// three points already agree to rounding, in which case the newest value is
/// passed through unchanged.
pub fn aitken(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| {
            let (x0, x1, x2) = (w[0], w[1], w[2]);
            let d1 = x1 - x0;
            let d2 = x2 - x1;
            let denom = d2 - d1;
            let scale = x0.abs().max(x1.abs()).max(x2.abs()).max(f64::MIN_POSITIVE);
            if denom.abs() <= 64.0 * f64::EPSILON * scale {
                x2
            } else {
                x2 - d2 * d2 / denom
            }
        })
        .collect()
}

/// For every start index `k`, the minimum of `values[k..=min(k + window, n-1)]`.
pub fn forward_window_min(values: &[f64], window: usize) -> Vec<f64> {
    forward_window_argmin(values, window)
        .into_iter()
        .map(|i| values[i])
        .collect()
}

/// Index of the (earliest) minimum of `values[k..=min(k + window, n-1)]`
/// for every `k`. Monotone deque, O(n).
pub fn forward_window_argmin(values: &[f64], window: usize) -> Vec<usize> {
    let n = values.len();
    let mut out = vec![0; n];
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0usize;
    for k in 0..n {
        let hi = (k + window).min(n - 1);
        while next <= hi {
            while let Some(&back) = deque.back() {
                if values[back] > values[next] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        while let Some(&front) = deque.front() {
            if front < k {
                deque.pop_front();
            } else {
                break;
            }
        }
        out[k] = *deque.front().expect("window is never empty");
    }
    out
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Returns `Some(k)` when `value / unit` is within a relative 1e-9 of a
/// positive integer `k`.
pub(crate) fn integer_ratio(value: f64, unit: f64) -> Option<usize> {
    if !(value.is_finite() && unit.is_finite()) || value <= 0.0 || unit <= 0.0 {
        return None;
    }
    let r = value / unit;
    let k = r.round();
    (k >= 1.0 && (r - k).abs() <= 1e-9 * k).then_some(k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let n = 10;
        let h = 2.0 / n as f64;
        let ys: Vec<f64> = (0..=n).map(|i| (-1.0 + h * i as f64).powi(3) + 1.0).collect();
        assert!((simpson(h, &ys).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(simpson(h, &ys[..10]), Err(Error::OddIntervals(9)));
    }

    #[test]
    fn adaptive_simpson_resolves_a_narrow_peak() {
        let d = 1e-7;
        let v = adaptive_simpson(|t| d / (d * d + t * t), -1.0, 1.0, 2, 1e-10);
        let exact = 2.0 * (1.0 / d).atan();
        assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
    }

    #[test]
    fn aitken_is_exact_on_geometric_sequences() {
        let seq: Vec<f64> = (0..6).map(|j| 3.0 + 0.5f64.powi(j)).collect();
        for v in aitken(&seq) {
            assert!((v - 3.0).abs() < 1e-14);
        }
        assert_eq!(aitken(&[2.0, 2.0, 2.0]), vec![2.0]);
    }

    #[test]
    fn window_min_matches_brute_force() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let got = forward_window_min(&v, 2);
        for k in 0..v.len() {
            let hi = (k + 2).min(v.len() - 1);
            let brute = v[k..=hi].iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(got[k], brute);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s = compensated_sum([1.0, 1e-16, 1e-16, -1.0]);
        assert!((s - 2e-16).abs() < 1e-30);
    }

    #[test]
    fn integer_ratio_tolerates_rounding() {
        assert_eq!(integer_ratio(0.5, 1e-3), Some(500));
        assert_eq!(integer_ratio(0.0005, 1e-3), None);
        assert_eq!(integer_ratio(3.0 * 0.1, 0.1), Some(3));
    }
}
