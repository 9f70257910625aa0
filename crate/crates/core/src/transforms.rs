//! Transform evaluators with explicit truncation bounds, and sampling of
//! their real parts on grids that approach the boundary line `Re s = 1`
//! (half-plane) or the unit circle (disc).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{ArithWeights, LatticeDist};
use crate::numeric::{trapezoid, CompensatedSum};
use crate::renewal::{lattice_recursion, ArithRenewal, RenewalSeq};
use crate::trace::Trace;

/// Per-point tail bound targeted by the automatic truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Renewal coefficients are cached up to this many terms; beyond it they are
/// regenerated on the fly for each evaluation point.
const PRECOMPUTE_LIMIT: usize = 1 << 23;

/// Hard cap on the number of terms of an automatically truncated series.
const MAX_TERMS: usize = 2_000_000_000;

/// A truncated transform value and a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

impl TransformValue {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            tail_bound: 0.0,
        }
    }
}

/// A function sampled on `[0, X]` with a declared growth model
/// `|S(x)| <= C e^x x^ρ` beyond `X`, used only for tail bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    step: f64,
    values: Vec<f64>,
    growth_exponent: f64,
    growth_constant: f64,
}

impl SampledFunction {
    /// The growth constant `C` is estimated as the largest
    /// `|S(x)| e^{-x} max(x, 1)^{-ρ}` over the second half of the grid.
    pub fn new(step: f64, values: Vec<f64>, growth_exponent: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if values.len() < 2 {
            return Err(Error::param("values", "need at least two grid points"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param("values", format!("non-finite sample at index {i}")));
        }
        if !growth_exponent.is_finite() {
            return Err(Error::param("growth_exponent", "must be finite"));
        }
        let n = values.len();
        let growth_constant = values[n / 2..]
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = (i + n / 2) as f64 * step;
                v.abs() * (-x).exp() * x.max(1.0).powf(-growth_exponent)
            })
            .fold(0.0, f64::max);
        Ok(Self {
            step,
            values,
            growth_exponent,
            growth_constant,
        })
    }

    pub fn from_fn(step: f64, x_max: f64, growth_exponent: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let k = crate::numeric::integer_ratio(x_max, step).ok_or(Error::StepMismatch {
            target: x_max,
            step,
        })?;
        Self::new(step, (0..=k).map(|i| f(i as f64 * step)).collect(), growth_exponent)
    }

    /// Overrides the estimated growth constant.
    pub fn with_growth_constant(mut self, c: f64) -> Self {
        self.growth_constant = c.abs();
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth_exponent
    }

    pub fn growth_constant(&self) -> f64 {
        self.growth_constant
    }
}

/// Bound on `∫_X^∞ e^{-a x} x^ρ dx` for `a > 0`; infinite when the simple
/// exponential majorant does not apply (`aX <= ρ`).
fn exp_power_tail(a: f64, x: f64, rho: f64) -> f64 {
    if x <= 0.0 {
        return if rho >= 0.0 && rho == 0.0 { 1.0 / a } else { f64::INFINITY };
    }
    let head = x.powf(rho) * (-a * x).exp();
    if rho <= 0.0 {
        head / a
    } else if a * x > rho {
        head / (a - rho / x)
    } else {
        f64::INFINITY
    }
}

/// Trapezoid value of `∫_0^X e^{-sx} S(x) dx` with a bound on the tail
/// beyond `X` from the declared growth model.
pub fn laplace_sampled(f: &SampledFunction, s: Complex64) -> Result<TransformValue> {
    if !(s.re > 1.0) {
        return Err(Error::DivergentRegion { re: s.re });
    }
    let samples: Vec<Complex64> = f
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let x = f.x(k);
            if v == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v * (-s * x).exp()
            }
        })
        .collect();
    let re: Vec<f64> = samples.iter().map(|c| c.re).collect();
    let im: Vec<f64> = samples.iter().map(|c| c.im).collect();
    let value = Complex64::new(trapezoid(f.step, &re), trapezoid(f.step, &im));
    let tail_bound = if f.growth_constant == 0.0 {
        0.0
    } else {
        f.growth_constant * exp_power_tail(s.re - 1.0, f.x_max(), f.growth_exponent)
    };
    Ok(TransformValue { value, tail_bound })
}

/// Laplace-Stieltjes transform `Σ p_n e^{-(s-1)·span·n}` of a lattice
/// distribution. The sum is finite; declared tail mass is bounded by itself.
pub fn stieltjes_lattice(d: &LatticeDist, s: Complex64) -> Result<TransformValue> {
    if !(s.re >= 1.0) {
        return Err(Error::DivergentRegion { re: s.re });
    }
    let z = (-(s - 1.0) * d.span()).exp();
    let mut coeffs = Vec::with_capacity(d.max_index() + 1);
    coeffs.push(0.0);
    coeffs.extend_from_slice(d.probs());
    Ok(TransformValue {
        value: horner(&coeffs, z),
        tail_bound: d.tail_mass(),
    })
}

/// `Σ_{n <= N} q_n e^{-(s-1)·span·n}` for a renewal sequence, with the
/// geometric tail bound from `0 <= q_n <= 1`.
pub fn stieltjes_renewal(q: &RenewalSeq, s: Complex64, n: usize) -> Result<TransformValue> {
    if s.re == 1.0 {
        return Err(Error::TailUnbounded);
    }
    if !(s.re > 1.0) {
        return Err(Error::DivergentRegion { re: s.re });
    }
    if n > q.last_index() {
        return Err(Error::param("n", format!("only {} terms are available", q.last_index())));
    }
    let gap = (s.re - 1.0) * q.span();
    let z = (-(s - 1.0) * q.span()).exp();
    Ok(TransformValue {
        value: horner(&q.q()[..=n], z),
        tail_bound: geometric_tail(-gap, -(-gap).exp_m1(), n + 1),
    })
}

/// `Σ_{n >= first} r^n` given `ln r` and `1 - r`.
fn geometric_tail(ln_r: f64, one_minus_r: f64, first: usize) -> f64 {
    (ln_r * first as f64).exp() / one_minus_r
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficient growth `|c_n| <= constant · n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    pub constant: f64,
    pub exponent: f64,
}

/// Coefficients `f(1), f(2), ...` of a Dirichlet series. Without a growth
/// bound the series is the finite sum of the stored coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletCoeffs {
    coeffs: Vec<f64>,
    growth: Option<GrowthBound>,
}

impl DirichletCoeffs {
    pub fn new(coeffs: Vec<f64>, growth: Option<GrowthBound>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "coefficients must be finite"));
        }
        if let Some(g) = growth {
            if !(g.constant.is_finite() && g.exponent.is_finite()) {
                return Err(Error::param("growth", "bound must be finite"));
            }
        }
        Ok(Self { coeffs, growth })
    }

    /// The convolution identity `e`.
    pub fn identity() -> Self {
        Self {
            coeffs: vec![1.0],
            growth: None,
        }
    }

    /// `g(n)` as a finite Dirichlet series.
    pub fn from_weights(w: &ArithWeights) -> Self {
        let mut coeffs = vec![0.0; w.max_index() as usize];
        for (n, g) in w.iter() {
            coeffs[n as usize - 1] = g;
        }
        Self { coeffs, growth: None }
    }

    /// Renewal coefficients `f(n)`, with the growth bound `f(n) <= C n`
    /// where `C = max f(n)/n` over the computed range.
    pub fn from_renewal(a: &ArithRenewal) -> Self {
        let coeffs = a.values().to_vec();
        let constant = coeffs
            .iter()
            .enumerate()
            .map(|(i, &f)| f.abs() / (i + 1) as f64)
            .fold(0.0, f64::max);
        Self {
            coeffs,
            growth: Some(GrowthBound {
                constant,
                exponent: 1.0,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn growth(&self) -> Option<GrowthBound> {
        self.growth
    }
}

/// `Σ_{n <= N} f(n) n^{-s}` with the integral-comparison tail bound
/// `C N^{ρ+1-σ} / (σ - ρ - 1)`.
pub fn dirichlet_series(f: &DirichletCoeffs, s: Complex64, n: usize) -> Result<TransformValue> {
    let n = n.min(f.coeffs.len());
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (i, &c) in f.coeffs[..n].iter().enumerate() {
        if c != 0.0 {
            let term = c * (-s * ((i + 1) as f64).ln()).exp();
            re.add(term.re);
            im.add(term.im);
        }
    }
    let value = Complex64::new(re.value(), im.value());
    let tail_bound = match f.growth {
        None if n == f.coeffs.len() => 0.0,
        _ => {
            let g = f.growth.ok_or_else(|| {
                Error::TruncationUnbounded("series truncated without a declared growth bound".into())
            })?;
            let excess = s.re - g.exponent - 1.0;
            if !(excess > 0.0) {
                return Err(Error::TruncationUnbounded(format!(
                    "need Re s > {} for coefficients O(n^{})",
                    g.exponent + 1.0,
                    g.exponent
                )));
            }
            if n == 0 {
                return Err(Error::TruncationUnbounded("no terms summed".into()));
            }
            g.constant * (n as f64).powf(-excess) / excess
        }
    };
    Ok(TransformValue { value, tail_bound })
}

/// Power series coefficients `c_0, c_1, ...`, optionally with a bound on
/// the coefficients past the stored ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCoeffs {
    coeffs: Vec<f64>,
    tail_bound: Option<f64>,
}

impl PowerCoeffs {
    pub fn new(coeffs: Vec<f64>, tail_bound: Option<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "coefficients must be finite"));
        }
        if let Some(b) = tail_bound {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::param("tail_bound", "must be a non-negative number"));
            }
        }
        Ok(Self { coeffs, tail_bound })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Horner evaluation of `Σ_{n <= N} c_n z^n` with tail bound
/// `sup_{n > N} |c_n| · |z|^{N+1} / (1 - |z|)`.
pub fn power_series(c: &PowerCoeffs, z: Complex64, n: usize) -> Result<TransformValue> {
    let r = z.norm();
    if !(r < 1.0) {
        return Err(Error::OutsideDisc { modulus: r });
    }
    let last = n.min(c.coeffs.len().saturating_sub(1));
    let value = if c.coeffs.is_empty() {
        Complex64::new(0.0, 0.0)
    } else {
        horner(&c.coeffs[..=last], z)
    };
    let stored_rest = c
        .coeffs
        .get(last + 1..)
        .unwrap_or(&[])
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let sup = stored_rest.max(c.tail_bound.unwrap_or(0.0));
    let tail_bound = if sup == 0.0 {
        0.0
    } else {
        sup * r.powf((last + 1) as f64) / (1.0 - r)
    };
    Ok(TransformValue { value, tail_bound })
}

/// Where a spec's transform lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `Re s > 1`; approach distance `d = σ - 1`, transverse coordinate `t`.
    HalfPlane,
    /// `|z| < 1`; approach distance `d = 1 - r`, transverse coordinate `θ`.
    Disc,
}

impl Domain {
    /// Evaluation point at approach distance `d` and transverse coordinate `t`.
    pub fn point(self, d: f64, t: f64) -> Complex64 {
        match self {
            Domain::HalfPlane => Complex64::new(1.0 + d, t),
            Domain::Disc => Complex64::from_polar(1.0 - d, t),
        }
    }
}

/// A transform to be evaluated near the boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesSpec {
    /// `F ≡ 0`.
    Zero,
    /// `s/(s-1)`, the Laplace-Stieltjes transform of `e^x Q(x)` for the
    /// exponential(1) renewal function `Q(x) = 1 + x`.
    ExpRenewal,
    /// `a/(s-1)`, the Laplace transform of `a e^x`.
    PoleOnly { a: f64 },
    /// `1/(s-1)²`, the Laplace transform of `x e^x`.
    DoublePole,
    /// `1/(1 - G(s))` with `G(s) = Σ g(n) n^{-s}`.
    DirichletWeights(ArithWeights),
    /// `Σ f(n) n^{-s}`.
    Dirichlet(DirichletCoeffs),
    /// `Σ q_n e^{-(s-1)·span·n}` for the renewal sequence of a lattice law.
    LatticeRenewal(LatticeDist),
    /// `Σ c_n z^n`.
    PowerCoeffs(PowerCoeffs),
    /// `Σ q_n z^n` for the renewal sequence of a lattice law.
    PowerRenewal(LatticeDist),
    /// `L{S; s}` of a sampled function.
    Sampled(SampledFunction),
}

impl SeriesSpec {
    pub fn id(&self) -> &'static str {
        match self {
            SeriesSpec::Zero => "zero",
            SeriesSpec::ExpRenewal => "exp_renewal",
            SeriesSpec::PoleOnly { .. } => "pole_only",
            SeriesSpec::DoublePole => "double_pole",
            SeriesSpec::DirichletWeights(_) => "dirichlet_weights",
            SeriesSpec::Dirichlet(_) => "dirichlet_coeffs",
            SeriesSpec::LatticeRenewal(_) => "lattice_renewal",
            SeriesSpec::PowerCoeffs(_) => "power_coeffs",
            SeriesSpec::PowerRenewal(_) => "power_renewal",
            SeriesSpec::Sampled(_) => "sampled",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            SeriesSpec::PowerCoeffs(_) | SeriesSpec::PowerRenewal(_) => Domain::Disc,
            _ => Domain::HalfPlane,
        }
    }

    /// Evaluates at a single point, requiring a tail bound of at most `tol`.
    pub fn evaluate(&self, point: Complex64, tol: f64) -> Result<TransformValue> {
        Evaluator::new(self, None, tol)?.eval(point)
    }

    /// Prepares an evaluator for points no closer to the boundary than
    /// `closest`; renewal coefficients are generated once up to the needed
    /// truncation.
    pub fn evaluator(&self, closest: f64, tol: f64) -> Result<Evaluator<'_>> {
        Evaluator::new(self, Some(closest), tol)
    }
}

/// Evaluator bound to a spec, a tail tolerance and cached coefficients.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    spec: &'a SeriesSpec,
    tol: f64,
    cached_q: Option<Vec<f64>>,
}

impl<'a> Evaluator<'a> {
    fn new(spec: &'a SeriesSpec, closest: Option<f64>, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::param("tol", "tail tolerance must be positive"));
        }
        let mut cached_q = None;
        if let (Some(d), SeriesSpec::LatticeRenewal(dist) | SeriesSpec::PowerRenewal(dist)) = (closest, spec) {
            if d > 0.0 && d < 1.0 {
                let (ln_r, one_minus_r) = match spec.domain() {
                    Domain::HalfPlane => (-d * dist.span(), -(-d * dist.span()).exp_m1()),
                    Domain::Disc => ((-d).ln_1p(), d),
                };
                let terms = renewal_terms(ln_r, one_minus_r, tol)?;
                if terms <= PRECOMPUTE_LIMIT {
                    cached_q = Some(lattice_recursion(dist.probs(), terms));
                }
            }
        }
        Ok(Self { spec, tol, cached_q })
    }

    pub fn spec(&self) -> &SeriesSpec {
        self.spec
    }

    pub fn eval(&self, point: Complex64) -> Result<TransformValue> {
        let domain = self.spec.domain();
        match domain {
            Domain::HalfPlane if !(point.re > 1.0) => return Err(Error::DivergentRegion { re: point.re }),
            Domain::Disc if !(point.norm() < 1.0) => return Err(Error::OutsideDisc { modulus: point.norm() }),
            _ => {}
        }
        let value = match self.spec {
            SeriesSpec::Zero => TransformValue::exact(Complex64::new(0.0, 0.0)),
            SeriesSpec::ExpRenewal => TransformValue::exact(point / (point - 1.0)),
            SeriesSpec::PoleOnly { a } => TransformValue::exact(*a / (point - 1.0)),
            SeriesSpec::DoublePole => {
                let w = point - 1.0;
                TransformValue::exact((w * w).inv())
            }
            SeriesSpec::DirichletWeights(w) => {
                let g = dirichlet_series(&DirichletCoeffs::from_weights(w), point, usize::MAX)?;
                let denom = 1.0 - g.value;
                if denom.norm() == 0.0 {
                    return Err(Error::EvaluatorFailure(format!("1 - G(s) vanishes at s = {point}")));
                }
                TransformValue::exact(denom.inv())
            }
            SeriesSpec::Dirichlet(c) => dirichlet_series(c, point, c.len())?,
            SeriesSpec::PowerCoeffs(c) => power_series(c, point, c.coeffs.len())?,
            SeriesSpec::LatticeRenewal(dist) => {
                let gap = (point.re - 1.0) * dist.span();
                let z = (-(point - 1.0) * dist.span()).exp();
                self.renewal_sum(dist, z, -gap, -(-gap).exp_m1())?
            }
            SeriesSpec::PowerRenewal(dist) => {
                let r = point.norm();
                self.renewal_sum(dist, point, r.ln(), 1.0 - r)?
            }
            SeriesSpec::Sampled(f) => laplace_sampled(f, point)?,
        };
        if !(value.tail_bound <= self.tol) {
            return Err(Error::TruncationUnbounded(format!(
                "tail bound {:e} exceeds {:e} at {point}",
                value.tail_bound, self.tol
            )));
        }
        if !(value.value.re.is_finite() && value.value.im.is_finite()) {
            return Err(Error::EvaluatorFailure(format!("non-finite value at {point}")));
        }
        Ok(value)
    }

    /// `Σ q_n z^n` truncated where the geometric bound (`0 <= q_n <= 1`)
    /// drops below the tolerance.
    fn renewal_sum(&self, dist: &LatticeDist, z: Complex64, ln_r: f64, one_minus_r: f64) -> Result<TransformValue> {
        let terms = renewal_terms(ln_r, one_minus_r, self.tol)?;
        let value = match &self.cached_q {
            Some(q) if q.len() > terms => horner(&q[..=terms], z),
            _ => streamed_renewal_sum(dist.probs(), z, terms),
        };
        Ok(TransformValue {
            value,
            tail_bound: geometric_tail(ln_r, one_minus_r, terms + 1),
        })
    }
}

/// Smallest `N` with `r^{N+1} / (1 - r) <= tol`.
fn renewal_terms(ln_r: f64, one_minus_r: f64, tol: f64) -> Result<usize> {
    if !(ln_r < 0.0 && one_minus_r > 0.0) {
        return Err(Error::TruncationUnbounded("modulus is not below 1".into()));
    }
    let needed = ((tol * one_minus_r).ln() / ln_r).ceil().max(1.0);
    if needed > MAX_TERMS as f64 {
        return Err(Error::TruncationUnbounded(format!("{needed:e} terms needed")));
    }
    Ok(needed as usize - 1)
}

/// Forward accumulation of `Σ_{n <= N} q_n z^n`, regenerating `q_n` with a
/// rolling window of the last `M` terms.
fn streamed_renewal_sum(probs: &[f64], z: Complex64, terms: usize) -> Complex64 {
    let m = probs.len();
    let rev: Vec<f64> = probs.iter().rev().copied().collect();
    let mut window: Vec<f64> = Vec::with_capacity(2 * m + 1);
    window.push(1.0);
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    re.add(1.0);
    let mut power = Complex64::new(1.0, 0.0);
    for n in 1..=terms {
        let have = window.len();
        let width = n.min(m);
        let qn: f64 = rev[m - width..]
            .iter()
            .zip(&window[have - width..])
            .map(|(p, q)| p * q)
            .sum();
        if window.len() == 2 * m + 1 {
            window.drain(..m + 1);
        }
        window.push(qn);
        power *= z;
        let term = power * qn;
        re.add(term.re);
        im.add(term.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `F(s) - a/(s - 1)`.
pub fn pole_subtracted(spec: &SeriesSpec, a: f64, s: Complex64) -> Result<Complex64> {
    if spec.domain() != Domain::HalfPlane {
        return Err(Error::param("spec", "pole subtraction needs a half-plane spec"));
    }
    if !(s.re > 1.0) {
        return Err(Error::DivergentRegion { re: s.re });
    }
    let v = spec.evaluate(s, DEFAULT_TAIL_TOL)?;
    Ok(v.value - a / (s - 1.0))
}

/// `x ↦ e^{-x} S(x)` against the constant `a`; the tail deviation is taken
/// over the last fifth of the grid.
pub fn asymptotic_ratio(f: &SampledFunction, a: f64) -> Trace {
    let xs: Vec<f64> = (0..f.values.len()).map(|k| f.x(k)).collect();
    let values = xs.iter().zip(&f.values).map(|(&x, &v)| (-x).exp() * v).collect();
    Trace::with_tail_window(xs, values, a)
}

/// Real parts `U[j][i] = Re F` on approach distances `approach[j]` and the
/// symmetric transverse grid `transverse[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    approach: Vec<f64>,
    transverse: Vec<f64>,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
}

impl BoundaryGrid {
    pub fn new(approach: Vec<f64>, transverse: Vec<f64>, u: Vec<Vec<f64>>) -> Result<Self> {
        validate_schedule(&approach)?;
        let n = transverse.len();
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        let scale = transverse.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        for i in 0..n {
            if (transverse[i] + transverse[n - 1 - i]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::param("transverse", "grid must be symmetric about 0"));
            }
        }
        if transverse.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("transverse", "grid must be increasing"));
        }
        if u.len() != approach.len() || u.iter().any(|row| row.len() != n) {
            return Err(Error::param("U", "matrix shape must be approach × transverse"));
        }
        Ok(Self { approach, transverse, u })
    }

    /// Fills the grid from `f(d, t)`.
    pub fn from_fn(approach: Vec<f64>, transverse: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let u = approach
            .iter()
            .map(|&d| transverse.iter().map(|&t| f(d, t)).collect())
            .collect();
        Self::new(approach, transverse, u)
    }

    pub fn approach(&self) -> &[f64] {
        &self.approach
    }

    pub fn transverse(&self) -> &[f64] {
        &self.transverse
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.u
    }

    /// Half-width `λ` of the transverse grid.
    pub fn half_width(&self) -> f64 {
        *self.transverse.last().expect("nonempty")
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            approach: self.approach.clone(),
            transverse: self.transverse.clone(),
            u: self
                .u
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }
}

/// Distances must be in `(0, 1]` and strictly decreasing.
pub(crate) fn validate_schedule(approach: &[f64]) -> Result<()> {
    if approach.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if approach.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
        return Err(Error::param("approach", "distances must lie in (0, 1]"));
    }
    if approach.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("approach", "distances must be strictly decreasing"));
    }
    Ok(())
}

/// `d_j = 2^{-j}`, `j = 1..=depth`.
pub fn halving_schedule(depth: usize) -> Vec<f64> {
    (1..=depth).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// `points` equally spaced values on `[-λ, λ]`, exactly symmetric.
pub fn transverse_grid(lambda: f64, points: usize) -> Result<Vec<f64>> {
    if points % 2 == 0 {
        return Err(Error::param("transverse_points", "must be odd so that 0 is a grid point"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    let c = (points / 2) as f64;
    if points == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..points).map(|i| lambda * ((i as f64 - c) / c)).collect())
}

/// Samples `Re F` on the boundary-approach grid, with per-point tail bounds
/// at most [`DEFAULT_TAIL_TOL`].
pub fn sample_boundary(
    spec: &SeriesSpec,
    lambda: f64,
    approach_schedule: &[f64],
    transverse_points: usize,
) -> Result<BoundaryGrid> {
    sample_boundary_with_tol(spec, lambda, approach_schedule, transverse_points, DEFAULT_TAIL_TOL)
}

pub fn sample_boundary_with_tol(
    spec: &SeriesSpec,
    lambda: f64,
    approach_schedule: &[f64],
    transverse_points: usize,
    tol: f64,
) -> Result<BoundaryGrid> {
    validate_schedule(approach_schedule)?;
    if spec.domain() == Domain::Disc && lambda >= PI {
        return Err(Error::param("lambda", "angular half-width must be below π"));
    }
    let transverse = transverse_grid(lambda, transverse_points)?;
    let closest = *approach_schedule.last().expect("validated");
    let evaluator = spec.evaluator(closest, tol)?;
    let domain = spec.domain();
    let u = approach_schedule
        .par_iter()
        .map(|&d| {
            transverse
                .par_iter()
                .map(|&t| evaluator.eval(domain.point(d, t)).map(|v| v.value.re))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    BoundaryGrid::new(approach_schedule.to_vec(), transverse, u)
}
