//! Numerical checks of the Tauberian hypotheses, limit extrapolation and the
//! Fejér-kernel boundedness probe.
//!
//! Verdicts are evidence gathered on finite grids, never proofs. Every report
//! records the resolution it was computed at.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{check_power_support, ArithWeights, PowerSupport};
use crate::numeric::{adaptive_simpson, aitken, forward_window_argmin, ls_slope, simpson};
use crate::transforms::{validate_schedule, BoundaryGrid, Domain, SampledFunction, SeriesSpec, DEFAULT_TAIL_TOL};

/// Per-halving growth of the most negative row value that counts as a pole.
pub const B1_DIVERGENCE_FACTOR: f64 = 1.9;
/// Per-halving growth of the row L1 norms (and per doubling of `h` in the
/// Fejér probe) that counts as divergence.
pub const GROWTH_FACTOR: f64 = 1.5;
/// Relative spread under which the last three L1 norms count as stable.
pub const B2_STABLE_SPREAD: f64 = 0.1;
/// Allowed excess of the fitted growth order over the declared one.
pub const K_SLACK: f64 = 0.25;
/// Absolute slack of the pointwise lower-bound check.
pub const POINTWISE_SLACK: f64 = 1e-12;
/// Consecutive Fejér integrals closer than this count as converged.
pub const FEJER_CONVERGENCE: f64 = 1e-6;

const TREND_STEPS: usize = 3;
const FIT_ROWS: usize = 5;
const FEJER_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionId {
    B1,
    B2,
    B3,
    #[serde(rename = "b1")]
    DiscB1,
    #[serde(rename = "b2")]
    DiscB2,
    #[serde(rename = "b3")]
    DiscB3,
    #[serde(rename = "SLOW_DECREASE")]
    SlowDecrease,
    #[serde(rename = "BOUNDED_DECREASE")]
    BoundedDecrease,
    #[serde(rename = "KOGA_INT")]
    KogaInt,
    #[serde(rename = "POWER_SUPPORT")]
    PowerSupport,
    #[serde(rename = "FEJER_BOUNDED")]
    FejerBounded,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::B1 => "B1",
            ConditionId::B2 => "B2",
            ConditionId::B3 => "B3",
            ConditionId::DiscB1 => "b1",
            ConditionId::DiscB2 => "b2",
            ConditionId::DiscB3 => "b3",
            ConditionId::SlowDecrease => "SLOW_DECREASE",
            ConditionId::BoundedDecrease => "BOUNDED_DECREASE",
            ConditionId::KogaInt => "KOGA_INT",
            ConditionId::PowerSupport => "POWER_SUPPORT",
            ConditionId::FejerBounded => "FEJER_BOUNDED",
        }
    }

    fn boundary(n: u8, domain: Domain) -> Self {
        match (n, domain) {
            (1, Domain::HalfPlane) => ConditionId::B1,
            (2, Domain::HalfPlane) => ConditionId::B2,
            (3, Domain::HalfPlane) => ConditionId::B3,
            (1, Domain::Disc) => ConditionId::DiscB1,
            (2, Domain::Disc) => ConditionId::DiscB2,
            _ => ConditionId::DiscB3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }

    /// Process exit code: 0 PASS, 1 FAIL, 2 INCONCLUSIVE.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

pub type Values = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub verdict: Verdict,
    #[serde(with = "crate::serde_float::map")]
    pub estimates: Values,
    /// Grid point or window violating the condition; always present on FAIL.
    #[serde(with = "crate::serde_float::option_map")]
    pub witness: Option<Values>,
    /// Grid resolution and schedule behind the verdict.
    #[serde(with = "crate::serde_float::map")]
    pub resolution: Values,
    /// Files holding the grids or traces the verdict was computed from.
    #[serde(default)]
    pub evidence: Vec<String>,
}

impl ConditionReport {
    fn new(condition: ConditionId, verdict: Verdict) -> Self {
        Self {
            condition,
            verdict,
            estimates: Values::new(),
            witness: None,
            resolution: Values::new(),
            evidence: Vec::new(),
        }
    }

    fn estimate(mut self, name: &str, v: f64) -> Self {
        self.estimates.insert(name.to_owned(), v);
        self
    }

    fn resolution_entry(mut self, name: &str, v: f64) -> Self {
        self.resolution.insert(name.to_owned(), v);
        self
    }

    fn witness(mut self, entries: &[(&str, f64)]) -> Self {
        self.witness = Some(entries.iter().map(|&(k, v)| (k.to_owned(), v)).collect());
        self
    }

    fn grid_resolution(self, grid: &BoundaryGrid) -> Self {
        let d = grid.approach();
        self.resolution_entry("rows", d.len() as f64)
            .resolution_entry("points", grid.transverse().len() as f64)
            .resolution_entry("d_max", d[0])
            .resolution_entry("d_min", d[d.len() - 1])
            .resolution_entry("half_width", grid.half_width())
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let estimates: Vec<String> = self.estimates.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
        format!(
            "{} {} {}",
            self.condition.as_str(),
            self.verdict.as_str(),
            estimates.join(" ")
        )
        .trim_end()
        .to_owned()
    }
}

/// Growth per halving of `d` between consecutive rows, `(b/a)^{ln 2/ln(d_a/d_b)}`.
fn per_halving(a: f64, b: f64, da: f64, db: f64) -> f64 {
    (b / a).powf(std::f64::consts::LN_2 / (da / db).ln())
}

/// True when the last `TREND_STEPS` transitions of `values` all grow by at
/// least `factor` per halving of the distance.
fn sustained_growth(values: &[f64], d: &[f64], factor: f64) -> bool {
    let n = values.len();
    n > TREND_STEPS
        && (n - TREND_STEPS..n).all(|j| {
            let (a, b) = (values[j - 1], values[j]);
            a > 0.0 && b > 0.0 && per_halving(a, b, d[j - 1], d[j]) >= factor
        })
}

/// `U >= -c` uniformly. FAIL when the most negative row value keeps growing
/// like a pole along the approach schedule.
pub fn check_b1(grid: &BoundaryGrid, domain: Domain) -> Result<ConditionReport> {
    let d = grid.approach();
    let mut row_min = Vec::with_capacity(d.len());
    let mut arg = Vec::with_capacity(d.len());
    for row in grid.rows() {
        let (i, &m) = row
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(Error::EmptyGrid)?;
        row_min.push(m);
        arg.push(i);
    }
    let min = row_min.iter().copied().fold(f64::INFINITY, f64::min);
    let c_est = (-min).max(0.0);
    let depth: Vec<f64> = row_min.iter().map(|m| -m).collect();
    let id = ConditionId::boundary(1, domain);
    let report = if sustained_growth(&depth, d, B1_DIVERGENCE_FACTOR) {
        let j = d.len() - 1;
        ConditionReport::new(id, Verdict::Fail).witness(&[
            ("d", d[j]),
            ("t", grid.transverse()[arg[j]]),
            ("U", row_min[j]),
        ])
    } else {
        ConditionReport::new(id, Verdict::Pass)
    };
    Ok(report
        .estimate("c_est", c_est)
        .estimate("min_U", min)
        .resolution_entry("divergence_factor", B1_DIVERGENCE_FACTOR)
        .grid_resolution(grid))
}

/// `sup_d ∫ |U| dt < ∞`, via Simpson L1 norms of the rows.
pub fn check_b2(grid: &BoundaryGrid, domain: Domain) -> Result<ConditionReport> {
    let t = grid.transverse();
    let d = grid.approach();
    let step = if t.len() > 1 { t[1] - t[0] } else { 0.0 };
    let l1 = grid
        .rows()
        .iter()
        .map(|row| {
            let abs: Vec<f64> = row.iter().map(|v| v.abs()).collect();
            simpson(step, &abs)
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup = l1.iter().copied().fold(0.0, f64::max);
    let n = l1.len();
    let id = ConditionId::boundary(2, domain);
    let verdict = if n < TREND_STEPS {
        Verdict::Inconclusive
    } else {
        let tail = &l1[n - TREND_STEPS..];
        let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        if hi == 0.0 || (hi - lo) <= B2_STABLE_SPREAD * hi {
            Verdict::Pass
        } else if sustained_growth(&l1, d, GROWTH_FACTOR) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    };
    let mut report = ConditionReport::new(id, verdict);
    if verdict == Verdict::Fail {
        report = report.witness(&[("d", d[n - 1]), ("L1", l1[n - 1]), ("L1_previous", l1[n - 2])]);
    }
    Ok(report
        .estimate("sup_L1", sup)
        .estimate("last_L1", l1[n - 1])
        .resolution_entry("growth_factor", GROWTH_FACTOR)
        .resolution_entry("stable_spread", B2_STABLE_SPREAD)
        .grid_resolution(grid))
}

/// Lower bound `g` for the pointwise part of the third boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub enum LowerBound {
    Constant(f64),
    /// Values at the grid's transverse points.
    Sampled(Vec<f64>),
}

impl LowerBound {
    fn at(&self, i: usize) -> f64 {
        match self {
            LowerBound::Constant(g) => *g,
            LowerBound::Sampled(v) => v[i],
        }
    }
}

/// `U >= g(t)` at every grid point and `U = O(d^{-k})`.
pub fn check_b3(grid: &BoundaryGrid, g_lower: &LowerBound, k: u32, domain: Domain) -> Result<ConditionReport> {
    if let LowerBound::Sampled(v) = g_lower {
        if v.len() != grid.transverse().len() {
            return Err(Error::param("g_lower", "needs one value per transverse point"));
        }
    }
    let d = grid.approach();
    let t = grid.transverse();
    let mut worst = (f64::INFINITY, 0, 0);
    for (j, row) in grid.rows().iter().enumerate() {
        for (i, &u) in row.iter().enumerate() {
            let margin = u - g_lower.at(i);
            if margin < worst.0 {
                worst = (margin, j, i);
            }
        }
    }
    let sup_abs: Vec<f64> = grid
        .rows()
        .iter()
        .map(|row| row.iter().fold(0.0f64, |m, u| m.max(u.abs())))
        .collect();
    let from = d.len().saturating_sub(FIT_ROWS);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (from..d.len())
        .filter(|&j| sup_abs[j] > 0.0)
        .map(|j| ((1.0 / d[j]).ln(), sup_abs[j].ln()))
        .unzip();
    let k_hat = ls_slope(&xs, &ys).unwrap_or(0.0);
    let id = ConditionId::boundary(3, domain);
    let (margin, wj, wi) = worst;
    let report = if margin < -POINTWISE_SLACK {
        ConditionReport::new(id, Verdict::Fail).witness(&[
            ("d", d[wj]),
            ("t", t[wi]),
            ("U", grid.rows()[wj][wi]),
            ("g", g_lower.at(wi)),
        ])
    } else if k_hat > k as f64 + K_SLACK {
        let j = d.len() - 1;
        ConditionReport::new(id, Verdict::Fail).witness(&[("d", d[j]), ("sup_abs_U", sup_abs[j]), ("k_hat", k_hat)])
    } else {
        ConditionReport::new(id, Verdict::Pass)
    };
    Ok(report
        .estimate("k_hat", k_hat)
        .estimate("declared_k", k as f64)
        .estimate("min_margin", margin)
        .estimate("sup_abs_U", sup_abs.iter().copied().fold(0.0, f64::max))
        .resolution_entry("fit_rows", xs.len() as f64)
        .resolution_entry("k_slack", K_SLACK)
        .grid_resolution(grid))
}

/// Windowed drops `(min_{y ∈ [x, x+h]} S(y) - S(x)) e^{-x}` at every grid
/// point, windows truncated at the grid end, and the minimising `y` index.
fn windowed_drops(s: &SampledFunction, w: usize) -> (Vec<f64>, Vec<usize>) {
    let v = s.values();
    let arg = forward_window_argmin(v, w);
    let drops = (0..v.len())
        .map(|k| (v[arg[k]] - v[k]) * (-s.x(k)).exp())
        .collect();
    (drops, arg)
}

fn window_len(s: &SampledFunction, h: f64) -> Result<usize> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param("h", format!("must be positive, got {h}")));
    }
    if s.step() > h / 10.0 * (1.0 + 1e-9) {
        return Err(Error::GridTooCoarse { step: s.step(), h });
    }
    let r = h / s.step();
    Ok(if (r - r.round()).abs() <= 1e-9 * r { r.round() } else { r.floor() } as usize)
}

/// Log-linear slow decrease: some `(h, x₀)` in the schedules keeps every
/// windowed drop past `x₀` above `-eps`. Windows near the end of the grid
/// are truncated to the available samples.
pub fn check_slow_decrease(
    s: &SampledFunction,
    eps: f64,
    h_schedule: &[f64],
    x0_schedule: &[f64],
) -> Result<ConditionReport> {
    if h_schedule.is_empty() || x0_schedule.is_empty() {
        return Err(Error::param("schedule", "h and x0 schedules must be nonempty"));
    }
    if !(eps >= 0.0) {
        return Err(Error::param("eps", "must be non-negative"));
    }
    let h_min = h_schedule.iter().copied().fold(f64::INFINITY, f64::min);
    window_len(s, h_min)?;
    let k_last = s.values().len() - 1;
    let x_max = s.x_max();

    struct Pair {
        h: f64,
        x0: f64,
        m: f64,
        x: f64,
        y: f64,
    }
    let mut pairs = Vec::new();
    for &h in h_schedule {
        let w = window_len(s, h)?;
        let (drops, arg) = windowed_drops(s, w);
        // suffix minima of the drops and where they occur
        let mut suffix = vec![(f64::INFINITY, 0usize); drops.len() + 1];
        for k in (0..drops.len()).rev() {
            suffix[k] = if drops[k] <= suffix[k + 1].0 { (drops[k], k) } else { suffix[k + 1] };
        }
        for &x0 in x0_schedule {
            let k0 = (x0 / s.step() - 1e-9).ceil().max(0.0) as usize;
            if k0 + w > k_last {
                continue;
            }
            let (m, k) = suffix[k0];
            pairs.push(Pair {
                h,
                x0,
                m,
                x: s.x(k),
                y: s.x(arg[k]),
            });
        }
    }
    let resolution = |r: ConditionReport| {
        r.resolution_entry("step", s.step())
            .resolution_entry("x_max", x_max)
            .resolution_entry("pairs_tested", pairs.len() as f64)
            .estimate("eps", eps)
    };
    if pairs.is_empty() {
        return Ok(resolution(ConditionReport::new(ConditionId::SlowDecrease, Verdict::Inconclusive)));
    }
    let best_pass = pairs
        .iter()
        .filter(|p| p.m >= -eps)
        .max_by(|a, b| a.x0.total_cmp(&b.x0).then(a.h.total_cmp(&b.h)));
    if let Some(p) = best_pass {
        return Ok(resolution(
            ConditionReport::new(ConditionId::SlowDecrease, Verdict::Pass)
                .estimate("h", p.h)
                .estimate("x0", p.x0)
                .estimate("m", p.m),
        ));
    }
    let deepest = pairs.iter().map(|p| p.x0).fold(f64::NEG_INFINITY, f64::max);
    let witness = pairs
        .iter()
        .filter(|p| p.x0 == deepest)
        .min_by(|a, b| a.h.total_cmp(&b.h))
        .expect("nonempty");
    let verdict = if deepest >= x_max / 2.0 { Verdict::Fail } else { Verdict::Inconclusive };
    let mut report = ConditionReport::new(ConditionId::SlowDecrease, verdict)
        .estimate("h", witness.h)
        .estimate("x0", witness.x0)
        .estimate("m", witness.m);
    if verdict == Verdict::Fail {
        report = report.witness(&[
            ("h", witness.h),
            ("x0", witness.x0),
            ("x", witness.x),
            ("y", witness.y),
            ("drop", witness.m),
        ]);
    }
    Ok(resolution(report))
}

/// Log-linear bounded decrease: the windowed drops over the last half of the
/// grid stay bounded below. The last half is split into four segments; a
/// monotone decline of the segment infima by more than 10% of the first one
/// is read as unbounded decrease.
pub fn check_bounded_decrease(s: &SampledFunction, h: f64) -> Result<ConditionReport> {
    let w = window_len(s, h)?;
    let (drops, arg) = windowed_drops(s, w);
    let n = drops.len();
    let start = n / 2;
    let base = ConditionReport::new(ConditionId::BoundedDecrease, Verdict::Inconclusive)
        .resolution_entry("step", s.step())
        .resolution_entry("x_max", s.x_max())
        .estimate("h", h);
    if n - start < 8 {
        return Ok(base);
    }
    let seg = (n - start) / 4;
    let mut infs = [(f64::INFINITY, 0usize); 4];
    for (q, inf) in infs.iter_mut().enumerate() {
        let lo = start + q * seg;
        let hi = if q == 3 { n } else { lo + seg };
        for k in lo..hi {
            if drops[k] < inf.0 {
                *inf = (drops[k], k);
            }
        }
    }
    let bound = infs.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let monotone = infs.windows(2).all(|p| p[1].0 <= p[0].0);
    let m1 = infs[0].0;
    let declining = monotone && infs[3].0 < m1 - 0.1 * m1.abs() - 1e-12;
    let mut report = ConditionReport {
        verdict: if declining { Verdict::Fail } else { Verdict::Pass },
        ..base
    };
    for (q, inf) in infs.iter().enumerate() {
        report = report.estimate(&format!("segment_inf_{}", q + 1), inf.0);
    }
    if declining {
        let k = infs[3].1;
        report = report.witness(&[("x", s.x(k)), ("y", s.x(arg[k])), ("drop", drops[k])]);
    }
    Ok(report.estimate("bound", bound))
}

/// `∫_1^∞ |S(x)| / (x^k e^x) dx < ∞`: trapezoid value on `[1, X]` plus the
/// tail implied by the declared growth `|S| <= C e^x x^ρ`.
pub fn check_koga_integral(s: &SampledFunction, k: u32) -> Result<ConditionReport> {
    if k < 1 {
        return Err(Error::param("k", "must be at least 1"));
    }
    let kf = k as f64;
    let v = s.values();
    let integrand = |x: f64, sx: f64| sx.abs() / (x.powf(kf) * x.exp());
    let first = (1.0 / s.step() - 1e-9).ceil() as usize;
    let mut value = 0.0;
    if first < v.len() {
        // partial cell [1, x_first] with S interpolated at 1
        let x1 = s.x(first);
        if x1 > 1.0 && first > 0 {
            let theta = (1.0 - s.x(first - 1)) / s.step();
            let s1 = v[first - 1] + theta * (v[first] - v[first - 1]);
            value += 0.5 * (x1 - 1.0) * (integrand(1.0, s1) + integrand(x1, v[first]));
        }
        let samples: Vec<f64> = (first..v.len()).map(|i| integrand(s.x(i), v[i])).collect();
        value += crate::numeric::trapezoid(s.step(), &samples);
    }
    let x_end = s.x_max().max(1.0);
    let rho = s.growth_exponent();
    let c = s.growth_constant();
    let tail = if c == 0.0 {
        0.0
    } else if rho < kf - 1.0 {
        c * x_end.powf(rho - kf + 1.0) / (kf - 1.0 - rho)
    } else {
        f64::INFINITY
    };
    let mut report = if tail.is_finite() {
        ConditionReport::new(ConditionId::KogaInt, Verdict::Pass)
    } else {
        ConditionReport::new(ConditionId::KogaInt, Verdict::Fail).witness(&[
            ("x", x_end),
            ("growth_exponent", rho),
            ("k", kf),
        ])
    };
    report = report
        .estimate("integral", value)
        .estimate("tail_bound", tail)
        .estimate("k", kf)
        .estimate("growth_exponent", rho)
        .estimate("growth_constant", c);
    Ok(report.resolution_entry("step", s.step()).resolution_entry("x_max", s.x_max()))
}

/// Support of `g` contained in the powers of a single integer.
pub fn power_support_report(w: &ArithWeights) -> Result<ConditionReport> {
    Ok(match check_power_support(w)? {
        PowerSupport::Pass => ConditionReport::new(ConditionId::PowerSupport, Verdict::Pass),
        PowerSupport::Fail { base } => ConditionReport::new(ConditionId::PowerSupport, Verdict::Fail)
            .estimate("base", base as f64)
            .witness(&[("base", base as f64)]),
    }
    .resolution_entry("support_size", w.support().count() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitMode {
    /// `σ_j = 1 + d_j` on the real axis of the half-plane.
    Sigma,
    /// `r_j = 1 - d_j` on the real axis of the disc.
    Abel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub mode: LimitMode,
    /// `(d_j, d_j · U(center))`.
    pub samples: Vec<[f64; 2]>,
    pub aitken: Vec<f64>,
    pub extrapolated: f64,
    /// `|last Aitken iterate - previous iterate|`.
    pub extrapolation_residual: f64,
}

/// Extrapolates `lim d·U` along `d_j = 2^{-j}`, `j = 1..=depth`, with
/// Aitken's Δ².
pub fn estimate_limit(spec: &SeriesSpec, mode: LimitMode, depth: usize) -> Result<LimitEstimate> {
    let expected = match mode {
        LimitMode::Sigma => Domain::HalfPlane,
        LimitMode::Abel => Domain::Disc,
    };
    if spec.domain() != expected {
        return Err(Error::param("mode", format!("spec {} does not live in this domain", spec.id())));
    }
    if depth < 3 {
        return Err(Error::param("depth", "Aitken extrapolation needs at least three samples"));
    }
    let mut samples = Vec::with_capacity(depth);
    for j in 1..=depth {
        let d = 0.5f64.powi(j as i32);
        // tail tolerance scaled so that d·U is accurate to DEFAULT_TAIL_TOL
        let v = spec
            .evaluate(expected.point(d, 0.0), DEFAULT_TAIL_TOL / d)
            .map_err(|e| Error::EvaluatorFailure(format!("{} at d = {d:e}: {e}", e.code())))?;
        samples.push([d, d * v.value.re]);
    }
    let raw: Vec<f64> = samples.iter().map(|s| s[1]).collect();
    let acc = aitken(&raw);
    let extrapolated = *acc.last().expect("depth >= 3");
    let residual = if acc.len() >= 2 {
        (extrapolated - acc[acc.len() - 2]).abs()
    } else {
        (extrapolated - raw[raw.len() - 1]).abs()
    };
    let spread = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max) - raw.iter().copied().fold(f64::INFINITY, f64::min);
    if residual > spread {
        return Err(Error::Nonconvergent { residual, spread });
    }
    Ok(LimitEstimate {
        mode,
        samples,
        aitken: acc,
        extrapolated,
        extrapolation_residual: residual,
    })
}

/// Triangular kernel `φ_λ(t) = max(0, 1 - |t|/λ)`.
pub fn triangular_kernel(lambda: f64, t: f64) -> f64 {
    (1.0 - t.abs() / lambda).max(0.0)
}

/// `∫_{-λ}^{λ} Re F(1 + d + it) φ_λ(t) cos(ht) dt` by adaptive Simpson.
pub fn fejer_integral(spec: &SeriesSpec, lambda: f64, h: f64, d: f64) -> Result<f64> {
    Ok(fejer_row(spec, lambda, &[h], d)?[0])
}

fn fejer_row(spec: &SeriesSpec, lambda: f64, h_list: &[f64], d: f64) -> Result<Vec<f64>> {
    if spec.domain() != Domain::HalfPlane {
        return Err(Error::param("spec", "the Fejér probe needs a half-plane spec"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", "must be positive"));
    }
    let evaluator = spec.evaluator(d, DEFAULT_TAIL_TOL)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let re_f = |t: f64| match evaluator.eval(Complex64::new(1.0 + d, t)) {
        Ok(v) => v.value.re,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let mut out = Vec::with_capacity(h_list.len());
    for &h in h_list {
        // at least a few panels per oscillation; even so that t = 0 is a node
        let half = ((2.0 * lambda * h.abs() / std::f64::consts::PI).ceil() as usize).max(8);
        let j = adaptive_simpson(
            |t| re_f(t) * triangular_kernel(lambda, t) * (h * t).cos(),
            -lambda,
            lambda,
            2 * half,
            FEJER_QUAD_TOL,
        );
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        out.push(j);
    }
    Ok(out)
}

/// Boundedness of `𝔍_φ(h)` in `h`, computed at the first schedule entry
/// where the integrals stop moving by more than [`FEJER_CONVERGENCE`].
pub fn fejer_probe(spec: &SeriesSpec, lambda: f64, h_list: &[f64], sigma_schedule: &[f64]) -> Result<ConditionReport> {
    validate_schedule(sigma_schedule)?;
    if h_list.is_empty() || h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::param("h_list", "needs positive frequencies"));
    }
    let mut hs = h_list.to_vec();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let mut previous: Option<Vec<f64>> = None;
    let mut last_change = f64::INFINITY;
    let mut converged = None;
    let mut used_d = sigma_schedule[0];
    for &d in sigma_schedule {
        let row = fejer_row(spec, lambda, &hs, d)?;
        used_d = d;
        if let Some(prev) = &previous {
            last_change = prev.iter().zip(&row).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if last_change < FEJER_CONVERGENCE {
                converged = Some(row);
                break;
            }
        }
        previous = Some(row);
    }
    let is_converged = converged.is_some();
    let values = converged.or(previous).expect("schedule is nonempty");

    let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let h_top = hs[hs.len() - 1];
    let top: Vec<usize> = (0..hs.len()).filter(|&i| hs[i] >= h_top / 10.0).collect();
    let growing = top.len() >= 2
        && top.windows(2).all(|p| {
            let (a, b) = (abs[p[0]], abs[p[1]]);
            a > 0.0 && (b / a).powf(std::f64::consts::LN_2 / (hs[p[1]] / hs[p[0]]).ln()) >= GROWTH_FACTOR
        });
    if !is_converged && !growing {
        return Err(Error::ScheduleNotConverged { last_change });
    }
    let sup = abs.iter().copied().fold(0.0, f64::max);
    let mut report = if growing {
        let i = top[top.len() - 1];
        ConditionReport::new(ConditionId::FejerBounded, Verdict::Fail).witness(&[("h", hs[i]), ("J", values[i]), ("d", used_d)])
    } else {
        ConditionReport::new(ConditionId::FejerBounded, Verdict::Pass)
    };
    for (h, v) in hs.iter().zip(&values) {
        report = report.estimate(&format!("J(h={h})"), *v);
    }
    Ok(report
        .estimate("sup_abs_J", sup)
        .resolution_entry("lambda", lambda)
        .resolution_entry("d", used_d)
        .resolution_entry("converged", if is_converged { 1.0 } else { 0.0 })
        .resolution_entry("last_change", last_change)
        .resolution_entry("growth_factor", GROWTH_FACTOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{halving_schedule, sample_boundary, transverse_grid};
    use std::f64::consts::PI;

    fn closed_grid(f: impl Fn(f64, f64) -> f64) -> BoundaryGrid {
        BoundaryGrid::from_fn(halving_schedule(12), transverse_grid(1.0, 201).unwrap(), f).unwrap()
    }

    #[test]
    fn b1_examples() {
        let grid = sample_boundary(&SeriesSpec::ExpRenewal, 1.0, &halving_schedule(12), 201).unwrap();
        let r = check_b1(&grid, Domain::HalfPlane).unwrap();
        assert_eq!((r.verdict, r.estimates["c_est"]), (Verdict::Pass, 0.0));
        let r = check_b1(&closed_grid(|_, _| 0.0), Domain::HalfPlane).unwrap();
        assert_eq!((r.verdict, r.estimates["c_est"]), (Verdict::Pass, 0.0));
        let grid = sample_boundary(&SeriesSpec::PoleOnly { a: -1.0 }, 1.0, &halving_schedule(12), 201).unwrap();
        let r = check_b1(&grid, Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
        assert_eq!(check_b1(&grid, Domain::Disc).unwrap().condition, ConditionId::DiscB1);
    }

    #[test]
    fn b2_examples() {
        let r = check_b2(&closed_grid(|_, _| 1.0), Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.estimates["sup_L1"] - 2.0).abs() < 1e-12);
        let r = check_b2(&closed_grid(|d, _| 1.0 / d), Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
        let even = BoundaryGrid::new(vec![0.5], vec![-1.0, 1.0], vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(check_b2(&even, Domain::HalfPlane), Err(Error::OddIntervals(1)));
    }

    #[test]
    fn b3_examples() {
        let grid = sample_boundary(&SeriesSpec::PoleOnly { a: 1.0 }, 1.0, &halving_schedule(12), 201).unwrap();
        let r = check_b3(&grid, &LowerBound::Constant(0.0), 1, Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.estimates["k_hat"] - 1.0).abs() < 0.25);
        let r = check_b3(&closed_grid(|_, _| 5.0), &LowerBound::Constant(0.0), 0, Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.estimates["k_hat"].abs() < 1e-12);
        let grid = sample_boundary(&SeriesSpec::DoublePole, 1.0, &halving_schedule(12), 201).unwrap();
        let r = check_b3(&grid, &LowerBound::Constant(0.0), 2, Domain::HalfPlane).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.unwrap()["U"] < 0.0);
    }

    #[test]
    fn koga_examples() {
        let x_max = 30.0;
        let s = SampledFunction::from_fn(0.01, x_max, 0.0, f64::exp).unwrap();
        let r = check_koga_integral(&s, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!((r.estimates["integral"] - (1.0 - 1.0 / x_max)).abs() < 1e-3);
        let zero = SampledFunction::new(0.01, vec![0.0; 101], 0.0).unwrap();
        let r = check_koga_integral(&zero, 1).unwrap();
        assert_eq!((r.verdict, r.estimates["integral"]), (Verdict::Pass, 0.0));
        let s = SampledFunction::from_fn(0.01, x_max, 1.0, |x| x * x.exp()).unwrap();
        let r = check_koga_integral(&s, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn koga_partial_first_cell() {
        let s = SampledFunction::from_fn(0.3, 30.0, 0.0, f64::exp).unwrap();
        let r = check_koga_integral(&s, 2).unwrap();
        assert!((r.estimates["integral"] - (1.0 - 1.0 / 30.0)).abs() < 0.02);
    }

    #[test]
    fn slow_decrease_examples() {
        let hs = [1.0, 0.5, 0.2, 0.1];
        let x0s = [0.0, 10.0, 20.0, 30.0];
        let s = SampledFunction::from_fn(0.01, 60.0, 0.0, |x| x.exp() * (1.0 + x.sin())).unwrap();
        let r = check_slow_decrease(&s, 0.1, &hs, &x0s).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let s = SampledFunction::from_fn(0.01, 60.0, 1.0, |x| -x * x.exp()).unwrap();
        let r = check_slow_decrease(&s, 0.1, &hs, &x0s).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert!(w["y"] > w["x"] && w["drop"] < -0.1);
        let mono = SampledFunction::from_fn(0.01, 10.0, 0.0, |x| x.floor()).unwrap();
        let r = check_slow_decrease(&mono, 0.0, &hs, &x0s).unwrap();
        assert_eq!((r.verdict, r.estimates["m"]), (Verdict::Pass, 0.0));
        assert_eq!(
            check_slow_decrease(&s, 0.1, &[0.05], &x0s),
            Err(Error::GridTooCoarse { step: 0.01, h: 0.05 })
        );
    }

    #[test]
    fn bounded_decrease_examples() {
        let h = 0.2;
        let s = SampledFunction::from_fn(0.01, 200.0, 0.0, |x| x.exp() * (1.0 + x.sin())).unwrap();
        let r = check_bounded_decrease(&s, h).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let bound = r.estimates["bound"];
        assert!(bound < 0.0 && bound >= -0.42 * h * h.exp(), "{bound}");
        let mono = SampledFunction::from_fn(0.01, 50.0, 0.0, f64::exp).unwrap();
        let r = check_bounded_decrease(&mono, h).unwrap();
        assert_eq!((r.verdict, r.estimates["bound"]), (Verdict::Pass, 0.0));
        let s = SampledFunction::from_fn(0.01, 60.0, 1.0, |x| -x * x.exp()).unwrap();
        let r = check_bounded_decrease(&s, h).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn limit_examples() {
        let e = estimate_limit(&SeriesSpec::ExpRenewal, LimitMode::Sigma, 20).unwrap();
        assert!((e.extrapolated - 1.0).abs() < 1e-6);
        let w: BTreeMap<u64, f64> = [(2, 1.0), (3, 1.5)].into_iter().collect();
        let spec = SeriesSpec::DirichletWeights(ArithWeights::new(w).unwrap());
        let e = estimate_limit(&spec, LimitMode::Sigma, 20).unwrap();
        assert!((e.extrapolated - 2.0 / 6f64.ln()).abs() < 1e-3, "{}", e.extrapolated);
        for a in [-2.0, 0.0, 1.0, 3.5] {
            let e = estimate_limit(&SeriesSpec::PoleOnly { a }, LimitMode::Sigma, 10).unwrap();
            assert!((e.extrapolated - a).abs() < 1e-9);
        }
        assert!(estimate_limit(&SeriesSpec::ExpRenewal, LimitMode::Abel, 5).is_err());
    }

    #[test]
    fn fejer_zero_and_pole() {
        let hs = [1.0, 2.0, 4.0, 8.0];
        let r = fejer_probe(&SeriesSpec::Zero, 1.0, &hs, &halving_schedule(5)).unwrap();
        assert_eq!((r.verdict, r.estimates["sup_abs_J"]), (Verdict::Pass, 0.0));
        let j = fejer_integral(&SeriesSpec::PoleOnly { a: 1.0 }, 1.0, 4.0, 1e-9).unwrap();
        assert!((j - PI).abs() < 1e-6, "{j}");
    }

    #[test]
    fn summary_line() {
        let r = ConditionReport::new(ConditionId::B2, Verdict::Pass).estimate("sup_L1", 2.0);
        assert_eq!(r.summary(), "B2 PASS sup_L1=2.000000e0");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["condition"], "B2");
        assert_eq!(json["verdict"], "PASS");
    }
}
