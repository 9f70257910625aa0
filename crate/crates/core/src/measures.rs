//! Input measures for the renewal equations: lattice probability masses,
//! arithmetic weights for Dirichlet renewal, and gridded densities for the
//! non-lattice case.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, gcd, integer_ratio, trapezoid, CompensatedSum};

/// Mass tolerance for lattice distributions and the default tolerance for
/// arithmetic weights.
pub const LATTICE_MASS_TOL: f64 = 1e-12;

/// Mass conservation tolerance for discretized densities.
pub const GRID_MASS_TOL: f64 = 1e-9;

/// Acceptance tolerance on the trapezoid mass of a sampled density. The
/// trapezoid rule carries an O(δ²) error, so a smooth density sampled at
/// δ = 1e-3 integrates to 1 only within ~1e-7; discretization renormalizes.
pub const GRID_DENSITY_TOL: f64 = 1e-6;

/// Probability masses `p_n` on the lattice `span · {1, 2, 3, ...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDist {
    span: f64,
    /// `probs[i]` is the mass at `(i + 1) · span`.
    probs: Vec<f64>,
    tail_mass: f64,
}

impl LatticeDist {
    /// Validates masses without changing the span. Trailing zeros are
    /// trimmed.
    pub fn new(span: f64, probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::param("span", format!("must be positive, got {span}")));
        }
        if !(tail_mass.is_finite() && tail_mass >= 0.0) {
            return Err(Error::param("tail_mass", format!("must be non-negative, got {tail_mass}")));
        }
        check_masses(&probs, 1)?;
        let mut probs = probs;
        while probs.last() == Some(&0.0) {
            probs.pop();
        }
        if probs.is_empty() {
            return Err(Error::EmptySupport);
        }
        let total = compensated_sum(probs.iter().copied()) + tail_mass;
        if (total - 1.0).abs() > LATTICE_MASS_TOL {
            return Err(Error::SumNotOne {
                total,
                tol: LATTICE_MASS_TOL,
            });
        }
        Ok(Self {
            span,
            probs,
            tail_mass,
        })
    }

    /// Builds a distribution from masses indexed from the origin, so that
    /// `masses[0]` is `p_0`. A nonzero `p_0` is rejected.
    pub fn from_origin_masses(span: f64, masses: &[f64]) -> Result<Self> {
        match masses.split_first() {
            None => Err(Error::EmptySupport),
            Some((&p0, rest)) => {
                if p0 != 0.0 {
                    return Err(Error::InvalidAtomAtZero { mass: p0 });
                }
                normalize_lattice(span, rest)
            }
        }
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    /// Masses `p_1, ..., p_M`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p_n`, zero outside the stored range (including `n = 0`).
    pub fn prob(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.probs.get(n - 1).copied().unwrap_or(0.0)
        }
    }

    /// Largest stored index `M`.
    pub fn max_index(&self) -> usize {
        self.probs.len()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Support indices `{n : p_n > 0}`.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i + 1)
    }

    pub fn support_gcd(&self) -> u64 {
        self.support().fold(0, |g, n| gcd(g, n as u64))
    }

    /// True when the span is maximal (support gcd 1).
    pub fn is_normalized(&self) -> bool {
        self.support_gcd() == 1
    }

    /// Mean inter-arrival time `span · Σ n p_n`.
    pub fn mean(&self) -> Result<f64> {
        lattice_mean(self)
    }
}

fn check_masses(values: &[f64], first_index: usize) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::NegativeMass {
                index: i + first_index,
                value: v,
            });
        }
    }
    Ok(())
}

/// Normalizes lattice masses `p_1..p_M` (index 0 implicit) to the maximal
/// span: the span is multiplied by the gcd of the support indices and the
/// masses re-indexed so that the new support has gcd 1.
pub fn normalize_lattice(span: f64, probs: &[f64]) -> Result<LatticeDist> {
    check_masses(probs, 1)?;
    let g = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .fold(0u64, |g, (i, _)| gcd(g, i as u64 + 1));
    if g == 0 {
        return Err(Error::EmptySupport);
    }
    let g = g as usize;
    let reindexed: Vec<f64> = probs.iter().skip(g - 1).step_by(g).copied().collect();
    LatticeDist::new(span * g as f64, reindexed, 0.0)
}

/// `span · Σ n p_n`.
pub fn lattice_mean(d: &LatticeDist) -> Result<f64> {
    if d.tail_mass > 0.0 {
        return Err(Error::TailMassPresent {
            tail_mass: d.tail_mass,
        });
    }
    let s = compensated_sum(d.probs.iter().enumerate().map(|(i, &p)| (i + 1) as f64 * p));
    Ok(d.span * s)
}

/// Nonnegative arithmetic weights `g(n)`, `n >= 2`, normalized so that
/// `Σ g(n)/n = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithWeights {
    g: BTreeMap<u64, f64>,
    declared_sum_tol: f64,
}

impl ArithWeights {
    pub fn new(g: BTreeMap<u64, f64>) -> Result<Self> {
        Self::with_tolerance(g, LATTICE_MASS_TOL)
    }

    pub fn with_tolerance(g: BTreeMap<u64, f64>, declared_sum_tol: f64) -> Result<Self> {
        if !(declared_sum_tol.is_finite() && declared_sum_tol >= 0.0) {
            return Err(Error::param("declared_sum_tol", "must be a non-negative number"));
        }
        for (&n, &w) in &g {
            if n < 2 {
                return Err(Error::param("g", format!("index {n} is not storable (need n >= 2)")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::NegativeMass {
                    index: n as usize,
                    value: w,
                });
            }
        }
        let g: BTreeMap<u64, f64> = g.into_iter().filter(|&(_, w)| w > 0.0).collect();
        if g.is_empty() {
            return Err(Error::EmptySupport);
        }
        let total = compensated_sum(g.iter().map(|(&n, &w)| w / n as f64));
        if (total - 1.0).abs() > declared_sum_tol {
            return Err(Error::SumNotOne {
                total,
                tol: declared_sum_tol,
            });
        }
        Ok(Self {
            g,
            declared_sum_tol,
        })
    }

    pub fn get(&self, n: u64) -> f64 {
        self.g.get(&n).copied().unwrap_or(0.0)
    }

    /// Support in increasing order, with weights.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.g.iter().map(|(&n, &w)| (n, w))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.g.keys().copied()
    }

    pub fn max_index(&self) -> u64 {
        *self.g.keys().next_back().expect("support is nonempty")
    }

    pub fn declared_sum_tol(&self) -> f64 {
        self.declared_sum_tol
    }

    /// `Σ g(n) ln n / n`; its reciprocal is the renewal density of the
    /// Dirichlet renewal equation.
    pub fn log_moment(&self) -> f64 {
        compensated_sum(self.iter().map(|(n, w)| w * (n as f64).ln() / n as f64))
    }
}

/// Outcome of [`check_power_support`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerSupport {
    Pass,
    /// Every support element is a power of `base`; `base` is the smallest
    /// such integer.
    Fail { base: u64 },
}

/// Checks that the support of `w` is not contained in `{d, d², d³, ...}` for
/// any `d >= 2`.
pub fn check_power_support(w: &ArithWeights) -> Result<PowerSupport> {
    let support: Vec<u64> = w.support().collect();
    power_support_of(&support)
}

pub(crate) fn power_support_of(support: &[u64]) -> Result<PowerSupport> {
    let &m = support.iter().min().ok_or(Error::EmptySupport)?;
    if m < 2 {
        return Err(Error::param("support", "elements must be >= 2"));
    }
    // Candidates d with d^j = m, smallest d first (largest j first).
    let max_j = 63 - m.leading_zeros();
    for j in (1..=max_j).rev() {
        let Some(d) = exact_root(m, j) else { continue };
        if d >= 2 && support.iter().all(|&n| is_power_of(n, d)) {
            return Ok(PowerSupport::Fail { base: d });
        }
    }
    Ok(PowerSupport::Pass)
}

fn exact_root(m: u64, j: u32) -> Option<u64> {
    if j == 1 {
        return Some(m);
    }
    let guess = (m as f64).powf(1.0 / j as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&d| d >= 2 && d.checked_pow(j) == Some(m))
}

fn is_power_of(mut n: u64, d: u64) -> bool {
    if n < d {
        return false;
    }
    while n % d == 0 {
        n /= d;
    }
    n == 1
}

/// A density sampled at `k · step`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    step: f64,
    values: Vec<f64>,
    tail_mass: f64,
}

impl GridDensity {
    pub fn new(step: f64, values: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if !(tail_mass.is_finite() && tail_mass >= 0.0) {
            return Err(Error::param("tail_mass", format!("must be non-negative, got {tail_mass}")));
        }
        if values.len() < 2 {
            return Err(Error::param("values", "need at least two grid points"));
        }
        check_masses(&values, 0)?;
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::EmptySupport);
        }
        let total = trapezoid(step, &values) + tail_mass;
        if (total - 1.0).abs() > GRID_DENSITY_TOL {
            return Err(Error::SumNotOne {
                total,
                tol: GRID_DENSITY_TOL,
            });
        }
        Ok(Self {
            step,
            values,
            tail_mass,
        })
    }

    /// Samples `density` on `[0, x_max]`.
    pub fn from_fn(step: f64, x_max: f64, tail_mass: f64, density: impl Fn(f64) -> f64) -> Result<Self> {
        let k = integer_ratio(x_max, step).ok_or(Error::StepMismatch {
            target: x_max,
            step,
        })?;
        let values = (0..=k).map(|i| density(i as f64 * step)).collect();
        Self::new(step, values, tail_mass)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Right end `K · step` of the sampled range.
    pub fn x_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Trapezoid value of `∫ x p(x) dx`.
    pub fn mean(&self) -> Result<f64> {
        if self.tail_mass > 0.0 {
            return Err(Error::TailMassPresent {
                tail_mass: self.tail_mass,
            });
        }
        let weighted: Vec<f64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| k as f64 * self.step * v)
            .collect();
        Ok(trapezoid(self.step, &weighted))
    }
}

/// Lumps the density into lattice masses with span `target_step`. Cell
/// `((k-1)Δ, kΔ]` is integrated with the trapezoid rule on the sample grid
/// and its mass is placed at `kΔ`, so nothing sits at the origin. The masses
/// are rescaled so that they sum to `1 - tail_mass`.
pub fn discretize_density(p: &GridDensity, target_step: f64) -> Result<LatticeDist> {
    let ratio = integer_ratio(target_step, p.step).ok_or(Error::StepMismatch {
        target: target_step,
        step: p.step,
    })?;
    let intervals = p.values.len() - 1;
    let cells = intervals.div_ceil(ratio);
    let mut masses = Vec::with_capacity(cells);
    for c in 0..cells {
        let lo = c * ratio;
        let hi = ((c + 1) * ratio).min(intervals);
        let mut acc = CompensatedSum::new();
        for k in lo..hi {
            acc.add(0.5 * (p.values[k] + p.values[k + 1]));
        }
        masses.push(p.step * acc.value());
    }
    let raw = compensated_sum(masses.iter().copied());
    if raw <= 0.0 {
        return Err(Error::EmptySupport);
    }
    let scale = (1.0 - p.tail_mass) / raw;
    for m in &mut masses {
        *m *= scale;
    }
    LatticeDist::new(target_step, masses, p.tail_mass)
}
