//! Grid functions, decreasing rearrangements and Lorentz quasi-norms.
//!
//! All norms follow the normalization
//! `‖f‖_{p,r} = ((r/p) ∫_0^∞ (t^{1/p} f*(t))^r dt/t)^{1/r}`, so that the
//! indicator of a set `E` has norm `μ(E)^{1/p}` for every `r`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature;

/// Complex samples on a uniform periodic grid, each cell carrying `cell_mass`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    samples: Vec<Complex64>,
    cell_mass: f64,
}

impl GridFunction {
    /// Builds a grid function; the length must be a positive power of two.
    pub fn new(samples: Vec<Complex64>, cell_mass: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::EmptyDomain);
        }
        if !samples.len().is_power_of_two() {
            return Err(LabError::InvalidGrid(format!("length {} is not a power of two", samples.len())));
        }
        if !(cell_mass > 0.0 && cell_mass.is_finite()) {
            return Err(LabError::InvalidGrid(format!("cell mass {cell_mass} must be positive and finite")));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(LabError::InvalidGrid("samples must be finite".into()));
        }
        Ok(GridFunction { samples, cell_mass })
    }

    pub fn from_real(values: &[f64], cell_mass: f64) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), cell_mass)
    }

    pub fn zeros(len: usize, cell_mass: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], cell_mass)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cell_mass(&self) -> f64 {
        self.cell_mass
    }

    pub fn total_measure(&self) -> f64 {
        self.samples.len() as f64 * self.cell_mass
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.samples.iter().map(modulus).collect()
    }

    pub fn compatible_with(&self, other: &GridFunction) -> bool {
        self.len() == other.len() && self.cell_mass == other.cell_mass
    }

    pub fn try_add(&self, other: &GridFunction) -> Result<GridFunction> {
        if !self.compatible_with(other) {
            return Err(LabError::Incompatible(format!(
                "({} cells, mass {}) vs ({} cells, mass {})",
                self.len(),
                self.cell_mass,
                other.len(),
                other.cell_mass
            )));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(GridFunction { samples, cell_mass: self.cell_mass })
    }

    pub fn scaled(&self, c: Complex64) -> GridFunction {
        GridFunction { samples: self.samples.iter().map(|z| z * c).collect(), cell_mass: self.cell_mass }
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> GridFunction {
        debug_assert_eq!(samples.len(), self.samples.len());
        GridFunction { samples, cell_mass: self.cell_mass }
    }

    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().map(modulus).fold(0.0, f64::max)
    }
}

/// The nonincreasing rearrangement of a simple function as `(value, right breakpoint)` steps.
///
/// Values are strictly decreasing and positive, breakpoints strictly increasing,
/// and the first step starts at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRearrangement {
    steps: Vec<(f64, f64)>,
}

impl StepRearrangement {
    /// Rearranges a simple function given as values on cells of the given masses.
    ///
    /// Cells with zero value are dropped and equal values are merged.
    pub fn from_weighted(values: &[f64], masses: &[f64]) -> Self {
        assert_eq!(values.len(), masses.len(), "one mass per value");
        let mut cells: Vec<(f64, f64)> = values
            .iter()
            .zip(masses)
            .filter(|(v, m)| **v > 0.0 && **m > 0.0)
            .map(|(v, m)| (*v, *m))
            .collect();
        cells.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        let mut steps: Vec<(f64, f64)> = Vec::new();
        let mut t = 0.0;
        for (v, m) in cells {
            t += m;
            match steps.last_mut() {
                Some(last) if last.0 == v => last.1 = t,
                _ => steps.push((v, t)),
            }
        }
        StepRearrangement { steps }
    }

    /// Builds a rearrangement from explicit steps, validating the invariants.
    pub fn from_steps(steps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev = (f64::INFINITY, 0.0);
        for &(v, t) in &steps {
            if !(v > 0.0 && v < prev.0 && t > prev.1 && t.is_finite() && v.is_finite()) {
                return Err(LabError::InvalidParameter(format!("step ({v}, {t}) breaks monotonicity")));
            }
            prev = (v, t);
        }
        Ok(StepRearrangement { steps })
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Measure of the support.
    pub fn support_measure(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.1)
    }

    /// `f*(t)`, taken right-continuous.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.steps.partition_point(|s| s.1 <= t);
        self.steps.get(idx).map_or(0.0, |s| s.0)
    }

    /// `∫_0^∞ f*`.
    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        self.steps
            .iter()
            .map(|&(v, t)| {
                let piece = v * (t - prev);
                prev = t;
                piece
            })
            .sum()
    }

    /// The rearrangement of `|f|^σ`.
    pub fn powered(&self, sigma: f64) -> StepRearrangement {
        StepRearrangement { steps: self.steps.iter().map(|&(v, t)| (v.powf(sigma), t)).collect() }
    }
}

/// Lorentz exponents `(p, r)` with `p ∈ (0, ∞)` and `r ∈ (0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzExponents {
    pub p: f64,
    pub r: f64,
}

impl LorentzExponents {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(LabError::InvalidExponent(format!("p = {p} must be finite and positive")));
        }
        if r.is_nan() || r <= 0.0 {
            return Err(LabError::InvalidExponent(format!("r = {r} must lie in (0, inf]")));
        }
        Ok(LorentzExponents { p, r })
    }

    /// Exponents of `|f|^σ` matching these ones, i.e. `(p/σ, r/σ)`.
    pub fn divided(&self, sigma: f64) -> LorentzExponents {
        LorentzExponents { p: self.p / sigma, r: self.r / sigma }
    }
}

/// `|z|`, taking the fast square-root path unless the square would leave the normal range.
pub(crate) fn modulus(z: &Complex64) -> f64 {
    let s = z.re * z.re + z.im * z.im;
    if s > 1e-290 && s < 1e290 {
        s.sqrt()
    } else {
        z.re.hypot(z.im)
    }
}

/// `x^e` with exact shortcuts for the common exponents.
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else if e == 0.5 {
        x.sqrt()
    } else {
        x.powf(e)
    }
}

/// Exact rearrangement of `|f|`.
pub fn rearrange(f: &GridFunction) -> Result<StepRearrangement> {
    if f.is_empty() {
        return Err(LabError::EmptyDomain);
    }
    let mut moduli: Vec<f64> = f.samples.iter().map(modulus).filter(|&m| m > 0.0).collect();
    moduli.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in moduli.iter().enumerate() {
        let t = (i + 1) as f64 * f.cell_mass;
        match steps.last_mut() {
            Some(last) if last.0 == v => last.1 = t,
            _ => steps.push((v, t)),
        }
    }
    Ok(StepRearrangement { steps })
}

/// `μ(|f| > α)`.
pub fn distribution(f: &GridFunction, alpha: f64) -> f64 {
    f.samples.iter().filter(|z| modulus(z) > alpha).count() as f64 * f.cell_mass
}

/// `b^a - c^a` for `0 ≤ c < b`, accurate even when `c` is close to `b`.
pub(crate) fn power_gap(b: f64, c: f64, a: f64) -> f64 {
    if c <= 0.0 {
        b.powf(a)
    } else {
        -b.powf(a) * (a * (c / b).ln()).exp_m1()
    }
}

/// Lorentz quasi-norm of a step rearrangement.
pub fn lorentz_norm(rearr: &StepRearrangement, e: LorentzExponents) -> f64 {
    let steps = &rearr.steps;
    let (Some(&(vmax, _)), Some(&(_, tmax))) = (steps.first(), steps.last()) else {
        return 0.0;
    };
    if e.r.is_infinite() {
        return steps.iter().map(|&(v, t)| v * t.powf(1.0 / e.p)).fold(0.0, f64::max);
    }
    let a = e.r / e.p;
    let mut prev = 0.0;
    let mut sum = 0.0;
    for &(v, t) in steps {
        let (x, y) = (t / tmax, prev / tmax);
        sum += pow(v / vmax, e.r) * match a {
            1.0 => x - y,
            2.0 => (x - y) * (x + y),
            _ => power_gap(x, y, a),
        };
        prev = t;
    }
    vmax * tmax.powf(1.0 / e.p) * sum.powf(1.0 / e.r)
}

/// Lorentz quasi-norm evaluated from the distribution function of `f`.
///
/// The integral `r ∫ (α μ(α)^{1/p})^r dα/α` is a sum of closed-form pieces
/// between consecutive distinct moduli.
pub fn lorentz_norm_via_distribution(f: &GridFunction, e: LorentzExponents) -> f64 {
    let mut moduli: Vec<f64> = f.samples.iter().map(modulus).filter(|&m| m > 0.0).collect();
    if moduli.is_empty() {
        return 0.0;
    }
    moduli.sort_unstable_by(f64::total_cmp);
    // levels[j] = (c_j, mass of {|f| ≥ c_j}) with c_j strictly decreasing.
    let n = moduli.len();
    let mut levels: Vec<(f64, f64)> = Vec::new();
    let mut i = n;
    while i > 0 {
        let c = moduli[i - 1];
        let mut j = i - 1;
        while j > 0 && moduli[j - 1] == c {
            j -= 1;
        }
        levels.push((c, (n - j) as f64 * f.cell_mass));
        i = j;
    }
    if e.r.is_infinite() {
        return levels.iter().map(|&(c, d)| c * d.powf(1.0 / e.p)).fold(0.0, f64::max);
    }
    let (cmax, dmax) = (levels[0].0, levels[levels.len() - 1].1);
    let mut sum = 0.0;
    for (j, &(c, d)) in levels.iter().enumerate() {
        let below = levels.get(j + 1).map_or(0.0, |l| l.0);
        sum += (d / dmax).powf(e.r / e.p) * power_gap(c / cmax, below / cmax, e.r);
    }
    cmax * dmax.powf(1.0 / e.p) * sum.powf(1.0 / e.r)
}

/// The quasi-norm built on `f** = (1/t)∫_0^t f*`, with the same `(r/p)` normalization.
///
/// Returns `+∞` when `p ≤ 1` and the tail integral diverges.
pub fn double_star_norm(rearr: &StepRearrangement, e: LorentzExponents) -> f64 {
    let steps = &rearr.steps;
    let (Some(&(vmax, _)), Some(&(_, tmax))) = (steps.first(), steps.last()) else {
        return 0.0;
    };
    // Work in units where the top value and the support measure are 1.
    let scaled: Vec<(f64, f64)> = steps.iter().map(|&(v, t)| (v / vmax, t / tmax)).collect();
    let total = scaled.iter().scan(0.0, |prev, &(v, t)| {
        let piece = v * (t - *prev);
        *prev = t;
        Some(piece)
    });
    let total: f64 = total.sum();
    let unit = vmax * tmax.powf(1.0 / e.p);
    let p = e.p;

    if e.r.is_infinite() {
        // sup_t t^{1/p} (v + B/t) on each segment, then the tail t^{1/p-1} S.
        let mut best: f64 = 0.0;
        let (mut prev, mut acc) = (0.0, 0.0);
        for &(v, t) in &scaled {
            let b = acc - v * prev;
            let g = |s: f64| s.powf(1.0 / p) * (v + b / s);
            best = best.max(g(t));
            if prev > 0.0 {
                best = best.max(g(prev));
                if b > 0.0 && p > 1.0 {
                    let crit = b * (p - 1.0) / v;
                    if crit > prev && crit < t {
                        best = best.max(g(crit));
                    }
                }
            }
            acc += v * (t - prev);
            prev = t;
        }
        if p < 1.0 {
            return f64::INFINITY;
        }
        return unit * best.max(total);
    }

    let r = e.r;
    let a = r / p;
    let (mut prev, mut acc) = (0.0f64, 0.0f64);
    let mut sum = 0.0;
    for &(v, t) in &scaled {
        if prev == 0.0 {
            // f** is constant on the first step.
            sum += v.powf(r) * t.powf(a);
        } else {
            let b = acc - v * prev;
            let integrand = |u: f64| {
                let s = u.exp();
                a * (a * u).exp() * (v + b / s).powf(r)
            };
            sum += quadrature::integrate(integrand, prev.ln(), t.ln(), 1e-12);
        }
        acc += v * (t - prev);
        prev = t;
    }
    if p <= 1.0 {
        return f64::INFINITY;
    }
    // Tail: (r/p) ∫_1^∞ t^{r/p - 1} (S/t)^r dt with the support scaled to 1.
    sum += a * acc.powf(r) / (r - a);
    unit * sum.powf(1.0 / r)
}

/// `|f|^σ` as a real grid function.
pub fn power_transform(f: &GridFunction, sigma: f64) -> GridFunction {
    f.with_samples(f.samples.iter().map(|z| Complex64::new(z.norm().powf(sigma), 0.0)).collect())
}
