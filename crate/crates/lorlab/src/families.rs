//! Test-function families that certify failures of embeddings (growing norm
//! ratios) and the boundedness of valid ones.
//!
//! Bump families (translation, critical_h, lattice) are assembled in physical
//! space from the moment-vanishing kernel `ψ_1`. Spectral families (dilation,
//! modulation, log) are written directly on the grid's Fourier modes, so that
//! each piece sits on the plateau of exactly one multiplier `β_k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ext::Num;
use crate::lp::{build_psi_kernels, fit_slope, max_band, space_norms, BumpFamily, PsiKernels, Scale, SmoothnessParams, Transforms};
use crate::measure::{lorentz_norm, GridFunction, LorentzExponents, StepRearrangement};
use crate::oracle::{decide, Clause, EmbeddingQuery, Theorem, Verdict};
use crate::seq::lq_combine;

/// Support half-width of `ψ_0` used by the bump families.
const KERNEL_HALFWIDTH: f64 = 0.25;
/// Radius of the dilation family's spectral bump, centred at frequency 1.
const DILATION_RADIUS: f64 = 0.1;
/// Radius of the bump that modulation and log families shift to each band.
const SHIFT_RADIUS: f64 = 0.5;
/// `|𝓕^{-1}χ|` is treated as negligible beyond this many multiples of `1/radius`.
const SPECTRAL_REACH: f64 = 16.0;
/// Lattice scales are `n_l = LATTICE_BASE + R·l`; the ν-window `8 ≤ ν ≤ 2^{n−3}`
/// then holds at least 25 bumps from the first term on.
const LATTICE_BASE: usize = 6;
/// Distance between the origins of consecutive lattice blocks.
const LATTICE_SPACING: f64 = 0.25;

/// The six constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Translation,
    Dilation,
    CriticalH,
    Lattice,
    Modulation,
    Log,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Translation,
        FamilyKind::Dilation,
        FamilyKind::CriticalH,
        FamilyKind::Lattice,
        FamilyKind::Modulation,
        FamilyKind::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Translation => "translation",
            FamilyKind::Dilation => "dilation",
            FamilyKind::CriticalH => "critical_h",
            FamilyKind::Lattice => "lattice",
            FamilyKind::Modulation => "modulation",
            FamilyKind::Log => "log",
        }
    }

    /// Whether the family is written on Fourier modes rather than from bumps.
    pub fn is_spectral(self) -> bool {
        matches!(self, FamilyKind::Dilation | FamilyKind::Modulation | FamilyKind::Log)
    }

    /// Size lists that fit comfortably under the default grid cap.
    pub fn default_sizes(self) -> Vec<usize> {
        match self {
            FamilyKind::Translation => vec![4, 32, 256, 2048, 16384],
            FamilyKind::Dilation => (2..=10).collect(),
            FamilyKind::CriticalH => (2..=8).collect(),
            FamilyKind::Lattice => vec![2, 3, 4],
            FamilyKind::Modulation => (2..=12).collect(),
            FamilyKind::Log => vec![4, 6, 8, 10],
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == key || (key == "criticalh" && *k == FamilyKind::CriticalH))
            .ok_or_else(|| LabError::Parse(format!("unknown family {s:?}")))
    }
}

/// How the coefficients `a_1, …, a_N` are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CoefficientRule {
    /// `a_l = 1`.
    Constant,
    /// `a_l = l^{−θ}`.
    Power { theta: f64 },
    /// `a_l = ratio^l`.
    Geometric { ratio: f64 },
    /// Given values; the family size must match their count.
    Explicit { values: Vec<f64> },
}

impl CoefficientRule {
    pub fn coefficients(&self, n: usize) -> Result<Vec<f64>> {
        let values: Vec<f64> = match self {
            CoefficientRule::Constant => vec![1.0; n],
            CoefficientRule::Power { theta } => (1..=n).map(|l| (l as f64).powf(-theta)).collect(),
            CoefficientRule::Geometric { ratio } => (1..=n).map(|l| ratio.powi(l as i32)).collect(),
            CoefficientRule::Explicit { values } => {
                if values.len() != n {
                    return Err(LabError::InvalidParameter(format!(
                        "{} explicit coefficients for a family of size {n}",
                        values.len()
                    )));
                }
                values.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(values)
    }
}

fn nonincreasing_moduli(a: &[f64]) -> bool {
    a.windows(2).all(|w| w[1].abs() <= w[0].abs())
}

/// A family together with its tunables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// `N`: number of terms, or the band index for the dilation family.
    pub size: usize,
    /// Separation `R` of the scales `n_l = R·l`.
    pub separation: usize,
    pub coefficients: CoefficientRule,
    /// Logarithmic exponent of the log family.
    pub delta: f64,
    /// Vanishing moments `M` of the kernel.
    pub moment_order: usize,
    /// Scale exponent of critical_h: the term at scale `n` carries `2^{nγ}`.
    pub gamma: f64,
    /// Smoothness `s` compensated by the weights `2^{−sn}` of lattice, modulation and log terms.
    pub smoothness: f64,
    /// Integrability `p` in the log family's profile `(1+R|k−l|)^{−1/p}`.
    pub p: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, size: usize) -> Self {
        FamilySpec {
            kind,
            size,
            separation: 2,
            coefficients: CoefficientRule::Constant,
            delta: 0.5,
            moment_order: 4,
            gamma: 1.0,
            smoothness: 0.0,
            p: 1.0,
        }
    }

    pub fn with_size(&self, size: usize) -> Self {
        FamilySpec { size, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidParameter(m));
        if self.size < 2 {
            return bad(format!("family size N = {} must be at least 2", self.size));
        }
        if self.separation < 1 {
            return bad("separation R must be at least 1".into());
        }
        if self.moment_order == 0 || self.moment_order > 24 {
            return bad(format!("moment order M = {} must lie in 1..=24", self.moment_order));
        }
        if !self.gamma.is_finite() || !self.smoothness.is_finite() || !self.delta.is_finite() {
            return bad("gamma, smoothness and delta must be finite".into());
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be positive", self.p));
        }
        if self.kind != FamilyKind::Dilation && self.kind != FamilyKind::Log {
            let a = self.coefficients.coefficients(self.size)?;
            if self.kind == FamilyKind::Lattice && !nonincreasing_moduli(&a) {
                return bad("lattice coefficients must have nonincreasing moduli".into());
            }
        }
        Ok(())
    }

    /// Scale `n_l` of term `l` (1-based) for the bump families.
    pub fn scale(&self, l: usize) -> usize {
        match self.kind {
            FamilyKind::Lattice => LATTICE_BASE + self.separation * l,
            _ => self.separation * l,
        }
    }
}

/// Resolution and size limits for family grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Cells across the support of the finest bump.
    pub samples_per_bump: usize,
    /// Torus length as a multiple of the family's spatial diameter.
    pub extent_factor: f64,
    /// Largest admissible number of cells.
    pub max_cells: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { samples_per_bump: 32, extent_factor: 2.0, max_cells: 1 << 24 }
    }
}

/// Cell count and torus length chosen for one family instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub cells: usize,
    pub period: f64,
    /// Highest band the decomposition uses.
    pub k_max: usize,
}

fn pow2_at_least(x: f64) -> f64 {
    2f64.powi(x.log2().ceil() as i32)
}

/// Centre of the plateau `2^b[7/8, 3/2]` of band `b`.
fn plateau_centre(b: usize) -> f64 {
    (1u64 << b) as f64 * 19.0 / 16.0
}

/// Chooses the grid for `spec`, or reports how many cells it would need.
pub fn plan_grid(spec: &FamilySpec, cfg: &GridConfig) -> Result<GridPlan> {
    spec.validate()?;
    if cfg.samples_per_bump < 2 || cfg.extent_factor.is_nan() || cfg.extent_factor < 1.0 || cfg.max_cells < 2 {
        return Err(LabError::InvalidParameter("grid config needs ≥ 2 samples per bump and extent factor ≥ 1".into()));
    }
    let n = spec.size;
    let r = spec.separation as f64;
    let a = KERNEL_HALFWIDTH;
    // (spatial diameter, finest cell length or None, top band for spectral families)
    let (diameter, finest, top_band) = match spec.kind {
        FamilyKind::Translation => (n as f64 + 2.0 * a, Some(2.0 * a), None),
        FamilyKind::CriticalH => {
            let finest = 2.0 * a * 2f64.powi(-(spec.scale(n) as i32));
            (2f64.powi(-(spec.scale(1) as i32)) * (1.0 + a), Some(finest), None)
        }
        FamilyKind::Lattice => {
            let finest = 2.0 * a * 2f64.powi(-(spec.scale(n) as i32));
            ((n - 1) as f64 * LATTICE_SPACING + 0.125 + finest, Some(finest), None)
        }
        FamilyKind::Dilation => {
            let reach = SPECTRAL_REACH / DILATION_RADIUS;
            (2.0 * reach * 2f64.powi(-(n as i32)), None, Some(n))
        }
        FamilyKind::Modulation => (2.0 * SPECTRAL_REACH / SHIFT_RADIUS, None, Some(n)),
        FamilyKind::Log => (4.0 * n as f64 * r + 2.0 * SPECTRAL_REACH / SHIFT_RADIUS, None, Some(n)),
    };
    let period = pow2_at_least(cfg.extent_factor * diameter);
    let cells = match (finest, top_band) {
        (Some(width), _) => pow2_at_least(period * cfg.samples_per_bump as f64 / width),
        (None, Some(k)) => pow2_at_least(2.0 * period * 1.75 * (1u64 << k) as f64),
        (None, None) => unreachable!("every family has a resolution rule"),
    };
    if cells.is_nan() || cells > cfg.max_cells as f64 {
        return Err(LabError::Infeasible { required: cells.min(u64::MAX as f64) as u64, cap: cfg.max_cells as u64 });
    }
    let cells = cells as usize;
    let limit = max_band(cells, period);
    let k_max = match top_band {
        Some(k) => k,
        None if limit >= 0 => limit as usize,
        None => return Err(LabError::BandExceedsNyquist { k_max: 0, limit }),
    };
    Ok(GridPlan { cells, period, k_max })
}

/// `exp(1 − 1/(1 − t²))` on `|t| < 1`, so that the peak value is 1.
fn chi(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn default_kernels(spec: &FamilySpec) -> Result<PsiKernels> {
    build_psi_kernels(spec.moment_order, KERNEL_HALFWIDTH, 1)
}

/// Adds `amp · ψ_1(2^n (x − centre))` to the real samples of a torus.
fn add_bump(values: &mut [f64], period: f64, kernels: &PsiKernels, n: usize, centre: f64, amp: f64) {
    let len = values.len();
    let h = period / len as f64;
    let dilation = 2f64.powi(n as i32);
    let half = kernels.halfwidth() / dilation;
    let first = ((centre - half) / h).floor() as i64;
    let last = ((centre + half) / h).ceil() as i64;
    for i in first..=last {
        let x = i as f64 * h;
        let v = kernels.psi_at(1, dilation * (x - centre));
        if v != 0.0 {
            values[i.rem_euclid(len as i64) as usize] += amp * v;
        }
    }
}

/// Spectral family from its continuous Fourier transform `f̂`.
fn from_spectrum(plan: &GridPlan, fhat: impl Fn(f64) -> Complex64) -> Result<GridFunction> {
    let h = plan.period / plan.cells as f64;
    let spectrum: Vec<Complex64> =
        (0..plan.cells).map(|m| fhat(crate::lp::frequency(m, plan.cells, plan.period)) / h).collect();
    let samples = Transforms::new(plan.cells).synthesize(spectrum);
    GridFunction::new(samples, h)
}

/// Builds the family function on its planned grid.
pub fn build_family(spec: &FamilySpec, cfg: &GridConfig) -> Result<GridFunction> {
    let plan = plan_grid(spec, cfg)?;
    let kernels = if spec.kind.is_spectral() { None } else { Some(default_kernels(spec)?) };
    assemble(spec, &plan, kernels.as_ref())
}

fn assemble(spec: &FamilySpec, plan: &GridPlan, kernels: Option<&PsiKernels>) -> Result<GridFunction> {
    let n = spec.size;
    let h = plan.period / plan.cells as f64;
    let bumps = |fill: &dyn Fn(&mut Vec<f64>, &PsiKernels)| -> Result<GridFunction> {
        let kernels = kernels.expect("bump families carry kernels");
        let mut values = vec![0.0; plan.cells];
        fill(&mut values, kernels);
        GridFunction::from_real(&values, h)
    };
    match spec.kind {
        FamilyKind::Translation => {
            let a = spec.coefficients.coefficients(n)?;
            let offset = -0.5 * (n + 1) as f64;
            bumps(&|v, k| {
                for (i, al) in a.iter().enumerate() {
                    add_bump(v, plan.period, k, 0, offset + (i + 1) as f64, *al);
                }
            })
        }
        FamilyKind::CriticalH => {
            let a = spec.coefficients.coefficients(n)?;
            bumps(&|v, k| {
                for (i, al) in a.iter().enumerate() {
                    let scale = spec.scale(i + 1);
                    let amp = al * 2f64.powf(scale as f64 * spec.gamma);
                    add_bump(v, plan.period, k, scale, 2f64.powi(-(scale as i32)), amp);
                }
            })
        }
        FamilyKind::Lattice => {
            let a = spec.coefficients.coefficients(n)?;
            bumps(&|v, k| {
                for (i, al) in a.iter().enumerate() {
                    let scale = spec.scale(i + 1);
                    let amp = al * 2f64.powf(-spec.smoothness * scale as f64);
                    let origin = i as f64 * LATTICE_SPACING;
                    let step = 2f64.powi(-(scale as i32));
                    for nu in 8..=(1usize << (scale - 3)) {
                        add_bump(v, plan.period, k, scale, origin + nu as f64 * step, amp);
                    }
                }
            })
        }
        FamilyKind::Dilation => {
            let top = (1u64 << n) as f64;
            from_spectrum(plan, |xi| Complex64::new(chi((xi / top - 1.0) / DILATION_RADIUS), 0.0))
        }
        FamilyKind::Modulation => {
            let a = spec.coefficients.coefficients(n)?;
            from_spectrum(plan, |xi| {
                let mut total = Complex64::new(0.0, 0.0);
                for (i, al) in a.iter().enumerate() {
                    let b = i + 1;
                    let v = chi((xi - plateau_centre(b)) / SHIFT_RADIUS);
                    if v != 0.0 {
                        total += al * 2f64.powf(-spec.smoothness * b as f64) * v;
                    }
                }
                total
            })
        }
        FamilyKind::Log => {
            let r = spec.separation as f64;
            let origin = -2.0 * n as f64 * r;
            let profile = |gap: f64| (1.0 + r * gap).powf(-1.0 / spec.p) * (2.0 + r * gap).ln().powf(-spec.delta);
            from_spectrum(plan, |xi| {
                let mut total = Complex64::new(0.0, 0.0);
                for j in 1..=n {
                    let centre = plateau_centre(j);
                    let v = chi((xi - centre) / SHIFT_RADIUS);
                    if v == 0.0 {
                        continue;
                    }
                    let k = n + j;
                    let mut translates = Complex64::new(0.0, 0.0);
                    for l in 0..=4 * n {
                        let gap = (k as f64 - l as f64).abs();
                        let x = origin + r * l as f64;
                        translates += profile(gap) * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (xi - centre) * x);
                    }
                    total += 2f64.powf(-spec.smoothness * j as f64) * v * translates;
                }
                total
            })
        }
    }
}

/// Outcome of a size sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Growth,
    Bounded,
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Growth => "growth",
            Classification::Bounded => "bounded",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(rename = "N")]
    pub size: usize,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: f64,
}

/// Norms of one family across sizes, with the verdict drawn from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioTable {
    pub family: FamilyKind,
    pub rows: Vec<RatioRow>,
    /// Slope of `log₂ ratio` against `log₂ N`, or against `k` for the dilation family.
    pub slope: Option<f64>,
    pub classification: Classification,
}

/// Growth when the ratio rises strictly at every size and by at least 1.5
/// overall; bounded when it varies by at most a factor 2 over the top octave.
///
/// The log family grows like a power of `log N`, far too slowly for the 1.5
/// threshold at feasible sizes, so for it a strict rise alone counts as growth.
pub fn classify(kind: FamilyKind, rows: &[RatioRow]) -> Classification {
    if rows.len() < 2 {
        return Classification::Indeterminate;
    }
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let rising = ratios.windows(2).all(|w| w[1] > w[0]);
    if rising && (kind == FamilyKind::Log || ratios[ratios.len() - 1] >= 1.5 * ratios[0]) {
        return Classification::Growth;
    }
    let top = rows.iter().map(|r| r.size).max().unwrap_or(0);
    let octave: Vec<f64> = rows.iter().filter(|r| 2 * r.size >= top).map(|r| r.ratio).collect();
    let hi = octave.iter().copied().fold(f64::MIN, f64::max);
    let lo = octave.iter().copied().fold(f64::MAX, f64::min);
    if lo > 0.0 && hi <= 2.0 * lo {
        Classification::Bounded
    } else {
        Classification::Indeterminate
    }
}

fn fitted_slope(kind: FamilyKind, rows: &[RatioRow]) -> Option<f64> {
    if kind == FamilyKind::Log || rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| if kind == FamilyKind::Dilation { r.size as f64 } else { (r.size as f64).log2() })
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.log2()).collect();
    Some(fit_slope(&xs, &ys))
}

/// Source and target norms of `spec`'s family for the spaces of `q`.
pub fn family_norms(spec: &FamilySpec, spaces: &[SmoothnessParams], cfg: &GridConfig) -> Result<Vec<f64>> {
    let plan = plan_grid(spec, cfg)?;
    let kernels = if spec.kind.is_spectral() { None } else { Some(default_kernels(spec)?) };
    norms_on_plan(spec, &plan, kernels.as_ref(), spaces)
}

fn norms_on_plan(spec: &FamilySpec, plan: &GridPlan, kernels: Option<&PsiKernels>, spaces: &[SmoothnessParams]) -> Result<Vec<f64>> {
    let f = assemble(spec, plan, kernels)?;
    let fam = BumpFamily::new(plan.cells, plan.period, plan.k_max)?;
    space_norms(&f, &fam, spaces)
}

/// Builds the family at every size and compares target to source norms.
pub fn measure_ratio(q: &EmbeddingQuery, template: &FamilySpec, sizes: &[usize], cfg: &GridConfig) -> Result<RatioTable> {
    q.validate()?;
    if q.d != 1 {
        return Err(LabError::InvalidParameter(format!("families live on the line; query has d = {}", q.d)));
    }
    if sizes.is_empty() {
        return Err(LabError::InvalidParameter("no sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::InvalidParameter("sizes must be strictly increasing".into()));
    }
    let plans = sizes
        .iter()
        .map(|&n| {
            let spec = template.with_size(n);
            plan_grid(&spec, cfg).map(|plan| (spec, plan))
        })
        .collect::<Result<Vec<_>>>()?;
    let kernels = if template.kind.is_spectral() { None } else { Some(default_kernels(template)?) };
    let spaces = [q.source, q.target];
    let rows = plans
        .par_iter()
        .map(|(spec, plan)| {
            let norms = norms_on_plan(spec, plan, kernels.as_ref(), &spaces)?;
            if !(norms[0] > 0.0 && norms[1] > 0.0) {
                return Err(LabError::InvalidParameter(format!("family of size {} has a vanishing norm", spec.size)));
            }
            Ok(RatioRow { size: spec.size, source_norm: norms[0], target_norm: norms[1], ratio: norms[1] / norms[0] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioTable {
        family: template.kind,
        slope: fitted_slope(template.kind, &rows),
        classification: classify(template.kind, &rows),
        rows,
    })
}

fn inv(x: Num) -> f64 {
    1.0 / x.to_f64()
}

fn default_moment_order(q: &EmbeddingQuery) -> usize {
    let s = q.source.s.to_f64().abs().max(q.target.s.to_f64().abs());
    (s.ceil() as usize + 4).min(24)
}

fn base_spec(q: &EmbeddingQuery, kind: FamilyKind) -> FamilySpec {
    let mut spec = FamilySpec::new(kind, kind.default_sizes()[0]);
    spec.moment_order = default_moment_order(q);
    spec.gamma = q.d as f64 * inv(q.source.p) - q.source.s.to_f64();
    spec.smoothness = q.source.s.to_f64();
    spec.p = q.source.p.to_f64();
    spec
}

/// The family whose norm ratio blows up for a failing embedding.
pub fn select_family(q: &EmbeddingQuery, v: &Verdict) -> Result<FamilySpec> {
    use std::cmp::Ordering::*;
    if v.holds {
        return Err(LabError::EmbeddingHolds);
    }
    q.validate()?;
    let (a, b) = (&q.source, &q.target);
    let d = Num::int(q.d.into());
    let excess = (a.s - b.s).cmp_tol(&(d / a.p - d / b.p));
    let p_order = a.p.cmp_tol(&b.p);
    let s_equal = a.s.cmp_tol(&b.s) == Equal;
    let p = b.p.into();
    let spec = |kind| base_spec(q, kind);
    if p_order == Greater || (p_order == Equal && a.r > b.r) {
        let mut s = spec(FamilyKind::Translation);
        if p_order == Equal {
            s.coefficients = CoefficientRule::Power { theta: inv(a.p) };
        }
        return Ok(s);
    }
    if excess == Less {
        return Ok(spec(FamilyKind::Dilation));
    }
    if excess == Equal && p_order == Less {
        return Ok(spec(FamilyKind::CriticalH));
    }
    if s_equal && p_order == Equal {
        let (q0, q1, r0, r1) = (a.q, b.q, a.r, b.r);
        let mut log = spec(FamilyKind::Log);
        match v.theorem {
            Theorem::BF => {
                if q0 > p {
                    return Ok(spec(FamilyKind::Lattice));
                }
                if q0 > q1 {
                    return Ok(spec(FamilyKind::Modulation));
                }
                if q0 > r1 {
                    return Ok(spec(FamilyKind::CriticalH));
                }
                log.delta = 0.5 * (1.0 / r0.to_f64() + inv(a.p));
                return Ok(log);
            }
            Theorem::FB => {
                if q1 < p {
                    return Ok(spec(FamilyKind::Lattice));
                }
                if q0 > q1 {
                    return Ok(spec(FamilyKind::Modulation));
                }
                if q1 < r0 {
                    return Ok(spec(FamilyKind::CriticalH));
                }
                log.delta = 0.5 * (inv(a.p) + 1.0 / r1.to_f64());
                return Ok(log);
            }
            Theorem::BB | Theorem::FF => {
                if q0 > q1 {
                    return Ok(spec(FamilyKind::Modulation));
                }
            }
        }
    }
    Err(LabError::InvalidParameter(format!("no family covers the failure of {q}")))
}

/// The family that probes a valid embedding at its sharp edge: fixed-scale
/// translates for clauses (i) and (ii), critical_h on the critical line, and
/// lattice or modulation families at equal smoothness and integrability.
pub fn natural_family(q: &EmbeddingQuery, v: &Verdict) -> Result<FamilySpec> {
    if !v.holds {
        return Err(LabError::EmbeddingNotClaimed);
    }
    let kind = match (v.clause.expect("holding verdicts name a clause"), v.theorem) {
        (Clause::I | Clause::Ii, _) => FamilyKind::Translation,
        (Clause::Iii, _) => FamilyKind::CriticalH,
        (_, Theorem::BF | Theorem::FB) => FamilyKind::Lattice,
        (_, Theorem::BB | Theorem::FF) => FamilyKind::Modulation,
    };
    Ok(base_spec(q, kind))
}

/// Picks the family for any query: the growth witness when it fails, the
/// natural family when it holds.
pub fn family_for(q: &EmbeddingQuery) -> Result<(Verdict, FamilySpec)> {
    let v = decide(q);
    let spec = if v.holds { natural_family(q, &v)? } else { select_family(q, &v)? };
    Ok((v, spec))
}

fn ell_q(a: &[f64], q: f64) -> f64 {
    let abs: Vec<f64> = a.iter().map(|x| x.abs()).collect();
    lq_combine(&abs, q)
}

/// The coefficient quantity the family's norm in `space` is equivalent to.
pub fn coefficient_norm(kind: FamilyKind, a: &[f64], space: &SmoothnessParams) -> Result<f64> {
    let (p, q, r) = (space.p.to_f64(), space.q.to_f64(), space.r.to_f64());
    match kind {
        FamilyKind::Translation => {
            let masses = vec![1.0; a.len()];
            let values: Vec<f64> = a.iter().map(|x| x.abs()).collect();
            Ok(lorentz_norm(&StepRearrangement::from_weighted(&values, &masses), LorentzExponents::new(p, r)?))
        }
        FamilyKind::CriticalH => Ok(ell_q(a, if space.scale == Scale::B { q } else { r })),
        FamilyKind::Lattice => match space.scale {
            Scale::B => Ok(ell_q(a, q)),
            Scale::F if r.is_infinite() => {
                Ok(a.iter().enumerate().map(|(i, x)| ((i + 1) as f64).powf(1.0 / p) * x.abs()).fold(0.0, f64::max))
            }
            Scale::F => {
                let sum: f64 = a.iter().enumerate().map(|(i, x)| ((i + 1) as f64).powf(r / p - 1.0) * x.abs().powf(r)).sum();
                Ok(sum.powf(1.0 / r))
            }
        },
        FamilyKind::Modulation => Ok(ell_q(a, q)),
        FamilyKind::Dilation | FamilyKind::Log => {
            Err(LabError::InvalidParameter(format!("the {kind} family has no coefficient norm")))
        }
    }
}

/// Builds the family with coefficients `a` and with `b`, and checks that the
/// ratio of their norms in `space` is within a factor 2 of the ratio of the
/// equivalent coefficient norms.
pub fn norm_sandwich_check(spec: &FamilySpec, a: &[f64], b: &[f64], space: &SmoothnessParams, cfg: &GridConfig) -> Result<bool> {
    if matches!(spec.kind, FamilyKind::CriticalH | FamilyKind::Lattice) && !(nonincreasing_moduli(a) && nonincreasing_moduli(b)) {
        return Err(LabError::InvalidParameter("coefficient moduli must be nonincreasing".into()));
    }
    let instance = |c: &[f64]| -> Result<(f64, f64)> {
        let mut s = spec.with_size(c.len());
        s.coefficients = CoefficientRule::Explicit { values: c.to_vec() };
        let norm = family_norms(&s, std::slice::from_ref(space), cfg)?[0];
        Ok((norm, coefficient_norm(spec.kind, c, space)?))
    };
    let (na, ca) = instance(a)?;
    let (nb, cb) = instance(b)?;
    if !(na > 0.0 && nb > 0.0 && ca > 0.0 && cb > 0.0) {
        return Err(LabError::InvalidParameter("coefficient sequences must be nonzero".into()));
    }
    Ok(((nb / na) / (cb / ca)).ln().abs() <= 2f64.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::lp_decompose;

    fn sp(scale: Scale, s: (i64, i64), p: (i64, i64), q: f64, r: f64) -> SmoothnessParams {
        SmoothnessParams::new(scale, Num::ratio(s.0, s.1), Num::ratio(p.0, p.1), q, r).unwrap()
    }

    fn band_norms(f: &GridFunction, plan: &GridPlan) -> Vec<f64> {
        let fam = BumpFamily::new(plan.cells, plan.period, plan.k_max).unwrap();
        let e = LorentzExponents::new(2.0, 2.0).unwrap();
        lp_decompose(f, &fam)
            .unwrap()
            .members()
            .iter()
            .map(|g| lorentz_norm(&crate::measure::rearrange(g).unwrap(), e))
            .collect()
    }

    #[test]
    fn family_names_round_trip() {
        for k in FamilyKind::ALL {
            assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
        }
        assert_eq!("Critical-H".parse::<FamilyKind>().unwrap(), FamilyKind::CriticalH);
        assert!("wavelet".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(FamilySpec::new(FamilyKind::Translation, 1).validate().is_err());
        let mut s = FamilySpec::new(FamilyKind::Lattice, 3);
        s.coefficients = CoefficientRule::Explicit { values: vec![1.0, 2.0, 1.0] };
        assert!(s.validate().is_err());
        s.coefficients = CoefficientRule::Explicit { values: vec![1.0, 1.0] };
        assert!(s.validate().is_err());
        s.coefficients = CoefficientRule::Power { theta: 0.5 };
        assert!(s.validate().is_ok());
        s.separation = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn dilation_is_spectrally_local() {
        let spec = FamilySpec::new(FamilyKind::Dilation, 5);
        let plan = plan_grid(&spec, &GridConfig::default()).unwrap();
        let f = build_family(&spec, &GridConfig::default()).unwrap();
        let norms = band_norms(&f, &plan);
        let total = crate::measure::lorentz_norm(&crate::measure::rearrange(&f).unwrap(), LorentzExponents::new(2.0, 2.0).unwrap());
        for (k, v) in norms.iter().enumerate() {
            if k == 5 {
                assert!((v - total).abs() <= 1e-10 * total);
            } else {
                assert!(*v <= 1e-10 * total, "band {k}: {v}");
            }
        }
    }

    #[test]
    fn modulation_terms_occupy_their_own_bands() {
        let mut spec = FamilySpec::new(FamilyKind::Modulation, 4);
        spec.coefficients = CoefficientRule::Explicit { values: vec![0.0, 0.0, 1.0, 0.0] };
        let plan = plan_grid(&spec, &GridConfig::default()).unwrap();
        let f = build_family(&spec, &GridConfig::default()).unwrap();
        let norms = band_norms(&f, &plan);
        let peak = norms.iter().copied().fold(0.0, f64::max);
        for (k, v) in norms.iter().enumerate() {
            if k == 3 {
                assert_eq!(*v, peak);
            } else {
                assert!(*v <= 1e-10 * peak, "band {k}: {v}");
            }
        }
    }

    #[test]
    fn singleton_translation_has_r_independent_besov_norm_at_r_equal_p() {
        let mut spec = FamilySpec::new(FamilyKind::Translation, 2);
        spec.coefficients = CoefficientRule::Explicit { values: vec![1.0, 0.0] };
        let spaces = [sp(Scale::B, (0, 1), (2, 1), 2.0, 2.0), sp(Scale::B, (0, 1), (2, 1), 2.0, 2.0).with_scale(Scale::F)];
        let norms = family_norms(&spec, &spaces, &GridConfig::default()).unwrap();
        assert!(norms[0] > 0.0 && norms[0].is_finite());
        assert!((norms[0] - norms[1]).abs() <= 1e-9 * norms[0]);
    }

    #[test]
    fn infeasible_grids_report_their_size() {
        let spec = FamilySpec::new(FamilyKind::CriticalH, 12);
        match plan_grid(&spec, &GridConfig::default()) {
            Err(LabError::Infeasible { required, cap }) => {
                assert!(required > cap);
                assert_eq!(cap, 1 << 24);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn critical_h_is_homogeneous() {
        let spec = FamilySpec::new(FamilyKind::CriticalH, 3);
        let space = sp(Scale::F, (0, 1), (2, 1), 2.0, 2.0);
        let a = [1.0, 0.5, 0.25];
        let twice: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        let cfg = GridConfig::default();
        let n1 = family_norms(&spec.with_size(3), std::slice::from_ref(&space), &cfg);
        assert!(n1.is_ok());
        let mut sa = spec.clone();
        sa.coefficients = CoefficientRule::Explicit { values: a.to_vec() };
        let mut sb = spec.clone();
        sb.coefficients = CoefficientRule::Explicit { values: twice.clone() };
        let na = family_norms(&sa, std::slice::from_ref(&space), &cfg).unwrap()[0];
        let nb = family_norms(&sb, std::slice::from_ref(&space), &cfg).unwrap()[0];
        assert!((nb / na - 2.0).abs() < 1e-12);
        assert!(norm_sandwich_check(&spec, &a, &twice, &space, &cfg).unwrap());
    }

    #[test]
    fn sandwich_rejects_increasing_coefficients() {
        let spec = FamilySpec::new(FamilyKind::CriticalH, 2);
        let space = sp(Scale::F, (0, 1), (2, 1), 2.0, 2.0);
        assert!(norm_sandwich_check(&spec, &[1.0, 2.0], &[1.0, 1.0], &space, &GridConfig::default()).is_err());
    }

    #[test]
    fn classification_rules() {
        let rows = |ratios: &[f64]| -> Vec<RatioRow> {
            ratios
                .iter()
                .enumerate()
                .map(|(i, r)| RatioRow { size: 1 << (i + 1), source_norm: 1.0, target_norm: *r, ratio: *r })
                .collect()
        };
        assert_eq!(classify(FamilyKind::Lattice, &rows(&[1.0, 1.3, 1.7, 2.2])), Classification::Growth);
        assert_eq!(classify(FamilyKind::Lattice, &rows(&[1.0, 1.1, 1.05, 1.2])), Classification::Bounded);
        assert_eq!(classify(FamilyKind::Lattice, &rows(&[1.0, 3.0, 1.0, 3.0])), Classification::Indeterminate);
        assert_eq!(classify(FamilyKind::Lattice, &rows(&[1.0])), Classification::Indeterminate);
        assert_eq!(classify(FamilyKind::Lattice, &rows(&[1.0, 1.01, 1.02])), Classification::Bounded);
        assert_eq!(classify(FamilyKind::Log, &rows(&[1.0, 1.01, 1.02])), Classification::Growth);
    }
}
