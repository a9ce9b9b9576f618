//! Inhomogeneous Littlewood–Paley decomposition on a periodic grid, Besov and
//! Triebel–Lizorkin norms over Lorentz spaces, and moment-vanishing kernels.
//!
//! A grid of `n` cells with cell length `h` is a torus of length `L = n h`; its
//! Fourier modes sit at the physical frequencies `m / L`. With `L = 1` these
//! are the integer frequencies.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ext::{Ext, Num};
use crate::measure::{lorentz_norm, rearrange, GridFunction, LorentzExponents};
use crate::quadrature::gauss_legendre;
use crate::seq::FunctionSequence;

/// `S(t) = η(t) / (η(t) + η(1 − t))` with `η(t) = exp(−1/t)` for `t > 0`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Equals 1 on `|ξ| ≤ 3/2`, vanishes on `|ξ| ≥ 7/4`.
pub fn beta0(xi: f64) -> f64 {
    1.0 - smooth_step(4.0 * (xi.abs() - 1.5))
}

/// The dyadic multiplier `β_k`.
pub fn beta(k: usize, xi: f64) -> f64 {
    if k == 0 {
        beta0(xi)
    } else {
        beta0(xi / (1u64 << k) as f64) - beta0(xi / (1u64 << (k - 1)) as f64)
    }
}

/// Physical frequency of FFT bin `m` on a torus of `n` cells and length `period`.
pub fn frequency(m: usize, n: usize, period: f64) -> f64 {
    let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
    signed / period
}

/// Largest band index whose support `|ξ| ≤ 7·2^{k−2}` stays below the Nyquist frequency.
pub fn max_band(n: usize, period: f64) -> i64 {
    let nyquist = n as f64 / (2.0 * period);
    ((nyquist / 1.75).log2() + 1e-12).floor() as i64
}

/// The multipliers `β_0, …, β_K` sampled on the grid's frequencies.
#[derive(Clone, Debug)]
pub struct BumpFamily {
    len: usize,
    period: f64,
    beta: Vec<Vec<f64>>,
}

/// Builds `β_0..β_K` on the unit torus, where frequencies are integers.
pub fn build_beta_family(grid_length: usize, k_max: usize) -> Result<BumpFamily> {
    BumpFamily::new(grid_length, 1.0, k_max)
}

impl BumpFamily {
    /// Builds the family for a torus of `len` cells and physical length `period`.
    pub fn new(len: usize, period: f64, k_max: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!("length {len} is not a power of two")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(LabError::InvalidGrid(format!("period {period} must be positive")));
        }
        let limit = max_band(len, period);
        if k_max as i64 > limit {
            return Err(LabError::BandExceedsNyquist { k_max, limit });
        }
        let beta = (0..=k_max)
            .map(|k| (0..len).map(|m| beta(k, frequency(m, len, period))).collect())
            .collect();
        Ok(BumpFamily { len, period, beta })
    }

    /// The family with as many bands as the grid supports.
    pub fn full(len: usize, period: f64) -> Result<Self> {
        let limit = max_band(len, period);
        if limit < 0 {
            return Err(LabError::BandExceedsNyquist { k_max: 0, limit });
        }
        Self::new(len, period, limit as usize)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn k_max(&self) -> usize {
        self.beta.len() - 1
    }

    /// `β_k` at every FFT bin.
    pub fn multiplier(&self, k: usize) -> &[f64] {
        &self.beta[k]
    }

    /// Largest `|Σ_k β_k(ξ) − 1|` over bins with `|ξ| ≤ 3·2^{K−1}`.
    pub fn partition_defect(&self) -> f64 {
        let limit = 1.5 * (1u64 << self.k_max()) as f64;
        (0..self.len)
            .filter(|&m| frequency(m, self.len, self.period).abs() <= limit)
            .map(|m| (self.beta.iter().map(|b| b[m]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.len() != self.len {
            return Err(LabError::DimensionMismatch { expected: self.len, found: f.len() });
        }
        let period = f.total_measure();
        if (period - self.period).abs() > 1e-12 * self.period {
            return Err(LabError::Incompatible(format!("grid of length {period} analysed with a family for length {}", self.period)));
        }
        Ok(())
    }
}

/// Forward and inverse transforms of one size.
pub(crate) struct Transforms {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transforms {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transforms { forward: planner.plan_fft_forward(len), inverse: planner.plan_fft_inverse(len), len }
    }

    pub(crate) fn spectrum(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/n` normalization.
    pub(crate) fn synthesize(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse.process(&mut spectrum);
        let scale = 1.0 / self.len as f64;
        for z in &mut spectrum {
            *z *= scale;
        }
        spectrum
    }
}

fn band(spectrum: &[Complex64], beta: &[f64], tf: &Transforms) -> Option<Vec<Complex64>> {
    if beta.iter().all(|&b| b == 0.0) {
        return None;
    }
    let filtered: Vec<Complex64> = spectrum.iter().zip(beta).map(|(z, b)| z * *b).collect();
    if filtered.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return None;
    }
    Some(tf.synthesize(filtered))
}

/// The pieces `Λ_0 f, …, Λ_K f`.
pub fn lp_decompose(f: &GridFunction, fam: &BumpFamily) -> Result<FunctionSequence> {
    fam.check(f)?;
    let tf = Transforms::new(fam.len);
    let spectrum = tf.spectrum(f.samples());
    let members = fam
        .beta
        .iter()
        .map(|b| f.with_samples(band(&spectrum, b, &tf).unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); fam.len])))
        .collect();
    FunctionSequence::new(members)
}

/// Besov or Triebel–Lizorkin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    B,
    F,
}

/// One space `B^s_q[L^{p,r}]` or `F^s_q[L^{p,r}]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessParams {
    pub scale: Scale,
    pub s: Num,
    pub p: Num,
    pub q: Ext,
    pub r: Ext,
}

impl SmoothnessParams {
    pub fn new(scale: Scale, s: impl Into<Num>, p: impl Into<Num>, q: impl Into<Ext>, r: impl Into<Ext>) -> Result<Self> {
        let sp = SmoothnessParams { scale, s: s.into(), p: p.into(), q: q.into(), r: r.into() };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_positive() {
            return Err(LabError::InvalidExponent(format!("p = {} must be finite and positive", self.p)));
        }
        if !self.q.is_positive() || !self.r.is_positive() {
            return Err(LabError::InvalidExponent(format!("q = {}, r = {} must lie in (0, inf]", self.q, self.r)));
        }
        if !self.s.is_finite() {
            return Err(LabError::InvalidParameter(format!("s = {} must be finite", self.s)));
        }
        Ok(())
    }

    pub fn lorentz(&self) -> LorentzExponents {
        LorentzExponents { p: self.p.to_f64(), r: self.r.to_f64() }
    }

    pub fn with_scale(mut self, scale: Scale) -> Self {
        self.scale = scale;
        self
    }
}

impl std::fmt::Display for SmoothnessParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}^{}_{}[L^({},{})]", self.scale, self.s, self.q, self.p, self.r)
    }
}

/// Running pointwise `ℓ^q` sum kept as `max · (Σ (x/max)^q)` to avoid overflow.
struct PointwiseAccumulator {
    q: f64,
    top: Vec<f64>,
    sum: Vec<f64>,
}

impl PointwiseAccumulator {
    fn new(q: f64, n: usize) -> Self {
        PointwiseAccumulator { q, top: vec![0.0; n], sum: vec![0.0; n] }
    }

    fn absorb(&mut self, weight: f64, band: &[Complex64]) {
        let q = self.q;
        for ((top, sum), z) in self.top.iter_mut().zip(self.sum.iter_mut()).zip(band) {
            let x = weight * crate::measure::modulus(z);
            if x == 0.0 {
                continue;
            }
            if q.is_infinite() {
                *top = top.max(x);
            } else if x > *top {
                *sum = *sum * crate::measure::pow(*top / x, q) + 1.0;
                *top = x;
            } else {
                *sum += crate::measure::pow(x / *top, q);
            }
        }
    }

    fn finish(self) -> Vec<f64> {
        if self.q.is_infinite() {
            return self.top;
        }
        let q = self.q;
        self.top.iter().zip(&self.sum).map(|(t, s)| if *t == 0.0 { 0.0 } else { t * s.powf(1.0 / q) }).collect()
    }
}

/// Evaluates several Besov and Triebel–Lizorkin norms of `f` from one decomposition.
///
/// Bands are produced and consumed one at a time, so memory stays at a few
/// grid-sized buffers however many bands there are.
pub fn space_norms(f: &GridFunction, fam: &BumpFamily, spaces: &[SmoothnessParams]) -> Result<Vec<f64>> {
    fam.check(f)?;
    for sp in spaces {
        sp.validate()?;
    }
    let n = fam.len;
    let tf = Transforms::new(n);
    let spectrum = tf.spectrum(f.samples());
    let mut besov_terms: Vec<Vec<f64>> = vec![Vec::new(); spaces.len()];
    let mut accumulators: Vec<Option<PointwiseAccumulator>> = spaces
        .iter()
        .map(|sp| (sp.scale == Scale::F).then(|| PointwiseAccumulator::new(sp.q.to_f64(), n)))
        .collect();
    let needs_rearrangement = spaces.iter().any(|sp| sp.scale == Scale::B);
    for (k, b) in fam.beta.iter().enumerate() {
        let Some(piece) = band(&spectrum, b, &tf) else { continue };
        let rearranged = if needs_rearrangement { Some(rearrange(&f.with_samples(piece.clone()))?) } else { None };
        for (i, sp) in spaces.iter().enumerate() {
            let weight = 2f64.powf(k as f64 * sp.s.to_f64());
            match sp.scale {
                Scale::B => {
                    let norm = lorentz_norm(rearranged.as_ref().expect("computed for B"), sp.lorentz());
                    besov_terms[i].push(weight * norm);
                }
                Scale::F => accumulators[i].as_mut().expect("allocated for F").absorb(weight, &piece),
            }
        }
    }
    Ok(spaces
        .iter()
        .zip(besov_terms)
        .zip(accumulators)
        .map(|((sp, terms), acc)| match sp.scale {
            Scale::B => crate::seq::lq_combine(&terms, sp.q.to_f64()),
            Scale::F => {
                let aggregate = acc.expect("allocated for F").finish();
                let g = f.with_samples(aggregate.into_iter().map(|x| Complex64::new(x, 0.0)).collect());
                lorentz_norm(&rearrange(&g).expect("nonempty"), sp.lorentz())
            }
        })
        .collect())
}

/// `(Σ_k 2^{ksq} ‖Λ_k f‖_{p,r}^q)^{1/q}`.
pub fn besov_norm(f: &GridFunction, fam: &BumpFamily, sp: &SmoothnessParams) -> Result<f64> {
    if sp.scale != Scale::B {
        return Err(LabError::InvalidParameter("besov_norm needs scale B".into()));
    }
    Ok(space_norms(f, fam, std::slice::from_ref(sp))?[0])
}

/// `‖(Σ_k |2^{ks} Λ_k f|^q)^{1/q}‖_{p,r}`.
pub fn tl_norm(f: &GridFunction, fam: &BumpFamily, sp: &SmoothnessParams) -> Result<f64> {
    if sp.scale != Scale::F {
        return Err(LabError::InvalidParameter("tl_norm needs scale F".into()));
    }
    Ok(space_norms(f, fam, std::slice::from_ref(sp))?[0])
}

/// Nodes per panel and panel count of the composite rule used for kernel integrals.
const PANEL_NODES: usize = 24;
const PANELS: usize = 16;
/// Tilt of the bump. An even bump would make `ψ_0` even, and for even `M` the
/// odd moment `M + 1` would then vanish as well, hiding the order-`M` behaviour.
const TILT: f64 = 1.0;
/// Power of the edge singularity. Flatter edges give a faster-decaying Fourier
/// transform, so the asymptotic moment rates set in within a few octaves.
const SHARP: i32 = 3;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (TILT * u - 1.0 / (1.0 - u * u).powi(SHARP)).exp()
    }
}

/// Moment-vanishing kernels `ψ_0 = P·φ` and their dyadic differences `ψ_k`.
///
/// In the unit variable `u = x/a` (with `a` the support half-width),
/// `ψ_0(x) = a^{-1} P(u) φ(u)` where `φ(u) = exp(u − (1−u²)^{−3})` and `P` has degree `M`.
#[derive(Clone, Debug)]
pub struct PsiKernels {
    moment_order: usize,
    halfwidth: f64,
    scale_count: usize,
    coeffs: Vec<f64>,
    nodes: Vec<f64>,
    masses: Vec<f64>,
    /// `ψ_0` sampled on a unit torus of 4096 cells, centred at cell 0.
    pub psi0: GridFunction,
    /// `(c, x*)`: `ψ_1 * ψ_1 ≥ c` on `[−x*, x*]`.
    pub lower_bound: (f64, f64),
}

/// `L_0(u), …, L_m(u)` by the three-term recurrence.
fn legendre_values(m: usize, u: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(m + 1);
    values.push(1.0);
    if m >= 1 {
        values.push(u);
    }
    for k in 2..=m {
        let kf = k as f64;
        values.push(((2.0 * kf - 1.0) * u * values[k - 1] - (kf - 1.0) * values[k - 2]) / kf);
    }
    values
}

/// `Σ_k c_k L_k(u)`.
fn polynomial(coeffs: &[f64], u: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut total = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        total += c * cur;
        let kf = (k + 1) as f64;
        let next = ((2.0 * kf - 1.0) * u * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    total
}

/// Solves the moment system for `ψ_0` and prepares `ψ_1..ψ_{scale_count}`.
pub fn build_psi_kernels(m: usize, support_halfwidth: f64, scale_count: usize) -> Result<PsiKernels> {
    if m == 0 {
        return Err(LabError::InvalidParameter("moment order M must be at least 1".into()));
    }
    if m > 24 {
        return Err(LabError::InvalidParameter(format!("moment order M = {m} is beyond the conditioned range")));
    }
    if !(support_halfwidth > 0.0 && support_halfwidth <= 0.25) {
        return Err(LabError::InvalidParameter(format!("support half-width {support_halfwidth} must lie in (0, 1/4]")));
    }
    let (gx, gw) = gauss_legendre(PANEL_NODES);
    let mut nodes = Vec::with_capacity(PANELS * PANEL_NODES);
    let mut weights = Vec::with_capacity(PANELS * PANEL_NODES);
    let width = 2.0 / PANELS as f64;
    for panel in 0..PANELS {
        let lo = -1.0 + panel as f64 * width;
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(lo + 0.5 * width * (x + 1.0));
            weights.push(0.5 * width * w * bump(lo + 0.5 * width * (x + 1.0)));
        }
    }
    // The moment conditions say ψ_0 reproduces q(0) for every polynomial q of
    // degree ≤ M. Tested against Legendre polynomials the Gram system stays well
    // conditioned, with right-hand side L_m(0).
    let basis: Vec<Vec<f64>> = nodes.iter().map(|u| legendre_values(m, *u)).collect();
    let gram = DMatrix::from_fn(m + 1, m + 1, |row, col| {
        basis.iter().zip(&weights).map(|(l, w)| w * l[row] * l[col]).sum::<f64>()
    });
    let rhs = DVector::from_vec(legendre_values(m, 0.0));
    let lu = gram.clone().lu();
    let mut solution = lu.solve(&rhs).ok_or(LabError::SingularMoments)?;
    let residual = &rhs - &gram * &solution;
    solution += lu.solve(&residual).ok_or(LabError::SingularMoments)?;
    let coeffs: Vec<f64> = solution.iter().copied().collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(LabError::SingularMoments);
    }
    let masses = nodes.iter().zip(&weights).map(|(u, w)| w * polynomial(&coeffs, *u)).collect();
    let mut kernels = PsiKernels {
        moment_order: m,
        halfwidth: support_halfwidth,
        scale_count,
        coeffs,
        nodes,
        masses,
        psi0: GridFunction::zeros(1, 1.0)?,
        lower_bound: (0.0, 0.0),
    };
    let n = 4096;
    kernels.psi0 = GridFunction::from_real(
        &(0..n).map(|i| kernels.psi0_at(frequency(i, n, 1.0) / n as f64 * 1.0)).collect::<Vec<_>>(),
        1.0 / n as f64,
    )?;
    kernels.lower_bound = kernels.autocorrelation_bound();
    Ok(kernels)
}

impl PsiKernels {
    pub fn moment_order(&self) -> usize {
        self.moment_order
    }

    pub fn halfwidth(&self) -> f64 {
        self.halfwidth
    }

    pub fn scale_count(&self) -> usize {
        self.scale_count
    }

    /// `ψ_0(x)`.
    pub fn psi0_at(&self, x: f64) -> f64 {
        let u = x / self.halfwidth;
        if u.abs() >= 1.0 {
            0.0
        } else {
            polynomial(&self.coeffs, u) * bump(u) / self.halfwidth
        }
    }

    /// `ψ_k(x)`; for `k ≥ 1` this is `2^k ψ_0(2^k x) − 2^{k−1} ψ_0(2^{k−1} x)`.
    pub fn psi_at(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.psi0_at(x);
        }
        let hi = (1u64 << k) as f64;
        hi * self.psi0_at(hi * x) - 0.5 * hi * self.psi0_at(0.5 * hi * x)
    }

    /// `∫ x^j ψ_0(x) dx` by the rule the system was solved with.
    pub fn moment(&self, j: usize) -> f64 {
        self.nodes.iter().zip(&self.masses).map(|(u, w)| w * (u * self.halfwidth).powi(j as i32)).sum()
    }

    /// `ψ_k` sampled on a torus of `len` cells and length `period`, centred at `x = 0`.
    pub fn sample(&self, k: usize, len: usize, period: f64) -> Result<GridFunction> {
        let h = period / len as f64;
        let values: Vec<f64> = (0..len).map(|i| self.psi_at(k, frequency(i, len, 1.0) * h)).collect();
        GridFunction::from_real(&values, h)
    }

    /// `(ψ_1 * ψ_1)(x)` by composite quadrature over the support of `ψ_1`.
    pub fn psi1_autocorrelation(&self, x: f64) -> f64 {
        let a = self.halfwidth;
        let (gx, gw) = gauss_legendre(PANEL_NODES);
        let panels = 4 * PANELS;
        let width = 2.0 * a / panels as f64;
        let mut total = 0.0;
        for panel in 0..panels {
            let lo = -a + panel as f64 * width;
            for (g, w) in gx.iter().zip(&gw) {
                let y = lo + 0.5 * width * (g + 1.0);
                total += 0.5 * width * w * self.psi_at(1, y) * self.psi_at(1, x - y);
            }
        }
        total
    }

    /// Largest symmetric interval on which `ψ_1 * ψ_1` stays above half its peak.
    fn autocorrelation_bound(&self) -> (f64, f64) {
        let c = 0.5 * self.psi1_autocorrelation(0.0);
        if c <= 0.0 {
            return (c, 0.0);
        }
        let step = self.halfwidth / 512.0;
        let mut x = 0.0;
        while x < 2.0 * self.halfwidth
            && self.psi1_autocorrelation(x + step) >= c
            && self.psi1_autocorrelation(-x - step) >= c
        {
            x += step;
        }
        (c, x)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Sup norms of `𝓛_j h` for a sum of compressed kernels `h = Σ_w ψ_1(2^n(· − w))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: usize,
    pub moment_order: usize,
    /// `(j, ‖𝓛_j h‖_∞)` over the scanned scales.
    pub sup_norms: Vec<(usize, f64)>,
    /// Slope of `log₂‖𝓛_j h‖_∞` against `j` over the fitted scales above `n`.
    pub slope_above: f64,
    /// Slope of `log₂‖𝓛_j h‖_∞` against `j` over the fitted scales below `n`.
    pub slope_below: f64,
}

impl PsiKernels {
    /// `∫ ψ_k(y) g(y) dy` by the construction rule, which annihilates every
    /// polynomial of degree at most `M` up to roundoff.
    pub fn integrate_against(&self, k: usize, g: impl Fn(f64) -> f64) -> f64 {
        let a = self.halfwidth;
        if k == 0 {
            return self.nodes.iter().zip(&self.masses).map(|(u, m)| m * g(a * u)).sum();
        }
        let fine = a / (1u64 << k) as f64;
        self.nodes.iter().zip(&self.masses).map(|(u, m)| m * (g(fine * u) - g(2.0 * fine * u))).sum()
    }
}

/// `𝓛_j h(x)` on the real line, with the moment-vanishing factor always integrated by the exact rule.
fn local_mean(kernels: &PsiKernels, n: usize, points: &[f64], j: usize, x: f64) -> f64 {
    let compress = (1u64 << n) as f64;
    if j >= n {
        let h = |y: f64| points.iter().map(|w| kernels.psi_at(1, compress * (y - w))).sum::<f64>();
        kernels.integrate_against(j, |y| h(x - y))
    } else {
        points
            .iter()
            .map(|w| kernels.integrate_against(1, |v| kernels.psi_at(j, x - w - v / compress)) / compress)
            .sum()
    }
}

/// Octave windows, counted from `n`, over which the decay slopes are fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayWindows {
    /// Fit `j ∈ [n − below.1, n − below.0]`.
    pub below: (usize, usize),
    /// Fit `j ∈ [n + above.0, n + above.1]`.
    pub above: (usize, usize),
}

impl Default for DecayWindows {
    /// Far enough from `n` for the asymptotic rates to dominate, near enough to
    /// stay above double-precision roundoff for `M ≤ 8`.
    fn default() -> Self {
        DecayWindows { below: (2, 5), above: (5, 8) }
    }
}

/// Measures how fast `‖𝓛_j h‖_∞ = ‖ψ_j * h‖_∞` decays away from the scale `j = n`.
///
/// Every integral is taken with the rule that built `ψ_0`, applied to the factor
/// whose moments vanish: `ψ_j` when `j ≥ n` and the compressed `ψ_1` otherwise.
/// The polynomial part of the smooth factor is therefore cancelled exactly and
/// the decay can be followed far below the peak.
pub fn lemma_decay_check(kernels: &PsiKernels, n: usize, points: &[f64], windows: DecayWindows) -> Result<DecayReport> {
    if points.is_empty() {
        return Err(LabError::EmptyDomain);
    }
    let DecayWindows { below, above } = windows;
    if below.0 >= below.1 || above.0 >= above.1 || below.1 > n {
        return Err(LabError::InvalidParameter(format!("fit windows {windows:?} must be proper and end above j = 0 for n = {n}")));
    }
    if n + above.1 > 52 {
        return Err(LabError::InvalidParameter(format!("scales up to 2^{} are below double resolution", n + above.1)));
    }
    let a = kernels.halfwidth();
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(*w), h.max(*w)));
    let samples_per_width = 8.0 * (kernels.moment_order() + 2) as f64;
    let sup_norms: Vec<(usize, f64)> = (n - below.1..=n + above.1)
        .map(|j| {
            let coarse = 2f64.powi(-(j.min(n) as i32));
            let reach = 2.0 * a * coarse + 2.0 * a * 2f64.powi(-(n as i32));
            let step = a * coarse / samples_per_width;
            let count = ((hi - lo + 2.0 * reach) / step).ceil() as usize;
            let sup = (0..=count)
                .map(|i| local_mean(kernels, n, points, j, lo - reach + i as f64 * step).abs())
                .fold(0.0, f64::max);
            (j, sup)
        })
        .collect();
    let fit_range = |from: usize, to: usize| {
        let chosen: Vec<&(usize, f64)> = sup_norms.iter().filter(|(j, _)| (from..=to).contains(j)).collect();
        let xs: Vec<f64> = chosen.iter().map(|(j, _)| *j as f64).collect();
        let ys: Vec<f64> = chosen.iter().map(|(_, v)| v.log2()).collect();
        fit_slope(&xs, &ys)
    };
    Ok(DecayReport {
        n,
        moment_order: kernels.moment_order(),
        slope_above: fit_range(n + above.0, n + above.1),
        slope_below: fit_range(n - below.1, n - below.0),
        sup_norms,
    })
}
