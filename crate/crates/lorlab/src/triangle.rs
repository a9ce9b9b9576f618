//! Constants in the quasi-triangle inequality for Lorentz quasi-norms.
//!
//! For `0 < p < 1` the relevant inequality is
//! `‖Σ f_k‖_{p,r} ≤ C (Σ ‖f_k‖_{p,r}^p)^{1/p}`, for `1 < p < r` it is the plain
//! triangle inequality with a constant. This module evaluates the closed-form
//! bounds and runs a seeded search for families that make the ratio large.
//!
//! Families live on the circle `[0, 1)` with Lebesgue measure. Every member is a
//! stack of arcs sharing one centre, so its rearrangement is read off the arc
//! lengths and the sum of a family is exact on the partition cut out by all arc
//! endpoints.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measure::{lorentz_norm, LorentzExponents, StepRearrangement};
use crate::seq::trial_seed;

pub const MAX_MEMBERS: usize = 64;
pub const MAX_LAYERS: usize = 32;
/// Ratio between the widest and narrowest arc of one member.
pub const LADDER_DECADES: f64 = 10.0;

const ASCENT_STARTS: usize = 12;
const ASCENT_SALT: u64 = 0xA5CE_17D0_5EED_0001;

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(LabError::InvalidExponent(format!("p = {p} must lie in (0, 1)")))
    }
}

/// The bound on `C(p, r)` with the unknown absolute factor `A^{1/p}` removed.
pub fn bound_modulo_a(p: f64, r: f64) -> Result<f64> {
    check_open_unit(p)?;
    if r.is_nan() || r <= p {
        return Err(LabError::InvalidExponent(format!("need p < r, got p = {p}, r = {r}")));
    }
    let log = (1.0 / (1.0 - p)).ln();
    if r.is_infinite() {
        return Ok((log / p).exp());
    }
    let e = 1.0 / p - 1.0 / r;
    Ok((e * (log + (p / r * log).ln_1p())).exp())
}

/// The universal bound `((2−p)/(1−p))^{1/p}`, valid for every `r`.
pub fn stw_bound(p: f64) -> Result<f64> {
    check_open_unit(p)?;
    Ok(((2.0 - p) / (1.0 - p)).powf(1.0 / p))
}

/// Sharp plain-triangle constant `(p/r)^{1/r} (p'/r')^{1/r'}` for `1 < p < r ≤ ∞`.
pub fn bks_constant(p: f64, r: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite() && r > p) {
        return Err(LabError::InvalidExponent(format!("need 1 < p < r, got p = {p}, r = {r}")));
    }
    let pc = p / (p - 1.0);
    if r.is_infinite() {
        return Ok(pc);
    }
    let rc = r / (r - 1.0);
    Ok((p / r).powf(1.0 / r) * (pc / rc).powf(1.0 / rc))
}

/// The cap `(1 − 1/p)^{-1}` on the plain triangle constant for `p > 1`.
pub fn hardy_constant(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(LabError::InvalidExponent(format!("need p > 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// One arc of a member: value `value` on the arc of length `width` about the centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub width: f64,
    pub value: f64,
}

/// A member function `Σ_j value_j 1{dist(x, centre) < width_j / 2}` on the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub centre: f64,
    pub layers: Vec<Layer>,
}

impl Member {
    /// `(half-width, value)` pairs sorted by decreasing width, with the value
    /// being the function's level just inside that radius.
    fn levels(&self) -> Vec<(f64, f64)> {
        let mut arcs: Vec<Layer> = self.layers.iter().copied().filter(|l| l.value > 0.0 && l.width > 0.0).collect();
        arcs.sort_unstable_by(|a, b| b.width.total_cmp(&a.width));
        let mut level = 0.0;
        arcs.iter()
            .map(|l| {
                level += l.value;
                (l.width.min(1.0) / 2.0, level)
            })
            .collect()
    }

    fn rearrangement(&self) -> StepRearrangement {
        let levels = self.levels();
        let mut values = Vec::with_capacity(levels.len());
        let mut masses = Vec::with_capacity(levels.len());
        for (i, &(half, level)) in levels.iter().enumerate() {
            let inner = levels.get(i + 1).map_or(0.0, |l| l.0);
            values.push(level);
            masses.push(2.0 * (half - inner));
        }
        StepRearrangement::from_weighted(&values, &masses)
    }
}

/// A finite family of members; this is the configuration reported by the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub members: Vec<Member>,
}

impl FamilyDescriptor {
    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(LabError::InvalidParameter("a family needs at least one member".into()));
        }
        for m in &self.members {
            if !m.centre.is_finite() {
                return Err(LabError::InvalidParameter("member centre must be finite".into()));
            }
            for l in &m.layers {
                if !(l.width.is_finite() && l.value.is_finite() && l.width >= 0.0 && l.value >= 0.0) {
                    return Err(LabError::InvalidParameter(format!("bad layer {l:?}")));
                }
            }
        }
        Ok(())
    }

    /// Rearrangement of `Σ f_k`.
    ///
    /// The arcs of one member are nested, so the active ones at any point are
    /// always the outermost few and the member's value there is a prefix sum of
    /// its layer values. Member values are combined in a pairwise tree whose
    /// nodes are sums of nonnegative terms, so a spike of any height never
    /// leaves residue on the background after the sweep passes it.
    pub fn sum_rearrangement(&self) -> StepRearrangement {
        let prefix: Vec<Vec<f64>> = self
            .members
            .iter()
            .map(|m| std::iter::once(0.0).chain(m.levels().into_iter().map(|(_, level)| level)).collect())
            .collect();
        let mut active = vec![0usize; self.members.len()];
        let mut events: Vec<(f64, usize, bool)> = Vec::new();
        for (k, m) in self.members.iter().enumerate() {
            for l in &m.layers {
                if !(l.value > 0.0 && l.width > 0.0) {
                    continue;
                }
                if l.width >= 1.0 {
                    active[k] += 1;
                    continue;
                }
                let half = l.width / 2.0;
                let start = (m.centre - half).rem_euclid(1.0);
                let end = (m.centre + half).rem_euclid(1.0);
                if start > end {
                    active[k] += 1;
                }
                events.push((start, k, true));
                events.push((end, k, false));
            }
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let leaves = self.members.len().next_power_of_two();
        let mut tree = vec![0.0; 2 * leaves];
        for (k, levels) in prefix.iter().enumerate() {
            tree[leaves + k] = levels[active[k].min(levels.len() - 1)];
        }
        for node in (1..leaves).rev() {
            tree[node] = tree[2 * node] + tree[2 * node + 1];
        }

        let mut values = Vec::with_capacity(events.len() + 1);
        let mut masses = Vec::with_capacity(events.len() + 1);
        let mut at = 0.0;
        let mut i = 0;
        loop {
            let next = events.get(i).map_or(1.0, |e| e.0.min(1.0));
            if next > at {
                values.push(tree[1]);
                masses.push(next - at);
                at = next;
            }
            if i == events.len() {
                break;
            }
            while i < events.len() && events[i].0 <= at {
                let (_, k, opens) = events[i];
                active[k] = if opens { active[k] + 1 } else { active[k].saturating_sub(1) };
                let mut node = leaves + k;
                tree[node] = prefix[k][active[k].min(prefix[k].len() - 1)];
                while node > 1 {
                    node /= 2;
                    tree[node] = tree[2 * node] + tree[2 * node + 1];
                }
                i += 1;
            }
        }
        StepRearrangement::from_weighted(&values, &masses)
    }

    /// `‖Σ f_k‖ / (Σ ‖f_k‖^u)^{1/u}` with `u = min(p, 1)`.
    pub fn ratio(&self, e: LorentzExponents) -> f64 {
        let u = e.p.min(1.0);
        let denom: f64 = self.members.iter().map(|m| lorentz_norm(&m.rearrangement(), e).powf(u)).sum();
        if denom <= 0.0 {
            return 0.0;
        }
        lorentz_norm(&self.sum_rearrangement(), e) / denom.powf(1.0 / u)
    }
}

/// Outcome of the constant search at one `(p, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub p: f64,
    #[serde(with = "inf_as_string")]
    pub r: f64,
    /// Present when `0 < p < 1` and `p < r`.
    pub analytic_bound_mod_a: Option<f64>,
    /// Present when `0 < p < 1` and `p ≤ r`. For `r < p` no finite constant exists.
    pub stw_bound: Option<f64>,
    /// Present when `1 < p < r`.
    pub bks_constant: Option<f64>,
    pub empirical_lower: f64,
    pub evaluations: usize,
    pub best_configuration: FamilyDescriptor,
}

pub(crate) mod inf_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "∞" | "infinity") => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

fn singleton() -> FamilyDescriptor {
    FamilyDescriptor { members: vec![Member { centre: 0.0, layers: vec![Layer { width: 1.0, value: 1.0 }] }] }
}

/// A profile whose level at radius `w/2` is `w^{-beta}`, on `layers` arcs spread
/// geometrically from `top` down by `decades`.
fn power_profile(beta: f64, layers: usize, top: f64, decades: f64) -> Vec<Layer> {
    let layers = layers.max(1);
    let step = if layers > 1 { 10f64.powf(-decades / (layers - 1) as f64) } else { 1.0 };
    let mut out = Vec::with_capacity(layers);
    let mut prev = 0.0;
    for j in 0..layers {
        let width = top * step.powi(j as i32);
        let level = width.powf(-beta);
        out.push(Layer { width, value: (level - prev).max(0.0) });
        prev = level.max(prev);
    }
    out
}

fn rotation(profile: Vec<Layer>, members: usize, offset: f64) -> FamilyDescriptor {
    FamilyDescriptor {
        members: (0..members)
            .map(|k| Member { centre: (offset + k as f64 / members as f64).rem_euclid(1.0), layers: profile.clone() })
            .collect(),
    }
}

/// Power exponent of the extremal profile: saturating for `p ≤ 1`, the Hölder
/// extremal `(r−p)/(p(r−1))` otherwise.
fn natural_beta(e: LorentzExponents) -> f64 {
    if e.p <= 1.0 || e.r.is_infinite() {
        1.0 / e.p
    } else if e.r > e.p {
        (e.r - e.p) / (e.p * (e.r - 1.0))
    } else {
        0.0
    }
}

/// Deterministic structured starting points: rotated power profiles.
fn seed_families(e: LorentzExponents) -> Vec<FamilyDescriptor> {
    let beta = natural_beta(e);
    let mut out = vec![singleton()];
    for &members in &[2usize, 4, 8, 16, 32, 64] {
        for &layers in &[12usize, 24, 32] {
            for &scale in &[0.8, 0.9, 1.0] {
                // The background of a rotation is formed at scales above 1/members.
                let base = (members as f64).log10();
                for decades in [base + 0.5, base + 1.5, LADDER_DECADES] {
                    out.push(rotation(power_profile(beta * scale, layers, 1.0, decades), members, 0.0));
                }
            }
        }
    }
    out
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn random_profile(rng: &mut impl Rng, beta_max: f64) -> Vec<Layer> {
    let layers = rng.gen_range(1..=MAX_LAYERS);
    let top = if rng.gen_bool(0.5) { 1.0 } else { log_uniform(rng, 1e-3, 1.0) };
    let decades = rng.gen_range(0.5..=LADDER_DECADES).min(LADDER_DECADES + top.log10());
    let beta = rng.gen_range(0.0..=beta_max);
    let mut profile = power_profile(beta, layers, top, decades.max(0.1));
    for l in &mut profile {
        l.value *= log_uniform(rng, 0.5, 2.0);
    }
    profile
}

fn random_family(rng: &mut impl Rng, e: LorentzExponents) -> FamilyDescriptor {
    let beta_max = 1.5 * natural_beta(e).max(0.5);
    let members = log_uniform(rng, 1.0, MAX_MEMBERS as f64 + 0.99).floor() as usize;
    let members = members.clamp(1, MAX_MEMBERS);
    match rng.gen_range(0..5) {
        // Rotated copies of one profile.
        0 => rotation(random_profile(rng, beta_max), members, rng.gen_range(0.0..1.0)),
        // Nested: one centre, different ladders.
        1 => FamilyDescriptor {
            members: (0..members).map(|_| Member { centre: 0.5, layers: random_profile(rng, beta_max) }).collect(),
        },
        // Clustered centres.
        2 => {
            let spread = log_uniform(rng, 1e-4, 0.5);
            FamilyDescriptor {
                members: (0..members)
                    .map(|_| Member {
                        centre: (0.5 + spread * rng.gen_range(-1.0..1.0)).rem_euclid(1.0),
                        layers: random_profile(rng, beta_max),
                    })
                    .collect(),
            }
        }
        // One profile at random centres.
        3 => {
            let profile = random_profile(rng, beta_max);
            FamilyDescriptor {
                members: (0..members).map(|_| Member { centre: rng.gen_range(0.0..1.0), layers: profile.clone() }).collect(),
            }
        }
        _ => FamilyDescriptor {
            members: (0..members)
                .map(|_| Member { centre: rng.gen_range(0.0..1.0), layers: random_profile(rng, beta_max) })
                .collect(),
        },
    }
}

/// One random local move; returns `false` when the move did not apply.
fn perturb(f: &mut FamilyDescriptor, rng: &mut impl Rng, sigma: f64) -> bool {
    let factor = (sigma * rng.gen_range(-1.0..1.0f64)).exp();
    let k = rng.gen_range(0..f.members.len());
    match rng.gen_range(0..5) {
        // Same layer index in every member.
        0 | 1 => {
            let len = f.members[k].layers.len();
            if len == 0 {
                return false;
            }
            let j = rng.gen_range(0..len);
            let widen = rng.gen_bool(0.5);
            for m in &mut f.members {
                if let Some(l) = m.layers.get_mut(j) {
                    if widen {
                        l.width = (l.width * factor).min(1.0);
                    } else {
                        l.value *= factor;
                    }
                }
            }
        }
        2 => {
            let len = f.members[k].layers.len();
            if len == 0 {
                return false;
            }
            let j = rng.gen_range(0..len);
            f.members[k].layers[j].value *= factor;
        }
        3 => {
            for l in &mut f.members[k].layers {
                l.value *= factor;
            }
        }
        _ => {
            let shift = sigma * rng.gen_range(-1.0..1.0) / f.members.len() as f64;
            let c = &mut f.members[k].centre;
            *c = (*c + shift).rem_euclid(1.0);
        }
    }
    true
}

/// Accept-if-better local search from `start`, using exactly `budget` evaluations.
fn ascend(start: FamilyDescriptor, mut best: f64, e: LorentzExponents, budget: usize, rng: &mut impl Rng) -> (f64, FamilyDescriptor) {
    let mut current = start;
    let mut sigma = 0.5;
    let mut failures = 0;
    for _ in 0..budget {
        let mut trial = current.clone();
        if !perturb(&mut trial, rng, sigma) {
            continue;
        }
        let value = trial.ratio(e);
        if value.is_finite() && value > best {
            best = value;
            current = trial;
            failures = 0;
        } else {
            failures += 1;
            if failures >= 25 {
                sigma = (sigma * 0.7).max(1e-3);
                failures = 0;
            }
        }
    }
    (best, current)
}

fn better(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// Seeded search for a family maximizing the triangle ratio at `(p, r)`.
///
/// `budget` counts ratio evaluations. The result is independent of the number
/// of worker threads.
pub fn empirical_constant(p: f64, r: f64, budget: usize, seed: u64) -> Result<ConstantReport> {
    let e = LorentzExponents::new(p, r)?;
    let budget = budget.max(1);
    let mut candidates = seed_families(e);
    candidates.truncate(budget.div_ceil(10).max(1));
    let random_trials = (budget - candidates.len()) / 2;
    let ascent_budget = budget - candidates.len() - random_trials;

    let mut scored: Vec<(f64, usize)> =
        candidates.par_iter().enumerate().map(|(i, f)| (f.ratio(e), i)).collect();
    let random: Vec<(f64, FamilyDescriptor)> = (0..random_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            let f = random_family(&mut rng, e);
            (f.ratio(e), f)
        })
        .collect();
    let offset = candidates.len();
    for (i, (value, f)) in random.into_iter().enumerate() {
        scored.push((value, offset + i));
        candidates.push(f);
    }
    scored.retain(|s| s.0.is_finite());
    scored.sort_unstable_by(better);

    let starts: Vec<(f64, usize)> = scored.iter().copied().take(ASCENT_STARTS.min(ascent_budget)).collect();
    let mut results: Vec<(f64, usize, FamilyDescriptor)> = if starts.is_empty() {
        Vec::new()
    } else {
        let share = ascent_budget / starts.len();
        starts
            .par_iter()
            .enumerate()
            .map(|(t, &(value, idx))| {
                let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed ^ ASCENT_SALT, t as u64));
                let (v, f) = ascend(candidates[idx].clone(), value, e, share, &mut rng);
                (v, idx, f)
            })
            .collect()
    };
    if let Some(&(value, idx)) = scored.first() {
        results.push((value, idx, candidates[idx].clone()));
    }
    results.sort_by(|a, b| better(&(a.0, a.1), &(b.0, b.1)));
    let (empirical, best) = match results.into_iter().next() {
        Some((v, _, f)) if v >= 1.0 => (v, f),
        _ => (1.0, singleton()),
    };

    Ok(ConstantReport {
        p,
        r,
        analytic_bound_mod_a: if p < 1.0 && r > p { bound_modulo_a(p, r).ok() } else { None },
        stw_bound: if r >= p { stw_bound(p).ok() } else { None },
        bks_constant: bks_constant(p, r).ok(),
        empirical_lower: empirical,
        evaluations: budget,
        best_configuration: best,
    })
}

/// `sup (empirical^p / bound_modulo_a^p)` over reports where the bound exists.
pub fn fit_a(reports: &[ConstantReport]) -> Option<f64> {
    reports
        .iter()
        .filter_map(|rep| rep.analytic_bound_mod_a.map(|b| (rep.empirical_lower / b).powf(rep.p)))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
}

/// Largest plain triangle ratio over random families at `p > 1`, against the Hardy cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardyCheck {
    pub p: f64,
    #[serde(with = "inf_as_string")]
    pub r: f64,
    pub max_ratio: f64,
    pub cap: f64,
    pub families: usize,
}

impl HardyCheck {
    pub fn holds(&self) -> bool {
        self.max_ratio <= self.cap * (1.0 + 1e-9)
    }
}

pub fn hardy_check(p: f64, r: f64, families: usize, seed: u64) -> Result<HardyCheck> {
    let cap = hardy_constant(p)?;
    let e = LorentzExponents::new(p, r)?;
    let max_ratio = (0..families)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, i as u64));
            random_family(&mut rng, e).ratio(e)
        })
        .reduce(|| 0.0, f64::max);
    Ok(HardyCheck { p, r, max_ratio, cap, families })
}

/// One cell of a `(p, r)` sweep; domain violations stay attached to their cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub p: f64,
    pub r: f64,
    pub outcome: std::result::Result<ConstantReport, String>,
}

/// Runs [`empirical_constant`] on every cell of `p_grid × r_grid`, row by row.
pub fn sweep(p_grid: &[f64], r_grid: &[f64], budget: usize, seed: u64) -> Vec<SweepCell> {
    let mut out = Vec::with_capacity(p_grid.len() * r_grid.len());
    for (i, &p) in p_grid.iter().enumerate() {
        for (j, &r) in r_grid.iter().enumerate() {
            let cell_seed = trial_seed(seed, ((i as u64) << 32) | j as u64);
            let outcome = empirical_constant(p, r, budget, cell_seed).map_err(|e| e.to_string());
            out.push(SweepCell { p, r, outcome });
        }
    }
    out
}
