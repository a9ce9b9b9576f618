//! Sequences of grid functions and the mixed norms `ℓ^q(L^{p,r})`, `L^{p,r}(ℓ^q)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::measure::{lorentz_norm, rearrange, GridFunction, LorentzExponents};

/// A nonempty list of grid functions on one common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSequence {
    members: Vec<GridFunction>,
}

impl FunctionSequence {
    pub fn new(members: Vec<GridFunction>) -> Result<Self> {
        let first = members.first().ok_or(LabError::EmptyDomain)?;
        if let Some(bad) = members.iter().find(|m| !m.compatible_with(first)) {
            return Err(LabError::Incompatible(format!(
                "member with {} cells of mass {} in a sequence on {} cells of mass {}",
                bad.len(),
                bad.cell_mass(),
                first.len(),
                first.cell_mass()
            )));
        }
        Ok(FunctionSequence { members })
    }

    pub fn members(&self) -> &[GridFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Pointwise sum of all members.
    pub fn sum(&self) -> GridFunction {
        let first = &self.members[0];
        let mut acc = first.samples().to_vec();
        for m in &self.members[1..] {
            for (a, b) in acc.iter_mut().zip(m.samples()) {
                *a += b;
            }
        }
        first.with_samples(acc)
    }

    /// Applies `|·|^σ` to every member.
    pub fn powered(&self, sigma: f64) -> FunctionSequence {
        FunctionSequence { members: self.members.iter().map(|m| crate::measure::power_transform(m, sigma)).collect() }
    }
}

/// `(Σ x_k^q)^{1/q}` for nonnegative `x_k`, or the maximum when `q = ∞`, without overflow.
pub fn lq_combine(values: &[f64], q: f64) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || q.is_infinite() {
        return top;
    }
    let s: f64 = values.iter().map(|v| (v / top).powf(q)).sum();
    top * s.powf(1.0 / q)
}

/// The pointwise `ℓ^q` aggregate `x ↦ (Σ_k |f_k(x)|^q)^{1/q}`.
pub fn pointwise_lq(fs: &FunctionSequence, q: f64) -> GridFunction {
    let n = fs.members[0].len();
    let mut column = vec![0.0; fs.len()];
    let samples = (0..n)
        .map(|i| {
            for (c, m) in column.iter_mut().zip(&fs.members) {
                *c = crate::measure::modulus(&m.samples()[i]);
            }
            Complex64::new(lq_combine(&column, q), 0.0)
        })
        .collect();
    fs.members[0].with_samples(samples)
}

/// `‖{f_k}‖_{ℓ^q(L^{p,r})}`.
pub fn norm_lq_of_lpr(fs: &FunctionSequence, q: f64, e: LorentzExponents) -> f64 {
    let norms: Vec<f64> = fs.members.iter().map(|m| lorentz_norm(&rearrange(m).expect("nonempty"), e)).collect();
    lq_combine(&norms, q)
}

/// `‖{f_k}‖_{L^{p,r}(ℓ^q)}`.
pub fn norm_lpr_of_lq(fs: &FunctionSequence, q: f64, e: LorentzExponents) -> f64 {
    lorentz_norm(&rearrange(&pointwise_lq(fs, q)).expect("nonempty"), e)
}

/// Which side of the embedding carries the `ℓ^q` outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeqDirection {
    /// `ℓ^{q0}(L^{p,r0}) → L^{p,r1}(ℓ^{q1})`
    EllToL,
    /// `L^{p,r0}(ℓ^{q0}) → ℓ^{q1}(L^{p,r1})`
    LToEll,
}

/// Exponents of a sequence-space embedding; `q`s and `r`s may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqEmbeddingQuery {
    pub p: f64,
    pub q0: f64,
    pub r0: f64,
    pub q1: f64,
    pub r1: f64,
    pub direction: SeqDirection,
}

impl SeqEmbeddingQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(LabError::InvalidExponent(format!("p = {} must be finite and positive", self.p)));
        }
        for (name, v) in [("q0", self.q0), ("r0", self.r0), ("q1", self.q1), ("r1", self.r1)] {
            if v.is_nan() || v <= 0.0 {
                return Err(LabError::InvalidExponent(format!("{name} = {v} must lie in (0, inf]")));
            }
        }
        Ok(())
    }

    pub fn source_norm(&self, fs: &FunctionSequence) -> f64 {
        let e = LorentzExponents { p: self.p, r: self.r0 };
        match self.direction {
            SeqDirection::EllToL => norm_lq_of_lpr(fs, self.q0, e),
            SeqDirection::LToEll => norm_lpr_of_lq(fs, self.q0, e),
        }
    }

    pub fn target_norm(&self, fs: &FunctionSequence) -> f64 {
        let e = LorentzExponents { p: self.p, r: self.r1 };
        match self.direction {
            SeqDirection::EllToL => norm_lpr_of_lq(fs, self.q1, e),
            SeqDirection::LToEll => norm_lq_of_lpr(fs, self.q1, e),
        }
    }
}

/// Whether the sequence-space embedding holds.
pub fn decide_seq_embedding(q: &SeqEmbeddingQuery) -> bool {
    let SeqEmbeddingQuery { p, q0, r0, q1, r1, direction } = *q;
    match direction {
        SeqDirection::EllToL => {
            q0 <= p.min(q1).min(r1) && r0 <= r1 && (p != q1 || r0 <= p || (q0 < p && p < r0))
        }
        SeqDirection::LToEll => {
            q1 >= p.max(q0).max(r0) && r0 <= r1 && (p != q0 || p <= r1 || (r1 < p && p < q1))
        }
    }
}

/// Largest target/source ratio found by the random search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqConstantEstimate {
    pub constant: f64,
    pub trials: usize,
    pub members: usize,
}

/// Cells of the grid used by the random sequence generator.
const RANDOM_GRID: usize = 256;

pub(crate) fn trial_seed(master: u64, index: u64) -> u64 {
    // SplitMix64 finalizer on the pair, so neighbouring trials decorrelate.
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn log_uniform(rng: &mut impl Rng, decades: f64) -> f64 {
    10f64.powf(rng.gen_range(-decades / 2.0..decades / 2.0))
}

/// One member supported on a random union of dyadic blocks with log-uniform values.
fn random_member(rng: &mut impl Rng) -> Vec<f64> {
    let mut v = vec![0.0; RANDOM_GRID];
    let level = rng.gen_range(0..=6u32);
    let block = RANDOM_GRID >> level;
    let blocks = 1usize << level;
    let amplitude = log_uniform(rng, 6.0);
    let count = rng.gen_range(1..=blocks.min(8));
    for _ in 0..count {
        let b = rng.gen_range(0..blocks);
        let flat = rng.gen_bool(0.5);
        let level_value = log_uniform(rng, 6.0);
        for x in &mut v[b * block..(b + 1) * block] {
            *x = amplitude * if flat { level_value } else { log_uniform(rng, 6.0) };
        }
    }
    v
}

/// A random sequence of `members` functions, drawn from one of several shapes.
pub fn random_sequence(rng: &mut impl Rng, members: usize) -> FunctionSequence {
    let mass = 1.0 / RANDOM_GRID as f64;
    let build = |values: Vec<f64>| GridFunction::from_real(&values, mass).expect("valid grid");
    let shape = rng.gen_range(0..5);
    let list: Vec<GridFunction> = match shape {
        // Identical copies of one function.
        0 => {
            let g = random_member(rng);
            (0..members).map(|_| build(g.clone())).collect()
        }
        // Disjointly supported pieces.
        1 => {
            let width = (RANDOM_GRID / members).max(1);
            (0..members)
                .map(|k| {
                    let mut v = vec![0.0; RANDOM_GRID];
                    let amp = log_uniform(rng, 6.0);
                    let start = (k * width) % RANDOM_GRID;
                    for x in &mut v[start..(start + width).min(RANDOM_GRID)] {
                        *x = amp * log_uniform(rng, 2.0);
                    }
                    build(v)
                })
                .collect()
        }
        // One function split into shifted copies.
        2 => {
            let g = random_member(rng);
            (0..members)
                .map(|k| {
                    let mut v = g.clone();
                    v.rotate_right(k * RANDOM_GRID / members);
                    build(v)
                })
                .collect()
        }
        // Heavy-tailed amplitudes: a geometric ladder, so a few members dominate.
        3 => {
            let decay = log_uniform(rng, 4.0).max(1.0 + 1e-3);
            (0..members)
                .map(|k| {
                    let scale = decay.powi(-(k as i32));
                    build(random_member(rng).into_iter().map(|x| x * scale).collect())
                })
                .collect()
        }
        _ => (0..members).map(|_| build(random_member(rng))).collect(),
    };
    FunctionSequence::new(list).expect("compatible members")
}

/// Random-search estimate of the embedding constant; requires the embedding to hold.
pub fn verify_seq_embedding(q: &SeqEmbeddingQuery, trials: usize, members: usize, seed: u64) -> Result<SeqConstantEstimate> {
    q.validate()?;
    if !decide_seq_embedding(q) {
        return Err(LabError::EmbeddingNotClaimed);
    }
    if members == 0 {
        return Err(LabError::InvalidParameter("members must be positive".into()));
    }
    let constant = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t as u64));
            let fs = random_sequence(&mut rng, members);
            let src = q.source_norm(&fs);
            if src > 0.0 {
                q.target_norm(&fs) / src
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(SeqConstantEstimate { constant, trials, members })
}
