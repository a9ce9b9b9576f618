//! Decision procedure for embeddings between Besov and Triebel–Lizorkin spaces
//! over Lorentz spaces, with algebraic self-checks.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ext::{Ext, Num};
use crate::lp::{Scale, SmoothnessParams};

/// Which pair of scales an embedding connects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    BF,
    FB,
    BB,
    FF,
}

impl Theorem {
    pub fn of(source: Scale, target: Scale) -> Self {
        match (source, target) {
            (Scale::B, Scale::F) => Theorem::BF,
            (Scale::F, Scale::B) => Theorem::FB,
            (Scale::B, Scale::B) => Theorem::BB,
            (Scale::F, Scale::F) => Theorem::FF,
        }
    }

    pub fn scales(self) -> (Scale, Scale) {
        match self {
            Theorem::BF => (Scale::B, Scale::F),
            Theorem::FB => (Scale::F, Scale::B),
            Theorem::BB => (Scale::B, Scale::B),
            Theorem::FF => (Scale::F, Scale::F),
        }
    }

    pub const ALL: [Theorem; 4] = [Theorem::BF, Theorem::FB, Theorem::BB, Theorem::FF];
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for Theorem {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BF" => Ok(Theorem::BF),
            "FB" => Ok(Theorem::FB),
            "BB" => Ok(Theorem::BB),
            "FF" => Ok(Theorem::FF),
            other => Err(LabError::Parse(format!("unknown scale pair {other:?}; expected BF, FB, BB or FF"))),
        }
    }
}

/// Clause labels in the order they are searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    I,
    Ii,
    Iii,
    Iv,
    V,
    Vi,
}

impl Clause {
    pub const ALL: [Clause; 6] = [Clause::I, Clause::Ii, Clause::Iii, Clause::Iv, Clause::V, Clause::Vi];

    pub fn label(self) -> &'static str {
        match self {
            Clause::I => "i",
            Clause::Ii => "ii",
            Clause::Iii => "iii",
            Clause::Iv => "iv",
            Clause::V => "v",
            Clause::Vi => "vi",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `X ↪ Y` for a source and a target space in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingQuery {
    pub source: SmoothnessParams,
    pub target: SmoothnessParams,
    pub d: u32,
}

impl EmbeddingQuery {
    pub fn new(source: SmoothnessParams, target: SmoothnessParams, d: u32) -> Result<Self> {
        let q = EmbeddingQuery { source, target, d };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(LabError::InvalidParameter("dimension d must be a positive integer".into()));
        }
        self.source.validate()?;
        self.target.validate()
    }

    pub fn theorem(&self) -> Theorem {
        Theorem::of(self.source.scale, self.target.scale)
    }
}

impl fmt::Display for EmbeddingQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} (d = {})", self.source, self.target, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub clause: Option<Clause>,
    pub theorem: Theorem,
}

/// How the smoothness and integrability indices of a query relate.
struct Shape {
    /// `s0 − s1` compared with `d/p0 − d/p1`.
    excess: std::cmp::Ordering,
    /// `d/p0 − d/p1 > 0`, i.e. `p0 < p1`.
    p_increases: bool,
    s_equal: bool,
    s_greater: bool,
    p_equal: bool,
}

fn shape(q: &EmbeddingQuery) -> Shape {
    let d = Num::int(q.d.into());
    let (a, b) = (&q.source, &q.target);
    let gap = d / a.p - d / b.p;
    let ds = a.s - b.s;
    let zero = Num::int(0);
    Shape {
        excess: ds.cmp_tol(&gap),
        p_increases: gap.cmp_tol(&zero).is_gt(),
        s_equal: ds.cmp_tol(&zero).is_eq(),
        s_greater: ds.cmp_tol(&zero).is_gt(),
        p_equal: a.p.cmp_tol(&b.p).is_eq(),
    }
}

fn ext(n: Num) -> Ext {
    Ext::Fin(n)
}

fn clause_holds(theorem: Theorem, clause: Clause, q: &EmbeddingQuery) -> bool {
    use std::cmp::Ordering::{Equal, Greater};
    let sh = shape(q);
    let (a, b) = (&q.source, &q.target);
    let (p0, p1) = (ext(a.p), ext(b.p));
    let (q0, q1, r0, r1) = (a.q, b.q, a.r, b.r);
    let r_ok = r0 <= r1;
    let endpoint = sh.s_equal && sh.p_equal;
    match clause {
        Clause::I => sh.excess == Greater && sh.p_increases,
        Clause::Ii => sh.s_greater && sh.p_equal && r_ok,
        Clause::Iii => {
            let critical = sh.excess == Equal && sh.p_increases;
            critical
                && match theorem {
                    Theorem::BF => q0 <= r1,
                    Theorem::FB => r0 <= q1,
                    Theorem::BB => q0 <= q1,
                    Theorem::FF => r0 <= r1,
                }
        }
        Clause::Iv => {
            endpoint
                && r_ok
                && match theorem {
                    Theorem::BF => p1 != q1 && q0 <= p1.min(q1).min(r1),
                    Theorem::FB => p0 != q0 && q1 >= p0.max(q0).max(r0),
                    Theorem::BB | Theorem::FF => q0 <= q1,
                }
        }
        Clause::V => {
            endpoint
                && r_ok
                && match theorem {
                    Theorem::BF => p1 == q1 && q1 >= r0 && q0 <= p1.min(r1),
                    Theorem::FB => p0 == q0 && q0 <= r1 && q1 >= p0.max(r0),
                    Theorem::BB | Theorem::FF => false,
                }
        }
        Clause::Vi => {
            endpoint
                && r_ok
                && match theorem {
                    Theorem::BF => p1 == q1 && q1 < r0 && q0 < p1,
                    Theorem::FB => p0 == q0 && q0 > r1 && q1 > p0,
                    Theorem::BB | Theorem::FF => false,
                }
        }
    }
}

/// Every clause the query satisfies, in search order.
pub fn satisfied_clauses(q: &EmbeddingQuery) -> Vec<Clause> {
    let theorem = q.theorem();
    Clause::ALL.into_iter().filter(|c| clause_holds(theorem, *c, q)).collect()
}

/// Decides `source ↪ target`, reporting the first satisfied clause.
pub fn decide(q: &EmbeddingQuery) -> Verdict {
    let theorem = q.theorem();
    let clause = Clause::ALL.into_iter().find(|c| clause_holds(theorem, *c, q));
    Verdict { holds: clause.is_some(), clause, theorem }
}

/// A change that can only shrink the source space or enlarge the target space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relaxation {
    LowerTargetSmoothness,
    RaiseTargetR,
    RaiseTargetQ,
    LowerSourceR,
    LowerSourceQ,
    RaiseSourceSmoothness,
}

impl Relaxation {
    pub const ALL: [Relaxation; 6] = [
        Relaxation::LowerTargetSmoothness,
        Relaxation::RaiseTargetR,
        Relaxation::RaiseTargetQ,
        Relaxation::LowerSourceR,
        Relaxation::LowerSourceQ,
        Relaxation::RaiseSourceSmoothness,
    ];
}

/// Finite sets of values for each index, plus the dimensions to try.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentLattice {
    pub s: Vec<Num>,
    pub p: Vec<Num>,
    pub q: Vec<Ext>,
    pub r: Vec<Ext>,
    pub d: Vec<u32>,
}

impl ExponentLattice {
    /// Six values per index, chosen so that critical lines and equalities
    /// `p = q`, `p = r` occur often.
    pub fn standard() -> Self {
        let s = [0, 1, 2, 3, 4, 6].map(|k| Num::ratio(k, 4)).to_vec();
        let p = vec![Num::ratio(1, 2), Num::int(1), Num::ratio(4, 3), Num::int(2), Num::int(4), Num::ratio(1, 4)];
        let q = vec![Ext::ratio(1, 2), Ext::from(1), Ext::from(2), Ext::from(4), Ext::ratio(4, 3), Ext::Inf];
        ExponentLattice { s, p, r: q.clone(), q, d: vec![1] }
    }

    fn sorted(mut self) -> Self {
        self.s.sort_by(|a, b| a.cmp_tol(b));
        self.p.sort_by(|a, b| a.cmp_tol(b));
        self.q.sort_by(|a, b| a.cmp_tol(b));
        self.r.sort_by(|a, b| a.cmp_tol(b));
        self
    }

    fn space(&self, rng: &mut impl Rng, scale: Scale) -> SmoothnessParams {
        SmoothnessParams {
            scale,
            s: *self.s.choose(rng).expect("nonempty"),
            p: *self.p.choose(rng).expect("nonempty"),
            q: *self.q.choose(rng).expect("nonempty"),
            r: *self.r.choose(rng).expect("nonempty"),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s.is_empty() || self.p.is_empty() || self.q.is_empty() || self.r.is_empty() || self.d.is_empty() {
            return Err(LabError::EmptyDomain);
        }
        if self.d.contains(&0) {
            return Err(LabError::InvalidParameter("dimension must be positive".into()));
        }
        if !self.p.iter().all(|p| p.is_positive()) || !self.q.iter().chain(&self.r).all(|e| e.is_positive()) {
            return Err(LabError::InvalidExponent("lattice exponents must be positive".into()));
        }
        Ok(())
    }
}

fn next_up<T: Copy + PartialOrd>(values: &[T], x: T) -> Option<T> {
    values.iter().copied().find(|v| *v > x)
}

fn next_down<T: Copy + PartialOrd>(values: &[T], x: T) -> Option<T> {
    values.iter().rev().copied().find(|v| *v < x)
}

/// Applies `relax` by one lattice step, if the lattice allows it.
fn relax(q: &EmbeddingQuery, relax: Relaxation, lattice: &ExponentLattice) -> Option<EmbeddingQuery> {
    let mut out = *q;
    match relax {
        Relaxation::LowerTargetSmoothness => out.target.s = next_down(&lattice.s, q.target.s)?,
        Relaxation::RaiseTargetR => out.target.r = next_up(&lattice.r, q.target.r)?,
        Relaxation::RaiseTargetQ => out.target.q = next_up(&lattice.q, q.target.q)?,
        Relaxation::LowerSourceR => out.source.r = next_down(&lattice.r, q.source.r)?,
        Relaxation::LowerSourceQ => out.source.q = next_down(&lattice.q, q.source.q)?,
        Relaxation::RaiseSourceSmoothness => out.source.s = next_up(&lattice.s, q.source.s)?,
    }
    Some(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub queries: usize,
    pub holding: usize,
    /// Holding queries paired with one relaxation.
    pub pairs_checked: usize,
    pub violations: Vec<(EmbeddingQuery, Relaxation)>,
}

/// Checks that relaxing a holding query never breaks it, over every query in the lattice.
pub fn self_test_monotonicity(lattice: &ExponentLattice) -> Result<MonotonicityReport> {
    lattice.validate()?;
    let lattice = lattice.clone().sorted();
    let mut sources = Vec::new();
    for &s in &lattice.s {
        for &p in &lattice.p {
            for &q in &lattice.q {
                for &r in &lattice.r {
                    sources.push((s, p, q, r));
                }
            }
        }
    }
    let per_source = |&(s0, p0, q0, r0): &(Num, Num, Ext, Ext)| {
        let mut report = MonotonicityReport { queries: 0, holding: 0, pairs_checked: 0, violations: Vec::new() };
        for theorem in Theorem::ALL {
            let (sa, sb) = theorem.scales();
            for &d in &lattice.d {
                for &(s1, p1, q1, r1) in &sources {
                    let query = EmbeddingQuery {
                        source: SmoothnessParams { scale: sa, s: s0, p: p0, q: q0, r: r0 },
                        target: SmoothnessParams { scale: sb, s: s1, p: p1, q: q1, r: r1 },
                        d,
                    };
                    report.queries += 1;
                    if !decide(&query).holds {
                        continue;
                    }
                    report.holding += 1;
                    for step in Relaxation::ALL {
                        if let Some(relaxed) = relax(&query, step, &lattice) {
                            report.pairs_checked += 1;
                            if !decide(&relaxed).holds {
                                report.violations.push((query, step));
                            }
                        }
                    }
                }
            }
        }
        report
    };
    Ok(sources.par_iter().map(per_source).reduce(
        || MonotonicityReport { queries: 0, holding: 0, pairs_checked: 0, violations: Vec::new() },
        |mut acc, r| {
            acc.queries += r.queries;
            acc.holding += r.holding;
            acc.pairs_checked += r.pairs_checked;
            acc.violations.extend(r.violations);
            acc
        },
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub triples: usize,
    /// Triples with both `X ↪ Y` and `Y ↪ Z`.
    pub premises_held: usize,
    pub violations: Vec<(SmoothnessParams, SmoothnessParams, SmoothnessParams, u32)>,
}

/// Moves a space one random lattice step towards a larger space, or leaves it.
fn drift(x: &SmoothnessParams, lattice: &ExponentLattice, rng: &mut impl Rng) -> SmoothnessParams {
    let mut y = *x;
    for _ in 0..rng.gen_range(0..3) {
        match rng.gen_range(0..4) {
            0 => y.s = next_down(&lattice.s, y.s).unwrap_or(y.s),
            1 => y.q = next_up(&lattice.q, y.q).unwrap_or(y.q),
            2 => y.r = next_up(&lattice.r, y.r).unwrap_or(y.r),
            _ => {
                if let Some(p) = next_up(&lattice.p, y.p) {
                    y.p = p;
                }
            }
        }
    }
    y
}

/// Checks `X ↪ Y ∧ Y ↪ Z ⇒ X ↪ Z` on `triples` random chains per scale combination.
///
/// Half the chains are drawn uniformly from the lattice; the other half drift
/// towards larger spaces so that the premise holds often enough to matter.
pub fn self_test_transitivity(lattice: &ExponentLattice, triples: usize, seed: u64) -> Result<TransitivityReport> {
    lattice.validate()?;
    let lattice = lattice.clone().sorted();
    let scales = [Scale::B, Scale::F];
    let combos: Vec<(Scale, Scale, Scale)> =
        (0..8).map(|bits| (scales[bits & 1], scales[(bits >> 1) & 1], scales[(bits >> 2) & 1])).collect();
    let results: Vec<TransitivityReport> = combos
        .par_iter()
        .enumerate()
        .map(|(index, &(sx, sy, sz))| {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::seq::trial_seed(seed, index as u64));
            let mut report = TransitivityReport { triples: 0, premises_held: 0, violations: Vec::new() };
            for t in 0..triples {
                let d = *lattice.d.choose(&mut rng).expect("nonempty");
                let x = lattice.space(&mut rng, sx);
                let (y, z) = if t % 2 == 0 {
                    (lattice.space(&mut rng, sy), lattice.space(&mut rng, sz))
                } else {
                    let mut y = drift(&x, &lattice, &mut rng);
                    y.scale = sy;
                    let mut z = drift(&y, &lattice, &mut rng);
                    z.scale = sz;
                    (y, z)
                };
                report.triples += 1;
                let xy = decide(&EmbeddingQuery { source: x, target: y, d }).holds;
                let yz = decide(&EmbeddingQuery { source: y, target: z, d }).holds;
                if xy && yz {
                    report.premises_held += 1;
                    if !decide(&EmbeddingQuery { source: x, target: z, d }).holds {
                        report.violations.push((x, y, z, d));
                    }
                }
            }
            report
        })
        .collect();
    Ok(results.into_iter().fold(TransitivityReport { triples: 0, premises_held: 0, violations: Vec::new() }, |mut acc, r| {
        acc.triples += r.triples;
        acc.premises_held += r.premises_held;
        acc.violations.extend(r.violations);
        acc
    }))
}

/// `B^{s3}_1[L^{d/s3}] ↪ F^{s2}_q[L^{d/s2,1}] ↪ B^{s1}_1[L^{d/s1}]` for `0 < s1 < s2 < s3 < d`.
pub fn check_appendix_a_chain(s1: Num, s2: Num, s3: Num, d: u32, q: Ext) -> Result<bool> {
    let zero = Num::int(0);
    let dn = Num::int(d.into());
    let ordered = zero < s1 && s1 < s2 && s2 < s3 && s3 < dn;
    if d == 0 || !ordered {
        return Err(LabError::Ordering(format!("need 0 < s1 < s2 < s3 < d, got {s1}, {s2}, {s3}, d = {d}")));
    }
    if !q.is_positive() {
        return Err(LabError::InvalidExponent(format!("q = {q} must be positive")));
    }
    let lebesgue = |s: Num| {
        let p = dn / s;
        SmoothnessParams { scale: Scale::B, s, p, q: Ext::from(1), r: Ext::Fin(p) }
    };
    let middle = SmoothnessParams { scale: Scale::F, s: s2, p: dn / s2, q, r: Ext::from(1) };
    let first = decide(&EmbeddingQuery { source: lebesgue(s3), target: middle, d }).holds;
    let second = decide(&EmbeddingQuery { source: middle, target: lebesgue(s1), d }).holds;
    Ok(first && second)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(scale: Scale, s: &str, p: &str, q: &str, r: &str) -> SmoothnessParams {
        SmoothnessParams { scale, s: s.parse().unwrap(), p: p.parse().unwrap(), q: q.parse().unwrap(), r: r.parse().unwrap() }
    }

    fn query(pair: Theorem, d: u32, src: [&str; 4], dst: [&str; 4]) -> EmbeddingQuery {
        let (a, b) = pair.scales();
        EmbeddingQuery::new(sp(a, src[0], src[1], src[2], src[3]), sp(b, dst[0], dst[1], dst[2], dst[3]), d).unwrap()
    }

    #[test]
    fn franke_type_critical_case() {
        let v = decide(&query(Theorem::BF, 1, ["1/2", "1", "1", "1"], ["0", "2", "2", "1"]));
        assert_eq!(v, Verdict { holds: true, clause: Some(Clause::Iii), theorem: Theorem::BF });
        let v = decide(&query(Theorem::BF, 1, ["1/2", "1", "2", "1"], ["0", "2", "2", "1"]));
        assert!(!v.holds && v.clause.is_none());
    }

    #[test]
    fn endpoint_clause_six() {
        let v = decide(&query(Theorem::BF, 1, ["0", "2", "1", "3"], ["0", "2", "2", "3"]));
        assert_eq!(v.clause, Some(Clause::Vi));
        // q0 = p1 is not enough when q1 = p1 < r0.
        assert!(!decide(&query(Theorem::BF, 1, ["0", "2", "2", "3"], ["0", "2", "2", "3"])).holds);
    }

    #[test]
    fn identity_embeddings_hold() {
        for pair in [Theorem::FF, Theorem::BB] {
            let v = decide(&query(pair, 2, ["1/3", "3/2", "inf", "2"], ["1/3", "3/2", "inf", "2"]));
            assert_eq!(v.clause, Some(Clause::Iv));
        }
    }

    #[test]
    fn jawerth_critical_case() {
        let holds = query(Theorem::FB, 1, ["1", "1", "7", "2"], ["1/2", "2", "2", "4"]);
        assert_eq!(decide(&holds).clause, Some(Clause::Iii));
        let fails = query(Theorem::FB, 1, ["1", "1", "7", "3"], ["1/2", "2", "2", "4"]);
        assert!(!decide(&fails).holds);
    }

    #[test]
    fn decreasing_integrability_or_secondary_index_fails() {
        for pair in Theorem::ALL {
            assert!(!decide(&query(pair, 1, ["5", "2", "1", "1"], ["0", "1", "inf", "inf"])).holds, "{pair}");
            assert!(!decide(&query(pair, 1, ["5", "2", "1", "3"], ["0", "2", "inf", "2"])).holds, "{pair}");
        }
    }

    #[test]
    fn float_inputs_recognise_critical_line() {
        let a = SmoothnessParams::new(Scale::B, 0.1 + 0.2, 1.0, 1.0, 1.0).unwrap();
        let b = SmoothnessParams::new(Scale::F, 0.0, 1.0 / 0.7, 2.0, 1.0).unwrap();
        let v = decide(&EmbeddingQuery::new(a, b, 1).unwrap());
        assert_eq!(v.clause, Some(Clause::Iii));
    }

    #[test]
    fn reported_clause_is_first_satisfied() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lattice = ExponentLattice::standard();
        for _ in 0..2000 {
            let theorem = *Theorem::ALL.choose(&mut rng).unwrap();
            let (a, b) = theorem.scales();
            let q = EmbeddingQuery { source: lattice.space(&mut rng, a), target: lattice.space(&mut rng, b), d: 1 };
            let all = satisfied_clauses(&q);
            let v = decide(&q);
            assert_eq!(v.holds, !all.is_empty());
            assert_eq!(v.clause, all.first().copied());
            let reversed = Clause::ALL.into_iter().rev().any(|c| clause_holds(q.theorem(), c, &q));
            assert_eq!(v.holds, reversed);
        }
    }

    #[test]
    fn relaxations_preserve_clause_five_and_three() {
        let lattice = ExponentLattice::standard().sorted();
        let bf_v = query(Theorem::BF, 1, ["0", "2", "1", "1"], ["0", "2", "2", "2"]);
        assert_eq!(decide(&bf_v).clause, Some(Clause::V));
        let raised = relax(&bf_v, Relaxation::RaiseTargetR, &lattice).unwrap();
        assert!(decide(&raised).holds);
        let bb_iii = query(Theorem::BB, 1, ["1", "1", "2", "1"], ["1/2", "2", "2", "1"]);
        assert_eq!(decide(&bb_iii).clause, Some(Clause::Iii));
        assert!(decide(&relax(&bb_iii, Relaxation::LowerSourceQ, &lattice).unwrap()).holds);
    }

    #[test]
    fn small_lattice_monotonicity() {
        let lattice = ExponentLattice {
            s: vec![Num::int(0), Num::ratio(1, 2), Num::int(1)],
            p: vec![Num::int(1), Num::int(2)],
            q: vec![Ext::from(1), Ext::from(2), Ext::Inf],
            r: vec![Ext::from(1), Ext::from(2), Ext::Inf],
            d: vec![1],
        };
        let report = self_test_monotonicity(&lattice).unwrap();
        assert!(report.pairs_checked > 100);
        assert!(report.violations.is_empty(), "{:?}", &report.violations[..report.violations.len().min(3)]);
    }

    #[test]
    fn transitivity_on_a_sample() {
        let report = self_test_transitivity(&ExponentLattice::standard(), 200, 11).unwrap();
        assert!(report.premises_held > 50);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn appendix_chain() {
        assert!(check_appendix_a_chain(Num::ratio(1, 2), Num::int(1), Num::ratio(3, 2), 2, Ext::from(2)).unwrap());
        assert!(check_appendix_a_chain(Num::int(1), Num::int(1), Num::ratio(3, 2), 2, Ext::from(2)).is_err());
        assert!(check_appendix_a_chain(Num::ratio(1, 2), Num::int(1), Num::int(2), 2, Ext::from(2)).is_err());
    }

    #[test]
    fn lebesgue_and_lorentz_endpoints_are_not_comparable() {
        for (s, d) in [(Num::ratio(1, 2), 1u32), (Num::int(1), 3)] {
            let p = Num::int(d.into()) / s;
            let besov = SmoothnessParams { scale: Scale::B, s, p, q: Ext::from(1), r: Ext::Fin(p) };
            let tl = SmoothnessParams { scale: Scale::F, s, p, q: Ext::from(2), r: Ext::from(1) };
            assert!(!decide(&EmbeddingQuery { source: tl, target: besov, d }).holds);
            assert!(!decide(&EmbeddingQuery { source: besov, target: tl, d }).holds);
        }
    }

    #[test]
    fn theorem_labels_parse() {
        assert_eq!("bf".parse::<Theorem>().unwrap(), Theorem::BF);
        assert!("BX".parse::<Theorem>().is_err());
        assert_eq!(serde_json::to_string(&Clause::Iv).unwrap(), "\"iv\"");
    }
}
