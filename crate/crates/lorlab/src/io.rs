//! File formats: grid functions, ratio tables, constant sweeps and campaign configs.
//!
//! A grid function is stored as a JSON header plus a data part.
//!
//! * Header: `{"length": <power of two>, "cell_mass": <positive real>}`.
//! * Binary data: `length` records of two little-endian IEEE-754 doubles `(re, im)`,
//!   16 bytes per sample and nothing else.
//! * CSV data: one `re,im` row per sample, optionally preceded by the literal
//!   header row `re,im`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::ext::{Ext, Num};
use crate::families::{FamilyKind, RatioRow, RatioTable};
use crate::lp::{Scale, SmoothnessParams};
use crate::measure::GridFunction;
use crate::oracle::{EmbeddingQuery, Theorem};
use crate::triangle::SweepCell;

const SAMPLE_BYTES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridHeader {
    pub length: usize,
    pub cell_mass: f64,
}

impl GridHeader {
    pub fn of(f: &GridFunction) -> Self {
        GridHeader { length: f.len(), cell_mass: f.cell_mass() }
    }
}

fn parse_err(e: impl std::fmt::Display) -> LabError {
    LabError::Parse(e.to_string())
}

pub fn encode_header(f: &GridFunction) -> String {
    serde_json::to_string(&GridHeader::of(f)).expect("header serializes")
}

/// Parses a header and checks that it could describe a valid grid.
pub fn decode_header(json: &str) -> Result<GridHeader> {
    let h: GridHeader = serde_json::from_str(json).map_err(parse_err)?;
    if h.length == 0 || !h.length.is_power_of_two() {
        return Err(LabError::InvalidGrid(format!("length {} is not a positive power of two", h.length)));
    }
    if !(h.cell_mass > 0.0 && h.cell_mass.is_finite()) {
        return Err(LabError::InvalidGrid(format!("cell mass {} must be positive and finite", h.cell_mass)));
    }
    Ok(h)
}

pub fn encode_binary(f: &GridFunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(f.len() * SAMPLE_BYTES);
    for z in f.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_binary(header: &GridHeader, bytes: &[u8]) -> Result<GridFunction> {
    let expected = header.length.checked_mul(SAMPLE_BYTES).ok_or_else(|| LabError::InvalidGrid("length overflows".into()))?;
    if bytes.len() != expected {
        return Err(LabError::InvalidGrid(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let word = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    let samples = bytes.chunks_exact(SAMPLE_BYTES).map(|c| Complex64::new(word(&c[..8]), word(&c[8..]))).collect();
    GridFunction::new(samples, header.cell_mass)
}

pub fn encode_csv(f: &GridFunction) -> String {
    let mut out = String::from("re,im\n");
    for z in f.samples() {
        let _ = writeln!(out, "{},{}", z.re, z.im);
    }
    out
}

pub fn decode_csv(header: &GridHeader, text: &str) -> Result<GridFunction> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(parse_err)?;
        if i == 0 && record.len() == 2 && &record[0] == "re" && &record[1] == "im" {
            continue;
        }
        if record.len() != 2 {
            return Err(LabError::Parse(format!("row {} has {} fields, expected 2", i + 1, record.len())));
        }
        let field = |k: usize| record[k].parse::<f64>().map_err(|e| LabError::Parse(format!("row {}: {e}", i + 1)));
        samples.push(Complex64::new(field(0)?, field(1)?));
        if samples.len() > header.length {
            break;
        }
    }
    if samples.len() != header.length {
        return Err(LabError::InvalidGrid(format!("header says {} samples, data has {}", header.length, samples.len())));
    }
    GridFunction::new(samples, header.cell_mass)
}

/// CSV with columns `N,source_norm,target_norm,ratio`.
pub fn ratio_table_csv(table: &RatioTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        w.serialize(row).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn parse_ratio_rows(text: &str) -> Result<Vec<RatioRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(parse_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["N", "source_norm", "target_norm", "ratio"] {
        return Err(LabError::Parse(format!("unexpected columns {headers:?}")));
    }
    reader.deserialize().map(|r| r.map_err(parse_err)).collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn ext_text(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        x.to_string()
    }
}

/// One CSV row per sweep cell; failed cells carry their message in `error`.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "r", "analytic_bound_mod_a", "stw_bound", "bks_constant", "empirical_lower", "evaluations", "error"])
        .expect("header writes");
    for c in cells {
        let row = match &c.outcome {
            Ok(rep) => [
                ext_text(c.p),
                ext_text(c.r),
                opt(rep.analytic_bound_mod_a),
                opt(rep.stw_bound),
                opt(rep.bks_constant),
                rep.empirical_lower.to_string(),
                rep.evaluations.to_string(),
                String::new(),
            ],
            Err(msg) => [ext_text(c.p), ext_text(c.r), String::new(), String::new(), String::new(), String::new(), String::new(), msg.clone()],
        };
        w.write_record(&row).expect("row writes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

/// Static SVG with one panel per `p`: empirical constant and the bound modulo `A`
/// against `r`, with `r` placed at `r/(1+r)` so that `∞` sits at the right edge.
pub fn sweep_svg(cells: &[SweepCell]) -> String {
    let mut ps: Vec<f64> = Vec::new();
    for c in cells {
        if !ps.contains(&c.p) {
            ps.push(c.p);
        }
    }
    let (w, h, pad) = (520.0, 260.0, 40.0);
    let total_h = h * ps.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{total_h}" font-family="sans-serif" font-size="11">"#);
    for (panel, &p) in ps.iter().enumerate() {
        let top = panel as f64 * h;
        let points: Vec<(f64, f64, Option<f64>)> = cells
            .iter()
            .filter(|c| c.p == p)
            .filter_map(|c| c.outcome.as_ref().ok().map(|rep| (c.r, rep.empirical_lower, rep.analytic_bound_mod_a)))
            .collect();
        let ymax = points.iter().flat_map(|&(_, e, b)| [Some(e), b]).flatten().fold(1.0f64, f64::max) * 1.1;
        let x = |r: f64| pad + (w - 2.0 * pad) * if r.is_infinite() { 1.0 } else { r / (1.0 + r) };
        let y = |v: f64| top + h - pad - (h - 2.0 * pad) * (v / ymax);
        let _ = writeln!(svg, r#"<text x="{pad}" y="{}">p = {}</text>"#, top + 20.0, ext_text(p));
        let _ = writeln!(
            svg,
            r#"<path d="M{pad} {y0} H{x1} M{pad} {y0} V{yt}" stroke="black" fill="none"/>"#,
            y0 = top + h - pad,
            x1 = w - pad,
            yt = top + pad
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">r</text>"#, w - pad + 6.0, top + h - pad + 4.0);
        let _ = writeln!(svg, r#"<text x="4" y="{}">{:.3}</text>"#, top + pad + 4.0, ymax);
        let mut line = |series: Vec<(f64, f64)>, colour: &str| {
            if series.is_empty() {
                return;
            }
            let d: Vec<String> = series.iter().map(|&(r, v)| format!("{:.2},{:.2}", x(r), y(v))).collect();
            let _ = writeln!(svg, r#"<polyline points="{}" stroke="{colour}" fill="none"/>"#, d.join(" "));
            for &(r, v) in &series {
                let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{colour}"/>"#, x(r), y(v));
            }
        };
        line(points.iter().map(|&(r, e, _)| (r, e)).collect(), "steelblue");
        line(points.iter().filter_map(|&(r, _, b)| b.map(|b| (r, b))).collect(), "firebrick");
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="steelblue">empirical</text><text x="{}" y="{}" fill="firebrick">bound mod A</text>"#,
            w - 190.0,
            top + 20.0,
            w - 110.0,
            top + 20.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The ten exponents of an embedding query, as they appear in configs and on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub pair: Theorem,
    #[serde(default = "one")]
    pub d: u32,
    pub s0: Num,
    pub p0: Num,
    pub q0: Ext,
    pub r0: Ext,
    pub s1: Num,
    pub p1: Num,
    pub q1: Ext,
    pub r1: Ext,
}

fn one() -> u32 {
    1
}

impl QueryConfig {
    pub fn to_query(&self) -> Result<EmbeddingQuery> {
        let (a, b) = self.pair.scales();
        let source = SmoothnessParams { scale: a, s: self.s0, p: self.p0, q: self.q0, r: self.r0 };
        let target = SmoothnessParams { scale: b, s: self.s1, p: self.p1, q: self.q1, r: self.r1 };
        EmbeddingQuery::new(source, target, self.d)
    }

    /// `true` when every exponent was given exactly (integers, fractions, decimals or ∞).
    pub fn is_exact(&self) -> bool {
        [self.s0, self.p0, self.s1, self.p1].iter().all(Num::is_exact)
            && [self.q0, self.r0, self.q1, self.r1].iter().all(Ext::is_exact)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub svg: Option<String>,
}

/// A batch job for the command-line front end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case", deny_unknown_fields)]
pub enum CampaignConfig {
    Decide {
        query: QueryConfig,
        #[serde(default)]
        output: OutputPaths,
    },
    Verify {
        query: QueryConfig,
        sizes: Option<Vec<usize>>,
        family: Option<FamilyKind>,
        #[serde(default)]
        output: OutputPaths,
    },
    Constants {
        p_grid: Vec<Ext>,
        r_grid: Vec<Ext>,
        budget: usize,
        seed: u64,
        #[serde(default)]
        output: OutputPaths,
    },
}

fn positive(e: &Ext, what: &str) -> Result<()> {
    if e.is_positive() {
        Ok(())
    } else {
        Err(LabError::InvalidExponent(format!("{what} = {e} must be positive")))
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text).map_err(parse_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CampaignConfig::Decide { query, .. } => query.to_query().map(|_| ()),
            CampaignConfig::Verify { query, sizes, .. } => {
                query.to_query()?;
                if let Some(sizes) = sizes {
                    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
                        return Err(LabError::InvalidParameter("sizes must be positive and strictly increasing".into()));
                    }
                }
                Ok(())
            }
            CampaignConfig::Constants { p_grid, r_grid, budget, .. } => {
                if p_grid.is_empty() || r_grid.is_empty() {
                    return Err(LabError::InvalidParameter("p_grid and r_grid must be nonempty".into()));
                }
                if *budget == 0 {
                    return Err(LabError::InvalidParameter("budget must be at least 1".into()));
                }
                p_grid.iter().try_for_each(|p| positive(p, "p"))?;
                if p_grid.iter().any(Ext::is_inf) {
                    return Err(LabError::InvalidExponent("p = inf is not allowed".into()));
                }
                r_grid.iter().try_for_each(|r| positive(r, "r"))
            }
        }
    }
}

/// Parses `"B"`/`"F"`.
pub fn parse_scale(raw: &str) -> Result<Scale> {
    match raw.trim() {
        "B" | "b" => Ok(Scale::B),
        "F" | "f" => Ok(Scale::F),
        other => Err(LabError::Parse(format!("unknown scale {other:?}"))),
    }
}
