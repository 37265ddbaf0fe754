//! Output documents and their CSV/JSON encodings.
//!
//! JSON carries every value at full precision. CSV carries the rows of the
//! document with floats rounded to 12 significant digits; reading a CSV
//! file back gives exactly those rounded rows.

use std::io::{Read, Write};

use aepp_core::analysis::{AsymptoticRow, Grid, HashingAdvantage};
use aepp_core::protocols::YieldResult;
use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Version of the JSON schema.
pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub protocols: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub protocol: String,
    #[serde(rename = "yield")]
    pub yield_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverRow {
    pub protocol: String,
    pub found: bool,
    pub f_cross: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub iterations: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub protocol: String,
    pub key: String,
    pub count: u64,
    pub trials: u64,
    pub frequency: f64,
    pub exact: f64,
    /// `None` when the exact probability is 0 or 1 and the count disagrees.
    pub z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub protocol: String,
    pub fidelity: f64,
    pub shots: u64,
    pub seed: u64,
    pub empirical_yield: f64,
    pub exact_yield: f64,
    pub max_abs_z: Option<f64>,
    pub within_4_sigma: bool,
}

/// Everything one command produces. Only the fields of that command are
/// present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub version: String,
    pub command: String,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointRow>>,
    /// Best protocol at each grid point (compare).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best: Option<Vec<PointRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yields: Option<Vec<YieldResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossovers: Option<Vec<CrossoverRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<McRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<Vec<McSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<Vec<AsymptoticRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advantage: Option<Vec<HashingAdvantage>>,
}

impl Document {
    pub fn new(command: &str, params: Params) -> Self {
        Document {
            version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            params,
            points: None,
            best: None,
            yields: None,
            crossovers: None,
            branches: None,
            mc: None,
            asymptote: None,
            advantage: None,
        }
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        serde_json::from_reader(r).context("malformed JSON document")
    }

    /// Writes the command's main table as CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        if let Some(rows) = &self.points {
            return write_rows(w, rows.iter().map(PointRow::rounded));
        }
        if let Some(rows) = &self.crossovers {
            return write_rows(w, rows.iter().map(CrossoverRow::rounded));
        }
        if let Some(rows) = &self.branches {
            return write_rows(w, rows.iter().map(McRow::rounded));
        }
        if let Some(rows) = &self.asymptote {
            return write_rows(
                w,
                rows.iter().map(|r| AsymptoticRow {
                    n: r.n,
                    fidelity: round12(r.fidelity),
                    p: round12(r.p),
                    deviation: round12(r.deviation),
                }),
            );
        }
        if let Some(rows) = &self.advantage {
            return write_rows(
                w,
                rows.iter().map(|r| HashingAdvantage {
                    fidelity: round12(r.fidelity),
                    theorem_yield: round12(r.theorem_yield),
                    hashing_yield: round12(r.hashing_yield),
                    bound: round12(r.bound),
                    margin_over_hashing: round12(r.margin_over_hashing),
                    margin_over_bound: round12(r.margin_over_bound),
                    ..*r
                }),
            );
        }
        anyhow::bail!("document for {} has no table", self.command)
    }
}

impl PointRow {
    pub fn rounded(&self) -> Self {
        PointRow {
            fidelity: round12(self.fidelity),
            protocol: self.protocol.clone(),
            yield_value: round12(self.yield_value),
        }
    }
}

impl CrossoverRow {
    pub fn rounded(&self) -> Self {
        CrossoverRow {
            f_cross: self.f_cross.map(round12),
            lo: self.lo.map(round12),
            hi: self.hi.map(round12),
            ..self.clone()
        }
    }
}

impl McRow {
    pub fn rounded(&self) -> Self {
        McRow {
            frequency: round12(self.frequency),
            exact: round12(self.exact),
            z: self.z.map(round12),
            ..self.clone()
        }
    }
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: impl Iterator<Item = T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads CSV rows written by [`Document::write_csv`].
pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .context("malformed CSV")
}
