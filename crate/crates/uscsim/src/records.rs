//! Raw quadrature records on disk.
//!
//! `NAME.bin` holds five little-endian `f64` columns of equal length, one
//! after the other: `X_a`, `P_a`, `X_b`, `P_b`, then the pump flag (1 on,
//! 0 off). `NAME.json` describes the layout and the detection chain.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context};
use serde::{Deserialize, Serialize};
use uscsim_core::measurement::{DetectionChain, PumpState, QuadratureRecordSet};

use crate::output::OutputDir;

pub const FORMAT: &str = "f64-le-columnar";
pub const COLUMNS: [&str; 5] = ["X_a", "P_a", "X_b", "P_b", "pump_on"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordsHeader {
    pub format: String,
    pub count: usize,
    pub columns: Vec<String>,
    pub units: String,
    pub gain_a: f64,
    pub gain_b: f64,
    pub added_noise_a: f64,
    pub added_noise_b: f64,
    pub seed: u64,
}

pub fn header(records: &QuadratureRecordSet) -> RecordsHeader {
    let c = records.chain();
    RecordsHeader {
        format: FORMAT.into(),
        count: records.count(),
        columns: COLUMNS.iter().map(|s| s.to_string()).collect(),
        units: "V (gain in V^2 per vacuum unit, noise in vacuum units)".into(),
        gain_a: c.gain_a,
        gain_b: c.gain_b,
        added_noise_a: c.added_noise_a,
        added_noise_b: c.added_noise_b,
        seed: c.seed,
    }
}

pub fn encode(records: &QuadratureRecordSet) -> Vec<u8> {
    let n = records.count();
    let mut bytes = Vec::with_capacity(8 * COLUMNS.len() * n);
    for q in 0..4 {
        for s in records.samples() {
            bytes.extend_from_slice(&s[q].to_le_bytes());
        }
    }
    for p in records.pump_states() {
        let flag = if *p == PumpState::On { 1.0f64 } else { 0.0 };
        bytes.extend_from_slice(&flag.to_le_bytes());
    }
    bytes
}

pub fn decode(header: &RecordsHeader, bytes: &[u8]) -> anyhow::Result<QuadratureRecordSet> {
    ensure!(header.format == FORMAT, "unsupported record format `{}`", header.format);
    ensure!(header.columns.len() == COLUMNS.len() && header.columns.iter().zip(COLUMNS).all(|(a, b)| a == b), "unexpected columns");
    let n = header.count;
    ensure!(bytes.len() == 8 * COLUMNS.len() * n, "record file has {} bytes, expected {}", bytes.len(), 8 * COLUMNS.len() * n);
    let value = |col: usize, k: usize| {
        let at = 8 * (col * n + k);
        f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
    };
    let samples = (0..n).map(|k| std::array::from_fn(|q| value(q, k))).collect();
    let mut pump = Vec::with_capacity(n);
    for k in 0..n {
        let flag = value(4, k);
        pump.push(if flag == 1.0 {
            PumpState::On
        } else if flag == 0.0 {
            PumpState::Off
        } else {
            bail!("sample {k}: pump flag {flag} is neither 0 nor 1")
        });
    }
    let chain = DetectionChain::new(header.gain_a, header.gain_b, header.added_noise_a, header.added_noise_b, header.seed)?;
    Ok(QuadratureRecordSet::from_parts(samples, pump, chain)?)
}

/// Write `STEM.bin` and `STEM.json`.
pub fn write(out: &mut OutputDir, stem: &str, records: &QuadratureRecordSet) -> anyhow::Result<()> {
    out.write_bytes(&format!("{stem}.bin"), &encode(records))?;
    out.write_json(&format!("{stem}.json"), &header(records))
}

/// Read a record file written by [`write`], given the path of the `.bin` file.
pub fn read(bin: &Path) -> anyhow::Result<QuadratureRecordSet> {
    let side = bin.with_extension("json");
    let text = fs::read_to_string(&side).with_context(|| format!("cannot read {}", side.display()))?;
    let header: RecordsHeader = serde_json::from_str(&text).with_context(|| format!("bad sidecar {}", side.display()))?;
    let bytes = fs::read(bin).with_context(|| format!("cannot read {}", bin.display()))?;
    decode(&header, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use uscsim_core::gaussian::CovarianceMatrix;
    use uscsim_core::measurement::sample_records;

    #[test]
    fn round_trip() {
        let chain = DetectionChain::new(2e-8, 3e-8, 0.5, 0.1, 9).unwrap();
        let recs = sample_records(&CovarianceMatrix::vacuum(), &chain, 7).unwrap();
        let back = decode(&header(&recs), &encode(&recs)).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn rejects_truncated_files() {
        let recs = sample_records(&CovarianceMatrix::vacuum(), &DetectionChain::ideal(1), 4).unwrap();
        let bytes = encode(&recs);
        assert!(decode(&header(&recs), &bytes[..bytes.len() - 8]).is_err());
    }
}
