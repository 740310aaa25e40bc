//! Serialized forms: design artifacts, signals and bandwidth schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::DesignResult;
use crate::scalar::Real;
use crate::spectrum::{BinSpec, TransitionProfile};

/// 17 significant digits, locale independent.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The stored design. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignArtifact {
    #[serde(rename = "N")]
    pub fft_len: usize,
    #[serde(rename = "L")]
    pub filter_len: usize,
    #[serde(rename = "M")]
    pub block_len: usize,
    #[serde(rename = "delta_N")]
    pub transition_bins: usize,
    #[serde(rename = "bN_low")]
    pub band_low: usize,
    #[serde(rename = "bN_high")]
    pub band_high: usize,
    #[serde(rename = "V")]
    pub profile: Vec<f64>,
    pub delta_achieved: f64,
    #[serde(rename = "grid_K")]
    pub grid_k: usize,
    #[serde(rename = "facets_P")]
    pub facets: usize,
}

impl DesignArtifact {
    pub fn from_result<T: Real>(r: &DesignResult<T>) -> Self {
        DesignArtifact::new(
            &r.bins,
            &r.profile.values().iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>(),
            r.delta_achieved.to_f64_lossy(),
            r.grid_k,
            r.facets,
        )
    }

    pub fn new(bins: &BinSpec, profile: &[f64], delta_achieved: f64, grid_k: usize, facets: usize) -> Self {
        DesignArtifact {
            fft_len: bins.fft_len,
            filter_len: bins.filter_len,
            block_len: bins.block_len,
            transition_bins: bins.transition_bins,
            band_low: bins.band_low,
            band_high: bins.band_high,
            profile: profile.to_vec(),
            delta_achieved,
            grid_k,
            facets,
        }
    }

    /// Validated bin layout.
    pub fn bins(&self) -> Result<BinSpec> {
        let bins = BinSpec::new(
            self.fft_len,
            self.filter_len,
            self.transition_bins,
            self.band_low,
            self.band_high,
        )?;
        if bins.block_len != self.block_len {
            return Err(Error::Format(format!(
                "M = {} but N - L + 1 = {}",
                self.block_len, bins.block_len
            )));
        }
        Ok(bins)
    }

    pub fn profile<T: Real>(&self) -> Result<TransitionProfile<T>> {
        let bins = self.bins()?;
        let p = TransitionProfile::new(self.profile.iter().map(|&v| T::lit(v)).collect())?;
        p.check_len(&bins)?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: DesignArtifact = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        a.profile::<f64>()?;
        Ok(a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    /// One value per line (commas also separate values).
    Csv,
    /// Raw little-endian IEEE-754 doubles.
    F64le,
}

impl std::str::FromStr for SignalFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SignalFormat::Csv),
            "f64le" => Ok(SignalFormat::F64le),
            _ => Err(Error::Format(format!("unknown signal format '{s}'"))),
        }
    }
}

pub fn read_signal(bytes: &[u8], format: SignalFormat) -> Result<Vec<f64>> {
    match format {
        SignalFormat::F64le => {
            if !bytes.len().is_multiple_of(8) {
                return Err(Error::Format(format!(
                    "f64le input has {} bytes, not a multiple of 8",
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect())
        }
        SignalFormat::Csv => {
            let text = std::str::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
            let mut out = Vec::new();
            for (i, line) in text.lines().enumerate() {
                for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                    let v = field
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("line {}: cannot parse '{field}'", i + 1)))?;
                    out.push(v);
                }
            }
            Ok(out)
        }
    }
}

pub fn write_signal(samples: &[f64], format: SignalFormat) -> Vec<u8> {
    match format {
        SignalFormat::F64le => samples.iter().flat_map(|v| v.to_le_bytes()).collect(),
        SignalFormat::Csv => {
            let mut s = String::with_capacity(samples.len() * 24);
            for &v in samples {
                s.push_str(&fmt_f64(v));
                s.push('\n');
            }
            s.into_bytes()
        }
    }
}

/// Bandwidth switch: from block `block` on, use band centre `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch {
    pub block: usize,
    pub b: usize,
}

/// Parses `block_index,b_N` lines (`#` comments and a header line are
/// skipped). Block indices must be strictly increasing and every `b_N`
/// inside the design range.
pub fn parse_schedule(text: &str, bins: &BinSpec) -> Result<Vec<Switch>> {
    let mut out: Vec<Switch> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |why: &str| Error::Format(format!("schedule line {}: '{}': {why}", i + 1, raw.trim()));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(bad("expected block_index,b_N"));
        }
        let (Ok(block), Ok(b)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) else {
            if out.is_empty() && fields[0].parse::<f64>().is_err() {
                continue; // header
            }
            return Err(bad("expected two non-negative integers"));
        };
        if !bins.contains(b) {
            return Err(bad(&format!(
                "b_N outside design range [{}, {}]",
                bins.band_low, bins.band_high
            )));
        }
        if out.last().is_some_and(|s| s.block >= block) {
            return Err(bad("block indices must increase"));
        }
        out.push(Switch { block, b });
    }
    Ok(out)
}

/// Band centre per block for `blocks` blocks, starting from `initial`.
pub fn expand_schedule(initial: usize, switches: &[Switch], blocks: usize) -> Vec<usize> {
    let mut cur = initial;
    let mut next = switches.iter().peekable();
    (0..blocks)
        .map(|m| {
            while let Some(s) = next.next_if(|s| s.block <= m) {
                cur = s.b;
            }
            cur
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bins() -> BinSpec {
        BinSpec::new(128, 33, 16, 48, 55).unwrap()
    }

    #[test]
    fn artifact_round_trip_and_names() {
        let a = DesignArtifact::new(&bins(), &[0.5; 15], 9.9e-4, 1000, 16);
        let json = a.to_json();
        for key in ["\"N\"", "\"L\"", "\"M\"", "\"delta_N\"", "\"bN_low\"", "\"bN_high\"", "\"V\"",
            "\"delta_achieved\"", "\"grid_K\"", "\"facets_P\""] {
            assert!(json.contains(key), "{key}");
        }
        assert_eq!(DesignArtifact::from_json(&json).unwrap(), a);
        let mut bad = a.clone();
        bad.profile.pop();
        assert!(DesignArtifact::from_json(&bad.to_json()).is_err());
        bad = a;
        bad.block_len = 95;
        assert!(DesignArtifact::from_json(&bad.to_json()).is_err());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn signal_round_trips() {
        let x = vec![0.1, -2.5, 1e-300, 3.0];
        for f in [SignalFormat::Csv, SignalFormat::F64le] {
            assert_eq!(read_signal(&write_signal(&x, f), f).unwrap(), x);
        }
        assert!(read_signal(&[0u8; 7], SignalFormat::F64le).is_err());
        assert!(read_signal(b"1.0\nabc\n", SignalFormat::Csv).is_err());
    }

    #[test]
    fn schedules() {
        let s = parse_schedule("block_index,b_N\n0,48\n10,55 # switch\n", &bins()).unwrap();
        assert_eq!(s, vec![Switch { block: 0, b: 48 }, Switch { block: 10, b: 55 }]);
        let e = parse_schedule("0,48\n10,56\n", &bins()).unwrap_err();
        assert!(e.to_string().contains("line 2"));
        assert!(parse_schedule("5,48\n5,50\n", &bins()).is_err());
        assert_eq!(expand_schedule(50, &s, 12)[..], [48, 48, 48, 48, 48, 48, 48, 48, 48, 48, 55, 55]);
        assert_eq!(expand_schedule(50, &[], 2), vec![50, 50]);
    }
}
