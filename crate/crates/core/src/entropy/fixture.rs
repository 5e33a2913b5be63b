//! Text fixtures: one outcome per line, coordinates then an integer weight.
//!
//! ```text
//! # the cross for n = 1, e = 0
//! 0 0 1
//! 0 1 1
//! 1 0 1
//! ```
//!
//! `#` starts a comment. Weights are normalized on load.

use std::fmt::Write as _;

use super::distribution::{JointDistribution, Weights, MAX_BLOCK_BITS};
use crate::error::{Error, Result};

/// Parses a fixture. When `block_bits` is `None` the smallest width that
/// holds every coordinate is used.
pub fn parse_fixture(text: &str, block_bits: Option<u8>) -> Result<JointDistribution> {
    let mut rows: Vec<(Vec<u8>, u64)> = Vec::new();
    let mut arity = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |detail: String| Error::malformed("fixture", format!("line {}: {detail}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(at("expected coordinates followed by a weight".into()));
        }
        let (coords, weight) = fields.split_at(fields.len() - 1);
        if *arity.get_or_insert(coords.len()) != coords.len() {
            return Err(at(format!(
                "{} coordinates, earlier lines have {}",
                coords.len(),
                arity.unwrap()
            )));
        }
        let outcome = coords
            .iter()
            .map(|c| c.parse::<u8>().map_err(|e| at(format!("coordinate {c:?}: {e}"))))
            .collect::<Result<Vec<u8>>>()?;
        let w = weight[0]
            .parse::<u64>()
            .map_err(|e| at(format!("weight {:?}: {e}", weight[0])))?;
        rows.push((outcome, w));
    }
    let arity = arity.ok_or_else(|| Error::malformed("fixture", "no outcomes"))?;
    let bits = match block_bits {
        Some(b) => b,
        None => {
            let max = rows.iter().flat_map(|(o, _)| o.iter().copied()).max().unwrap_or(0);
            (8 - max.leading_zeros() as u8).clamp(1, MAX_BLOCK_BITS)
        }
    };
    JointDistribution::from_weights(arity, bits, rows)
}

/// Renders an integer-weighted table in fixture form.
pub fn write_fixture(dist: &JointDistribution) -> Result<String> {
    let Weights::Exact(w) = dist.weights() else {
        return Err(Error::invalid("only integer-weighted tables can be written"));
    };
    let mut out = String::new();
    for (i, o) in dist.outcomes().enumerate() {
        for c in o {
            write!(out, "{c} ").unwrap();
        }
        writeln!(out, "{}", w[i]).unwrap();
    }
    Ok(out)
}
