//! Canonical run-length text form of a binary mask.
//!
//! `"{h} {w}\n{c0} {c1} ..."` with row-major runs alternating zeros and ones,
//! starting with a (possibly empty) zero run. Only the first count may be 0.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::types::BinaryMask;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RleError {
    #[error("malformed RLE header: {0}")]
    Header(String),
    #[error("non-numeric RLE count '{0}'")]
    Count(String),
    #[error("RLE counts sum to {actual}, expected {expected}")]
    Sum { expected: u64, actual: u64 },
    #[error("zero-length run at position {0}; only the first run may be empty")]
    ZeroRun(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RleText {
    pub height: usize,
    pub width: usize,
    pub counts: Vec<u64>,
}

pub fn rle_encode(m: &BinaryMask) -> RleText {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u64;
    for &bit in m.bits() {
        if bit != current {
            counts.push(run);
            run = 0;
            current = bit;
        }
        run += 1;
    }
    counts.push(run);
    RleText {
        height: m.height(),
        width: m.width(),
        counts,
    }
}

/// Parses and decodes RLE text.
pub fn rle_decode(text: &str) -> Result<BinaryMask, RleError> {
    text.parse::<RleText>()?.to_mask()
}

impl RleText {
    pub fn to_mask(&self) -> Result<BinaryMask, RleError> {
        let expected = (self.height * self.width) as u64;
        let actual: u64 = self.counts.iter().sum();
        if actual != expected {
            return Err(RleError::Sum { expected, actual });
        }
        if let Some(pos) = self.counts.iter().skip(1).position(|&c| c == 0) {
            return Err(RleError::ZeroRun(pos + 1));
        }
        let mut bits = Vec::with_capacity(expected as usize);
        let mut value = false;
        for &c in &self.counts {
            bits.extend(std::iter::repeat_n(value, c as usize));
            value = !value;
        }
        BinaryMask::from_bits(self.height, self.width, bits).map_err(|e| RleError::Header(e.to_string()))
    }
}

impl fmt::Display for RleText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.height, self.width)?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for RleText {
    type Err = RleError;

    /// The first line holds `h w`; counts follow on the remaining lines,
    /// separated by any whitespace.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (header, body) = s
            .split_once('\n')
            .ok_or_else(|| RleError::Header("missing counts line".into()))?;
        let mut tokens = header.split_whitespace();
        let mut dim = |name: &str| -> Result<usize, RleError> {
            let tok = tokens
                .next()
                .ok_or_else(|| RleError::Header(format!("missing {name}")))?;
            let v: usize = tok
                .parse()
                .map_err(|_| RleError::Header(format!("bad {name} '{tok}'")))?;
            if v == 0 {
                return Err(RleError::Header(format!("{name} must be positive")));
            }
            Ok(v)
        };
        let height = dim("height")?;
        let width = dim("width")?;
        if let Some(extra) = tokens.next() {
            return Err(RleError::Header(format!("unexpected '{extra}' after width")));
        }
        let counts = body
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|_| RleError::Count(t.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RleText { height, width, counts })
    }
}
