//! Fountain encoders over GF(q): LT with uniform nonzero coefficients and
//! dense random linear.

use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::degree::DegreeSource;
use crate::gf::{FieldElement, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("length mismatch: {coefficients} coefficients for {symbols} symbols")]
    LengthMismatch { coefficients: usize, symbols: usize },
    #[error("source block must contain at least one symbol")]
    EmptyBlock,
    #[error("symbol {index} has length {len}, expected {expected}")]
    RaggedBlock { index: usize, len: usize, expected: usize },
    #[error("malformed symbol line: {0}")]
    Parse(String),
}

/// `K` source symbols of equal length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceBlock {
    symbol_len: usize,
    symbols: Vec<Vec<FieldElement>>,
}

impl SourceBlock {
    pub fn new(symbols: Vec<Vec<FieldElement>>) -> Result<SourceBlock, CodecError> {
        let first = symbols.first().ok_or(CodecError::EmptyBlock)?;
        let symbol_len = first.len();
        if symbol_len == 0 {
            return Err(CodecError::EmptyBlock);
        }
        for (index, s) in symbols.iter().enumerate() {
            if s.len() != symbol_len {
                return Err(CodecError::RaggedBlock { index, len: s.len(), expected: symbol_len });
            }
        }
        Ok(SourceBlock { symbol_len, symbols })
    }

    /// Uniformly random block.
    pub fn random<R: Rng + ?Sized>(field: &FieldSpec, k: usize, symbol_len: usize, rng: &mut R) -> SourceBlock {
        assert!(k >= 1 && symbol_len >= 1);
        let q = field.order();
        let symbols = (0..k)
            .map(|_| (0..symbol_len).map(|_| FieldElement(rng.gen_range(0..q) as u16)).collect())
            .collect();
        SourceBlock { symbol_len, symbols }
    }

    pub fn k(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol_len(&self) -> usize {
        self.symbol_len
    }

    pub fn symbols(&self) -> &[Vec<FieldElement>] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &[FieldElement] {
        &self.symbols[index]
    }
}

/// One fountain packet, self-describing: it carries its source indices and
/// coefficients alongside the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSymbol {
    pub indices: Vec<usize>,
    pub coefficients: Vec<FieldElement>,
    pub payload: Vec<FieldElement>,
}

impl EncodedSymbol {
    pub fn degree(&self) -> usize {
        self.indices.len()
    }

    /// Indices strictly increasing and paired one-to-one with coefficients.
    pub fn is_well_formed(&self) -> bool {
        self.indices.len() == self.coefficients.len()
            && !self.indices.is_empty()
            && self.indices.windows(2).all(|w| w[0] < w[1])
    }

    /// Coefficients scattered into a length-`k` row.
    pub fn dense_row(&self, k: usize) -> Vec<FieldElement> {
        let mut row = vec![FieldElement::ZERO; k];
        for (&i, &c) in self.indices.iter().zip(&self.coefficients) {
            row[i] = c;
        }
        row
    }

    /// Text form `degree | indices… | coefficients… | payload…`.
    pub fn to_line(&self) -> String {
        let mut out = String::new();
        write!(out, "{} |", self.degree()).unwrap();
        for i in &self.indices {
            write!(out, " {i}").unwrap();
        }
        out.push_str(" |");
        for c in &self.coefficients {
            write!(out, " {c}").unwrap();
        }
        out.push_str(" |");
        for v in &self.payload {
            write!(out, " {v}").unwrap();
        }
        out
    }

    pub fn parse_line(line: &str) -> Result<EncodedSymbol, CodecError> {
        let parts: Vec<&str> = line.split('|').collect();
        if parts.len() != 4 {
            return Err(CodecError::Parse(format!("expected 4 fields, got {}", parts.len())));
        }
        let nums = |s: &str| -> Result<Vec<u32>, CodecError> {
            s.split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|e| CodecError::Parse(format!("'{t}': {e}"))))
                .collect()
        };
        let degree = nums(parts[0])?;
        if degree.len() != 1 {
            return Err(CodecError::Parse("degree field must hold one integer".into()));
        }
        let indices: Vec<usize> = nums(parts[1])?.into_iter().map(|v| v as usize).collect();
        let to_elems = |v: Vec<u32>| -> Result<Vec<FieldElement>, CodecError> {
            v.into_iter()
                .map(|x| {
                    u16::try_from(x)
                        .map(FieldElement)
                        .map_err(|_| CodecError::Parse(format!("element {x} too large")))
                })
                .collect()
        };
        let coefficients = to_elems(nums(parts[2])?)?;
        let payload = to_elems(nums(parts[3])?)?;
        let symbol = EncodedSymbol { indices, coefficients, payload };
        if symbol.degree() != degree[0] as usize || !symbol.is_well_formed() {
            return Err(CodecError::Parse("degree, indices and coefficients disagree".into()));
        }
        Ok(symbol)
    }
}

/// Elementwise `sum_i coefficients[i] * symbols[i]`.
pub fn combine(
    field: &FieldSpec,
    coefficients: &[FieldElement],
    symbols: &[&[FieldElement]],
) -> Result<Vec<FieldElement>, CodecError> {
    if coefficients.len() != symbols.len() {
        return Err(CodecError::LengthMismatch { coefficients: coefficients.len(), symbols: symbols.len() });
    }
    let len = symbols.first().map(|s| s.len()).unwrap_or(0);
    let mut out = vec![FieldElement::ZERO; len];
    for (&c, s) in coefficients.iter().zip(symbols) {
        if s.len() != len {
            return Err(CodecError::LengthMismatch { coefficients: len, symbols: s.len() });
        }
        field.add_scaled(&mut out, c, s);
    }
    Ok(out)
}

fn payload_for(field: &FieldSpec, block: &SourceBlock, indices: &[usize], coefficients: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::ZERO; block.symbol_len()];
    for (&i, &c) in indices.iter().zip(coefficients) {
        field.add_scaled(&mut out, c, block.symbol(i));
    }
    out
}

/// LT-encode one symbol: draw a degree, pick that many distinct source
/// indices, give each a coefficient uniform on `1..q`, and sum.
///
/// Degrees above `K` are clamped to `K`.
pub fn encode_lt<D, R>(block: &SourceBlock, degrees: &D, field: &FieldSpec, rng: &mut R) -> EncodedSymbol
where
    D: DegreeSource + ?Sized,
    R: Rng + ?Sized,
{
    let k = block.k();
    let d = degrees.sample_degree(rng).clamp(1, k);
    let mut indices = index::sample(rng, k, d).into_vec();
    indices.sort_unstable();
    let q = field.order();
    let coefficients: Vec<FieldElement> = (0..d).map(|_| FieldElement(rng.gen_range(1..q) as u16)).collect();
    let payload = payload_for(field, block, &indices, &coefficients);
    EncodedSymbol { indices, coefficients, payload }
}

/// Dense random-linear symbol: every source position gets a coefficient
/// uniform over all of GF(q), zero included.
pub fn encode_random_linear<R: Rng + ?Sized>(block: &SourceBlock, field: &FieldSpec, rng: &mut R) -> EncodedSymbol {
    let k = block.k();
    let q = field.order();
    let indices: Vec<usize> = (0..k).collect();
    let coefficients: Vec<FieldElement> = (0..k).map(|_| FieldElement(rng.gen_range(0..q) as u16)).collect();
    let payload = payload_for(field, block, &indices, &coefficients);
    EncodedSymbol { indices, coefficients, payload }
}
