//! Decoders over GF(q): belief-propagation peeling, Gaussian elimination,
//! and the square-matrix row-replacement variant of GE.

use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::codec::EncodedSymbol;
use crate::gf::{FieldElement, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("symbol {symbol} references source index {index} but K = {k}")]
    IndexOutOfRange { symbol: usize, index: usize, k: usize },
    #[error("symbol {symbol} is malformed: {reason}")]
    Malformed { symbol: usize, reason: String },
    #[error("row {row} has {len} coefficients, expected {k}")]
    RowLength { row: usize, len: usize, k: usize },
    #[error("payload of row {row} has length {len}, expected {expected}")]
    PayloadLength { row: usize, len: usize, expected: usize },
    #[error("need at least K = {k} received symbols, got n = {n}")]
    TooFewSymbols { n: usize, k: usize },
    #[error("symbol stream ended after {got} of {wanted} symbols")]
    StreamExhausted { got: usize, wanted: usize },
    #[error("block size K must be at least 1")]
    EmptyBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    Success,
    BpStall,
    Singular,
}

impl fmt::Display for DecodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecodeStatus::Success => "success",
            DecodeStatus::BpStall => "bp-stall",
            DecodeStatus::Singular => "singular",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// Source symbols resolved by peeling.
    pub peel_steps: usize,
    /// Edge substitutions performed while peeling.
    pub substitutions: usize,
    /// Pivots found during elimination.
    pub pivots: usize,
    /// Rows handed to the decoder.
    pub rows: usize,
    /// Row indices overwritten by the square-replace protocol, in order.
    pub replaced_rows: Vec<usize>,
}

/// Outcome of one decode attempt. `status == Success` exactly when
/// `resolved_count == K`, and only then is `recovered` present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub status: DecodeStatus,
    pub recovered: Option<Vec<Vec<FieldElement>>>,
    /// Source symbols determined (BP) or rank reached (GE).
    pub resolved_count: usize,
    pub diagnostics: Diagnostics,
}

impl DecodeReport {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }
}

/// Dense linear system over GF(q): one coefficient row of length `K` and one
/// payload per received symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem {
    pub field: FieldSpec,
    pub k: usize,
    pub rows: Vec<Vec<FieldElement>>,
    pub payloads: Vec<Vec<FieldElement>>,
}

impl LinearSystem {
    pub fn new(field: FieldSpec, k: usize) -> LinearSystem {
        LinearSystem { field, k, rows: Vec::new(), payloads: Vec::new() }
    }

    pub fn push_row(&mut self, coefficients: Vec<FieldElement>, payload: Vec<FieldElement>) {
        self.rows.push(coefficients);
        self.payloads.push(payload);
    }

    pub fn from_symbols(symbols: &[EncodedSymbol], k: usize, field: &FieldSpec) -> Result<LinearSystem, DecodeError> {
        validate_symbols(symbols, k)?;
        let mut system = LinearSystem::new(field.clone(), k);
        for s in symbols {
            system.push_row(s.dense_row(k), s.payload.clone());
        }
        Ok(system)
    }

    fn validate(&self) -> Result<usize, DecodeError> {
        if self.k == 0 {
            return Err(DecodeError::EmptyBlock);
        }
        if self.rows.len() != self.payloads.len() {
            return Err(DecodeError::PayloadLength { row: self.rows.len().min(self.payloads.len()), len: 0, expected: 0 });
        }
        let symbol_len = self.payloads.first().map(|p| p.len()).unwrap_or(0);
        for (row, (coeffs, payload)) in self.rows.iter().zip(&self.payloads).enumerate() {
            if coeffs.len() != self.k {
                return Err(DecodeError::RowLength { row, len: coeffs.len(), k: self.k });
            }
            if payload.len() != symbol_len {
                return Err(DecodeError::PayloadLength { row, len: payload.len(), expected: symbol_len });
            }
        }
        Ok(symbol_len)
    }
}

fn validate_symbols(symbols: &[EncodedSymbol], k: usize) -> Result<(), DecodeError> {
    if k == 0 {
        return Err(DecodeError::EmptyBlock);
    }
    let symbol_len = symbols.first().map(|s| s.payload.len()).unwrap_or(0);
    for (i, s) in symbols.iter().enumerate() {
        if s.indices.len() != s.coefficients.len() {
            return Err(DecodeError::Malformed { symbol: i, reason: "indices and coefficients differ in length".into() });
        }
        if let Some(&index) = s.indices.iter().find(|&&index| index >= k) {
            return Err(DecodeError::IndexOutOfRange { symbol: i, index, k });
        }
        if !s.indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(DecodeError::Malformed { symbol: i, reason: "indices not strictly increasing".into() });
        }
        if s.payload.len() != symbol_len {
            return Err(DecodeError::PayloadLength { row: i, len: s.payload.len(), expected: symbol_len });
        }
    }
    Ok(())
}

/// Peeling decoder. Repeatedly takes a check node with one unresolved
/// neighbour, solves it as `payload / coefficient`, and substitutes the value
/// into every other check on that source symbol. Stops with `BpStall` when
/// no degree-one check remains.
pub fn bp_decode(symbols: &[EncodedSymbol], k: usize, field: &FieldSpec) -> Result<DecodeReport, DecodeError> {
    validate_symbols(symbols, k)?;
    let symbol_len = symbols.first().map(|s| s.payload.len()).unwrap_or(0);

    // residual edges per check, zero coefficients are not edges
    let mut edges: Vec<Vec<(usize, FieldElement)>> = symbols
        .iter()
        .map(|s| {
            s.indices
                .iter()
                .zip(&s.coefficients)
                .filter(|(_, c)| !c.is_zero())
                .map(|(&i, &c)| (i, c))
                .collect()
        })
        .collect();
    let mut payloads: Vec<Vec<FieldElement>> = symbols.iter().map(|s| s.payload.clone()).collect();
    let mut checks_of: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (check, e) in edges.iter().enumerate() {
        for &(i, _) in e {
            checks_of[i].push(check);
        }
    }

    let mut ripple: VecDeque<usize> = (0..edges.len()).filter(|&c| edges[c].len() == 1).collect();
    let mut recovered: Vec<Option<Vec<FieldElement>>> = vec![None; k];
    let mut diagnostics = Diagnostics { rows: symbols.len(), ..Diagnostics::default() };
    let mut resolved = 0;

    while let Some(check) = ripple.pop_front() {
        if edges[check].len() != 1 {
            continue;
        }
        let (index, coeff) = edges[check][0];
        edges[check].clear();
        if recovered[index].is_some() {
            continue;
        }
        let inv = field.inv(coeff).expect("edges carry nonzero coefficients");
        let mut value = payloads[check].clone();
        field.scale(&mut value, inv);
        resolved += 1;
        diagnostics.peel_steps += 1;

        for &other in &checks_of[index] {
            if let Some(pos) = edges[other].iter().position(|&(i, _)| i == index) {
                let (_, c) = edges[other].swap_remove(pos);
                field.sub_scaled(&mut payloads[other], c, &value);
                diagnostics.substitutions += 1;
                if edges[other].len() == 1 {
                    ripple.push_back(other);
                }
            }
        }
        recovered[index] = Some(value);
    }

    let status = if resolved == k { DecodeStatus::Success } else { DecodeStatus::BpStall };
    let recovered = (status == DecodeStatus::Success).then(|| {
        recovered
            .into_iter()
            .map(|v| v.unwrap_or_else(|| vec![FieldElement::ZERO; symbol_len]))
            .collect()
    });
    Ok(DecodeReport { status, recovered, resolved_count: resolved, diagnostics })
}

/// Which nonzero entry of a column becomes the pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Topmost candidate row.
    #[default]
    FirstNonzero,
    /// Bottommost candidate row.
    LastNonzero,
}

/// Gaussian elimination with first-nonzero pivoting.
pub fn ge_decode(system: &LinearSystem) -> Result<DecodeReport, DecodeError> {
    ge_decode_with(system, PivotRule::FirstNonzero)
}

/// Gauss-Jordan elimination of the augmented matrix `[rows | payloads]`.
/// Success iff the coefficient rank equals `K`; the recovered symbols are
/// then read off the reduced pivot rows.
pub fn ge_decode_with(system: &LinearSystem, rule: PivotRule) -> Result<DecodeReport, DecodeError> {
    let symbol_len = system.validate()?;
    let field = &system.field;
    let k = system.k;
    let n = system.rows.len();
    let width = k + symbol_len;

    let mut m: Vec<Vec<FieldElement>> = system
        .rows
        .iter()
        .zip(&system.payloads)
        .map(|(r, p)| {
            let mut row = Vec::with_capacity(width);
            row.extend_from_slice(r);
            row.extend_from_slice(p);
            row
        })
        .collect();

    let mut rank = 0;
    let mut pivot_col_of_row = Vec::with_capacity(k.min(n));
    for col in 0..k {
        if rank == n {
            break;
        }
        let candidates = rank..n;
        let pivot = match rule {
            PivotRule::FirstNonzero => candidates.into_iter().find(|&r| !m[r][col].is_zero()),
            PivotRule::LastNonzero => candidates.into_iter().rev().find(|&r| !m[r][col].is_zero()),
        };
        let Some(pivot) = pivot else { continue };
        m.swap(rank, pivot);

        let inv = field.inv(m[rank][col]).expect("pivot is nonzero");
        if inv != FieldElement::ONE {
            field.scale(&mut m[rank][col..], inv);
        }
        let (above, rest) = m.split_at_mut(rank);
        let (pivot_row, below) = rest.split_first_mut().expect("pivot row exists");
        let pivot_tail = &pivot_row[col..];
        for row in above.iter_mut().chain(below.iter_mut()) {
            let factor = row[col];
            if !factor.is_zero() {
                field.sub_scaled(&mut row[col..], factor, pivot_tail);
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
    }

    let diagnostics = Diagnostics { pivots: rank, rows: n, ..Diagnostics::default() };
    if rank < k {
        return Ok(DecodeReport { status: DecodeStatus::Singular, recovered: None, resolved_count: rank, diagnostics });
    }
    let mut recovered = vec![Vec::new(); k];
    for (row, &col) in pivot_col_of_row.iter().enumerate() {
        recovered[col] = m[row][k..].to_vec();
    }
    Ok(DecodeReport { status: DecodeStatus::Success, recovered: Some(recovered), resolved_count: k, diagnostics })
}

/// Square-replace selection: the first `k` symbols fill a `k x k` matrix;
/// each of the next `n - k` overwrites a row chosen uniformly from all `k`
/// (previously replaced rows included). Returns the final rows and the
/// replaced indices in arrival order.
pub fn square_replace_rows<I, R>(
    stream: I,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<EncodedSymbol>, Vec<usize>), DecodeError>
where
    I: IntoIterator<Item = EncodedSymbol>,
    R: Rng + ?Sized,
{
    if k == 0 {
        return Err(DecodeError::EmptyBlock);
    }
    if n < k {
        return Err(DecodeError::TooFewSymbols { n, k });
    }
    let mut stream = stream.into_iter();
    let mut rows: Vec<EncodedSymbol> = stream.by_ref().take(k).collect();
    if rows.len() < k {
        return Err(DecodeError::StreamExhausted { got: rows.len(), wanted: n });
    }
    let mut replaced = Vec::with_capacity(n - k);
    for got in k..n {
        let symbol = stream.next().ok_or(DecodeError::StreamExhausted { got, wanted: n })?;
        let slot = rng.gen_range(0..k);
        rows[slot] = symbol;
        replaced.push(slot);
    }
    Ok((rows, replaced))
}

/// Receive `n` symbols under the square-replace protocol, then run GE on the
/// resulting `k x k` system.
pub fn ge_square_replace<I, R>(
    stream: I,
    k: usize,
    field: &FieldSpec,
    n: usize,
    rng: &mut R,
) -> Result<DecodeReport, DecodeError>
where
    I: IntoIterator<Item = EncodedSymbol>,
    R: Rng + ?Sized,
{
    let (rows, replaced) = square_replace_rows(stream, k, n, rng)?;
    let system = LinearSystem::from_symbols(&rows, k, field)?;
    let mut report = ge_decode(&system)?;
    report.diagnostics.replaced_rows = replaced;
    Ok(report)
}

/// Both decoders' verdicts on the same input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consistency {
    pub bp: DecodeStatus,
    pub ge: DecodeStatus,
    /// BP success implies GE success with identical output.
    pub consistent: bool,
}

pub fn bp_implies_ge(symbols: &[EncodedSymbol], k: usize, field: &FieldSpec) -> Result<Consistency, DecodeError> {
    let bp = bp_decode(symbols, k, field)?;
    let ge = ge_decode(&LinearSystem::from_symbols(symbols, k, field)?)?;
    let consistent = !bp.is_success() || (ge.is_success() && bp.recovered == ge.recovered);
    Ok(Consistency { bp: bp.status, ge: ge.status, consistent })
}
