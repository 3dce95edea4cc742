//! Degree distributions for LT encoding and an inverse-CDF sampler.
//!
//! Four constructors are provided: the ideal soliton, the robust soliton, the
//! fixed Raptor distribution, and a half-fixed/half-random variant of the
//! Raptor distribution whose eight high-degree terms are reassigned to
//! degrees drawn uniformly from `3..=q`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("block size must be at least {min}, got {k}")]
    BlockTooSmall { k: usize, min: usize },
    #[error("robust soliton spike position {spike} outside 2..={k}")]
    SpikeOutOfRange { spike: usize, k: usize },
    #[error("invalid robust soliton parameters: {0}")]
    BadParams(String),
    #[error("random tail needs q >= 4, got {0}")]
    FieldTooSmall(u32),
    #[error("invalid degree pmf: {0}")]
    InvalidPmf(String),
    #[error("unknown tail mode '{0}' (expected per-symbol or per-session)")]
    UnknownTailMode(String),
}

/// Tolerance on the total mass of a [`DegreePmf`].
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

/// Raptor output degree distribution: `(degree, coefficient)` as printed,
/// before renormalization.
pub const RAPTOR_COEFFICIENTS: [(usize, f64); 10] = [
    (1, 0.007969),
    (2, 0.493570),
    (3, 0.166220),
    (4, 0.072646),
    (5, 0.082558),
    (8, 0.056058),
    (9, 0.037229),
    (19, 0.055590),
    (65, 0.025023),
    (66, 0.003135),
];

/// Largest degree in the Raptor distribution.
pub const RAPTOR_MAX_DEGREE: usize = 66;

/// Number of leading Raptor terms that keep their fixed degree in the
/// random-tail distribution.
const FIXED_TERMS: usize = 2;

/// Sum of the printed Raptor coefficients.
pub fn raptor_raw_sum() -> f64 {
    RAPTOR_COEFFICIENTS.iter().map(|&(_, c)| c).sum()
}

/// Probability mass function over degrees `1..=k`.
///
/// Only degrees with nonzero mass are stored, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePmf {
    k: usize,
    entries: Vec<(usize, f64)>,
    cdf: Vec<f64>,
}

impl DegreePmf {
    /// Build from raw nonnegative weights, normalizing by their sum. Weights
    /// for the same degree are merged; zero weights are dropped.
    pub fn from_weights(k: usize, weights: &[(usize, f64)]) -> Result<DegreePmf, DegreeError> {
        if k < 1 {
            return Err(DegreeError::BlockTooSmall { k, min: 1 });
        }
        let mut merged = vec![0.0f64; k + 1];
        for &(d, w) in weights {
            if d < 1 || d > k {
                return Err(DegreeError::InvalidPmf(format!("degree {d} outside 1..={k}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(DegreeError::InvalidPmf(format!("weight {w} for degree {d}")));
            }
            merged[d] += w;
        }
        let total: f64 = merged.iter().sum();
        if !(total > 0.0) {
            return Err(DegreeError::InvalidPmf("total weight is zero".into()));
        }
        let entries: Vec<(usize, f64)> = merged
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(d, &w)| (d, w / total))
            .collect();
        Ok(Self::from_entries(k, entries))
    }

    fn from_entries(k: usize, entries: Vec<(usize, f64)>) -> DegreePmf {
        let mut cdf = Vec::with_capacity(entries.len());
        let mut acc = 0.0;
        for &(_, p) in &entries {
            acc += p;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        DegreePmf { k, entries, cdf }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(degree, probability)` pairs in increasing degree order.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn prob(&self, degree: usize) -> f64 {
        self.entries
            .binary_search_by_key(&degree, |&(d, _)| d)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.entries.last().map(|&(d, _)| d).unwrap_or(0)
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u);
        self.entries[idx.min(self.entries.len() - 1)].0
    }

    /// Check the structural invariants: degrees strictly increasing inside
    /// `1..=k`, positive probabilities, unit total mass.
    pub fn validate(&self) -> Result<(), DegreeError> {
        let mut prev = 0;
        for &(d, p) in &self.entries {
            if d <= prev || d > self.k {
                return Err(DegreeError::InvalidPmf(format!("degree {d} out of order")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(DegreeError::InvalidPmf(format!("probability {p} for degree {d}")));
            }
            prev = d;
        }
        let total: f64 = self.entries.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(DegreeError::InvalidPmf(format!("total mass {total}")));
        }
        Ok(())
    }
}

/// Anything that can produce an LT output degree.
pub trait DegreeSource {
    fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize;
}

impl DegreeSource for DegreePmf {
    fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample(rng)
    }
}

/// Draw a degree from `pmf`.
pub fn sample_degree<R: Rng + ?Sized>(pmf: &DegreePmf, rng: &mut R) -> usize {
    pmf.sample(rng)
}

/// Ideal soliton: `rho(1) = 1/k`, `rho(d) = 1/(d(d-1))` for `d = 2..=k`.
pub fn ideal_soliton(k: usize) -> Result<DegreePmf, DegreeError> {
    if k < 1 {
        return Err(DegreeError::BlockTooSmall { k, min: 1 });
    }
    let mut entries = Vec::with_capacity(k);
    entries.push((1, 1.0 / k as f64));
    for d in 2..=k {
        entries.push((d, 1.0 / (d as f64 * (d as f64 - 1.0))));
    }
    Ok(DegreePmf::from_entries(k, entries))
}

/// Parameters of the robust soliton, with the derived ripple size `s` and
/// spike position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustSolitonParams {
    pub k: usize,
    pub c: f64,
    pub delta: f64,
    /// Expected number of degree-one symbols, `c * ln(k/delta) * sqrt(k)`.
    pub s: f64,
    /// `round(k/s)` clamped to `[2, k]`.
    pub spike: usize,
}

impl RobustSolitonParams {
    pub fn new(k: usize, c: f64, delta: f64) -> Result<RobustSolitonParams, DegreeError> {
        if k < 2 {
            return Err(DegreeError::BlockTooSmall { k, min: 2 });
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(DegreeError::BadParams(format!("c = {c} must be positive")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DegreeError::BadParams(format!("delta = {delta} must lie in (0, 1)")));
        }
        let kf = k as f64;
        let s = c * (kf / delta).ln() * kf.sqrt();
        let spike = ((kf / s).round() as usize).clamp(2, k);
        Ok(RobustSolitonParams { k, c, delta, s, spike })
    }

    /// Same as [`RobustSolitonParams::new`] but with an explicit spike,
    /// bypassing the rounding rule. Rejects spikes outside `2..=k`.
    pub fn with_spike(mut self, spike: usize) -> Result<RobustSolitonParams, DegreeError> {
        if spike < 2 || spike > self.k {
            return Err(DegreeError::SpikeOutOfRange { spike, k: self.k });
        }
        self.spike = spike;
        Ok(self)
    }
}

/// Unnormalized spike term `tau(d)` for `d = 1..=k`, returned as
/// `(degree, weight)` for every degree with nonzero weight.
pub fn robust_soliton_tau(params: &RobustSolitonParams) -> Result<Vec<(usize, f64)>, DegreeError> {
    let RobustSolitonParams { k, s, delta, spike, .. } = *params;
    if spike < 2 || spike > k {
        return Err(DegreeError::SpikeOutOfRange { spike, k });
    }
    let base = s / k as f64;
    let mut out: Vec<(usize, f64)> = (1..spike).map(|d| (d, base / d as f64)).collect();
    let spike_weight = base * (s / delta).ln();
    if spike_weight > 0.0 {
        out.push((spike, spike_weight));
    }
    Ok(out)
}

/// Robust soliton `mu(d) = (rho(d) + tau(d)) / beta`. Returns the PMF
/// together with the normalizer `beta`.
pub fn robust_soliton_with_beta(params: &RobustSolitonParams) -> Result<(DegreePmf, f64), DegreeError> {
    let tau = robust_soliton_tau(params)?;
    let rho = ideal_soliton(params.k)?;
    let mut weights = vec![0.0f64; params.k + 1];
    for &(d, p) in rho.entries() {
        weights[d] += p;
    }
    for &(d, t) in &tau {
        weights[d] += t;
    }
    let beta: f64 = weights.iter().sum();
    let entries = weights
        .iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, &w)| w > 0.0)
        .map(|(d, &w)| (d, w / beta))
        .collect();
    Ok((DegreePmf::from_entries(params.k, entries), beta))
}

pub fn robust_soliton(params: &RobustSolitonParams) -> Result<DegreePmf, DegreeError> {
    robust_soliton_with_beta(params).map(|(pmf, _)| pmf)
}

/// Raptor fixed distribution over degrees up to 66, renormalized by the raw
/// coefficient sum.
pub fn raptor_omega(k: usize) -> Result<DegreePmf, DegreeError> {
    if k < RAPTOR_MAX_DEGREE {
        return Err(DegreeError::BlockTooSmall { k, min: RAPTOR_MAX_DEGREE });
    }
    DegreePmf::from_weights(k, &RAPTOR_COEFFICIENTS)
}

/// When the random tail degrees are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TailMode {
    /// Fresh draws for every encoded symbol.
    #[default]
    PerSymbol,
    /// One set of draws per code instance.
    PerSession,
}

impl TailMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TailMode::PerSymbol => "per-symbol",
            TailMode::PerSession => "per-session",
        }
    }
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TailMode {
    type Err = DegreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "per-symbol" => Ok(TailMode::PerSymbol),
            "per-session" => Ok(TailMode::PerSession),
            other => Err(DegreeError::UnknownTailMode(other.to_string())),
        }
    }
}

/// One realization of the random tail: each of the eight high-degree Raptor
/// coefficients paired with the degree it was moved to.
#[derive(Debug, Clone, PartialEq)]
pub struct NovelTailRealization {
    pub assignments: [(f64, usize); 8],
}

impl NovelTailRealization {
    /// Raw (pre-normalization) mass merged per tail degree, sorted by degree.
    pub fn merged_tail(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        let mut sorted = self.assignments;
        sorted.sort_by_key(|&(_, d)| d);
        for (c, d) in sorted {
            match out.last_mut() {
                Some((last, mass)) if *last == d => *mass += c,
                _ => out.push((d, c)),
            }
        }
        out
    }
}

/// Raptor distribution with degrees 1 and 2 fixed and the remaining eight
/// coefficients reassigned to degrees uniform on `3..=q`.
#[derive(Debug, Clone, PartialEq)]
pub struct NovelOmega {
    k: usize,
    q: u32,
    mode: TailMode,
}

impl NovelOmega {
    pub fn new(k: usize, q: u32, mode: TailMode) -> Result<NovelOmega, DegreeError> {
        if q < 4 {
            return Err(DegreeError::FieldTooSmall(q));
        }
        if k < q as usize {
            return Err(DegreeError::BlockTooSmall { k, min: q as usize });
        }
        Ok(NovelOmega { k, q, mode })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn mode(&self) -> TailMode {
        self.mode
    }

    /// Draw the eight tail degrees.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> NovelTailRealization {
        let mut assignments = [(0.0, 0); 8];
        for (slot, &(_, c)) in assignments.iter_mut().zip(&RAPTOR_COEFFICIENTS[FIXED_TERMS..]) {
            *slot = (c, rng.gen_range(3..=self.q as usize));
        }
        NovelTailRealization { assignments }
    }

    /// PMF for a given realization: fixed head plus merged tail, renormalized
    /// by the raw coefficient sum.
    pub fn pmf_for(&self, tail: &NovelTailRealization) -> DegreePmf {
        let mut weights: Vec<(usize, f64)> = RAPTOR_COEFFICIENTS[..FIXED_TERMS].to_vec();
        weights.extend(tail.merged_tail());
        DegreePmf::from_weights(self.k, &weights).expect("tail degrees lie in 3..=q <= k")
    }

    /// Fresh realization and its PMF.
    pub fn realize_pmf<R: Rng + ?Sized>(&self, rng: &mut R) -> DegreePmf {
        let tail = self.realize(rng);
        self.pmf_for(&tail)
    }

    /// Marginal PMF of the per-symbol mode: the tail mass spread uniformly
    /// over `3..=q`.
    pub fn marginal_pmf(&self) -> DegreePmf {
        let tail_mass: f64 = RAPTOR_COEFFICIENTS[FIXED_TERMS..].iter().map(|&(_, c)| c).sum();
        let span = self.q as usize - 2;
        let mut weights: Vec<(usize, f64)> = RAPTOR_COEFFICIENTS[..FIXED_TERMS].to_vec();
        weights.extend((3..=self.q as usize).map(|d| (d, tail_mass / span as f64)));
        DegreePmf::from_weights(self.k, &weights).expect("tail degrees lie in 3..=q <= k")
    }
}

/// Per-symbol sampling: every call redraws the tail and samples the merged
/// PMF of that realization.
impl DegreeSource for NovelOmega {
    fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let tail = self.realize(rng);
        let raw_total = raptor_raw_sum();
        let u: f64 = rng.gen::<f64>() * raw_total;
        let mut acc = 0.0;
        for &(d, c) in &RAPTOR_COEFFICIENTS[..FIXED_TERMS] {
            acc += c;
            if u < acc {
                return d;
            }
        }
        let merged = tail.merged_tail();
        for &(d, c) in &merged {
            acc += c;
            if u < acc {
                return d;
            }
        }
        merged.last().map(|&(d, _)| d).unwrap_or(2)
    }
}
