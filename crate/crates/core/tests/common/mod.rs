//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use gf_fountain::degree::{DegreePmf, DegreeSource};
use gf_fountain::gf::{FieldElement, FieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value of observed degree counts against `pmf`.
/// Degrees with expected count below 5 are pooled into one bin.
pub fn chi_square_p(counts: &[u64], pmf: &DegreePmf, total: usize) -> f64 {
    let mut stat = 0.0;
    let mut bins = 0;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    let mut seen = 0u64;
    for &(d, p) in pmf.entries() {
        let expected = p * total as f64;
        let observed = counts[d] as f64;
        seen += counts[d];
        if expected < 5.0 {
            pooled_obs += observed;
            pooled_exp += expected;
        } else {
            stat += (observed - expected).powi(2) / expected;
            bins += 1;
        }
    }
    assert_eq!(seen as usize, total, "samples outside the pmf support");
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let dof = (bins - 1).max(1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

pub fn histogram<S: DegreeSource>(source: &S, k: usize, samples: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k + 1];
    for _ in 0..samples {
        counts[source.sample_degree(&mut rng)] += 1;
    }
    counts
}

pub fn dot(field: &FieldSpec, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
    a.iter().zip(b).fold(FieldElement::ZERO, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// Full column rank by exhaustion: no nonzero `x` in GF(q)^k with `M x = 0`.
pub fn full_column_rank_bruteforce(field: &FieldSpec, rows: &[Vec<FieldElement>], k: usize) -> bool {
    let q = field.order() as usize;
    let total = q.pow(k as u32);
    let mut x = vec![FieldElement::ZERO; k];
    (1..total).all(|mut code| {
        for slot in x.iter_mut() {
            *slot = FieldElement((code % q) as u16);
            code /= q;
        }
        rows.iter().any(|row| !dot(field, row, &x).is_zero())
    })
}
