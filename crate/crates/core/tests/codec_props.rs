use std::collections::HashMap;

use gf_fountain::codec::{combine, encode_lt, encode_random_linear, EncodedSymbol, SourceBlock};
use gf_fountain::degree::{ideal_soliton, raptor_omega, DegreePmf};
use gf_fountain::gf::{FieldElement, FieldSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn encoded_degrees_follow_the_law() {
    let field = FieldSpec::new(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let block = SourceBlock::random(&field, 100, 1, &mut rng);
    let pmf = raptor_omega(100).unwrap();
    let draws = 200_000;
    let mut counts = vec![0u64; 101];
    for _ in 0..draws {
        counts[encode_lt(&block, &pmf, &field, &mut rng).degree()] += 1;
    }
    let mut stat = 0.0;
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    let mut bins = 0;
    for &(d, p) in pmf.entries() {
        let e = p * draws as f64;
        if e < 5.0 {
            pooled_o += counts[d] as f64;
            pooled_e += e;
        } else {
            stat += (counts[d] as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        bins += 1;
    }
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn index_subsets_are_uniform() {
    let field = FieldSpec::new(4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (k, d) in [(5, 2), (6, 3), (6, 4)] {
        let block = SourceBlock::random(&field, k, 1, &mut rng);
        let fixed = DegreePmf::from_weights(k, &[(d, 1.0)]).unwrap();
        let draws = 100_000;
        let mut seen: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut coefficient_counts = vec![0u64; 3];
        for _ in 0..draws {
            let s = encode_lt(&block, &fixed, &field, &mut rng);
            assert!(s.is_well_formed());
            for c in &s.coefficients {
                coefficient_counts[c.value() as usize - 1] += 1;
            }
            *seen.entry(s.indices).or_default() += 1;
        }
        assert_eq!(seen.len(), binomial(k, d), "K = {k}, d = {d}");
        let counts: Vec<u64> = seen.values().copied().collect();
        let p = chi_square_uniform(&counts);
        assert!(p > 0.001, "subsets K = {k}, d = {d}: p = {p}");
        let p = chi_square_uniform(&coefficient_counts);
        assert!(p > 0.001, "coefficients: p = {p}");
    }
}

#[test]
fn random_linear_coefficients_cover_zero() {
    let field = FieldSpec::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let block = SourceBlock::random(&field, 10, 1, &mut rng);
    let mut counts = vec![0u64; 8];
    for _ in 0..20_000 {
        let s = encode_random_linear(&block, &field, &mut rng);
        assert_eq!(s.indices, (0..10).collect::<Vec<_>>());
        for c in &s.coefficients {
            counts[c.value() as usize] += 1;
        }
    }
    let p = chi_square_uniform(&counts);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn encoding_is_deterministic_per_seed() {
    let field = FieldSpec::new(32).unwrap();
    let pmf = ideal_soliton(50).unwrap();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = SourceBlock::random(&field, 50, 4, &mut rng);
        (0..100).map(|_| encode_lt(&block, &pmf, &field, &mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(run(9), run(9));
    assert_ne!(run(9), run(10));
}

fn element_vec(q: u32, len: usize) -> impl Strategy<Value = Vec<FieldElement>> {
    prop::collection::vec((0..q).prop_map(|v| FieldElement(v as u16)), len)
}

proptest! {
    #[test]
    fn payload_is_the_stated_combination(
        q in prop::sample::select(vec![2u32, 3, 4, 7, 8, 16, 32, 256]),
        k in 1usize..30,
        len in 1usize..6,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = SourceBlock::random(&field, k, len, &mut rng);
        let pmf = ideal_soliton(k).unwrap();
        for s in [encode_lt(&block, &pmf, &field, &mut rng), encode_random_linear(&block, &field, &mut rng)] {
            // oracle: dense row times the source matrix, element by element
            let row = s.dense_row(k);
            for pos in 0..len {
                let mut acc = FieldElement::ZERO;
                for (i, &c) in row.iter().enumerate() {
                    acc = field.add(acc, field.mul(c, block.symbol(i)[pos]));
                }
                prop_assert_eq!(acc, s.payload[pos]);
            }
        }
    }

    #[test]
    fn combine_is_linear(
        q in prop::sample::select(vec![3u32, 4, 5, 8, 9, 16]),
        a in 0u32..16, b in 0u32..16,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = SourceBlock::random(&field, 3, 5, &mut rng);
        let y = SourceBlock::random(&field, 3, 5, &mut rng);
        let coeffs: Vec<FieldElement> = (0..3).map(|i| field.element((seed as u32 >> i) % q).unwrap()).collect();
        let (a, b) = (field.element(a % q).unwrap(), field.element(b % q).unwrap());
        let mix: Vec<Vec<FieldElement>> = (0..3)
            .map(|i| x.symbol(i).iter().zip(y.symbol(i)).map(|(&u, &v)| field.add(field.mul(a, u), field.mul(b, v))).collect())
            .collect();
        let refs = |blk: &SourceBlock| (0..3).map(|i| blk.symbol(i).to_vec()).collect::<Vec<_>>();
        let xs = refs(&x);
        let ys = refs(&y);
        let cx = combine(&field, &coeffs, &xs.iter().map(|v| v.as_slice()).collect::<Vec<_>>()).unwrap();
        let cy = combine(&field, &coeffs, &ys.iter().map(|v| v.as_slice()).collect::<Vec<_>>()).unwrap();
        let cm = combine(&field, &coeffs, &mix.iter().map(|v| v.as_slice()).collect::<Vec<_>>()).unwrap();
        let expected: Vec<FieldElement> = cx.iter().zip(&cy).map(|(&u, &v)| field.add(field.mul(a, u), field.mul(b, v))).collect();
        prop_assert_eq!(cm, expected);
    }

    #[test]
    fn text_form_round_trips(
        q in prop::sample::select(vec![2u32, 4, 16, 256, 65536]),
        k in 1usize..40,
        len in 0usize..5,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = SourceBlock::random(&field, k, len.max(1), &mut rng);
        let pmf = ideal_soliton(k).unwrap();
        let mut s = encode_lt(&block, &pmf, &field, &mut rng);
        s.payload.truncate(len.max(1));
        let line = s.to_line();
        prop_assert_eq!(EncodedSymbol::parse_line(&line).unwrap(), s);
    }

    #[test]
    fn random_blocks_stay_in_field(q in prop::sample::select(vec![2u32, 3, 5, 8, 27]), payload in element_vec(2, 4)) {
        let field = FieldSpec::new(q).unwrap();
        let block = SourceBlock::new(vec![payload.clone(), payload]).unwrap();
        prop_assert_eq!(block.k(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
        let random = SourceBlock::random(&field, 8, 8, &mut rng);
        prop_assert!(random.symbols().iter().flatten().all(|e| e.value() < q));
    }
}

#[test]
fn malformed_lines_are_rejected() {
    for bad in ["", "2 | 0 1 | 1 | 5", "1 | 0 | 0 1 | 3", "x | 0 | 1 | 2", "2 | 1 0 | 1 1 | 0"] {
        assert!(EncodedSymbol::parse_line(bad).is_err(), "{bad:?}");
    }
    assert!(SourceBlock::new(vec![]).is_err());
    assert!(SourceBlock::new(vec![vec![FieldElement::ONE], vec![]]).is_err());
}
