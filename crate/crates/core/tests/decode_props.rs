mod common;

use common::{dot, full_column_rank_bruteforce};
use gf_fountain::analytic::failure_rate;
use gf_fountain::codec::{encode_lt, encode_random_linear, EncodedSymbol, SourceBlock};
use gf_fountain::decode::{
    bp_decode, bp_implies_ge, ge_decode, ge_decode_with, ge_square_replace, square_replace_rows, DecodeStatus,
    LinearSystem, PivotRule,
};
use gf_fountain::degree::{ideal_soliton, TailMode};
use gf_fountain::gf::{FieldElement, FieldSpec};
use gf_fountain::sim::{count_failures, DecodeMode, Distribution, TrialSlice};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(field: &FieldSpec, k: usize, n: usize, density: f64, rng: &mut ChaCha8Rng) -> LinearSystem {
    let q = field.order();
    let mut system = LinearSystem::new(field.clone(), k);
    for _ in 0..n {
        let row = (0..k)
            .map(|_| if rng.gen_bool(density) { FieldElement(rng.gen_range(1..q) as u16) } else { FieldElement::ZERO })
            .collect();
        let payload = (0..2).map(|_| FieldElement(rng.gen_range(0..q) as u16)).collect();
        system.push_row(row, payload);
    }
    system
}

fn lt_stream(block: &SourceBlock, field: &FieldSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<EncodedSymbol> {
    let pmf = ideal_soliton(block.k()).unwrap();
    (0..n).map(|_| encode_lt(block, &pmf, field, rng)).collect()
}

#[test]
fn ge_verdict_matches_rank_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agreements = [0usize; 2];
    for &q in &[2u32, 3, 4, 5] {
        let field = FieldSpec::new(q).unwrap();
        for k in 1..=4 {
            for n in k..k + 3 {
                for _ in 0..30 {
                    let system = random_system(&field, k, n, 0.5, &mut rng);
                    let oracle = full_column_rank_bruteforce(&field, &system.rows, k);
                    let report = ge_decode(&system).unwrap();
                    assert_eq!(report.is_success(), oracle, "q={q} K={k} n={n} rows={:?}", system.rows);
                    agreements[oracle as usize] += 1;
                }
            }
        }
    }
    // both verdicts actually exercised
    assert!(agreements[0] > 50 && agreements[1] > 50, "{agreements:?}");
}

#[test]
fn square_replace_small_field_matches_closed_form() {
    let slice = TrialSlice::new(Distribution::RandomLinear, 20, 4, 20, DecodeMode::SquareReplace, TailMode::PerSymbol)
        .unwrap();
    let trials = 20_000;
    let failures = count_failures(&slice, trials, 42).unwrap();
    let f = failure_rate(20, 20, 4).unwrap();
    let sigma = (f * (1.0 - f) / trials as f64).sqrt();
    let observed = failures as f64 / trials as f64;
    assert!((observed - f).abs() <= 3.0 * sigma, "{observed} vs {f} (sigma {sigma})");
}

#[test]
fn square_replace_bookkeeping() {
    let field = FieldSpec::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let block = SourceBlock::random(&field, 10, 1, &mut rng);
    let stream = lt_stream(&block, &field, 15, &mut rng);
    let mut protocol = ChaCha8Rng::seed_from_u64(4);
    let (rows, replaced) = square_replace_rows(stream.clone(), 10, 15, &mut protocol).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(replaced.len(), 5);
    // replay the slot choices by hand
    let mut expected: Vec<EncodedSymbol> = stream[..10].to_vec();
    for (j, &slot) in replaced.iter().enumerate() {
        assert!(slot < 10);
        expected[slot] = stream[10 + j].clone();
    }
    assert_eq!(rows, expected);
    assert!(square_replace_rows(stream.clone(), 10, 9, &mut protocol).is_err());
    assert!(square_replace_rows(stream[..12].to_vec(), 10, 15, &mut protocol).is_err());

    let report = ge_square_replace(stream, 10, &field, 15, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    assert_eq!(report.diagnostics.replaced_rows, replaced);
    assert_eq!(report.diagnostics.rows, 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ge_round_trips(
        q in prop::sample::select(vec![2u32, 3, 4, 8, 9, 16, 32, 256]),
        k in 1usize..25,
        extra in 0usize..10,
        len in 1usize..4,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = SourceBlock::random(&field, k, len, &mut rng);
        let symbols: Vec<EncodedSymbol> = (0..k + extra).map(|_| encode_random_linear(&block, &field, &mut rng)).collect();
        let report = ge_decode(&LinearSystem::from_symbols(&symbols, k, &field).unwrap()).unwrap();
        match report.status {
            DecodeStatus::Success => {
                prop_assert_eq!(report.resolved_count, k);
                prop_assert_eq!(report.recovered.unwrap(), block.symbols().to_vec());
            }
            _ => {
                prop_assert!(report.resolved_count < k);
                prop_assert!(report.recovered.is_none());
            }
        }
    }

    #[test]
    fn bp_success_implies_ge_success(
        q in prop::sample::select(vec![2u32, 4, 7, 16, 32]),
        k in 1usize..40,
        extra in 0usize..20,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = SourceBlock::random(&field, k, 2, &mut rng);
        let symbols = lt_stream(&block, &field, k + extra, &mut rng);
        let check = bp_implies_ge(&symbols, k, &field).unwrap();
        prop_assert!(check.consistent);
        let bp = bp_decode(&symbols, k, &field).unwrap();
        if bp.is_success() {
            prop_assert_eq!(check.ge, DecodeStatus::Success);
            prop_assert_eq!(bp.recovered.unwrap(), block.symbols().to_vec());
        } else {
            prop_assert_eq!(bp.status, DecodeStatus::BpStall);
        }
    }

    #[test]
    fn pivot_rule_does_not_change_the_verdict(
        q in prop::sample::select(vec![2u32, 3, 4, 8]),
        k in 1usize..12,
        extra in 0usize..4,
        density in 0.1f64..0.9,
        seed in any::<u64>(),
    ) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut system = random_system(&field, k, k + extra, density, &mut rng);
        // consistent payloads so every full-rank pivot order has one answer
        let source: Vec<FieldElement> = (0..k).map(|_| FieldElement(rng.gen_range(0..q) as u16)).collect();
        for (row, payload) in system.rows.iter().zip(system.payloads.iter_mut()) {
            *payload = vec![dot(&field, row, &source)];
        }
        let first = ge_decode_with(&system, PivotRule::FirstNonzero).unwrap();
        let last = ge_decode_with(&system, PivotRule::LastNonzero).unwrap();
        prop_assert_eq!(first.status, last.status);
        prop_assert_eq!(first.resolved_count, last.resolved_count);
        prop_assert_eq!(&first.recovered, &last.recovered);
        if let Some(rec) = first.recovered {
            prop_assert_eq!(rec, source.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        }
    }

    #[test]
    fn recovery_is_linear_in_payloads(
        q in prop::sample::select(vec![3u32, 4, 5, 8, 16]),
        k in 1usize..10,
        scale in 1u32..16,
        seed in any::<u64>(),
    ) {
        // same coefficient rows, payloads u, w and a*u + w: solutions combine the same way
        let field = FieldSpec::new(q).unwrap();
        let a = field.element(scale % (q - 1) + 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_system(&field, k, k + 2, 0.7, &mut rng);
        let mut w = u.clone();
        let mut mixed = u.clone();
        for i in 0..u.rows.len() {
            w.payloads[i] = (0..2).map(|_| FieldElement(rng.gen_range(0..q) as u16)).collect();
            mixed.payloads[i] = u.payloads[i].iter().zip(&w.payloads[i]).map(|(&x, &y)| field.add(field.mul(a, x), y)).collect();
        }
        let (ru, rw, rm) = (ge_decode(&u).unwrap(), ge_decode(&w).unwrap(), ge_decode(&mixed).unwrap());
        prop_assert_eq!(ru.status, rm.status);
        if let (Some(su), Some(sw), Some(sm)) = (ru.recovered, rw.recovered, rm.recovered) {
            for i in 0..k {
                let expected: Vec<FieldElement> = su[i].iter().zip(&sw[i]).map(|(&x, &y)| field.add(field.mul(a, x), y)).collect();
                prop_assert_eq!(&sm[i], &expected);
            }
        }
    }

    #[test]
    fn fewer_rows_than_k_never_decode(q in prop::sample::select(vec![2u32, 16]), k in 2usize..15, seed in any::<u64>()) {
        let field = FieldSpec::new(q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = random_system(&field, k, k - 1, 0.8, &mut rng);
        let report = ge_decode(&system).unwrap();
        prop_assert_eq!(report.status, DecodeStatus::Singular);
    }
}
