//! Beamformer kernels against literal re-expansions written independently here.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonobeam::beamform::{
    das_pixel, dmas_pixel_fast, dmas_pixel_naive, dsdmas_pixel, stage_one_terms,
};
use sonobeam::{BeamformerKind, OpCount};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

fn coupled(a: f64, b: f64) -> f64 {
    let p = a * b;
    if p == 0.0 {
        0.0
    } else {
        p.signum() * p.abs().sqrt()
    }
}

/// Grouped terms written out one pair at a time:
/// `term_i = chi_{i,i+1} + chi_{i,i+2} + ... + chi_{i,M}`.
fn literal_terms(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mut terms = Vec::new();
    for i in 0..m - 1 {
        let mut t = 0.0;
        for j in i + 1..m {
            t += coupled(x[i], x[j]);
        }
        terms.push(t);
    }
    terms
}

/// Second coupling stage applied to the grouped terms with the same
/// sign-preserving root as the first stage.
fn literal_double_stage(x: &[f64]) -> f64 {
    let t = literal_terms(x);
    let mut y = 0.0;
    for i in 0..t.len() - 1 {
        for j in i + 1..t.len() {
            y += coupled(t[i], t[j]);
        }
    }
    y
}

fn random_vec(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    (0..m)
        .map(|_| scale * rng.random_range(-1.0..1.0))
        .collect()
}

#[test]
fn das_is_plain_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in 1..40 {
        let x = random_vec(&mut rng, m);
        let mut s = 0.0;
        for v in x.iter().rev() {
            s += v;
        }
        assert!(close(das_pixel(&x), s));
    }
}

#[test]
fn fast_dmas_matches_pairwise_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for m in 2..=32 {
        for _ in 0..100 {
            let x = random_vec(&mut rng, m);
            let mut naive = 0.0;
            for i in 0..m {
                for j in i + 1..m {
                    naive += coupled(x[i], x[j]);
                }
            }
            let fast = dmas_pixel_fast(&x).unwrap();
            assert!(close(fast, naive), "m={m}: {fast} vs {naive}");
            assert!(close(dmas_pixel_naive(&x).unwrap(), naive));
        }
    }
}

#[test]
fn double_stage_matches_literal_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 3..=16 {
        for _ in 0..100 {
            let x = random_vec(&mut rng, m);
            let expect = literal_double_stage(&x);
            let got = dsdmas_pixel(&x).unwrap();
            assert!(close(got, expect), "m={m}: {got} vs {expect}");
        }
    }
}

#[test]
fn stage_one_terms_sum_to_dmas() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let m = rng.random_range(3..64);
        let x = random_vec(&mut rng, m);
        let terms = stage_one_terms(&x).unwrap();
        assert_eq!(terms.as_slice().len(), m - 1);
        for (a, b) in terms.as_slice().iter().zip(literal_terms(&x)) {
            assert!(close(*a, b));
        }
        assert!(close(terms.sum(), dmas_pixel_fast(&x).unwrap()));
    }
}

#[test]
fn op_counts_follow_complexity_table() {
    for m in 2..=128u64 {
        let mu = m as usize;
        assert_eq!(BeamformerKind::Das.op_count(mu).total, m);
        assert_eq!(
            BeamformerKind::DmasFast.op_count(mu).total,
            m * (m - 1) / 2 + 2 * (m - 1)
        );
        if m >= 3 {
            assert_eq!(
                BeamformerKind::DsDmas.op_count(mu).total,
                m * (m - 1) + 3 * (m - 1)
            );
        }
    }
    assert_eq!(BeamformerKind::Das.op_count(128).total, 128);
    assert_eq!(BeamformerKind::DmasFast.op_count(128).total, 8382);
    assert_eq!(BeamformerKind::DsDmas.op_count(128).total, 16637);
    let c = BeamformerKind::DmasFast.op_count(10);
    assert_eq!(c.times(3).total, 3 * c.total);
    assert_eq!((c + OpCount::default()), c);
}

#[test]
fn too_few_elements_is_an_error() {
    assert!(dsdmas_pixel(&[1.0, 2.0]).is_err());
    assert!(dmas_pixel_fast(&[1.0]).is_err());
    assert!(BeamformerKind::DsDmas.pixel(&[1.0, 2.0, 3.0]).is_ok());
}

fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 3..48)
}

proptest! {
    #[test]
    fn kernels_are_positively_homogeneous(x in vec_strategy(), alpha in 1e-3f64..1e3) {
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        for kind in BeamformerKind::ALL {
            let a = kind.pixel(&scaled).unwrap();
            let b = alpha * kind.pixel(&x).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs())), "{kind}: {a} vs {b}");
        }
    }

    #[test]
    fn negation_flips_das_and_keeps_dmas(x in vec_strategy()) {
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(das_pixel(&neg), -das_pixel(&x));
        // products of two negated samples keep their sign
        prop_assert!(close(dmas_pixel_fast(&neg).unwrap(), dmas_pixel_fast(&x).unwrap()));
    }

    #[test]
    fn symmetric_forms_ignore_element_order(x in vec_strategy()) {
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        prop_assert!(close(das_pixel(&rev), das_pixel(&x)));
        prop_assert!(close(dmas_pixel_fast(&rev).unwrap(), dmas_pixel_fast(&x).unwrap()));
    }

    #[test]
    fn coherent_input_scales_with_pair_count(m in 2usize..64, a in 1e-3f64..1e3) {
        let x = vec![a; m];
        let pairs = (m * (m - 1) / 2) as f64;
        prop_assert!(close(dmas_pixel_fast(&x).unwrap(), pairs * a));
    }
}
