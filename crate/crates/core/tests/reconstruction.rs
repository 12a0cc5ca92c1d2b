use std::path::PathBuf;

use modespec::interferometer::{scan_analytic, scan_weights};
use modespec::modes::WeightSpectrum;
use modespec::reconstruction::{reconstruct_full, reconstruct_hg, sampling_bound};
use modespec::{CompensatorSetting, Engine, IntensityScan, ModeIndex, ModeSpectrum, PhysicalFrame, ScanConfig};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spectrum(seed: u64, max_order: u32) -> ModeSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ModeSpectrum::new(
        PhysicalFrame::unit(),
        ModeIndex::all_up_to(max_order).into_iter().map(|k| {
            (
                k,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        }),
    )
    .normalized()
    .unwrap()
}

fn window_cfg(k: usize) -> ScanConfig {
    ScanConfig {
        k_plus: k,
        k_minus: k,
        ..ScanConfig::default().with_engine(Engine::Analytic)
    }
}

fn window_pair(w: &WeightSpectrum, k: usize) -> (IntensityScan, IntensityScan) {
    let cfg = window_cfg(k);
    (
        scan_weights(w, &cfg).unwrap(),
        scan_weights(w, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap(),
    )
}

/// Reconstruction of each pure mode of order ≤ n at K samples; returns the
/// columns of the linear reconstruction map.
fn columns(k: usize, n: u32) -> Vec<(ModeIndex, WeightSpectrum)> {
    ModeIndex::all_up_to(n)
        .into_iter()
        .map(|m| {
            let w = WeightSpectrum::from_raw([(m, 1.0)]).unwrap();
            let (a, b) = window_pair(&w, k);
            let r = reconstruct_hg(&a, &b, n).unwrap();
            (m, r.weights)
        })
        .collect()
}

fn exact_at(k: usize, n: u32) -> bool {
    let cols = columns(k, n);
    let pure_ok = cols.iter().all(|(m, w)| {
        w.iter()
            .all(|(j, v)| (v - if j == *m { 1.0 } else { 0.0 }).abs() < 1e-10)
    });
    if !pure_ok {
        return false;
    }
    // equal-weight pairs: the map is linear, so combine the columns
    for (i, (mi, wi)) in cols.iter().enumerate() {
        for (mj, wj) in &cols[i + 1..] {
            for (j, _) in wi.iter() {
                let got = 0.5 * (wi.get(j) + wj.get(j));
                let want = if j == *mi || j == *mj { 0.5 } else { 0.0 };
                if (got - want).abs() >= 1e-10 {
                    return false;
                }
            }
        }
    }
    true
}

/// Largest N such that every spectrum of max order ≤ N is exact, searching
/// orders up to 2K.
fn brute_force_bound(k: usize) -> u32 {
    let mut best = 0;
    for n in 0..=(2 * k as u32) {
        if exact_at(k, n) {
            best = n;
        } else {
            break;
        }
    }
    best
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sampling_bound.csv")
}

#[test]
fn sampling_bound_matches_brute_force_and_golden_file() {
    let table: Vec<(usize, u32)> = (2..=16).map(|k| (k, brute_force_bound(k))).collect();
    let mut text = String::from("K,max_exact_order\n");
    for (k, n) in &table {
        text.push_str(&format!("{k},{n}\n"));
    }
    if std::env::var_os("MODESPEC_BLESS").is_some() {
        std::fs::write(golden_path(), &text).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file present");
    assert_eq!(golden, text);
    for (k, n) in table {
        assert_eq!(sampling_bound(k), n, "K = {k}");
    }
    assert_eq!(sampling_bound(1), 0);
}

#[test]
fn aliasing_beyond_the_bound_is_flagged() {
    let spec = random_spectrum(42, 12);
    let (a, b) = window_pair(&spec.weights(), 10);
    let r = reconstruct_hg(&a, &b, 9).unwrap();
    let truth = spec.weights().truncated(9);
    assert!(r.weights.max_abs_diff(&truth) > 1e-4);
    assert!(!r.sampling_ok);
}

#[test]
fn truncation_keeps_retained_weights() {
    let spec = random_spectrum(8, 6);
    let (a, b) = window_pair(&spec.weights(), 10);
    let r = reconstruct_hg(&a, &b, 3).unwrap();
    assert!(r.weights.max_abs_diff(&spec.weights().truncated(3)) < 1e-8);
    // the discarded orders show up in the residual
    assert!(r.residual > 1e-6 && !r.sampling_ok);
}

#[test]
fn full_range_random_spectrum() {
    let spec = random_spectrum(6, 3);
    let scan = scan_analytic(&spec, &ScanConfig::full_range(32)).unwrap();
    let r = reconstruct_full(&scan, 3).unwrap();
    assert!(r.weights.max_abs_diff(&spec.weights()) < 1e-10);
    assert!(r.sine_residual < 1e-10);
}

#[test]
fn full_range_accepts_shifted_compensator() {
    let spec = random_spectrum(16, 3);
    let cfg = ScanConfig::full_range(16).with_compensator(CompensatorSetting::Custom {
        phi_plus: 0.4,
        phi_minus: -1.2,
    });
    let r = reconstruct_full(&scan_analytic(&spec, &cfg).unwrap(), 3).unwrap();
    assert!(r.weights.max_abs_diff(&spec.weights()) < 1e-10);
}

#[test]
fn residual_regenerates_the_scan() {
    let spec = random_spectrum(3, 4);
    let (a, b) = window_pair(&spec.weights(), 10);
    let r = reconstruct_hg(&a, &b, 9).unwrap();
    assert!(r.residual < 1e-12);
    assert!(r.sampling_ok);
    assert!(r.clamped_mass < 1e-12);
    assert!(!r.mixed_engines);
}

#[test]
fn mixed_engines_are_flagged() {
    let spec = random_spectrum(3, 2);
    let (a, mut b) = window_pair(&spec.weights(), 6);
    b.engine = Engine::Kernel;
    assert!(reconstruct_hg(&a, &b, 4).unwrap().mixed_engines);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn band_limited_round_trip(seed in 0u64..10_000, order in 0u32..=9) {
        let spec = random_spectrum(seed, order);
        let (a, b) = window_pair(&spec.weights(), 10);
        let r = reconstruct_hg(&a, &b, sampling_bound(10)).unwrap();
        prop_assert!(r.weights.max_abs_diff(&spec.weights()) < 1e-10);
        prop_assert!((r.weights.total() - 1.0).abs() < 1e-6);
        prop_assert!(r.sine_residual < 1e-10);
    }

    #[test]
    fn the_two_inversions_agree(seed in 0u64..10_000) {
        let spec = random_spectrum(seed, 6);
        let full = reconstruct_full(&scan_analytic(&spec, &ScanConfig::full_range(32)).unwrap(), 6).unwrap();
        let (a, b) = window_pair(&spec.weights(), 10);
        let hg = reconstruct_hg(&a, &b, 6).unwrap();
        prop_assert!(full.weights.max_abs_diff(&hg.weights) < 1e-8);
    }
}
