//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Duration;

use modespec::algebra::{generator_matrix, Generator};
use modespec::beams::showcase;
use modespec::interferometer::{
    measurement_arm_length, scan_analytic, scan_kernel, scan_train, scan_weights, LensOffset,
};
use modespec::modes::{decompose, eval_hg, synthesize};
use modespec::optics::{
    compose, design_s_minus, design_s_plus, s_minus, s_plus, solve_compensator, sweep, CompensatorTarget,
};
use modespec::propagation::{apply_parity, apply_s_minus, apply_s_plus};
use modespec::reconstruction::{loglog_slope, reconstruct_full, reconstruct_hg, sampling_bound};
use modespec::{
    CompensatorSetting, ComplexField, Engine, GridSpec, IntensityScan, ModeIndex, PhysicalFrame, RayMatrix, ScanConfig,
    WeightSpectrum,
};
use modespec_validation::{random_spectrum, run_all, Criterion, Outcome};
use nalgebra::{DMatrix, SymmetricEigen};

const K: usize = 10;

fn physical() -> PhysicalFrame {
    PhysicalFrame::new(1.0e-4, 1.0e-7).unwrap()
}

fn window(k: usize, engine: Engine) -> ScanConfig {
    ScanConfig {
        k_plus: k,
        k_minus: k,
        ..ScanConfig::default().with_engine(engine)
    }
}

fn max_weight_error(a: &WeightSpectrum, b: &WeightSpectrum) -> f64 {
    a.iter()
        .chain(b.iter())
        .map(|(k, _)| (a.get(k) - b.get(k)).abs())
        .fold(0.0, f64::max)
}

fn lens_design() -> Outcome {
    let f = PhysicalFrame::unit();
    let mut plus = 0.0_f64;
    let mut minus = 0.0_f64;
    for phi in sweep(50) {
        plus = plus.max(compose(&design_s_plus(phi, &f).unwrap()).max_abs_diff(&s_plus(phi, &f)));
        minus = minus.max(compose(&design_s_minus(phi, &f).unwrap()).max_abs_diff(&s_minus(phi, &f)));
    }
    Outcome::new(
        plus < 1e-10 && minus < 1e-9,
        format!("S+ defect {plus:.1e} (< 1e-10), S- defect {minus:.1e} (< 1e-9) over 50 angles"),
    )
}

/// Sorted eigenvalues of a Hermitian matrix through its real symmetric
/// embedding; every value appears twice there, so every other one is kept.
fn hermitian_spectrum(m: &DMatrix<num_complex::Complex64>) -> Vec<f64> {
    let n = m.nrows();
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let v = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

fn algebra() -> Outcome {
    let order = 6;
    let [lx, ly, lz, n] =
        [Generator::Lx, Generator::Ly, Generator::Lz, Generator::N].map(|g| generator_matrix(g, order));
    let i = num_complex::Complex64::new(0.0, 1.0);
    let comm = |a: &DMatrix<_>, b: &DMatrix<_>| a * b - b * a;
    let max = |m: DMatrix<num_complex::Complex64>| m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let su2 = max(comm(&lx.matrix, &ly.matrix) - &lz.matrix * i)
        .max(max(comm(&ly.matrix, &lz.matrix) - &lx.matrix * i))
        .max(max(comm(&lz.matrix, &lx.matrix) - &ly.matrix * i));
    let central = [&lx, &ly, &lz]
        .iter()
        .map(|l| max(comm(&n.matrix, &l.matrix)))
        .fold(0.0, f64::max);

    let diag_exact = lx.basis.iter().enumerate().all(|(r, k)| {
        let (m, nn) = (k.nx as f64, k.ny as f64);
        n.matrix[(r, r)].re == (m + nn) / 2.0
            && lx.matrix[(r, r)].re == (m - nn) / 2.0
            && n.matrix[(r, r)].im == 0.0
            && lx.matrix[(r, r)].im == 0.0
    }) && max(lx.matrix.clone() - DMatrix::from_diagonal(&lx.matrix.diagonal())) == 0.0
        && max(n.matrix.clone() - DMatrix::from_diagonal(&n.matrix.diagonal())) == 0.0;

    // Ly and Lz share the Lx spectrum {(m − n)/2} within each order
    let mut rotated = 0.0_f64;
    for g in [&ly, &lz] {
        for o in 0..=order {
            let idx: Vec<usize> = (0..g.basis.len()).filter(|&r| g.basis[r].order() == o).collect();
            let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| g.matrix[(idx[r], idx[c])]);
            let expect: Vec<f64> = (0..=o).map(|j| j as f64 - o as f64 / 2.0).collect();
            for (a, b) in hermitian_spectrum(&block).iter().zip(&expect) {
                rotated = rotated.max((a - b).abs());
            }
        }
    }
    Outcome::new(
        su2 < 1e-12 && central < 1e-12 && diag_exact && rotated < 1e-12,
        format!(
            "commutators {su2:.1e}, [N,L] {central:.1e}, N/Lx spectra exact: {diag_exact}, Ly/Lz spectra {rotated:.1e}"
        ),
    )
}

/// 1 − |⟨u, out⟩|² / (‖u‖²‖out‖²).
fn leakage(u: &ComplexField, out: &ComplexField) -> f64 {
    1.0 - u.inner(out).unwrap().norm_sqr() / (u.norm_sqr() * out.norm_sqr())
}

fn kernel() -> Outcome {
    let f = PhysicalFrame::unit();
    let g = GridSpec::default();
    let angles: Vec<f64> = (0..8).map(|j| (j as f64 + 0.5) * PI / 2.0).collect();
    let mut leak = 0.0_f64;
    for k in ModeIndex::all_up_to(6) {
        let u = eval_hg(k, &f, &g).unwrap();
        for &phi in &angles {
            leak = leak.max(leakage(&u, &apply_s_plus(&u, phi).unwrap()));
            leak = leak.max(leakage(&u, &apply_s_minus(&u, phi).unwrap()));
        }
    }

    let psi = synthesize(&random_spectrum(17, 6, f), &g).unwrap();
    let mut semigroup = 0.0_f64;
    let mut unitarity = 0.0_f64;
    for (a, b) in [(0.7, 1.9), (2.2, 3.1), (4.0, 5.3)] {
        let one = apply_s_plus(&psi, a + b).unwrap();
        let two = apply_s_plus(&apply_s_plus(&psi, a).unwrap(), b).unwrap();
        semigroup = semigroup.max(two.max_abs_diff(&one).unwrap());
        let one = apply_s_minus(&psi, a + b).unwrap();
        let two = apply_s_minus(&apply_s_minus(&psi, a).unwrap(), b).unwrap();
        semigroup = semigroup.max(two.max_abs_diff(&one).unwrap());
        for out in [apply_s_plus(&psi, a).unwrap(), apply_s_minus(&psi, b).unwrap()] {
            unitarity = unitarity.max((out.norm_sqr() - psi.norm_sqr()).abs());
        }
    }
    let parity = apply_s_minus(&psi, 2.0 * PI)
        .unwrap()
        .max_abs_diff(&apply_parity(&psi))
        .unwrap();
    Outcome::new(
        leak < 1e-8 && semigroup < 1e-5 && unitarity < 1e-6 && parity < 1e-8,
        format!(
            "leakage {leak:.1e} (< 1e-8), semigroup {semigroup:.1e} (< 1e-5), unitarity {unitarity:.1e} (< 1e-6), parity {parity:.1e} (< 1e-8)"
        ),
    )
}

fn kernel_pair(psi: &ComplexField, cfg: &ScanConfig) -> (IntensityScan, IntensityScan) {
    (
        scan_kernel(psi, &cfg.with_compensator(CompensatorSetting::Identity)).unwrap(),
        scan_kernel(psi, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap(),
    )
}

fn showcase_reproduction() -> Outcome {
    let f = physical();
    let g = GridSpec::default();
    let order = sampling_bound(K);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, recipe) in showcase() {
        let psi = recipe.realize(&f, &g).unwrap();
        let oracle = decompose(&psi, order).unwrap().spectrum.weights();
        let (a, b) = kernel_pair(&psi, &window(K, Engine::Kernel));
        let r = reconstruct_hg(&a, &b, order).unwrap();
        let err = max_weight_error(&r.weights, &oracle);
        let tv = r.weights.total_variation(&oracle);
        pass &= err < 1e-3 && tv < 5e-3;
        parts.push(format!("{name} {err:.1e}/{tv:.1e}"));
    }
    Outcome::new(pass, format!("max error/TV: {} (< 1e-3 / 5e-3)", parts.join(", ")))
}

/// True if every pure mode of order ≤ n reconstructs exactly at K samples.
fn pure_modes_exact(k: usize, n: u32) -> bool {
    ModeIndex::all_up_to(n).into_iter().all(|m| {
        let w = WeightSpectrum::from_raw([(m, 1.0)]).unwrap();
        let cfg = window(k, Engine::Analytic);
        let a = scan_weights(&w, &cfg).unwrap();
        let b = scan_weights(&w, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap();
        let r = reconstruct_hg(&a, &b, n).unwrap();
        max_weight_error(&r.weights, &w) < 1e-10
    })
}

fn exact_reconstruction() -> Outcome {
    let f = PhysicalFrame::unit();
    let order = sampling_bound(K);
    let mut worst = 0.0_f64;
    for seed in 0..20u64 {
        let spec = random_spectrum(1000 + seed, seed as u32 % (order + 1), f);
        let cfg = window(K, Engine::Analytic);
        let a = scan_analytic(&spec, &cfg).unwrap();
        let b = scan_analytic(&spec, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap();
        let r = reconstruct_hg(&a, &b, order).unwrap();
        worst = worst.max(max_weight_error(&r.weights, &spec.weights()));
    }

    let golden_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/sampling_bound.csv");
    let golden = std::fs::read_to_string(golden_path).unwrap();
    let mut table_ok = true;
    for line in golden.lines().skip(1) {
        let (k, n) = line.split_once(',').unwrap();
        let (k, n): (usize, u32) = (k.parse().unwrap(), n.parse().unwrap());
        table_ok &= sampling_bound(k) == n && pure_modes_exact(k, n) && !pure_modes_exact(k, n + 1);
    }
    Outcome::new(
        worst < 1e-10 && table_ok,
        format!(
            "20 spectra, order ≤ {order}: max error {worst:.1e} (< 1e-10); golden bound table confirmed: {table_ok}"
        ),
    )
}

fn inversion_consistency() -> Outcome {
    let f = PhysicalFrame::unit();
    let order = sampling_bound(K);
    let mut worst = 0.0_f64;
    for seed in 0..10u64 {
        let spec = random_spectrum(2000 + seed, order, f);
        let full = reconstruct_full(&scan_analytic(&spec, &ScanConfig::full_range(32)).unwrap(), order).unwrap();
        let cfg = window(K, Engine::Analytic);
        let a = scan_analytic(&spec, &cfg).unwrap();
        let b = scan_analytic(&spec, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap();
        let two = reconstruct_hg(&a, &b, order).unwrap();
        worst = worst.max(max_weight_error(&full.weights, &two.weights));
    }
    Outcome::new(
        worst < 1e-8,
        format!("full-range K=32 vs two-compensator K=10: max difference {worst:.1e} (< 1e-8)"),
    )
}

fn misalignment() -> Outcome {
    let f = physical();
    let g = GridSpec::default();
    let psi = eval_hg(ModeIndex::new(0, 0), &f, &g).unwrap().normalized().unwrap();
    let order = sampling_bound(K);
    let oracle = decompose(&psi, order).unwrap().spectrum.weights();
    let cfg = window(K, Engine::LensTrain);
    let error_at = |delta: f64| {
        let offsets = [LensOffset::s_plus_middle(delta * f.w0())];
        let a = scan_train(&psi, &cfg.with_compensator(CompensatorSetting::Identity), &offsets).unwrap();
        let b = scan_train(&psi, &cfg.with_compensator(CompensatorSetting::MinusIdentity), &offsets).unwrap();
        max_weight_error(&reconstruct_hg(&a, &b, order).unwrap().weights, &oracle)
    };
    let floor = error_at(0.0);
    let pts: Vec<(f64, f64)> = [1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1]
        .iter()
        .map(|&d| (d, error_at(d)))
        .collect();
    let slope = loglog_slope(&pts).unwrap_or(f64::NAN);
    let at_tenth = pts.last().unwrap().1;
    let table: Vec<String> = pts.iter().map(|(d, e)| format!("{d:.0e}:{e:.1e}")).collect();
    Outcome::new(
        (slope - 2.0).abs() <= 0.1 && at_tenth < 1e-2,
        format!(
            "slope {slope:.3} (2 ± 0.1), error at δ/w0=0.1 {at_tenth:.2e} (< 1e-2); floor {floor:.1e}; {}",
            table.join(" ")
        ),
    )
}

fn shifted(cfg: &ScanConfig, dp: f64, dm: f64) -> ScanConfig {
    ScanConfig {
        range_plus: (cfg.range_plus.0 + dp, cfg.range_plus.1 + dp),
        range_minus: (cfg.range_minus.0 + dm, cfg.range_minus.1 + dm),
        ..*cfg
    }
}

/// Largest deviation of the four (±2π, ±2π)-shifted scans from the base scan.
fn shift_defect(scan: impl Fn(&ScanConfig) -> IntensityScan, cfg: &ScanConfig) -> f64 {
    let base = scan(cfg);
    let tp = 2.0 * PI;
    [(tp, tp), (-tp, -tp), (tp, -tp), (-tp, tp)]
        .iter()
        .map(|&(a, b)| {
            let s = scan(&shifted(cfg, a, b));
            base.values
                .iter()
                .zip(&s.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn symmetries() -> Outcome {
    let f = physical();
    let spec = random_spectrum(31, 8, f);
    let analytic = shift_defect(|c| scan_analytic(&spec, c).unwrap(), &window(K, Engine::Analytic));
    let psi = showcase()[2].1.realize(&f, &GridSpec::default()).unwrap();
    let kernel = shift_defect(|c| scan_kernel(&psi, c).unwrap(), &window(6, Engine::Kernel));
    Outcome::new(
        analytic < 1e-12 && kernel < 1e-4,
        format!("analytic {analytic:.1e} (rounding, < 1e-12), kernel {kernel:.1e} (< 1e-4)"),
    )
}

fn compensators() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for f in [PhysicalFrame::unit(), physical()] {
        let arm = measurement_arm_length(&f);
        for (target, n, m) in [
            (CompensatorTarget::Identity, 4, RayMatrix::identity()),
            (CompensatorTarget::MinusIdentity, 2, RayMatrix::minus_identity()),
        ] {
            match solve_compensator(target, n, arm, &f) {
                Ok(d) => {
                    let defect = compose(&d.train).scaled_diff(&m, f.z0());
                    let length = d.train.total_length();
                    pass &= defect < 1e-9 && (length - arm).abs() < 1e-12 * arm;
                    parts.push(format!("{target:?}/{n} {defect:.1e}"));
                }
                Err(e) => {
                    pass = false;
                    parts.push(format!("{target:?}/{n}: {e}"));
                }
            }
        }
    }
    Outcome::new(pass, format!("defects at arm 3 z0: {} (< 1e-9)", parts.join(", ")))
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion {
            id: 1,
            name: "lens design",
            budget: s(1),
            check: lens_design,
        },
        Criterion {
            id: 2,
            name: "generator algebra",
            budget: s(1),
            check: algebra,
        },
        Criterion {
            id: 3,
            name: "kernel correctness",
            budget: s(120),
            check: kernel,
        },
        Criterion {
            id: 4,
            name: "showcase reproduction",
            budget: s(600),
            check: showcase_reproduction,
        },
        Criterion {
            id: 5,
            name: "exact reconstruction",
            budget: s(60),
            check: exact_reconstruction,
        },
        Criterion {
            id: 6,
            name: "inversion consistency",
            budget: s(60),
            check: inversion_consistency,
        },
        Criterion {
            id: 7,
            name: "misalignment scaling",
            budget: s(900),
            check: misalignment,
        },
        Criterion {
            id: 8,
            name: "scan symmetries",
            budget: s(120),
            check: symmetries,
        },
        Criterion {
            id: 9,
            name: "compensator solver",
            budget: s(10),
            check: compensators,
        },
    ];
    if run_all(&criteria) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
