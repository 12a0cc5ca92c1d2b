//! Mode weights from intensity scans.
//!
//! Two inversions are provided: a double Fourier sum over the full period
//! [0, 4π)² of one scan, and the two-compensator inversion over the window
//! [π, 3π]² reachable by the lens trains, which combines an identity scan
//! with a parity (minus-identity) scan. Both use equal-increment Riemann sums,
//! which are exact discrete orthogonality sums for band-limited spectra.
//!
//! With ΔI = 2·Σ𝓟·cos(…) the textbook constants 1/(16π²), 1/(8π²) (full) and
//! 1/(8π²), 1/(4π²) (two-compensator) return 2𝓟, so both carry a factor ½.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interferometer::{scan_weights, CompensatorSetting, Engine, IntensityScan, ScanConfig};
use crate::modes::{ModeIndex, WeightSpectrum, CLAMP_THRESHOLD};

/// Largest max-order exactly reconstructed at K samples per axis, for
/// K = 0..=16, as found by the exhaustive aliasing search in the test suite.
const SAMPLING_BOUND_TABLE: [u32; 17] = [0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15];

/// Largest total order N such that every spectrum with max order ≤ N is
/// reconstructed exactly by [`reconstruct_hg`] at `k` samples per axis.
pub fn sampling_bound(k: usize) -> u32 {
    SAMPLING_BOUND_TABLE
        .get(k)
        .copied()
        .unwrap_or_else(|| u32::try_from(k - 1).unwrap_or(u32::MAX))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub weights: WeightSpectrum,
    /// RMS difference between the input scans and the scans regenerated from
    /// the weights by the closed form.
    pub residual: f64,
    pub clamped_mass: f64,
    pub sampling_ok: bool,
    pub k_plus: usize,
    pub k_minus: usize,
    pub max_order: u32,
    /// Largest |sine projection|; vanishes for a symmetric, consistent scan pair.
    pub sine_residual: f64,
    /// The two scans came from different engines.
    pub mixed_engines: bool,
}

/// Serializable summary (weights go to their own CSV).
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub residual: f64,
    pub clamped_mass: f64,
    pub sampling_ok: bool,
    #[serde(rename = "K_plus")]
    pub k_plus: usize,
    #[serde(rename = "K_minus")]
    pub k_minus: usize,
    pub max_order: u32,
}

impl ReconstructionReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            residual: self.residual,
            clamped_mass: self.clamped_mass,
            sampling_ok: self.sampling_ok,
            k_plus: self.k_plus,
            k_minus: self.k_minus,
            max_order: self.max_order,
        }
    }
}

/// Residual allowed before a reconstruction is flagged, per engine.
pub fn engine_tolerance(engine: Engine) -> f64 {
    match engine {
        Engine::Analytic => 1e-8,
        Engine::Kernel => 1e-4,
        Engine::LensTrain => 1e-3,
    }
}

fn scan_config(scan: &IntensityScan) -> ScanConfig {
    let step = |v: &[f64]| if v.len() > 1 { v[1] - v[0] } else { 0.0 };
    let range = |v: &[f64], fallback: f64| {
        let s = if v.len() > 1 { step(v) } else { fallback };
        (v[0], v[0] + s * v.len() as f64)
    };
    ScanConfig {
        k_plus: scan.k_plus(),
        k_minus: scan.k_minus(),
        range_plus: range(&scan.phi_plus, 2.0 * PI),
        range_minus: range(&scan.phi_minus, 2.0 * PI),
        compensator: scan.compensator,
        engine: Engine::Analytic,
    }
}

/// RMS of (regenerated − measured) over all given scans.
fn regeneration_residual(weights: &WeightSpectrum, scans: &[&IntensityScan]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for scan in scans {
        let regen = scan_weights(weights, &scan_config(scan))?;
        for (a, b) in regen.values.iter().zip(&scan.values) {
            sum += (a - b).powi(2);
        }
        count += scan.values.len();
    }
    Ok((sum / count.max(1) as f64).sqrt())
}

fn check_grid(scan: &IntensityScan) -> Result<(f64, f64)> {
    if scan.phi_plus.is_empty() || scan.phi_minus.is_empty() {
        return Err(Error::ScanMismatch("empty scan".into()));
    }
    if scan.values.len() != scan.phi_plus.len() * scan.phi_minus.len() {
        return Err(Error::ScanMismatch(format!(
            "{} values for a {}x{} grid",
            scan.values.len(),
            scan.k_plus(),
            scan.k_minus()
        )));
    }
    let step = |v: &[f64], span: f64| {
        if v.len() > 1 {
            v[1] - v[0]
        } else {
            span
        }
    };
    Ok((step(&scan.phi_plus, 4.0 * PI), step(&scan.phi_minus, 4.0 * PI)))
}

fn check_span(scan: &IntensityScan, step: (f64, f64), span: f64, what: &str) -> Result<()> {
    let sp = step.0 * scan.k_plus() as f64;
    let sm = step.1 * scan.k_minus() as f64;
    if (sp - span).abs() > 1e-9 || (sm - span).abs() > 1e-9 {
        return Err(Error::ScanMismatch(format!(
            "{what} needs scans spanning {span:.6} per axis, got {sp:.6} x {sm:.6}"
        )));
    }
    Ok(())
}

fn finish(
    raw: Vec<(ModeIndex, f64)>,
    sine: f64,
    scans: &[&IntensityScan],
    max_order: u32,
    bound_k: usize,
) -> Result<ReconstructionReport> {
    let (weights, worst) = WeightSpectrum::clamp_all(raw);
    let residual = regeneration_residual(&weights, scans)?;
    let engine = scans[0].engine;
    let mixed = scans.iter().any(|s| s.engine != engine);
    let tol = scans.iter().map(|s| engine_tolerance(s.engine)).fold(0.0, f64::max);
    let sampling_ok = max_order <= sampling_bound(bound_k) && residual <= tol && worst >= -CLAMP_THRESHOLD;
    Ok(ReconstructionReport {
        clamped_mass: weights.clamped_mass(),
        weights,
        residual,
        sampling_ok,
        k_plus: scans[0].k_plus(),
        k_minus: scans[0].k_minus(),
        max_order,
        sine_residual: sine,
        mixed_engines: mixed,
    })
}

/// Full-period inversion of a single scan over [0, 4π)² (any start).
/// Compensator angles, if any, are shifted out.
pub fn reconstruct_full(scan: &IntensityScan, max_order: u32) -> Result<ReconstructionReport> {
    let step = check_grid(scan)?;
    check_span(scan, step, 4.0 * PI, "full-range inversion")?;
    let (cp, cm) = scan.compensator.angles();
    let cell = step.0 * step.1;
    let km = scan.k_minus();
    let indices = ModeIndex::all_up_to(max_order);
    let raw: Vec<(ModeIndex, f64, f64)> = indices
        .par_iter()
        .map(|&k| {
            let a = k.order() as f64 / 2.0;
            let b = (k.nx as f64 - k.ny as f64) / 2.0;
            let c = if k.order() == 0 {
                1.0 / (16.0 * PI * PI)
            } else {
                1.0 / (8.0 * PI * PI)
            };
            let (mut re, mut im) = (0.0, 0.0);
            for (i, p) in scan.phi_plus.iter().enumerate() {
                for (j, m) in scan.phi_minus.iter().enumerate() {
                    let th = a * (p - cp) + b * (m - cm);
                    let v = scan.values[i * km + j];
                    re += v * th.cos();
                    im += v * th.sin();
                }
            }
            (k, 0.5 * c * cell * re, 0.5 * c * cell * im)
        })
        .collect();
    let sine = raw.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
    let k = scan.k_plus().min(scan.k_minus());
    finish(
        raw.into_iter().map(|r| (r.0, r.1)).collect(),
        sine,
        &[scan],
        max_order,
        k,
    )
}

/// Two-compensator inversion over the window [π, 3π]²: `identity` is the
/// identity-compensated scan ΔI(φ₊, φ₋), `parity` the minus-identity scan
/// ΔI(φ₊, φ₋ − 2π) on the same grid.
pub fn reconstruct_hg(
    identity: &IntensityScan,
    parity: &IntensityScan,
    max_order: u32,
) -> Result<ReconstructionReport> {
    if identity.compensator != CompensatorSetting::Identity {
        return Err(Error::ScanMismatch(format!(
            "first scan must use the identity compensator, got {}",
            identity.compensator
        )));
    }
    if parity.compensator != CompensatorSetting::MinusIdentity {
        return Err(Error::ScanMismatch(format!(
            "second scan must use the minus-identity compensator, got {}",
            parity.compensator
        )));
    }
    let step = check_grid(identity)?;
    check_grid(parity)?;
    identity.check_same_grid(parity)?;
    check_span(identity, step, 2.0 * PI, "two-compensator inversion")?;

    let cell = step.0 * step.1;
    let km = identity.k_minus();
    let indices = ModeIndex::all_up_to(max_order);
    let raw: Vec<(ModeIndex, f64, f64)> = indices
        .par_iter()
        .map(|&k| {
            let n = k.order();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = n as f64 / 2.0;
            let b = (k.nx as f64 - k.ny as f64) / 2.0;
            let c = if n == 0 {
                1.0 / (8.0 * PI * PI)
            } else {
                1.0 / (4.0 * PI * PI)
            };
            let (mut re, mut im) = (0.0, 0.0);
            for (i, p) in identity.phi_plus.iter().enumerate() {
                for (j, m) in identity.phi_minus.iter().enumerate() {
                    let idx = i * km + j;
                    let v = sign * parity.values[idx] + identity.values[idx];
                    let th = a * p + b * m;
                    re += v * th.cos();
                    im += v * th.sin();
                }
            }
            (k, 0.5 * c * cell * re, 0.5 * c * cell * im)
        })
        .collect();
    let sine = raw.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
    let k = identity.k_plus().min(identity.k_minus());
    finish(
        raw.into_iter().map(|r| (r.0, r.1)).collect(),
        sine,
        &[identity, parity],
        max_order,
        k,
    )
}

/// Least-squares slope of ln(y) against ln(x). Points with a nonpositive
/// coordinate are skipped; `None` if fewer than two remain.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PhysicalFrame;
    use crate::interferometer::scan_analytic;
    use crate::modes::ModeSpectrum;

    fn pair(spec: &ModeSpectrum, k: usize) -> (IntensityScan, IntensityScan) {
        let cfg = ScanConfig {
            k_plus: k,
            k_minus: k,
            ..ScanConfig::default().with_engine(Engine::Analytic)
        };
        (
            scan_analytic(spec, &cfg).unwrap(),
            scan_analytic(spec, &cfg.with_compensator(CompensatorSetting::MinusIdentity)).unwrap(),
        )
    }

    #[test]
    fn ground_mode_window() {
        let s = ModeSpectrum::single(PhysicalFrame::unit(), ModeIndex::new(0, 0));
        let (a, b) = pair(&s, 10);
        let r = reconstruct_hg(&a, &b, 6).unwrap();
        assert!((r.weights.get(ModeIndex::new(0, 0)) - 1.0).abs() < 1e-12);
        assert!(r
            .weights
            .iter()
            .filter(|(k, _)| k.order() > 0)
            .all(|(_, w)| w.abs() < 1e-12));
        assert!(r.sampling_ok);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn ground_mode_full_range() {
        let s = ModeSpectrum::single(PhysicalFrame::unit(), ModeIndex::new(0, 0));
        let scan = scan_analytic(&s, &ScanConfig::full_range(8)).unwrap();
        let r = reconstruct_full(&scan, 4).unwrap();
        assert!((r.weights.get(ModeIndex::new(0, 0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_full_range_k16() {
        let s = ModeSpectrum::single(PhysicalFrame::unit(), ModeIndex::new(1, 0));
        let scan = scan_analytic(&s, &ScanConfig::full_range(16)).unwrap();
        let r = reconstruct_full(&scan, 6).unwrap();
        assert!((r.weights.get(ModeIndex::new(1, 0)) - 1.0).abs() < 1e-12);
        assert!(r.weights.get(ModeIndex::new(0, 1)).abs() < 1e-12);
    }

    #[test]
    fn swapped_indices_do_not_mix() {
        let f = PhysicalFrame::unit();
        for (m, n) in [(2, 1), (3, 0), (4, 1)] {
            let s = ModeSpectrum::single(f, ModeIndex::new(m, n));
            let (a, b) = pair(&s, m as usize + n as usize + 1);
            let r = reconstruct_hg(&a, &b, m + n).unwrap();
            assert!((r.weights.get(ModeIndex::new(m, n)) - 1.0).abs() < 1e-12);
            assert!(r.weights.get(ModeIndex::new(n, m)).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_compensators_and_grids() {
        let s = ModeSpectrum::single(PhysicalFrame::unit(), ModeIndex::new(0, 0));
        let (a, b) = pair(&s, 6);
        assert!(matches!(reconstruct_hg(&b, &a, 2), Err(Error::ScanMismatch(_))));
        let (_, b8) = pair(&s, 8);
        assert!(matches!(reconstruct_hg(&a, &b8, 2), Err(Error::ScanMismatch(_))));
        assert!(matches!(reconstruct_full(&a, 2), Err(Error::ScanMismatch(_))));
    }

    #[test]
    fn bound_table() {
        assert_eq!(sampling_bound(1), 0);
        assert_eq!(sampling_bound(10), 9);
        assert_eq!(sampling_bound(40), 39);
    }

    #[test]
    fn summary_keys() {
        let s = ModeSpectrum::single(PhysicalFrame::unit(), ModeIndex::new(0, 0));
        let (a, b) = pair(&s, 4);
        let j = serde_json::to_value(reconstruct_hg(&a, &b, 2).unwrap().summary()).unwrap();
        for key in [
            "residual",
            "clamped_mass",
            "sampling_ok",
            "K_plus",
            "K_minus",
            "max_order",
        ] {
            assert!(j.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn loglog_slope_of_power_laws() {
        let pts: Vec<(f64, f64)> = [1e-3, 1e-2, 1e-1].iter().map(|&x| (x, 2.5 * x * x)).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(0.0, 1.0), (1.0, 1.0)]), None);
    }
}
