//! Mach–Zehnder intensity-difference scans.
//!
//! The measurement arm applies S₊(φ₊)·S₋(φ₋), the compensator arm a fixed
//! reference (identity, parity, or a custom pair of angles) and the balanced
//! detectors record ΔI = 2·Re⟨ψ_C, ψ_M⟩ for a unit-power input. For an
//! input with weights P_{m,n} this is
//!
//! ```text
//! ΔI = 2 Σ P_{m,n} cos[(m+n)(φ₊−φ₊')/2 + (m−n)(φ₋−φ₋')/2].
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::ComplexField;
use crate::modes::{eval_hg, ModeIndex, ModeSpectrum, WeightSpectrum};
use crate::optics::{design_s_minus, design_s_plus, solve_compensator, CompensatorTarget, ElementKind, OpticalTrain};
use crate::propagation::{apply_parity, apply_train, KernelPlan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompensatorSetting {
    /// φ₊' = φ₋' = 0.
    Identity,
    /// φ₊' = 0, φ₋' = 2π: a parity operation.
    MinusIdentity,
    Custom {
        phi_plus: f64,
        phi_minus: f64,
    },
}

impl CompensatorSetting {
    pub fn angles(&self) -> (f64, f64) {
        match *self {
            CompensatorSetting::Identity => (0.0, 0.0),
            CompensatorSetting::MinusIdentity => (0.0, 2.0 * PI),
            CompensatorSetting::Custom { phi_plus, phi_minus } => (phi_plus, phi_minus),
        }
    }
}

impl fmt::Display for CompensatorSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompensatorSetting::Identity => write!(f, "identity"),
            CompensatorSetting::MinusIdentity => write!(f, "minus-identity"),
            CompensatorSetting::Custom { phi_plus, phi_minus } => write!(f, "custom:{phi_plus:?}:{phi_minus:?}"),
        }
    }
}

impl FromStr for CompensatorSetting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "identity" => Ok(CompensatorSetting::Identity),
            "minus-identity" => Ok(CompensatorSetting::MinusIdentity),
            _ => {
                let parts: Vec<&str> = s.split(':').collect();
                if parts.len() == 3 && parts[0] == "custom" {
                    let a = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
                    let b = parts[2].parse::<f64>().map_err(|e| e.to_string())?;
                    if a.is_finite() && b.is_finite() {
                        return Ok(CompensatorSetting::Custom {
                            phi_plus: a,
                            phi_minus: b,
                        });
                    }
                }
                Err(format!(
                    "unknown compensator '{s}' (expected identity, minus-identity or custom:<phi+>:<phi->)"
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Kernel,
    LensTrain,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Analytic => "analytic",
            Engine::Kernel => "kernel",
            Engine::LensTrain => "train",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "kernel" => Ok(Engine::Kernel),
            "train" => Ok(Engine::LensTrain),
            _ => Err(format!("unknown engine '{s}' (expected analytic, kernel or train)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub k_plus: usize,
    pub k_minus: usize,
    pub range_plus: (f64, f64),
    pub range_minus: (f64, f64),
    pub compensator: CompensatorSetting,
    pub engine: Engine,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            k_plus: 10,
            k_minus: 10,
            range_plus: (PI, 3.0 * PI),
            range_minus: (PI, 3.0 * PI),
            compensator: CompensatorSetting::Identity,
            engine: Engine::Kernel,
        }
    }
}

/// `k` equal increments from `start` (inclusive) to `end` (exclusive).
pub fn sample_angles(range: (f64, f64), k: usize) -> Vec<f64> {
    let step = (range.1 - range.0) / k as f64;
    (0..k).map(|i| range.0 + i as f64 * step).collect()
}

impl ScanConfig {
    pub fn with_compensator(mut self, compensator: CompensatorSetting) -> Self {
        self.compensator = compensator;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    /// Full-period sampling over [0, 4π) on both axes.
    pub fn full_range(k: usize) -> Self {
        Self {
            k_plus: k,
            k_minus: k,
            range_plus: (0.0, 4.0 * PI),
            range_minus: (0.0, 4.0 * PI),
            compensator: CompensatorSetting::Identity,
            engine: Engine::Analytic,
        }
    }

    pub fn phi_plus(&self) -> Vec<f64> {
        sample_angles(self.range_plus, self.k_plus)
    }

    pub fn phi_minus(&self) -> Vec<f64> {
        sample_angles(self.range_minus, self.k_minus)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_plus == 0 || self.k_minus == 0 {
            return Err(Error::ScanMismatch("sample counts must be at least 1".into()));
        }
        for (lo, hi) in [self.range_plus, self.range_minus] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::ScanMismatch(format!("invalid angle range [{lo}, {hi}]")));
            }
        }
        if let CompensatorSetting::Custom { phi_plus, phi_minus } = self.compensator {
            if !(phi_plus.is_finite() && phi_minus.is_finite()) {
                return Err(Error::ScanMismatch("custom compensator angles must be finite".into()));
            }
        }
        if self.engine == Engine::LensTrain {
            let (lo, hi) = (PI, 3.0 * PI);
            let slack = 1e-12;
            for (name, range) in [("phi_plus", self.range_plus), ("phi_minus", self.range_minus)] {
                if range.0 < lo - slack || range.1 > hi + slack {
                    return Err(Error::Range {
                        quantity: name,
                        value: if range.0 < lo - slack { range.0 } else { range.1 },
                        lo,
                        hi,
                        hint: "; the lens-train engine only reaches [π, 3π]",
                    });
                }
            }
        }
        Ok(())
    }
}

/// ΔI sampled on a φ₊ × φ₋ grid; `values` is row-major with φ₊ as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityScan {
    pub phi_plus: Vec<f64>,
    pub phi_minus: Vec<f64>,
    pub values: Vec<f64>,
    pub compensator: CompensatorSetting,
    pub engine: Engine,
}

impl IntensityScan {
    pub fn get(&self, i_plus: usize, i_minus: usize) -> f64 {
        self.values[i_plus * self.phi_minus.len() + i_minus]
    }

    pub fn k_plus(&self) -> usize {
        self.phi_plus.len()
    }

    pub fn k_minus(&self) -> usize {
        self.phi_minus.len()
    }

    /// Largest pointwise deviation between two scans on the same grid.
    pub fn max_abs_diff(&self, other: &IntensityScan) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &IntensityScan) -> Result<()> {
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        if !same(&self.phi_plus, &other.phi_plus) || !same(&self.phi_minus, &other.phi_minus) {
            return Err(Error::ScanMismatch(format!(
                "sample grids differ ({}x{} vs {}x{})",
                self.k_plus(),
                self.k_minus(),
                other.k_plus(),
                other.k_minus()
            )));
        }
        Ok(())
    }
}

/// Balanced-detector signal 2·Re⟨compensated, measured⟩.
pub fn delta_i(measured: &ComplexField, compensated: &ComplexField) -> Result<f64> {
    Ok(2.0 * compensated.inner(measured)?.re)
}

/// Closed-form ΔI for given weights at one angle pair.
pub fn delta_i_closed_form(weights: &WeightSpectrum, d_plus: f64, d_minus: f64) -> f64 {
    2.0 * weights
        .iter()
        .map(|(k, p)| {
            let (m, n) = (k.nx as f64, k.ny as f64);
            p * ((m + n) * d_plus / 2.0 + (m - n) * d_minus / 2.0).cos()
        })
        .sum::<f64>()
}

fn assemble<F>(cfg: &ScanConfig, f: F) -> Result<IntensityScan>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let (pp, pm) = (cfg.phi_plus(), cfg.phi_minus());
    let pairs: Vec<(f64, f64)> = pp.iter().flat_map(|&a| pm.iter().map(move |&b| (a, b))).collect();
    let values = pairs.par_iter().map(|&(a, b)| f(a, b)).collect::<Result<Vec<f64>>>()?;
    Ok(IntensityScan {
        phi_plus: pp,
        phi_minus: pm,
        values,
        compensator: cfg.compensator,
        engine: cfg.engine,
    })
}

/// Evaluates the closed form on the scan grid.
pub fn scan_weights(weights: &WeightSpectrum, cfg: &ScanConfig) -> Result<IntensityScan> {
    let (cp, cm) = cfg.compensator.angles();
    let mut scan = assemble(cfg, |a, b| Ok(delta_i_closed_form(weights, a - cp, b - cm)))?;
    scan.engine = Engine::Analytic;
    Ok(scan)
}

pub fn scan_analytic(spectrum: &ModeSpectrum, cfg: &ScanConfig) -> Result<IntensityScan> {
    scan_weights(&spectrum.weights(), cfg)
}

/// Propagates the field through the S± kernels at every scan angle.
pub fn scan_kernel(field: &ComplexField, cfg: &ScanConfig) -> Result<IntensityScan> {
    let compensated = match cfg.compensator {
        CompensatorSetting::Identity => field.clone(),
        CompensatorSetting::MinusIdentity => apply_parity(field),
        CompensatorSetting::Custom { phi_plus, phi_minus } => {
            KernelPlan::combined(phi_plus, phi_minus, field.grid())?.apply(field)?
        }
    };
    let mut scan = assemble(cfg, |a, b| {
        let measured = KernelPlan::combined(a, b, field.grid())?.apply(field)?;
        delta_i(&measured, &compensated)
    })?;
    scan.engine = Engine::Kernel;
    Ok(scan)
}

/// Which train of the lens-train interferometer an offset applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainArm {
    SPlus,
    SMinus,
    Compensator,
}

/// Transverse displacement of one lens; `lens` counts lenses only, in
/// propagation order within its train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensOffset {
    pub arm: TrainArm,
    pub lens: usize,
    pub dx: f64,
    pub dy: f64,
}

impl LensOffset {
    /// The middle lens of the S₊ train displaced along x.
    pub fn s_plus_middle(dx: f64) -> Self {
        Self {
            arm: TrainArm::SPlus,
            lens: 1,
            dx,
            dy: 0.0,
        }
    }
}

fn with_offsets(mut train: OpticalTrain, arm: TrainArm, offsets: &[LensOffset]) -> Result<OpticalTrain> {
    for o in offsets.iter().filter(|o| o.arm == arm) {
        let idx = train
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                matches!(
                    e.kind,
                    ElementKind::SphericalLens { .. } | ElementKind::CylindricalLens { .. }
                )
            })
            .map(|(i, _)| i)
            .nth(o.lens)
            .ok_or_else(|| Error::InvalidElement(format!("train {arm:?} has no lens #{}", o.lens)))?;
        train.elements[idx] = train.elements[idx].with_offset(o.dx, o.dy);
    }
    Ok(train)
}

/// Unit phase that u00 acquires through an aligned train.
fn ground_phase(train: &OpticalTrain, u00: &ComplexField) -> Result<Complex64> {
    let ph = u00.inner(&apply_train(u00, train)?)?;
    Ok(ph / ph.norm())
}

/// Arm length of the measurement trains: 2·z0 for S₊ plus z0 for S₋.
pub fn measurement_arm_length(frame: &crate::frame::PhysicalFrame) -> f64 {
    3.0 * frame.z0()
}

/// Physical simulation with designed lens trains propagated through
/// `apply_train`. Each arm output is referenced to the phase the ground mode
/// acquires through the aligned version of the same train, as a phase lock
/// would do.
pub fn scan_train(field: &ComplexField, cfg: &ScanConfig, offsets: &[LensOffset]) -> Result<IntensityScan> {
    let mut cfg = *cfg;
    cfg.engine = Engine::LensTrain;
    cfg.validate()?;
    let frame = *field.frame();
    let u00 = eval_hg(ModeIndex::new(0, 0), &frame, field.grid())?;
    let arm = measurement_arm_length(&frame);

    let compensator = match cfg.compensator {
        CompensatorSetting::Identity => solve_compensator(CompensatorTarget::Identity, 4, arm, &frame)?.train,
        CompensatorSetting::MinusIdentity => solve_compensator(CompensatorTarget::MinusIdentity, 2, arm, &frame)?.train,
        CompensatorSetting::Custom { phi_plus, phi_minus } => {
            design_s_plus(phi_plus, &frame)?.then(&design_s_minus(phi_minus, &frame)?)
        }
    };
    let comp_phase = ground_phase(&compensator, &u00)?;
    let compensated =
        apply_train(field, &with_offsets(compensator, TrainArm::Compensator, offsets)?)?.scale(comp_phase.conj());

    let (pp, pm) = (cfg.phi_plus(), cfg.phi_minus());
    let after_plus = pp
        .par_iter()
        .map(|&a| {
            let train = design_s_plus(a, &frame)?;
            let ph = ground_phase(&train, &u00)?;
            Ok(apply_train(field, &with_offsets(train, TrainArm::SPlus, offsets)?)?.scale(ph.conj()))
        })
        .collect::<Result<Vec<ComplexField>>>()?;
    let minus_trains = pm
        .par_iter()
        .map(|&b| {
            let train = design_s_minus(b, &frame)?;
            let ph = ground_phase(&train, &u00)?;
            Ok((with_offsets(train, TrainArm::SMinus, offsets)?, ph.conj()))
        })
        .collect::<Result<Vec<(OpticalTrain, Complex64)>>>()?;

    let pairs: Vec<(usize, usize)> = (0..pp.len()).flat_map(|i| (0..pm.len()).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (train, ph) = &minus_trains[j];
            let measured = apply_train(&after_plus[i], train)?.scale(*ph);
            delta_i(&measured, &compensated)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IntensityScan {
        phi_plus: pp,
        phi_minus: pm,
        values,
        compensator: cfg.compensator,
        engine: Engine::LensTrain,
    })
}

/// Dispatches on `cfg.engine`; the analytic engine decomposes the field first.
pub fn scan(field: &ComplexField, cfg: &ScanConfig, analytic_order: u32) -> Result<IntensityScan> {
    match cfg.engine {
        Engine::Analytic => {
            let d = crate::modes::decompose(field, analytic_order)?;
            scan_analytic(&d.spectrum, cfg)
        }
        Engine::Kernel => scan_kernel(field, cfg),
        Engine::LensTrain => scan_train(field, cfg, &[]),
    }
}
