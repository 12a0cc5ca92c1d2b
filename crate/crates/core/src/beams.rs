//! Input beams: parametric showcase families, coefficient lists and sampled
//! fields loaded from disk. Recipe lengths are in units of w0.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{ComplexField, GridSpec, PhysicalFrame};
use crate::io;
use crate::modes::{synthesize, ModeSpectrum};

#[derive(Debug, Clone, PartialEq)]
pub enum BeamRecipe {
    /// exp(−x′²/wx² − y′²/wy²) with (x′, y′) rotated by `tilt`.
    AstigmaticGaussian {
        wx: f64,
        wy: f64,
        tilt: f64,
    },
    /// `poles` Gaussian lobes of width `width` on a ring of radius `r0`,
    /// alternating in sign.
    Necklace {
        poles: u32,
        r0: f64,
        width: f64,
    },
    /// Concentric elliptical rings Σ aᵢ·exp(−(ρ − rᵢ)²/width²) with
    /// ρ² = (x/(1+ε))² + (y(1+ε))² + width²/4; the width²/4 term rounds off
    /// the centre so the field stays smooth there.
    Multiring {
        radii: Vec<f64>,
        amplitudes: Vec<f64>,
        ellipticity: f64,
        width: f64,
    },
    CoefficientList(ModeSpectrum),
    SampledField(PathBuf),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidRecipe(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

impl BeamRecipe {
    pub fn validate(&self) -> Result<()> {
        match self {
            BeamRecipe::AstigmaticGaussian { wx, wy, tilt } => {
                positive("wx", *wx)?;
                positive("wy", *wy)?;
                if !tilt.is_finite() {
                    return Err(Error::InvalidRecipe("tilt must be finite".into()));
                }
            }
            BeamRecipe::Necklace { poles, r0, width } => {
                if *poles < 2 || poles % 2 != 0 {
                    return Err(Error::InvalidRecipe(format!("poles must be even and ≥ 2, got {poles}")));
                }
                positive("r0", *r0)?;
                positive("width", *width)?;
            }
            BeamRecipe::Multiring {
                radii,
                amplitudes,
                ellipticity,
                width,
            } => {
                if radii.is_empty() || radii.len() != amplitudes.len() {
                    return Err(Error::InvalidRecipe(format!(
                        "need matching radii and amplitudes, got {} and {}",
                        radii.len(),
                        amplitudes.len()
                    )));
                }
                if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(Error::InvalidRecipe("ring radii must be ≥ 0".into()));
                }
                if amplitudes.iter().any(|a| !a.is_finite()) {
                    return Err(Error::InvalidRecipe("amplitudes must be finite".into()));
                }
                if !(ellipticity.is_finite() && *ellipticity > -1.0) {
                    return Err(Error::InvalidRecipe(format!(
                        "ellipticity must exceed −1, got {ellipticity}"
                    )));
                }
                positive("width", *width)?;
            }
            BeamRecipe::CoefficientList(s) => {
                if s.is_empty() {
                    return Err(Error::InvalidRecipe("empty coefficient list".into()));
                }
            }
            BeamRecipe::SampledField(_) => {}
        }
        Ok(())
    }

    /// Samples the beam on `grid` and normalizes it to unit power.
    pub fn realize(&self, frame: &PhysicalFrame, grid: &GridSpec) -> Result<ComplexField> {
        self.validate()?;
        let w0 = frame.w0();
        let real = |v: f64| Complex64::new(v, 0.0);
        let field = match self {
            BeamRecipe::AstigmaticGaussian { wx, wy, tilt } => {
                let (s, c) = tilt.sin_cos();
                let (wx, wy) = (wx * w0, wy * w0);
                ComplexField::from_fn(*grid, *frame, move |x, y| {
                    let xp = c * x + s * y;
                    let yp = -s * x + c * y;
                    real((-(xp * xp) / (wx * wx) - (yp * yp) / (wy * wy)).exp())
                })
            }
            BeamRecipe::Necklace { poles, r0, width } => {
                let centres: Vec<(f64, f64, f64)> = (0..*poles)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / *poles as f64;
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        (r0 * w0 * a.cos(), r0 * w0 * a.sin(), sign)
                    })
                    .collect();
                let w2 = (width * w0).powi(2);
                ComplexField::from_fn(*grid, *frame, move |x, y| {
                    real(
                        centres
                            .iter()
                            .map(|(cx, cy, s)| s * (-((x - cx).powi(2) + (y - cy).powi(2)) / w2).exp())
                            .sum(),
                    )
                })
            }
            BeamRecipe::Multiring {
                radii,
                amplitudes,
                ellipticity,
                width,
            } => {
                let e = 1.0 + ellipticity;
                let sigma = width * w0;
                let rings: Vec<(f64, f64)> = radii.iter().map(|r| r * w0).zip(amplitudes.iter().copied()).collect();
                ComplexField::from_fn(*grid, *frame, move |x, y| {
                    let rho = ((x / e).powi(2) + (y * e).powi(2) + sigma * sigma / 4.0).sqrt();
                    real(
                        rings
                            .iter()
                            .map(|(r, a)| a * (-((rho - r) / sigma).powi(2)).exp())
                            .sum(),
                    )
                })
            }
            BeamRecipe::CoefficientList(s) => {
                let s = ModeSpectrum::new(*frame, s.iter());
                synthesize(&s, grid)?
            }
            BeamRecipe::SampledField(path) => {
                let f = io::read_field(path)?;
                if f.grid() != grid {
                    return Err(Error::GridMismatch(format!(
                        "{} holds a {:?} field, requested {:?}",
                        path.display(),
                        f.grid(),
                        grid
                    )));
                }
                if f.frame() != frame {
                    return Err(Error::FrameMismatch(format!(
                        "{} was sampled with w0={}, lambdabar={}",
                        path.display(),
                        f.frame().w0(),
                        f.frame().lambdabar()
                    )));
                }
                f
            }
        };
        field.normalized()
    }
}

/// The three showcase beams with the parameters used throughout the tests.
pub fn showcase() -> Vec<(&'static str, BeamRecipe)> {
    vec![
        (
            "astigmatic",
            BeamRecipe::AstigmaticGaussian {
                wx: 1.6,
                wy: 0.7,
                tilt: 0.0,
            },
        ),
        (
            "necklace",
            BeamRecipe::Necklace {
                poles: 6,
                r0: 1.3,
                width: 0.9,
            },
        ),
        (
            "multiring",
            BeamRecipe::Multiring {
                radii: vec![0.0, 1.5],
                amplitudes: vec![1.0, 0.6],
                ellipticity: 0.2,
                width: 0.6,
            },
        ),
    ]
}

/// Reads a beam file, detecting the format from its first bytes: the binary
/// field container, a field CSV (`x,y,re,im` header), a spectrum CSV
/// (`nx,ny,re,im` header or bare rows) or a `key=value` recipe.
pub fn load_beam(path: &Path) -> Result<BeamRecipe> {
    match io::detect_format(path)? {
        io::FileFormat::FieldBinary | io::FileFormat::FieldCsv => Ok(BeamRecipe::SampledField(path.to_path_buf())),
        io::FileFormat::SpectrumCsv => Ok(BeamRecipe::CoefficientList(io::read_spectrum_csv(path)?)),
        io::FileFormat::Recipe => io::read_recipe(path),
        other => Err(Error::UnknownFormat {
            path: path.to_path_buf(),
            message: format!("{other:?} files do not describe a beam"),
        }),
    }
}
