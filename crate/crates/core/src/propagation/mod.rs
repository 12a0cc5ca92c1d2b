//! Wave propagation of sampled fields: S± kernels, parity, rotation, and
//! element-by-element propagation through an optical train.

mod fft;
mod kernel;

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;

pub use kernel::{
    apply_literal_kernel, apply_s_minus, apply_s_plus, literal_convention, AxisRoute, KernelKind, KernelPlan,
    SHORTCUT_THRESHOLD,
};

use crate::error::{Error, Result};
use crate::frame::ComplexField;
use crate::optics::{ElementKind, OpticalElement, OpticalTrain};
use fft::{angular_freqs, filter_rows, transpose, Fft2};

/// ψ(x, y) → ψ(−x, −y). Exact on the symmetric grid.
pub fn apply_parity(field: &ComplexField) -> ComplexField {
    let mut data = field.samples().to_vec();
    data.reverse();
    ComplexField::from_samples(*field.grid(), *field.frame(), data).expect("same length")
}

/// Rotates the field counterclockwise by `angle`: ψ'(r) = ψ(R(−angle)·r).
///
/// Quarter turns are exact index permutations on square grids; the remainder
/// (at most π/4 in magnitude) is done with three Fourier shears, which are
/// exact for band-limited fields that fit the window.
pub fn apply_rotation(field: &ComplexField, angle: f64) -> Result<ComplexField> {
    let g = *field.grid();
    let (nx, ny) = (g.samples_x(), g.samples_y());
    if nx != ny {
        return Err(Error::InvalidGrid(format!(
            "rotation needs a square grid, got {nx}x{ny}"
        )));
    }
    let n = nx;
    let quarters = (angle / (PI / 2.0)).round();
    let rest = angle - quarters * PI / 2.0;
    let q = (quarters as i64).rem_euclid(4);
    let src = field.samples();
    let mut data: Vec<Complex64> = match q {
        0 => src.to_vec(),
        2 => src.iter().rev().copied().collect(),
        _ => {
            // out(x, y) = in(y, −x) for a quarter turn, in(−y, x) for three.
            let mut out = vec![Complex64::new(0.0, 0.0); n * n];
            out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
                for (ix, v) in row.iter_mut().enumerate() {
                    let (sx, sy) = if q == 1 { (iy, n - 1 - ix) } else { (n - 1 - iy, ix) };
                    *v = src[sy * n + sx];
                }
            });
            out
        }
    };
    if rest != 0.0 {
        let tan_half = (rest / 2.0).tan();
        let sin = rest.sin();
        let d = g.dx();
        let ys = g.ys();
        // out(x, y) = in(x + a·y, y): shift row by −a·y.
        let shear_x = |data: &mut Vec<Complex64>, a: f64| {
            filter_rows(data, n, d, |r, k| Complex64::from_polar(1.0, k * a * ys[r]));
        };
        shear_x(&mut data, tan_half);
        let mut t = transpose(&data, n, n);
        filter_rows(&mut t, n, d, |c, k| Complex64::from_polar(1.0, -k * sin * ys[c]));
        data = transpose(&t, n, n);
        shear_x(&mut data, tan_half);
    }
    ComplexField::from_samples(g, *field.frame(), data)
}

/// Per-lens phase-gradient check: the lens phase must change by less than π
/// between neighbouring samples anywhere in the window.
fn check_lens_sampling(e: &OpticalElement, field: &ComplexField) -> Result<()> {
    let g = field.grid();
    let w0 = field.frame().w0();
    let p = e.power_matrix();
    let power = p.symmetric_eigenvalues().abs().max();
    let reach = g.half_window() * w0 * std::f64::consts::SQRT_2 + e.offset.0.hypot(e.offset.1);
    let step = g.dx().max(g.dy()) * w0;
    let ratio = field.frame().k() * power * reach * step / PI;
    if ratio.is_nan() || ratio >= 1.0 {
        return Err(Error::Sampling { rule: "lens", ratio });
    }
    Ok(())
}

fn apply_element(e: &OpticalElement, field: ComplexField, fft: &Fft2) -> Result<ComplexField> {
    let g = *field.grid();
    let frame = *field.frame();
    match e.kind {
        ElementKind::Parity => Ok(apply_parity(&field)),
        ElementKind::FreeSpace { distance } => {
            if distance == 0.0 {
                return Ok(field);
            }
            let w0 = frame.w0();
            let kx = angular_freqs(g.samples_x(), g.dx() * w0);
            let ky = angular_freqs(g.samples_y(), g.dy() * w0);
            let lb = frame.lambdabar();
            let mut data = field.into_samples();
            fft.forward(&mut data);
            data.par_chunks_mut(g.samples_x())
                .zip(ky.par_iter())
                .for_each(|(row, &ky)| {
                    for (v, &kx) in row.iter_mut().zip(&kx) {
                        *v *= Complex64::from_polar(1.0, -distance * lb * (kx * kx + ky * ky) / 2.0);
                    }
                });
            fft.inverse(&mut data);
            ComplexField::from_samples(g, frame, data)
        }
        ElementKind::SphericalLens { .. } | ElementKind::CylindricalLens { .. } => {
            check_lens_sampling(e, &field)?;
            let p = e.power_matrix();
            let half_k = frame.k() / 2.0;
            let (ox, oy) = e.offset;
            let w0 = frame.w0();
            let xs: Vec<f64> = g.xs().iter().map(|x| x * w0 - ox).collect();
            let ys: Vec<f64> = g.ys().iter().map(|y| y * w0 - oy).collect();
            let mut data = field.into_samples();
            data.par_chunks_mut(g.samples_x())
                .zip(ys.par_iter())
                .for_each(|(row, &y)| {
                    for (v, &x) in row.iter_mut().zip(&xs) {
                        let q = p[(0, 0)] * x * x + 2.0 * p[(0, 1)] * x * y + p[(1, 1)] * y * y;
                        *v *= Complex64::from_polar(1.0, -half_k * q);
                    }
                });
            ComplexField::from_samples(g, frame, data)
        }
    }
}

/// Propagates element by element: paraxial angular-spectrum free space and
/// thin-lens phase masks (with their transverse offsets). Parity elements
/// ignore offsets.
pub fn apply_train(field: &ComplexField, train: &OpticalTrain) -> Result<ComplexField> {
    let g = field.grid();
    let fft = Fft2::new(g.samples_x(), g.samples_y());
    train
        .elements
        .iter()
        .try_fold(field.clone(), |f, e| apply_element(e, f, &fft))
}

/// Normalized second moments of (x, y, pₓ, p_y) about the origin, with
/// p = ƛ·(−i∂) the ray slope. Cross terms are symmetrized.
pub fn second_moments(field: &ComplexField) -> Matrix4<f64> {
    let g = *field.grid();
    let (nx, ny) = (g.samples_x(), g.samples_y());
    let w0 = field.frame().w0();
    let lb = field.frame().lambdabar();
    let xs: Vec<f64> = g.xs().iter().map(|x| x * w0).collect();
    let ys: Vec<f64> = g.ys().iter().map(|y| y * w0).collect();

    // Spectral derivatives: p_x ψ and p_y ψ. The Nyquist bin is dropped so the
    // derivative of a real field stays real.
    let fft = Fft2::new(nx, ny);
    let deriv = |k: Vec<f64>, n: usize| -> Vec<f64> {
        let mut k = k;
        if n.is_multiple_of(2) {
            k[n / 2] = 0.0;
        }
        k
    };
    let kx = deriv(angular_freqs(nx, g.dx() * w0), nx);
    let ky = deriv(angular_freqs(ny, g.dy() * w0), ny);
    let mut spec = field.samples().to_vec();
    fft.forward(&mut spec);
    let mut px = spec.clone();
    let mut py = spec;
    for (iy, (rx, ry)) in px.chunks_mut(nx).zip(py.chunks_mut(nx)).enumerate() {
        for ix in 0..nx {
            rx[ix] *= kx[ix] * lb;
            ry[ix] *= ky[iy] * lb;
        }
    }
    fft.inverse(&mut px);
    fft.inverse(&mut py);

    let psi = field.samples();
    let mut m = Matrix4::<f64>::zeros();
    let mut norm = 0.0;
    for (iy, y) in ys.iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            let i = iy * nx + ix;
            let z = [psi[i] * *x, psi[i] * *y, px[i], py[i]];
            norm += psi[i].norm_sqr();
            for a in 0..4 {
                for b in a..4 {
                    // Re⟨z_a ψ, z_b ψ⟩ = ⟨(z_a z_b + z_b z_a)/2⟩ for Hermitian z
                    m[(a, b)] += (z[a].conj() * z[b]).re;
                }
            }
        }
    }
    for a in 0..4 {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    m / norm
}
