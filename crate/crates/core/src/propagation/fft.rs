use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Signed angular frequencies of an `n`-point FFT with sample spacing `d`.
/// The Nyquist bin of an even length maps to −π/d.
pub(crate) fn angular_freqs(n: usize, d: f64) -> Vec<f64> {
    let scale = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            let f = if i < n.div_ceil(2) {
                i as f64
            } else {
                i as f64 - n as f64
            };
            f * scale
        })
        .collect()
}

/// Transposes an `nx × ny` row-major array (rows of length `nx`).
pub(crate) fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(ny).enumerate().for_each(|(ix, col)| {
        for (iy, v) in col.iter_mut().enumerate() {
            *v = data[iy * nx + ix];
        }
    });
    out
}

/// Unnormalized forward and normalized inverse 2D FFTs for one grid shape.
pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub(crate) fn new(nx: usize, ny: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            nx,
            ny,
            fx: p.plan_fft_forward(nx),
            ix: p.plan_fft_inverse(nx),
            fy: p.plan_fft_forward(ny),
            iy: p.plan_fft_inverse(ny),
        }
    }

    fn run(&self, data: &mut Vec<Complex64>, along_x: &Arc<dyn Fft<f64>>, along_y: &Arc<dyn Fft<f64>>) {
        data.par_chunks_mut(self.nx).for_each(|row| along_x.process(row));
        let mut t = transpose(data, self.nx, self.ny);
        t.par_chunks_mut(self.ny).for_each(|col| along_y.process(col));
        *data = transpose(&t, self.ny, self.nx);
    }

    pub(crate) fn forward(&self, data: &mut Vec<Complex64>) {
        self.run(data, &self.fx, &self.fy);
    }

    pub(crate) fn inverse(&self, data: &mut Vec<Complex64>) {
        self.run(data, &self.ix, &self.iy);
        let s = 1.0 / (self.nx * self.ny) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Applies a per-row spectral multiplier `m(row, kx)` along x.
pub(crate) fn filter_rows<F>(data: &mut [Complex64], nx: usize, d: f64, m: F)
where
    F: Fn(usize, f64) -> Complex64 + Sync,
{
    let mut p = FftPlanner::new();
    let fwd = p.plan_fft_forward(nx);
    let inv = p.plan_fft_inverse(nx);
    let k = angular_freqs(nx, d);
    let s = 1.0 / nx as f64;
    data.par_chunks_mut(nx).enumerate().for_each(|(r, row)| {
        fwd.process(row);
        for (v, &kx) in row.iter_mut().zip(&k) {
            *v *= m(r, kx) * s;
        }
        inv.process(row);
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_are_signed() {
        let k = angular_freqs(4, 1.0);
        assert_eq!(k[0], 0.0);
        assert!((k[1] - PI / 2.0).abs() < 1e-15);
        assert!((k[2] + PI).abs() < 1e-15);
        assert!((k[3] + PI / 2.0).abs() < 1e-15);
        assert_eq!(angular_freqs(5, 1.0)[2], 2.0 * 2.0 * PI / 5.0);
    }

    #[test]
    fn round_trip() {
        let nx = 6;
        let ny = 4;
        let orig: Vec<Complex64> = (0..nx * ny)
            .map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1))
            .collect();
        let mut d = orig.clone();
        let f = Fft2::new(nx, ny);
        f.forward(&mut d);
        f.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn transpose_twice() {
        let d: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let t = transpose(&d, 3, 4);
        assert_eq!(t[1], d[3]);
        assert_eq!(transpose(&t, 4, 3), d);
    }
}
