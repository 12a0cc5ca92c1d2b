//! Physical frame, sampling grid and grid-sampled complex fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Length scales of the analysis: the mode waist and the reduced wavelength.
///
/// The Rayleigh range is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalFrame {
    w0: f64,
    lambdabar: f64,
}

impl PhysicalFrame {
    pub fn new(w0: f64, lambdabar: f64) -> Result<Self> {
        if !(w0.is_finite() && w0 > 0.0) {
            return Err(Error::InvalidFrame(format!("w0 must be positive and finite, got {w0}")));
        }
        if !(lambdabar.is_finite() && lambdabar > 0.0) {
            return Err(Error::InvalidFrame(format!(
                "lambdabar must be positive and finite, got {lambdabar}"
            )));
        }
        Ok(Self { w0, lambdabar })
    }

    /// Dimensionless frame: w0 = 1 and z0 = 1.
    pub fn unit() -> Self {
        Self {
            w0: 1.0,
            lambdabar: 0.5,
        }
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn lambdabar(&self) -> f64 {
        self.lambdabar
    }

    /// Wave number k = 1/ƛ.
    pub fn k(&self) -> f64 {
        1.0 / self.lambdabar
    }

    /// Rayleigh range z0 = w0² / (2ƛ).
    pub fn z0(&self) -> f64 {
        self.w0 * self.w0 / (2.0 * self.lambdabar)
    }

    pub(crate) fn check_same(&self, other: &PhysicalFrame) -> Result<()> {
        if self != other {
            return Err(Error::FrameMismatch(format!(
                "(w0={}, lambdabar={}) vs (w0={}, lambdabar={})",
                self.w0, self.lambdabar, other.w0, other.lambdabar
            )));
        }
        Ok(())
    }
}

/// Uniform Cartesian grid centred on the optical axis.
///
/// Sample `i` sits at `x_i = (i + 1/2 - n/2) * dx`, so the sample set is
/// symmetric under `x -> -x` for any `n` and parity is an exact index reversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    samples_x: usize,
    samples_y: usize,
    half_window: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            samples_x: 512,
            samples_y: 512,
            half_window: 8.0,
        }
    }
}

impl GridSpec {
    pub fn new(samples_x: usize, samples_y: usize, half_window: f64) -> Result<Self> {
        if samples_x == 0 || samples_y == 0 {
            return Err(Error::InvalidGrid("sample counts must be positive".into()));
        }
        if !(half_window.is_finite() && half_window > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half_window must be positive, got {half_window}"
            )));
        }
        Ok(Self {
            samples_x,
            samples_y,
            half_window,
        })
    }

    pub fn square(samples: usize, half_window: f64) -> Result<Self> {
        Self::new(samples, samples, half_window)
    }

    pub fn samples_x(&self) -> usize {
        self.samples_x
    }

    pub fn samples_y(&self) -> usize {
        self.samples_y
    }

    pub fn len(&self) -> usize {
        self.samples_x * self.samples_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Half-width of the window in units of w0.
    pub fn half_window(&self) -> f64 {
        self.half_window
    }

    /// Sample spacing along x in units of w0.
    pub fn dx(&self) -> f64 {
        2.0 * self.half_window / self.samples_x as f64
    }

    /// Sample spacing along y in units of w0.
    pub fn dy(&self) -> f64 {
        2.0 * self.half_window / self.samples_y as f64
    }

    /// Sample coordinates along x in units of w0.
    pub fn xs(&self) -> Vec<f64> {
        axis(self.samples_x, self.dx())
    }

    /// Sample coordinates along y in units of w0.
    pub fn ys(&self) -> Vec<f64> {
        axis(self.samples_y, self.dy())
    }
}

pub(crate) fn axis(n: usize, d: f64) -> Vec<f64> {
    let h = n as f64 / 2.0;
    (0..n).map(|i| (i as f64 + 0.5 - h) * d).collect()
}

/// Complex amplitude ψ(x, y) sampled on a [`GridSpec`], stored row-major
/// (row index = y). Amplitudes carry units of 1/length so that the grid
/// quadrature of |ψ|² is dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    frame: PhysicalFrame,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec, frame: PhysicalFrame) -> Self {
        Self {
            grid,
            frame,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_samples(grid: GridSpec, frame: PhysicalFrame, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples supplied for a {}x{} grid",
                data.len(),
                grid.samples_x,
                grid.samples_y
            )));
        }
        Ok(Self { grid, frame, data })
    }

    /// Samples `f(x, y)` with coordinates in physical length units.
    pub fn from_fn<F>(grid: GridSpec, frame: PhysicalFrame, f: F) -> Self
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let w0 = frame.w0();
        let xs: Vec<f64> = grid.xs().iter().map(|x| x * w0).collect();
        let ys: Vec<f64> = grid.ys().iter().map(|y| y * w0).collect();
        let nx = grid.samples_x;
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        data.par_chunks_mut(nx).zip(ys.par_iter()).for_each(|(row, &y)| {
            for (v, &x) in row.iter_mut().zip(&xs) {
                *v = f(x, y);
            }
        });
        Self { grid, frame, data }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn frame(&self) -> &PhysicalFrame {
        &self.frame
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.data
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.data[iy * self.grid.samples_x + ix]
    }

    /// Area element dx·dy in physical units.
    pub fn cell_area(&self) -> f64 {
        let w0 = self.frame.w0();
        self.grid.dx() * self.grid.dy() * w0 * w0
    }

    pub(crate) fn check_compatible(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        self.frame.check_same(&other.frame)
    }

    /// Grid inner product ⟨self, other⟩ = Σ conj(self)·other·dA.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.check_compatible(other)?;
        let nx = self.grid.samples_x;
        // Row sums first, then a fixed-order sum over rows: independent of thread count.
        let rows: Vec<Complex64> = self
            .data
            .par_chunks(nx)
            .zip(other.data.par_chunks(nx))
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u.conj() * v).sum())
            .collect();
        Ok(rows.iter().sum::<Complex64>() * self.cell_area())
    }

    /// Grid quadrature of |ψ|².
    pub fn norm_sqr(&self) -> f64 {
        let nx = self.grid.samples_x;
        let rows: Vec<f64> = self
            .data
            .par_chunks(nx)
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum())
            .collect();
        rows.iter().sum::<f64>() * self.cell_area()
    }

    /// Rescales to unit grid norm; fails for an (almost) vanishing field.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::InvalidRecipe(format!("cannot normalize a field with norm {n}")));
        }
        let s = 1.0 / n.sqrt();
        self.data.iter_mut().for_each(|v| *v *= s);
        Ok(self)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= factor);
        self
    }

    /// Largest sample-wise modulus of the difference.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Grid norm of the difference, √∫|a − b|².
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        self.check_compatible(other)?;
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        Ok((s * self.cell_area()).sqrt())
    }

    /// Peak sample modulus, used to express tolerances relative to field scale.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rayleigh_range_is_derived() {
        let f = PhysicalFrame::new(2.0e-4, 1.0e-7).unwrap();
        assert_eq!(f.z0(), 2.0e-4 * 2.0e-4 / (2.0 * 1.0e-7));
        assert_eq!(PhysicalFrame::unit().z0(), 1.0);
    }

    #[test]
    fn frame_rejects_nonpositive() {
        assert!(PhysicalFrame::new(0.0, 1.0).is_err());
        assert!(PhysicalFrame::new(1.0, -1.0).is_err());
        assert!(PhysicalFrame::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn grid_is_centred_and_symmetric() {
        for n in [1usize, 2, 7, 8, 512] {
            let g = GridSpec::square(n, 4.0).unwrap();
            let xs = g.xs();
            for i in 0..n {
                assert_eq!(xs[i], -xs[n - 1 - i]);
            }
            assert!((xs[1.min(n - 1)] - xs[0] - if n > 1 { g.dx() } else { 0.0 }).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_rejects_empty() {
        assert!(GridSpec::new(0, 4, 1.0).is_err());
        assert!(GridSpec::new(4, 4, 0.0).is_err());
    }

    #[test]
    fn inner_product_of_mismatched_grids_fails() {
        let f = PhysicalFrame::unit();
        let a = ComplexField::zeros(GridSpec::square(8, 4.0).unwrap(), f);
        let b = ComplexField::zeros(GridSpec::square(16, 4.0).unwrap(), f);
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn zero_field_cannot_be_normalized() {
        let a = ComplexField::zeros(GridSpec::square(8, 4.0).unwrap(), PhysicalFrame::unit());
        assert!(a.normalized().is_err());
    }
}
