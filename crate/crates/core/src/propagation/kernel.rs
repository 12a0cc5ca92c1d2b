//! Integral-kernel propagation through S₊ and S₋.
//!
//! Both kernels are separable. Along one axis a symplectic block
//! `[[c, z0·t], [−t/z0, c]]` with `c = cos(a/2)`, `t = sin(a/2)` acts as a
//! fractional Fourier transform of angle `a/2`; S₊(φ) uses `a = φ` on both
//! axes and S₋(φ) uses `a = φ` on x and `a = −φ` on y.
//!
//! The sampled transform is evaluated as a chirp, a Bluestein convolution and
//! a second chirp. Each axis transform is anchored so that the ground mode
//! keeps zero phase, which makes the result exactly `exp(−i·a·n/2)` on the
//! n-th Hermite function: plans then form a group and the shortcut angles
//! (identity, parity) agree with the integral.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::fft::transpose;
use crate::error::{Error, Result};
use crate::frame::{ComplexField, GridSpec};

/// Below this |sin(a/2)| the axis transform is replaced by identity or parity.
pub const SHORTCUT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Plus,
    Minus,
}

/// How one axis of a plan is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisRoute {
    Identity,
    Parity,
    /// One chirp–convolution–chirp pass.
    Direct,
    /// The angle is split as (a − π) + π because a single pass would violate
    /// a sampling rule.
    Split,
}

struct ChirpStep {
    m: usize,
    pre: Vec<Complex64>,
    h_hat: Vec<Complex64>,
    scale: Complex64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ChirpStep {
    /// Unanchored 1D transform with prefactor dx/√(π|t|); `a` is the full angle.
    fn raw(a: f64, n: usize, half_window: f64) -> Result<Self> {
        let (t, c) = (a / 2.0).sin_cos();
        check_rules(t, c, n, half_window)?;
        let dx = 2.0 * half_window / n as f64;
        let xs = crate::frame::axis(n, dx);
        let m = (2 * n - 1).next_power_of_two();
        let pre: Vec<Complex64> = xs
            .iter()
            .map(|x| Complex64::from_polar(1.0, (c - 1.0) * x * x / t))
            .collect();
        let mut h = vec![Complex64::new(0.0, 0.0); m];
        for d in 0..n {
            let v = Complex64::from_polar(1.0, dx * dx * (d * d) as f64 / t);
            h[d] = v;
            if d > 0 {
                h[m - d] = v;
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        fwd.process(&mut h);
        Ok(Self {
            m,
            pre,
            h_hat: h,
            scale: Complex64::new(dx / (PI * t.abs()).sqrt() / m as f64, 0.0),
            fwd,
            inv,
        })
    }

    fn anchored(a: f64, n: usize, half_window: f64) -> Result<Self> {
        let mut step = Self::raw(a, n, half_window)?;
        // The raw pass maps the ground Gaussian's peak value 1 to 1/√z.
        let t = (a / 2.0).sin();
        let z = Complex64::new(0.0, -t.signum()) * Complex64::from_polar(1.0, a / 2.0);
        step.scale *= z.sqrt();
        Ok(step)
    }

    fn apply_row(&self, row: &mut [Complex64], buf: &mut Vec<Complex64>) {
        buf.clear();
        buf.extend(row.iter().zip(&self.pre).map(|(f, p)| f * p));
        buf.resize(self.m, Complex64::new(0.0, 0.0));
        self.fwd.process(buf);
        buf.iter_mut().zip(&self.h_hat).for_each(|(v, h)| *v *= h);
        self.inv.process(buf);
        for ((v, b), p) in row.iter_mut().zip(buf.iter()).zip(&self.pre) {
            *v = b * p * self.scale;
        }
    }
}

fn check_rules(t: f64, c: f64, n: usize, half_window: f64) -> Result<()> {
    let dx = 2.0 * half_window / n as f64;
    let chirp = 2.0 * c.abs() * half_window * dx / (PI * t.abs());
    if chirp.is_nan() || chirp >= 1.0 {
        return Err(Error::Sampling {
            rule: "chirp",
            ratio: chirp,
        });
    }
    let output = 4.0 * half_window * half_window / (PI * n as f64 * t.abs());
    if output.is_nan() || output >= 1.0 {
        return Err(Error::Sampling {
            rule: "output",
            ratio: output,
        });
    }
    Ok(())
}

enum Step {
    Parity,
    Chirp(ChirpStep),
}

struct AxisPlan {
    route: AxisRoute,
    steps: Vec<Step>,
}

impl AxisPlan {
    fn new(a: f64, n: usize, half_window: f64) -> Result<Self> {
        let a = a.rem_euclid(4.0 * PI);
        let (t, c) = (a / 2.0).sin_cos();
        if t.abs() < SHORTCUT_THRESHOLD {
            return Ok(if c > 0.0 {
                Self {
                    route: AxisRoute::Identity,
                    steps: vec![],
                }
            } else {
                Self {
                    route: AxisRoute::Parity,
                    steps: vec![Step::Parity],
                }
            });
        }
        match ChirpStep::anchored(a, n, half_window) {
            Ok(step) => Ok(Self {
                route: AxisRoute::Direct,
                steps: vec![Step::Chirp(step)],
            }),
            Err(Error::Sampling { .. }) => Ok(Self {
                route: AxisRoute::Split,
                steps: vec![
                    Step::Chirp(ChirpStep::anchored(a - PI, n, half_window)?),
                    Step::Chirp(ChirpStep::anchored(PI, n, half_window)?),
                ],
            }),
            Err(e) => Err(e),
        }
    }

    /// Runs every step on each row of `data` (rows of length `n`).
    fn run(&self, data: &mut [Complex64], n: usize) {
        for step in &self.steps {
            match step {
                Step::Parity => data.par_chunks_mut(n).for_each(|row| row.reverse()),
                Step::Chirp(s) => data
                    .par_chunks_mut(n)
                    .for_each_init(Vec::new, |buf, row| s.apply_row(row, buf)),
            }
        }
    }
}

/// A precomputed separable kernel: angle `ax` on x and `ay` on y, acting as
/// `exp(−i(ax·nx + ay·ny)/2)` on the HG mode (nx, ny).
pub struct KernelPlan {
    grid: GridSpec,
    x: AxisPlan,
    y: AxisPlan,
}

impl std::fmt::Debug for KernelPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelPlan")
            .field("grid", &self.grid)
            .field("route_x", &self.x.route)
            .field("route_y", &self.y.route)
            .finish()
    }
}

impl KernelPlan {
    pub fn separable(angle_x: f64, angle_y: f64, grid: &GridSpec) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            x: AxisPlan::new(angle_x, grid.samples_x(), grid.half_window())?,
            y: AxisPlan::new(angle_y, grid.samples_y(), grid.half_window())?,
        })
    }

    pub fn s_plus(phi_plus: f64, grid: &GridSpec) -> Result<Self> {
        Self::separable(phi_plus, phi_plus, grid)
    }

    pub fn s_minus(phi_minus: f64, grid: &GridSpec) -> Result<Self> {
        Self::separable(phi_minus, -phi_minus, grid)
    }

    /// S₊(φ₊)·S₋(φ₋) in one pass; the two commute.
    pub fn combined(phi_plus: f64, phi_minus: f64, grid: &GridSpec) -> Result<Self> {
        Self::separable(phi_plus + phi_minus, phi_plus - phi_minus, grid)
    }

    pub fn route_x(&self) -> AxisRoute {
        self.x.route
    }

    pub fn route_y(&self) -> AxisRoute {
        self.y.route
    }

    pub fn apply(&self, field: &ComplexField) -> Result<ComplexField> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "plan {:?} vs field {:?}",
                self.grid,
                field.grid()
            )));
        }
        let (nx, ny) = (self.grid.samples_x(), self.grid.samples_y());
        let mut data = field.samples().to_vec();
        self.x.run(&mut data, nx);
        if !self.y.steps.is_empty() {
            let mut t = transpose(&data, nx, ny);
            self.y.run(&mut t, ny);
            data = transpose(&t, ny, nx);
        }
        ComplexField::from_samples(self.grid, *field.frame(), data)
    }
}

pub fn apply_s_plus(field: &ComplexField, phi_plus: f64) -> Result<ComplexField> {
    KernelPlan::s_plus(phi_plus, field.grid())?.apply(field)
}

pub fn apply_s_minus(field: &ComplexField, phi_minus: f64) -> Result<ComplexField> {
    KernelPlan::s_minus(phi_minus, field.grid())?.apply(field)
}

/// Evaluates the textbook Collins kernel of S± with its literal prefactor
/// `1/(iπ|sin(φ/2)|w0²)`, in a single pass and without anchoring.
pub fn apply_literal_kernel(kind: KernelKind, phi: f64, field: &ComplexField) -> Result<ComplexField> {
    let g = *field.grid();
    let (nx, ny) = (g.samples_x(), g.samples_y());
    let ay = match kind {
        KernelKind::Plus => phi,
        KernelKind::Minus => -phi,
    };
    let sx = ChirpStep::raw(phi, nx, g.half_window())?;
    let sy = ChirpStep::raw(ay, ny, g.half_window())?;
    let mut data = field.samples().to_vec();
    data.par_chunks_mut(nx)
        .for_each_init(Vec::new, |buf, row| sx.apply_row(row, buf));
    let mut t = transpose(&data, nx, ny);
    t.par_chunks_mut(ny)
        .for_each_init(Vec::new, |buf, row| sy.apply_row(row, buf));
    let mut data = transpose(&t, ny, nx);
    let minus_i = Complex64::new(0.0, -1.0);
    data.iter_mut().for_each(|v| *v *= minus_i);
    ComplexField::from_samples(g, *field.frame(), data)
}

/// Constant relating the literal kernel to the anchored one:
/// literal = convention × anchored.
pub fn literal_convention(kind: KernelKind, phi: f64) -> Complex64 {
    match kind {
        KernelKind::Plus => Complex64::from_polar((phi / 2.0).sin().signum(), -phi / 2.0),
        KernelKind::Minus => Complex64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PhysicalFrame;
    use crate::modes::{eval_hg, ModeIndex};

    fn grid() -> GridSpec {
        GridSpec::square(128, 6.0).unwrap()
    }

    #[test]
    fn routes() {
        let g = grid();
        let p = KernelPlan::s_plus(0.0, &g).unwrap();
        assert_eq!((p.route_x(), p.route_y()), (AxisRoute::Identity, AxisRoute::Identity));
        let p = KernelPlan::s_plus(2.0 * PI, &g).unwrap();
        assert_eq!(p.route_x(), AxisRoute::Parity);
        let p = KernelPlan::s_plus(PI, &g).unwrap();
        assert_eq!(p.route_x(), AxisRoute::Direct);
        let p = KernelPlan::s_plus(2.0 * PI - 0.05, &g).unwrap();
        assert_eq!(p.route_x(), AxisRoute::Split);
        let p = KernelPlan::s_plus(4.0 * PI, &g).unwrap();
        assert_eq!(p.route_x(), AxisRoute::Identity);
    }

    #[test]
    fn coarse_grid_reports_sampling_error() {
        let g = GridSpec::square(16, 6.0).unwrap();
        assert!(matches!(KernelPlan::s_plus(PI, &g), Err(Error::Sampling { .. })));
    }

    #[test]
    fn ground_mode_is_invariant() {
        let g = grid();
        let f = PhysicalFrame::unit();
        let u = eval_hg(ModeIndex::new(0, 0), &f, &g).unwrap();
        for phi in [0.7, PI, 2.5, 5.0, 9.0] {
            let out = apply_s_plus(&u, phi).unwrap();
            assert!(out.max_abs_diff(&u).unwrap() < 1e-9 * u.max_abs(), "phi = {phi}");
        }
    }

    #[test]
    fn grid_mismatch() {
        let f = PhysicalFrame::unit();
        let u = eval_hg(ModeIndex::new(0, 0), &f, &GridSpec::square(64, 6.0).unwrap()).unwrap();
        let plan = KernelPlan::s_plus(PI, &grid()).unwrap();
        assert!(matches!(plan.apply(&u), Err(Error::GridMismatch(_))));
    }
}
