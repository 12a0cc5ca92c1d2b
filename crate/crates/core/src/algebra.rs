//! The four passive generators on a truncated HG mode space.
//!
//! With ladder operators `a`, `b` for the x and y oscillators:
//!
//! ```text
//! N  = (a†a + b†b)/2      Lx = (a†a − b†b)/2
//! Ly = (a†b + ab†)/2      Lz = (a†b − ab†)/(2i)
//! ```
//!
//! `N` drops the zero-point constant, so `N|m,n⟩ = (m+n)/2 |m,n⟩`. The three
//! `L` satisfy `[La, Lb] = i ε_abc Lc` and all commute with `N`; every
//! generator is block diagonal in total order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::modes::{ModeIndex, ModeSpectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Lx,
    Ly,
    Lz,
    N,
}

/// Matrix of a generator in the HG basis `ModeIndex::all_up_to(max_order)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub kind: Generator,
    pub max_order: u32,
    pub basis: Vec<ModeIndex>,
    pub matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    /// Max elementwise |M − M†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let a = m - m.adjoint();
        a.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// `⟨row| G |col⟩` for indices of the same total order.
fn element(kind: Generator, row: ModeIndex, col: ModeIndex) -> Complex64 {
    let (m, n) = (col.nx as f64, col.ny as f64);
    let zero = Complex64::new(0.0, 0.0);
    if row.order() != col.order() {
        return zero;
    }
    match kind {
        Generator::N if row == col => Complex64::new((m + n) / 2.0, 0.0),
        Generator::Lx if row == col => Complex64::new((m - n) / 2.0, 0.0),
        Generator::N | Generator::Lx => zero,
        Generator::Ly | Generator::Lz => {
            // a†b raises nx; ab† lowers it.
            let raise = if row.nx == col.nx + 1 {
                ((m + 1.0) * n).sqrt()
            } else {
                0.0
            };
            let lower = if row.nx + 1 == col.nx {
                (m * (n + 1.0)).sqrt()
            } else {
                0.0
            };
            if kind == Generator::Ly {
                Complex64::new((raise + lower) / 2.0, 0.0)
            } else {
                // (raise − lower) / (2i)
                Complex64::new(0.0, -(raise - lower) / 2.0)
            }
        }
    }
}

fn block(kind: Generator, basis: &[ModeIndex]) -> DMatrix<Complex64> {
    DMatrix::from_fn(basis.len(), basis.len(), |r, c| element(kind, basis[r], basis[c]))
}

pub fn generator_matrix(kind: Generator, max_order: u32) -> OperatorMatrix {
    let basis = ModeIndex::all_up_to(max_order);
    let matrix = block(kind, &basis);
    OperatorMatrix {
        kind,
        max_order,
        basis,
        matrix,
    }
}

/// Unit vector u_r on the orbital Poincaré sphere.
pub fn poincare_axis(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// `L_{θ,φ} = u_r · (Lx, Ly, Lz)` restricted to one total order.
fn axis_block(theta: f64, phi: f64, order: u32) -> DMatrix<Complex64> {
    let basis: Vec<ModeIndex> = ModeIndex::of_order(order).collect();
    let [ux, uy, uz] = poincare_axis(theta, phi);
    block(Generator::Lx, &basis) * Complex64::new(ux, 0.0)
        + block(Generator::Ly, &basis) * Complex64::new(uy, 0.0)
        + block(Generator::Lz, &basis) * Complex64::new(uz, 0.0)
}

/// Applies `exp(−i·angle·L_{θ,φ})` order by order. Every order up to the
/// spectrum's `max_order` is present in the output.
pub fn rotate_spectrum(spectrum: &ModeSpectrum, theta: f64, phi: f64, angle: f64) -> ModeSpectrum {
    let mut out = ModeSpectrum::zeros(*spectrum.frame(), spectrum.max_order());
    for order in 0..=spectrum.max_order() {
        let basis: Vec<ModeIndex> = ModeIndex::of_order(order).collect();
        let v = nalgebra::DVector::from_iterator(basis.len(), basis.iter().map(|k| spectrum.get(*k)));
        let g = axis_block(theta, phi, order) * Complex64::new(0.0, -angle);
        let w = g.exp() * v;
        for (k, c) in basis.iter().zip(w.iter()) {
            out.set(*k, *c);
        }
    }
    out
}

/// Applies `exp(−i·angle·N)`: `C_{m,n} → C_{m,n}·e^{−i·angle·(m+n)/2}`.
pub fn gouy_advance(spectrum: &ModeSpectrum, angle: f64) -> ModeSpectrum {
    ModeSpectrum::new(
        *spectrum.frame(),
        spectrum
            .iter()
            .map(|(k, c)| (k, c * Complex64::from_polar(1.0, -angle * k.order() as f64 / 2.0))),
    )
}
