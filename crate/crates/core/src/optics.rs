//! First-order (ray-matrix) optics on the phase-space column (x, y, pₓ, p_y).
//!
//! Momenta are ray slopes (p = ƛ·kₓ), so free space of length d adds d·p to
//! the position and a thin lens of focal length f subtracts x/f from the
//! slope. In this convention the matrices S± come out exactly as
//!
//! ```text
//!        ⎡ c    0    z0·s    0   ⎤
//!   S± = ⎢ 0    c     0   ±z0·s  ⎥ ,  c = cos(φ/2), s = sin(φ/2).
//!        ⎢−s/z0 0     c      0   ⎥
//!        ⎣ 0  ∓s/z0   0      c   ⎦
//! ```

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::frame::PhysicalFrame;

/// Refractive index assigned to designed lenses. With ñ = 2 the radius of a
/// plano-convex lens, R = (ñ − 1)·f, equals its focal length.
pub const DESIGN_INDEX: f64 = 2.0;

/// Relative slack when checking that a design angle lies in [π, 3π].
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMatrix(pub Matrix4<f64>);

impl RayMatrix {
    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn minus_identity() -> Self {
        Self(-Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `self` followed by `next`: the product `next · self`.
    pub fn then(&self, next: &RayMatrix) -> RayMatrix {
        RayMatrix(next.0 * self.0)
    }

    pub fn max_abs_diff(&self, other: &RayMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }

    /// Max-entry difference with lengths in units of `length` (B entries
    /// divided, C entries multiplied), so all entries are comparable.
    pub fn scaled_diff(&self, other: &RayMatrix, length: f64) -> f64 {
        let d = Vector4::new(1.0 / length, 1.0 / length, 1.0, 1.0);
        let di = Vector4::new(length, length, 1.0, 1.0);
        (Matrix4::from_diagonal(&d) * (self.0 - other.0) * Matrix4::from_diagonal(&di))
            .abs()
            .max()
    }

    /// Transports a second-moment matrix: Σ → S Σ Sᵀ.
    pub fn transport(&self, moments: &Matrix4<f64>) -> Matrix4<f64> {
        self.0 * moments * self.0.transpose()
    }
}

/// Standard symplectic form for (x, y, pₓ, p_y).
pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = 1.0;
    j[(1, 3)] = 1.0;
    j[(2, 0)] = -1.0;
    j[(3, 1)] = -1.0;
    j
}

/// Max entry of |Mᵀ J M − J|.
pub fn is_symplectic(m: &RayMatrix) -> f64 {
    let j = symplectic_form();
    (m.0.transpose() * j * m.0 - j).abs().max()
}

fn s_matrix(phi: f64, y_sign: f64, frame: &PhysicalFrame) -> RayMatrix {
    let z0 = frame.z0();
    let (s, c) = (phi / 2.0).sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        c,        0.0,              z0 * s, 0.0,
        0.0,      c,                0.0,    y_sign * z0 * s,
        -s / z0,  0.0,              c,      0.0,
        0.0,      -y_sign * s / z0, 0.0,    c,
    );
    RayMatrix(m)
}

/// S₊(φ₊): the ray matrix of `exp(−iφ₊N)`.
pub fn s_plus(phi_plus: f64, frame: &PhysicalFrame) -> RayMatrix {
    s_matrix(phi_plus, 1.0, frame)
}

/// S₋(φ₋): the ray matrix of `exp(−iφ₋Lx)`.
pub fn s_minus(phi_minus: f64, frame: &PhysicalFrame) -> RayMatrix {
    s_matrix(phi_minus, -1.0, frame)
}

/// Lens radius of curvature; `Flat` is an explicit infinite radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Flat,
}

impl Radius {
    /// Optical power 1/f = (ñ − 1)/R.
    pub fn power(&self, index: f64) -> f64 {
        match self {
            Radius::Finite(r) => (index - 1.0) / r,
            Radius::Flat => 0.0,
        }
    }

    fn from_focal_length(f: Option<f64>, index: f64) -> Radius {
        match f {
            Some(f) => Radius::Finite((index - 1.0) * f),
            None => Radius::Flat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    SphericalLens {
        radius: Radius,
        index: f64,
    },
    /// Curved along the direction at `angle` from the x axis.
    CylindricalLens {
        radius: Radius,
        index: f64,
        angle: f64,
    },
    FreeSpace {
        distance: f64,
    },
    Parity,
}

/// One element of a train. The transverse offset only matters to the wave
/// propagator; ray matrices are offset independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalElement {
    pub kind: ElementKind,
    pub offset: (f64, f64),
}

impl OpticalElement {
    pub fn new(kind: ElementKind) -> Result<Self> {
        let lens_check = |radius: &Radius, index: f64| -> Result<()> {
            if let Radius::Finite(r) = radius {
                if *r == 0.0 || !r.is_finite() {
                    return Err(Error::InvalidElement(format!(
                        "lens radius must be finite and nonzero, got {r}"
                    )));
                }
            }
            if !index.is_finite() || index == 1.0 {
                return Err(Error::InvalidElement(format!(
                    "refractive index {index} gives no finite focal length"
                )));
            }
            Ok(())
        };
        match &kind {
            ElementKind::SphericalLens { radius, index } => lens_check(radius, *index)?,
            ElementKind::CylindricalLens { radius, index, angle } => {
                lens_check(radius, *index)?;
                if !angle.is_finite() {
                    return Err(Error::InvalidElement("cylinder angle must be finite".into()));
                }
            }
            ElementKind::FreeSpace { distance } => {
                if !(distance.is_finite() && *distance >= 0.0) {
                    return Err(Error::InvalidElement(format!(
                        "free-space distance must be ≥ 0, got {distance}"
                    )));
                }
            }
            ElementKind::Parity => {}
        }
        Ok(Self {
            kind,
            offset: (0.0, 0.0),
        })
    }

    pub fn free_space(distance: f64) -> Result<Self> {
        Self::new(ElementKind::FreeSpace { distance })
    }

    pub fn spherical(radius: Radius, index: f64) -> Result<Self> {
        Self::new(ElementKind::SphericalLens { radius, index })
    }

    pub fn cylindrical(radius: Radius, index: f64, angle: f64) -> Result<Self> {
        Self::new(ElementKind::CylindricalLens { radius, index, angle })
    }

    pub fn parity() -> Self {
        Self {
            kind: ElementKind::Parity,
            offset: (0.0, 0.0),
        }
    }

    pub fn with_offset(mut self, dx: f64, dy: f64) -> Self {
        self.offset = (dx, dy);
        self
    }

    /// Lens power as a symmetric 2×2 matrix acting on (x, y); zero for
    /// non-lens elements.
    pub fn power_matrix(&self) -> Matrix2<f64> {
        match self.kind {
            ElementKind::SphericalLens { radius, index } => Matrix2::identity() * radius.power(index),
            ElementKind::CylindricalLens { radius, index, angle } => {
                let (s, c) = angle.sin_cos();
                Matrix2::new(c * c, c * s, c * s, s * s) * radius.power(index)
            }
            _ => Matrix2::zeros(),
        }
    }

    pub fn focal_length(&self) -> Option<f64> {
        match self.kind {
            ElementKind::SphericalLens { radius, index } | ElementKind::CylindricalLens { radius, index, .. } => {
                let p = radius.power(index);
                (p != 0.0).then(|| 1.0 / p)
            }
            _ => None,
        }
    }
}

pub fn element_matrix(e: &OpticalElement) -> RayMatrix {
    let mut m = Matrix4::identity();
    match e.kind {
        ElementKind::SphericalLens { .. } | ElementKind::CylindricalLens { .. } => {
            let p = e.power_matrix();
            m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(-p));
        }
        ElementKind::FreeSpace { distance } => {
            m[(0, 2)] = distance;
            m[(1, 3)] = distance;
        }
        ElementKind::Parity => m = -m,
    }
    RayMatrix(m)
}

/// Elements in propagation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OpticalTrain {
    pub elements: Vec<OpticalElement>,
}

impl OpticalTrain {
    pub fn new(elements: Vec<OpticalElement>) -> Self {
        Self { elements }
    }

    pub fn total_length(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e.kind {
                ElementKind::FreeSpace { distance } => distance,
                _ => 0.0,
            })
            .sum()
    }

    /// Axial position of each element (free-space entries report their start).
    pub fn positions(&self) -> Vec<f64> {
        let mut z = 0.0;
        self.elements
            .iter()
            .map(|e| {
                let here = z;
                if let ElementKind::FreeSpace { distance } = e.kind {
                    z += distance;
                }
                here
            })
            .collect()
    }

    pub fn then(mut self, other: &OpticalTrain) -> OpticalTrain {
        self.elements.extend_from_slice(&other.elements);
        self
    }
}

/// Ordered product of the element matrices; identity for an empty train.
pub fn compose(train: &OpticalTrain) -> RayMatrix {
    train
        .elements
        .iter()
        .fold(RayMatrix::identity(), |acc, e| acc.then(&element_matrix(e)))
}

fn check_design_range(quantity: &'static str, phi: f64) -> Result<()> {
    let (lo, hi) = (PI, 3.0 * PI);
    if !(phi >= lo * (1.0 - RANGE_SLACK) && phi <= hi * (1.0 + RANGE_SLACK)) {
        return Err(Error::Range {
            quantity,
            value: phi,
            lo,
            hi,
            hint: "; cover the rest of [0, 4π) with the identity/minus-identity compensators",
        });
    }
    Ok(())
}

/// Focal lengths (f₁ = f₃, f₂) of the three-lens S₊ realization; `None`
/// marks the flat outer lenses at φ₊ = π.
pub fn s_plus_focal_lengths(phi_plus: f64, frame: &PhysicalFrame) -> (Option<f64>, f64) {
    let z0 = frame.z0();
    let outer_den = 1.0 - 1.0 / (phi_plus / 4.0).tan();
    let outer = (outer_den.abs() > 1e-12).then(|| z0 / outer_den);
    let middle = z0 / (2.0 - (phi_plus / 2.0).sin());
    (outer, middle)
}

/// Three spherical lenses at spacing z0 realizing S₊(φ₊), φ₊ ∈ [π, 3π].
pub fn design_s_plus(phi_plus: f64, frame: &PhysicalFrame) -> Result<OpticalTrain> {
    check_design_range("phi_plus", phi_plus)?;
    let z0 = frame.z0();
    let (outer, middle) = s_plus_focal_lengths(phi_plus, frame);
    let r_outer = Radius::from_focal_length(outer, DESIGN_INDEX);
    let r_middle = Radius::from_focal_length(Some(middle), DESIGN_INDEX);
    Ok(OpticalTrain::new(vec![
        OpticalElement::spherical(r_outer, DESIGN_INDEX)?,
        OpticalElement::free_space(z0)?,
        OpticalElement::spherical(r_middle, DESIGN_INDEX)?,
        OpticalElement::free_space(z0)?,
        OpticalElement::spherical(r_outer, DESIGN_INDEX)?,
    ]))
}

/// Scissor-pair angles of the S₋ realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScissorAngles {
    pub omega: f64,
    pub alpha_outer: f64,
    pub alpha_middle: f64,
}

/// Solves cot(φ₋/4) = −2 sin(Ω/2) for Ω ∈ [−π/3, π/3] by bisection.
pub fn scissor_angles(phi_minus: f64) -> Result<ScissorAngles> {
    check_design_range("phi_minus", phi_minus)?;
    let cot = 1.0 / (phi_minus / 4.0).tan();
    let g = |omega: f64| 2.0 * (omega / 2.0).sin() + cot;
    let omega = bisect(g, -PI / 3.0, PI / 3.0, 1e-12).ok_or(Error::Range {
        quantity: "phi_minus",
        value: phi_minus,
        lo: PI,
        hi: 3.0 * PI,
        hint: "; scissor constraint has no root in [−π/3, π/3]",
    })?;
    Ok(ScissorAngles {
        omega,
        alpha_outer: (PI - omega) / 4.0,
        alpha_middle: (3.0 * PI - phi_minus) / 4.0,
    })
}

/// Root of a monotone `g` on [lo, hi] to absolute tolerance `tol`. Endpoint
/// roots within rounding of zero are accepted.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo.abs() < 1e-14 {
        return Some(lo);
    }
    if ghi.abs() < 1e-14 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Three scissor pairs of cylindrical lenses spaced z0/2 realizing S₋(φ₋),
/// φ₋ ∈ [π, 3π]. Outer pairs have f = z0/2, the middle pair f = z0/4.
pub fn design_s_minus(phi_minus: f64, frame: &PhysicalFrame) -> Result<OpticalTrain> {
    let angles = scissor_angles(phi_minus)?;
    let z0 = frame.z0();
    let outer = Radius::from_focal_length(Some(z0 / 2.0), DESIGN_INDEX);
    let middle = Radius::from_focal_length(Some(z0 / 4.0), DESIGN_INDEX);
    let pair = |r: Radius, a: f64| -> Result<[OpticalElement; 2]> {
        Ok([
            OpticalElement::cylindrical(r, DESIGN_INDEX, a)?,
            OpticalElement::cylindrical(r, DESIGN_INDEX, -a)?,
        ])
    };
    let mut elements = Vec::with_capacity(8);
    elements.extend(pair(outer, angles.alpha_outer)?);
    elements.push(OpticalElement::free_space(z0 / 2.0)?);
    elements.extend(pair(middle, angles.alpha_middle)?);
    elements.push(OpticalElement::free_space(z0 / 2.0)?);
    elements.extend(pair(outer, angles.alpha_outer)?);
    Ok(OpticalTrain::new(elements))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompensatorTarget {
    Identity,
    MinusIdentity,
}

impl CompensatorTarget {
    pub fn matrix(&self) -> RayMatrix {
        match self {
            CompensatorTarget::Identity => RayMatrix::identity(),
            CompensatorTarget::MinusIdentity => RayMatrix::minus_identity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorDesign {
    pub train: OpticalTrain,
    pub focal_length: f64,
    /// Max-entry defect of the composed matrix against the target.
    pub residual: f64,
}

/// Identical lenses on a fixed arm: `n` lenses at spacing L/n with end gaps L/(2n).
fn compensator_train(f: f64, lens_count: usize, arm_length: f64) -> Result<OpticalTrain> {
    let gap = arm_length / lens_count as f64;
    let radius = Radius::from_focal_length(Some(f), DESIGN_INDEX);
    let mut elements = vec![OpticalElement::free_space(gap / 2.0)?];
    for i in 0..lens_count {
        elements.push(OpticalElement::spherical(radius, DESIGN_INDEX)?);
        let d = if i + 1 == lens_count { gap / 2.0 } else { gap };
        elements.push(OpticalElement::free_space(d)?);
    }
    Ok(OpticalTrain::new(elements))
}

/// Finds the common focal length of `lens_count` identical equally spaced
/// spherical lenses on an arm of fixed length whose composed matrix is the
/// target. Candidates are the sign changes of the x-block B entry over a
/// log-spaced scan of f ∈ [0.05·z0, 20·z0], each refined by bisection and
/// accepted only if the whole matrix matches to 1e−9.
pub fn solve_compensator(
    target: CompensatorTarget,
    lens_count: usize,
    arm_length: f64,
    frame: &PhysicalFrame,
) -> Result<CompensatorDesign> {
    let z0 = frame.z0();
    let (lo, hi) = (0.05 * z0, 20.0 * z0);
    if lens_count == 0 || !(arm_length.is_finite() && arm_length > 0.0) {
        return Err(Error::NoSolution {
            lo,
            hi,
            best_defect: f64::INFINITY,
        });
    }
    let target_m = target.matrix();
    let matrix_at = |f: f64| -> RayMatrix { compose(&compensator_train(f, lens_count, arm_length).expect("valid f")) };
    let b_entry = |f: f64| matrix_at(f).0[(0, 2)] / arm_length;

    const SCAN: usize = 4000;
    let ratio = (hi / lo).ln();
    let fs: Vec<f64> = (0..=SCAN)
        .map(|i| lo * (ratio * i as f64 / SCAN as f64).exp())
        .collect();
    let mut best_defect = f64::INFINITY;
    for w in fs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (b_entry(a), b_entry(b));
        if ga.signum() == gb.signum() && ga != 0.0 {
            continue;
        }
        let Some(f) = bisect(b_entry, a, b, 1e-15 * z0) else {
            continue;
        };
        let residual = matrix_at(f).max_abs_diff(&target_m);
        best_defect = best_defect.min(residual);
        if residual < 1e-9 {
            return Ok(CompensatorDesign {
                train: compensator_train(f, lens_count, arm_length)?,
                focal_length: f,
                residual,
            });
        }
    }
    Err(Error::NoSolution { lo, hi, best_defect })
}

/// Operation curve of S₊: rows (φ₊, R₁ = R₃, R₂) with radii at the design
/// index; `None` for the flat outer lens.
pub fn s_plus_operation_curve(samples: usize, frame: &PhysicalFrame) -> Vec<(f64, Option<f64>, f64)> {
    sweep(samples)
        .map(|phi| {
            let (outer, middle) = s_plus_focal_lengths(phi, frame);
            (
                phi,
                outer.map(|f| f * (DESIGN_INDEX - 1.0)),
                middle * (DESIGN_INDEX - 1.0),
            )
        })
        .collect()
}

/// Operation curve of S₋: rows (φ₋, Ω, α₁ = α₃, α₂).
pub fn s_minus_operation_curve(samples: usize) -> Result<Vec<(f64, ScissorAngles)>> {
    sweep(samples).map(|phi| Ok((phi, scissor_angles(phi)?))).collect()
}

/// `samples` equally spaced angles spanning [π, 3π] inclusive.
pub fn sweep(samples: usize) -> impl Iterator<Item = f64> {
    let n = samples.max(2);
    (0..samples).map(move |i| PI + 2.0 * PI * i as f64 / (n - 1) as f64)
}
