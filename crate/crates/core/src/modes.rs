//! Hermite-Gaussian and Laguerre-Gaussian modes at the waist plane, and the
//! overlap-integral decomposition of sampled fields onto the HG basis.
//!
//! Modes use the width parameter `w0` of the frame: the ground mode is
//! `sqrt(2/π)/w0 · exp(-(x²+y²)/w0²)`. LG modes carry `exp(+ilφ)`; in the
//! normalization of the mode-space generators, `Lz` then has eigenvalue `l/2`,
//! i.e. half the orbital angular momentum index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{ComplexField, GridSpec, PhysicalFrame};

/// Negative weights in `[-CLAMP_THRESHOLD, 0)` are treated as quadrature noise.
pub const CLAMP_THRESHOLD: f64 = 1e-6;

/// HG mode label `(nx, ny)`. Ordered by total order, then by `nx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub nx: u32,
    pub ny: u32,
}

impl ModeIndex {
    pub const fn new(nx: u32, ny: u32) -> Self {
        Self { nx, ny }
    }

    pub fn order(&self) -> u32 {
        self.nx + self.ny
    }

    /// Every index with `nx + ny <= max_order`, in canonical order.
    pub fn all_up_to(max_order: u32) -> Vec<ModeIndex> {
        (0..=max_order).flat_map(Self::of_order).collect()
    }

    /// The `order + 1` indices of one total order, by increasing `nx`.
    pub fn of_order(order: u32) -> impl Iterator<Item = ModeIndex> {
        (0..=order).map(move |nx| ModeIndex::new(nx, order - nx))
    }
}

impl Ord for ModeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.order(), self.nx).cmp(&(other.order(), other.nx))
    }
}

impl PartialOrd for ModeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Normalized Hermite functions ψ_0..ψ_nmax at `xi`, with
/// ∫ψ_m ψ_n dξ = δ_mn. The polynomial part is carried with a running log
/// scale so that high orders far from the axis neither overflow nor lose the
/// Gaussian factor to underflow.
pub fn hermite_functions(nmax: usize, xi: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    let gauss_log = -0.5 * xi * xi;
    let mut log_scale = 0.0_f64;
    let mut prev = 0.0_f64;
    let mut cur = PI.powf(-0.25);
    out[0] = cur * gauss_log.exp();
    for n in 0..nmax {
        let next = (2.0 / (n as f64 + 1.0)).sqrt() * xi * cur - (n as f64 / (n as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        out[n + 1] = cur * (gauss_log + log_scale).exp();
    }
    out
}

/// 1D HG mode functions of order `0..=nmax` on physical coordinate `x`,
/// normalized so that ∫u_n(x)² dx = 1.
fn hg_1d(nmax: usize, x: f64, w0: f64) -> Vec<f64> {
    let scale = (2.0 / (w0 * w0)).powf(0.25);
    let xi = std::f64::consts::SQRT_2 * x / w0;
    let mut h = hermite_functions(nmax, xi);
    h.iter_mut().for_each(|v| *v *= scale);
    h
}

/// Value of the normalized HG mode at a physical point.
pub fn hg_value(index: ModeIndex, frame: &PhysicalFrame, x: f64, y: f64) -> f64 {
    let hx = hg_1d(index.nx as usize, x, frame.w0());
    let hy = hg_1d(index.ny as usize, y, frame.w0());
    hx[index.nx as usize] * hy[index.ny as usize]
}

/// Value of the normalized LG mode `(p, l)` at a physical point.
pub fn lg_value(p: u32, l: i32, frame: &PhysicalFrame, x: f64, y: f64) -> Complex64 {
    let w0 = frame.w0();
    let al = l.unsigned_abs();
    let r2 = (x * x + y * y) / (w0 * w0);
    let t = 2.0 * r2;
    // norm = sqrt(2 p! / (π (p+|l|)!)) / w0, accumulated in log form
    let log_ratio: f64 = (p + 1..=p + al).map(|k| (k as f64).ln()).sum();
    let log_norm = 0.5 * ((2.0 / PI).ln() - log_ratio) - w0.ln();
    let lag = laguerre(p as usize, al as f64, t);
    let radial_log = if al == 0 { 0.0 } else { 0.5 * al as f64 * t.ln() };
    let mag = if t == 0.0 && al > 0 {
        0.0
    } else {
        lag * (log_norm + radial_log - r2).exp()
    };
    Complex64::from_polar(1.0, l as f64 * y.atan2(x)) * mag
}

/// Generalized Laguerre polynomial L_p^α(t) by the three-term recurrence.
fn laguerre(p: usize, alpha: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - t;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - t) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Checks that `grid` can represent 1D HG functions up to `order` on both axes.
///
/// Two rules: the window must reach two waists beyond the classical turning
/// point `sqrt(n + 1/2)·w0`, and the spacing must resolve twice the highest
/// local wavenumber `sqrt(2(2n+1))/w0`.
pub fn check_resolution(grid: &GridSpec, order: u32) -> Result<()> {
    let n = order as f64;
    let needed_window = (n + 0.5).sqrt() + 2.0;
    if grid.half_window() < needed_window {
        return Err(Error::Resolution {
            order: order as usize,
            rule: format!(
                "half_window {} w0 < {:.3} w0 (turning point + 2 w0)",
                grid.half_window(),
                needed_window
            ),
        });
    }
    let needed_density = 2.0 * (2.0 * (2.0 * n + 1.0)).sqrt() / PI;
    let density = 1.0 / grid.dx().max(grid.dy());
    if density < needed_density {
        return Err(Error::Resolution {
            order: order as usize,
            rule: format!("{density:.3} samples per w0 < {needed_density:.3} (twice the highest local wavenumber)"),
        });
    }
    Ok(())
}

/// Samples of the 1D HG functions on one grid axis: `table[n][i] = u_n(x_i)`.
struct AxisTable {
    rows: Vec<Vec<f64>>,
}

impl AxisTable {
    fn new(nmax: usize, coords_w0: &[f64], w0: f64) -> Self {
        let cols: Vec<Vec<f64>> = coords_w0.par_iter().map(|&x| hg_1d(nmax, x * w0, w0)).collect();
        let rows = (0..=nmax).map(|n| cols.iter().map(|c| c[n]).collect()).collect();
        Self { rows }
    }
}

/// Normalized HG mode `u_{nx,ny}` sampled on `grid`.
pub fn eval_hg(index: ModeIndex, frame: &PhysicalFrame, grid: &GridSpec) -> Result<ComplexField> {
    check_resolution(grid, index.nx.max(index.ny))?;
    let w0 = frame.w0();
    let tx = AxisTable::new(index.nx as usize, &grid.xs(), w0);
    let ty = AxisTable::new(index.ny as usize, &grid.ys(), w0);
    let ux = &tx.rows[index.nx as usize];
    let uy = &ty.rows[index.ny as usize];
    let nx = grid.samples_x();
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    data.par_chunks_mut(nx).zip(uy.par_iter()).for_each(|(row, &vy)| {
        for (v, &vx) in row.iter_mut().zip(ux) {
            *v = Complex64::new(vx * vy, 0.0);
        }
    });
    ComplexField::from_samples(*grid, *frame, data)
}

/// Normalized LG mode `(p, l)` sampled on `grid`.
pub fn eval_lg(p: u32, l: i32, frame: &PhysicalFrame, grid: &GridSpec) -> Result<ComplexField> {
    check_resolution(grid, 2 * p + l.unsigned_abs())?;
    let frame = *frame;
    Ok(ComplexField::from_fn(*grid, frame, move |x, y| {
        lg_value(p, l, &frame, x, y)
    }))
}

/// Complex HG coefficients `C_{nx,ny}` of a field, truncated at `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    frame: PhysicalFrame,
    max_order: u32,
    entries: BTreeMap<ModeIndex, Complex64>,
}

impl ModeSpectrum {
    pub fn new(frame: PhysicalFrame, entries: impl IntoIterator<Item = (ModeIndex, Complex64)>) -> Self {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        let max_order = entries.keys().map(|k| k.order()).max().unwrap_or(0);
        Self {
            frame,
            max_order,
            entries,
        }
    }

    /// Zero coefficients for every index up to `max_order`.
    pub fn zeros(frame: PhysicalFrame, max_order: u32) -> Self {
        Self {
            frame,
            max_order,
            entries: ModeIndex::all_up_to(max_order)
                .into_iter()
                .map(|i| (i, Complex64::new(0.0, 0.0)))
                .collect(),
        }
    }

    pub fn single(frame: PhysicalFrame, index: ModeIndex) -> Self {
        Self::new(frame, [(index, Complex64::new(1.0, 0.0))])
    }

    pub fn frame(&self) -> &PhysicalFrame {
        &self.frame
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn get(&self, index: ModeIndex) -> Complex64 {
        self.entries.get(&index).copied().unwrap_or_default()
    }

    pub fn set(&mut self, index: ModeIndex, value: Complex64) {
        self.max_order = self.max_order.max(index.order());
        self.entries.insert(index, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Σ|C|².
    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidRecipe("cannot normalize an empty spectrum".into()));
        }
        let s = 1.0 / n.sqrt();
        self.entries.values_mut().for_each(|c| *c *= s);
        Ok(self)
    }

    /// Weights |C|²; these are nonnegative by construction.
    pub fn weights(&self) -> WeightSpectrum {
        WeightSpectrum {
            entries: self.entries.iter().map(|(k, c)| (*k, c.norm_sqr())).collect(),
            clamped_mass: 0.0,
        }
    }

    /// Largest coefficient difference over the union of both index sets.
    pub fn max_abs_diff(&self, other: &ModeSpectrum) -> f64 {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .map(|k| (self.get(*k) - other.get(*k)).norm())
            .fold(0.0, f64::max)
    }
}

/// Nonnegative mode weights 𝓟_{nx,ny}.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightSpectrum {
    entries: BTreeMap<ModeIndex, f64>,
    clamped_mass: f64,
}

impl WeightSpectrum {
    /// Clamps noise-level negatives (≥ −1e−6) to zero and records the removed
    /// mass; anything more negative is an error.
    pub fn from_raw(raw: impl IntoIterator<Item = (ModeIndex, f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut clamped_mass = 0.0;
        for (k, w) in raw {
            if !w.is_finite() {
                return Err(Error::NegativeWeight {
                    nx: k.nx,
                    ny: k.ny,
                    value: w,
                });
            }
            if w < -CLAMP_THRESHOLD {
                return Err(Error::NegativeWeight {
                    nx: k.nx,
                    ny: k.ny,
                    value: w,
                });
            }
            if w < 0.0 {
                clamped_mass += -w;
                entries.insert(k, 0.0);
            } else {
                entries.insert(k, w);
            }
        }
        Ok(Self { entries, clamped_mass })
    }

    /// Clamps every negative weight. Returns the spectrum together with the
    /// most negative raw value (0 if none).
    pub fn clamp_all(raw: impl IntoIterator<Item = (ModeIndex, f64)>) -> (Self, f64) {
        let mut entries = BTreeMap::new();
        let mut clamped_mass = 0.0;
        let mut worst = 0.0_f64;
        for (k, w) in raw {
            if w < 0.0 {
                clamped_mass += -w;
                worst = worst.min(w);
                entries.insert(k, 0.0);
            } else {
                entries.insert(k, w);
            }
        }
        (Self { entries, clamped_mass }, worst)
    }

    pub fn get(&self, index: ModeIndex) -> f64 {
        self.entries.get(&index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn clamped_mass(&self) -> f64 {
        self.clamped_mass
    }

    pub fn max_order(&self) -> u32 {
        self.entries.keys().map(|k| k.order()).max().unwrap_or(0)
    }

    /// Restriction to indices of total order ≤ `max_order`.
    pub fn truncated(&self, max_order: u32) -> WeightSpectrum {
        WeightSpectrum {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| k.order() <= max_order)
                .map(|(k, v)| (*k, *v))
                .collect(),
            clamped_mass: self.clamped_mass,
        }
    }

    /// Largest per-mode difference over the union of both index sets.
    pub fn max_abs_diff(&self, other: &WeightSpectrum) -> f64 {
        self.entries
            .keys()
            .chain(other.entries.keys())
            .map(|k| (self.get(*k) - other.get(*k)).abs())
            .fold(0.0, f64::max)
    }

    /// Total-variation distance ½Σ|a − b| over the union of both index sets.
    pub fn total_variation(&self, other: &WeightSpectrum) -> f64 {
        let mut keys: Vec<ModeIndex> = self.entries.keys().chain(other.entries.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        0.5 * keys.iter().map(|k| (self.get(*k) - other.get(*k)).abs()).sum::<f64>()
    }
}

/// Result of projecting a field onto the HG basis.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub spectrum: ModeSpectrum,
    /// Grid norm of ψ − Σ C u over the retained modes.
    pub residual: f64,
}

/// Overlap coefficients `C = ⟨u_{nx,ny}, ψ⟩` for all `nx + ny <= max_order`.
pub fn decompose(field: &ComplexField, max_order: u32) -> Result<Decomposition> {
    let grid = *field.grid();
    let frame = *field.frame();
    check_resolution(&grid, max_order)?;
    let nmax = max_order as usize;
    let w0 = frame.w0();
    let tx = AxisTable::new(nmax, &grid.xs(), w0);
    let ty = AxisTable::new(nmax, &grid.ys(), w0);
    let nx = grid.samples_x();
    let dx = grid.dx() * w0;
    let dy = grid.dy() * w0;

    // partial[j][m] = Σ_i u_m(x_i) ψ(x_i, y_j)
    let partial: Vec<Vec<Complex64>> = field
        .samples()
        .par_chunks(nx)
        .map(|row| {
            tx.rows
                .iter()
                .map(|um| um.iter().zip(row).map(|(u, v)| v * *u).sum::<Complex64>())
                .collect()
        })
        .collect();

    let indices = ModeIndex::all_up_to(max_order);
    let coeffs: Vec<Complex64> = indices
        .par_iter()
        .map(|idx| {
            let un = &ty.rows[idx.ny as usize];
            let m = idx.nx as usize;
            partial.iter().zip(un).map(|(p, u)| p[m] * *u).sum::<Complex64>() * (dx * dy)
        })
        .collect();
    let spectrum = ModeSpectrum {
        frame,
        max_order,
        entries: indices.into_iter().zip(coeffs).collect(),
    };
    let approx = synthesize_with_tables(&spectrum, &grid, &tx, &ty);
    let residual = field.l2_distance(&approx)?;
    Ok(Decomposition { spectrum, residual })
}

/// ψ = Σ C u on `grid`.
pub fn synthesize(spectrum: &ModeSpectrum, grid: &GridSpec) -> Result<ComplexField> {
    let max_1d = spectrum.iter().map(|(k, _)| k.nx.max(k.ny)).max().unwrap_or(0);
    check_resolution(grid, max_1d)?;
    let w0 = spectrum.frame.w0();
    let tx = AxisTable::new(max_1d as usize, &grid.xs(), w0);
    let ty = AxisTable::new(max_1d as usize, &grid.ys(), w0);
    Ok(synthesize_with_tables(spectrum, grid, &tx, &ty))
}

fn synthesize_with_tables(spectrum: &ModeSpectrum, grid: &GridSpec, tx: &AxisTable, ty: &AxisTable) -> ComplexField {
    let nx = grid.samples_x();
    let mmax = tx.rows.len();
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    data.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        // s[m] = Σ_n C_{m,n} u_n(y_j)
        let mut s = vec![Complex64::new(0.0, 0.0); mmax];
        for (k, c) in spectrum.iter() {
            s[k.nx as usize] += c * ty.rows[k.ny as usize][j];
        }
        for (m, sm) in s.iter().enumerate() {
            if *sm == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, u) in row.iter_mut().zip(&tx.rows[m]) {
                *v += sm * *u;
            }
        }
    });
    ComplexField::from_samples(*grid, spectrum.frame, data).expect("grid length matches")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec::square(128, 8.0).unwrap()
    }

    #[test]
    fn mode_index_ordering_is_order_then_nx() {
        let idx = ModeIndex::all_up_to(2);
        let pairs: Vec<(u32, u32)> = idx.iter().map(|i| (i.nx, i.ny)).collect();
        assert_eq!(pairs, vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
    }

    #[test]
    fn hermite_functions_match_closed_forms() {
        let xi = 0.7_f64;
        let h = hermite_functions(3, xi);
        let g = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
        assert!((h[0] - g).abs() < 1e-15);
        assert!((h[1] - g * 2.0 * xi / 2.0_f64.sqrt()).abs() < 1e-15);
        let h2 = (4.0 * xi * xi - 2.0) / (8.0_f64).sqrt();
        assert!((h[2] - g * h2).abs() < 1e-15);
        let h3 = (8.0 * xi.powi(3) - 12.0 * xi) / (48.0_f64).sqrt();
        assert!((h[3] - g * h3).abs() < 1e-14);
    }

    #[test]
    fn hermite_functions_survive_high_order() {
        // near the turning point of order 300 the Gaussian factor alone underflows
        let h = hermite_functions(300, 24.0);
        assert!(h.iter().all(|v| v.is_finite()));
        assert!(h[300].abs() > 1e-3);
        let tail = hermite_functions(300, 60.0);
        assert!(tail.iter().all(|v| v.is_finite() && v.abs() < 1e-100));
    }

    #[test]
    fn ground_mode_is_positive_gaussian_with_peak_on_axis() {
        let f = PhysicalFrame::unit();
        let u0 = hg_value(ModeIndex::new(0, 0), &f, 0.0, 0.0);
        assert!((u0 - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!(hg_value(ModeIndex::new(0, 0), &f, 0.3, -0.2) < u0);
        let field = eval_hg(ModeIndex::new(0, 0), &f, &small_grid()).unwrap();
        assert!(field.samples().iter().all(|v| v.re > 0.0 && v.im == 0.0));
        assert!((field.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn first_mode_is_odd_in_x_even_in_y() {
        let f = PhysicalFrame::unit();
        let m = ModeIndex::new(1, 0);
        assert_eq!(hg_value(m, &f, 0.0, 0.0), 0.0);
        assert!((hg_value(m, &f, 0.4, 0.3) + hg_value(m, &f, -0.4, 0.3)).abs() < 1e-15);
        assert!((hg_value(m, &f, 0.4, 0.3) - hg_value(m, &f, 0.4, -0.3)).abs() < 1e-15);
    }

    #[test]
    fn lg_ground_equals_hg_ground() {
        let f = PhysicalFrame::new(1.3, 0.2).unwrap();
        let g = GridSpec::square(64, 8.0).unwrap();
        let a = eval_hg(ModeIndex::new(0, 0), &f, &g).unwrap();
        let b = eval_lg(0, 0, &f, &g).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12 * a.max_abs());
    }

    #[test]
    fn lg_vortex_has_dark_core_and_ring() {
        let f = PhysicalFrame::unit();
        assert_eq!(lg_value(0, 1, &f, 0.0, 0.0).norm(), 0.0);
        let r = 1.0 / 2.0_f64.sqrt(); // ring of LG_{0,1} at w0/√2
        let on_ring = lg_value(0, 1, &f, r, 0.0).norm();
        for a in [0.3, 1.7, 4.0] {
            let v = lg_value(0, 1, &f, r * f64::cos(a), r * f64::sin(a)).norm();
            assert!((v - on_ring).abs() < 1e-14);
        }
        assert!(lg_value(0, 1, &f, 0.3 * r, 0.0).norm() < on_ring);
        assert!(lg_value(0, 1, &f, 2.0 * r, 0.0).norm() < on_ring);
    }

    #[test]
    fn resolution_rule_rejects_coarse_grid() {
        let f = PhysicalFrame::unit();
        let narrow = GridSpec::square(256, 3.0).unwrap();
        assert!(matches!(
            eval_hg(ModeIndex::new(10, 0), &f, &narrow),
            Err(Error::Resolution { order: 10, .. })
        ));
        let sparse = GridSpec::square(16, 8.0).unwrap();
        assert!(matches!(
            eval_hg(ModeIndex::new(8, 0), &f, &sparse),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn decompose_zero_field() {
        let f = PhysicalFrame::unit();
        let z = ComplexField::zeros(small_grid(), f);
        let d = decompose(&z, 4).unwrap();
        assert_eq!(d.residual, 0.0);
        assert!(d.spectrum.iter().all(|(_, c)| c.norm() == 0.0));
        assert_eq!(d.spectrum.len(), 15);
    }

    #[test]
    fn decompose_pure_mode() {
        let f = PhysicalFrame::unit();
        let u = eval_hg(ModeIndex::new(1, 0), &f, &small_grid()).unwrap();
        let d = decompose(&u, 4).unwrap();
        for (k, c) in d.spectrum.iter() {
            if k == ModeIndex::new(1, 0) {
                assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-8);
            } else {
                assert!(c.norm() < 1e-8, "{k:?} {c}");
            }
        }
        assert!(d.residual < 1e-8);
    }

    #[test]
    fn decompose_rejects_frame_or_resolution_problems() {
        let f = PhysicalFrame::unit();
        let narrow = GridSpec::square(64, 3.0).unwrap();
        let z = ComplexField::zeros(narrow, f);
        assert!(decompose(&z, 12).is_err());
    }

    #[test]
    fn weight_clamping_threshold() {
        let ok = WeightSpectrum::from_raw([(ModeIndex::new(0, 0), 1.0), (ModeIndex::new(1, 0), -5e-7)]).unwrap();
        assert_eq!(ok.get(ModeIndex::new(1, 0)), 0.0);
        assert!((ok.clamped_mass() - 5e-7).abs() < 1e-20);
        assert!(matches!(
            WeightSpectrum::from_raw([(ModeIndex::new(2, 0), -1e-3)]),
            Err(Error::NegativeWeight { nx: 2, ny: 0, .. })
        ));
    }

    #[test]
    fn diagonal_superposition_is_rotated_first_mode() {
        let f = PhysicalFrame::unit();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = ModeSpectrum::new(
            f,
            [
                (ModeIndex::new(1, 0), Complex64::new(s, 0.0)),
                (ModeIndex::new(0, 1), Complex64::new(s, 0.0)),
            ],
        );
        let field = synthesize(&spec, &small_grid()).unwrap();
        // lobes along the diagonal, node along the anti-diagonal
        let g = small_grid();
        let n = g.samples_x();
        for i in 0..n {
            assert!(field.at(i, n - 1 - i).norm() < 1e-15);
        }
        let a = field.at(n / 2 + 10, n / 2 + 10).re;
        let b = field.at(n / 2 - 11, n / 2 - 11).re;
        assert!(a > 0.0 && (a + b).abs() < 1e-14);
    }
}
