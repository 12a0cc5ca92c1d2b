use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modespec::beams::{load_beam, showcase};
use modespec::interferometer::{measurement_arm_length, scan, scan_analytic, scan_train, LensOffset};
use modespec::io::{self, FileFormat};
use modespec::modes;
use modespec::optics::{
    compose, design_s_minus, design_s_plus, s_minus, s_minus_operation_curve, s_plus, s_plus_operation_curve,
    solve_compensator, CompensatorTarget,
};
use modespec::reconstruction::{loglog_slope, reconstruct_hg, sampling_bound};
use modespec::{
    BeamRecipe, CompensatorSetting, ComplexField, Engine, IntensityScan, ModeIndex, ModeSpectrum, ScanConfig,
    WeightSpectrum,
};
use num_complex::Complex64;

use crate::{tables, Common, ToleranceFailure};

const DESIGN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Beam file, a showcase name (astigmatic, necklace, multiring),
    /// `hg:M,N` or `random`.
    #[arg(long)]
    pub beam: String,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Rows per operation curve, spread evenly over [π, 3π] inclusive.
    #[arg(long, default_value_t = 51)]
    pub samples: usize,

    /// φ₊ of the written S₊ train.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub phi_plus: f64,

    /// φ₋ of the written S₋ train.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub phi_minus: f64,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub beam: String,

    /// Also run the analytic engine and report the largest deviation.
    #[arg(long)]
    pub cross_check: bool,

    /// Order of the decomposition that feeds the analytic engine.
    #[arg(long, default_value_t = 30)]
    pub analytic_order: u32,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Identity-compensated scan CSV.
    #[arg(long)]
    pub identity: PathBuf,

    /// Minus-identity-compensated scan CSV.
    #[arg(long)]
    pub parity: PathBuf,

    /// Oracle spectrum or weight CSV for a per-mode error table.
    #[arg(long)]
    pub compare: Option<PathBuf>,

    /// Ask for complex coefficients (only weights are recoverable).
    #[arg(long)]
    pub coefficients: bool,
}

#[derive(Debug, Args)]
pub struct MisalignmentArgs {
    #[arg(long, default_value = "hg:0,0")]
    pub beam: String,

    /// Displacements of the middle S₊ lens along x in units of w0.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1])]
    pub deltas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Weight or spectrum CSV.
    pub a: PathBuf,

    /// Weight or spectrum CSV.
    pub b: PathBuf,

    /// Fail (exit 1) if the largest per-mode error exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
}

fn max_order(common: &Common) -> u32 {
    common
        .max_order
        .unwrap_or_else(|| sampling_bound(common.k_plus.min(common.k_minus)))
}

/// Random band-limited spectrum with complex Gaussian-like coefficients.
fn random_spectrum(common: &Common) -> Result<ModeSpectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let frame = common.frame()?;
    let entries: Vec<(ModeIndex, Complex64)> = ModeIndex::all_up_to(max_order(common))
        .into_iter()
        .map(|k| {
            (
                k,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    Ok(ModeSpectrum::new(frame, entries).normalized()?)
}

fn resolve_beam(spec: &str, common: &Common) -> Result<BeamRecipe> {
    if let Some((_, r)) = showcase().into_iter().find(|(name, _)| *name == spec) {
        return Ok(r);
    }
    if spec == "random" {
        return Ok(BeamRecipe::CoefficientList(random_spectrum(common)?));
    }
    if let Some(idx) = spec.strip_prefix("hg:") {
        let (m, n) = idx
            .split_once(',')
            .and_then(|(m, n)| Some((m.trim().parse().ok()?, n.trim().parse().ok()?)))
            .with_context(|| format!("expected hg:M,N, got '{spec}'"))?;
        return Ok(BeamRecipe::CoefficientList(ModeSpectrum::single(
            common.frame()?,
            ModeIndex::new(m, n),
        )));
    }
    Ok(load_beam(Path::new(spec))?)
}

fn realize(spec: &str, common: &Common) -> Result<ComplexField> {
    let recipe = resolve_beam(spec, common)?;
    Ok(recipe.realize(&common.frame()?, &common.grid_spec()?)?)
}

fn read_weights(path: &Path) -> Result<WeightSpectrum> {
    Ok(match io::detect_format(path)? {
        FileFormat::WeightsCsv => io::read_weights_csv(path)?,
        FileFormat::SpectrumCsv => io::read_spectrum_csv(path)?.weights(),
        other => {
            return Err(modespec::Error::UnknownFormat {
                path: path.to_path_buf(),
                message: format!("{other:?} holds no mode weights"),
            }
            .into())
        }
    })
}

struct Comparison {
    rows: Vec<(ModeIndex, f64, f64)>,
    max_error: f64,
    total_variation: f64,
}

fn compare_weights(a: &WeightSpectrum, b: &WeightSpectrum) -> Comparison {
    let keys: BTreeSet<ModeIndex> = a.iter().chain(b.iter()).map(|(k, _)| k).collect();
    let rows: Vec<(ModeIndex, f64, f64)> = keys.into_iter().map(|k| (k, a.get(k), b.get(k))).collect();
    Comparison {
        max_error: rows.iter().map(|r| (r.1 - r.2).abs()).fold(0.0, f64::max),
        total_variation: a.total_variation(b),
        rows,
    }
}

fn write_comparison(path: &Path, c: &Comparison) -> Result<()> {
    let mut s = String::from("nx,ny,a,b,abs_error\n");
    for (k, x, y) in &c.rows {
        writeln!(s, "{},{},{x:?},{y:?},{:?}", k.nx, k.ny, (x - y).abs())?;
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn decompose(common: &Common, args: &DecomposeArgs) -> Result<()> {
    let field = realize(&args.beam, common)?;
    let order = max_order(common);
    let d = modes::decompose(&field, order)?;
    let out = &common.out;
    io::write_spectrum_csv(&out.join("spectrum.csv"), &d.spectrum)?;
    let weights = d.spectrum.weights();
    io::write_weights_csv(&out.join("weights.csv"), &weights)?;
    tables::write_weights(&out.join("weights.dat"), &weights)?;
    let summary = format!(
        "max_order={order}\nresidual={:?}\ncaptured_power={:?}\n",
        d.residual,
        weights.total()
    );
    write_text(&out.join("decompose.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn design_lenses(common: &Common, args: &DesignArgs) -> Result<()> {
    let frame = common.frame()?;
    let z0 = frame.z0();
    let out = &common.out;
    let mut worst = 0.0_f64;

    let mut rows = Vec::new();
    let mut csv = String::from("# radii in units of z0; inf marks a flat surface\nphi,R1,R2,defect\n");
    for (phi, r1, r2) in s_plus_operation_curve(args.samples, &frame) {
        let defect = compose(&design_s_plus(phi, &frame)?).scaled_diff(&s_plus(phi, &frame), z0);
        worst = worst.max(defect);
        let r1 = r1.map_or(f64::INFINITY, |r| r / z0);
        writeln!(csv, "{phi:?},{r1:?},{:?},{defect:?}", r2 / z0)?;
        rows.push(vec![phi, r1, r2 / z0, defect]);
    }
    write_text(&out.join("s_plus_curve.csv"), &csv)?;
    tables::write_columns(&out.join("s_plus_curve.dat"), &["phi", "R1", "R2", "defect"], &rows)?;

    let mut rows = Vec::new();
    let mut csv =
        String::from("# angles in radians; alpha1 outer pairs, alpha2 middle pair\nphi,Omega,alpha1,alpha2,defect\n");
    for (phi, a) in s_minus_operation_curve(args.samples)? {
        let defect = compose(&design_s_minus(phi, &frame)?).scaled_diff(&s_minus(phi, &frame), z0);
        worst = worst.max(defect);
        writeln!(
            csv,
            "{phi:?},{:?},{:?},{:?},{defect:?}",
            a.omega, a.alpha_outer, a.alpha_middle
        )?;
        rows.push(vec![phi, a.omega, a.alpha_outer, a.alpha_middle, defect]);
    }
    write_text(&out.join("s_minus_curve.csv"), &csv)?;
    tables::write_columns(
        &out.join("s_minus_curve.dat"),
        &["phi", "Omega", "alpha1", "alpha2", "defect"],
        &rows,
    )?;

    let plus = design_s_plus(args.phi_plus, &frame)?;
    let minus = design_s_minus(args.phi_minus, &frame)?;
    io::write_train_csv(&out.join("s_plus_train.csv"), &plus, &frame)?;
    io::write_train_csv(&out.join("s_minus_train.csv"), &minus, &frame)?;
    let arm = measurement_arm_length(&frame);
    let ident = solve_compensator(CompensatorTarget::Identity, 4, arm, &frame)?;
    let parity = solve_compensator(CompensatorTarget::MinusIdentity, 2, arm, &frame)?;
    io::write_train_csv(&out.join("compensator_identity.csv"), &ident.train, &frame)?;
    io::write_train_csv(&out.join("compensator_minus_identity.csv"), &parity.train, &frame)?;

    let (f1, f2) = modespec::optics::s_plus_focal_lengths(args.phi_plus, &frame);
    let mut summary = String::new();
    writeln!(
        summary,
        "w0 = {:?} m, lambdabar = {:?} m, z0 = {:?} m",
        frame.w0(),
        frame.lambdabar(),
        z0
    )?;
    writeln!(summary, "lens index = {}", modespec::optics::DESIGN_INDEX)?;
    writeln!(
        summary,
        "S+ at phi = {:?}: outer R = {}, middle R = {:?} (m)",
        args.phi_plus,
        f1.map_or("flat".to_string(), |f| format!(
            "{:?}",
            f * (modespec::optics::DESIGN_INDEX - 1.0)
        )),
        f2 * (modespec::optics::DESIGN_INDEX - 1.0)
    )?;
    let a = modespec::optics::scissor_angles(args.phi_minus)?;
    writeln!(
        summary,
        "S- at phi = {:?}: Omega = {:?}, alpha1 = {:?}, alpha2 = {:?} (rad)",
        args.phi_minus, a.omega, a.alpha_outer, a.alpha_middle
    )?;
    writeln!(
        summary,
        "identity compensator: 4 lenses, f = {:?} m, defect {:e}",
        ident.focal_length, ident.residual
    )?;
    writeln!(
        summary,
        "minus-identity compensator: 2 lenses, f = {:?} m, defect {:e}",
        parity.focal_length, parity.residual
    )?;
    writeln!(summary, "max curve defect = {worst:e}")?;
    write_text(&out.join("design_summary.txt"), &summary)?;
    print!("{summary}");
    if worst >= DESIGN_TOLERANCE {
        return Err(ToleranceFailure(format!("design defect {worst:e} exceeds {DESIGN_TOLERANCE:e}")).into());
    }
    Ok(())
}

/// Identity and minus-identity scans. Coefficient-list beams feed the
/// analytic engine directly; anything else is decomposed first.
fn scan_pair(
    recipe: &BeamRecipe,
    field: &ComplexField,
    cfg: &ScanConfig,
    analytic_order: u32,
) -> Result<[IntensityScan; 2]> {
    let one = |c: CompensatorSetting| -> Result<IntensityScan> {
        let cfg = cfg.with_compensator(c);
        Ok(match recipe {
            BeamRecipe::CoefficientList(s) if cfg.engine == Engine::Analytic => {
                scan_analytic(&ModeSpectrum::new(*field.frame(), s.iter()).normalized()?, &cfg)?
            }
            _ => scan(field, &cfg, analytic_order)?,
        })
    };
    Ok([
        one(CompensatorSetting::Identity)?,
        one(CompensatorSetting::MinusIdentity)?,
    ])
}

pub fn simulate_scan(common: &Common, args: &ScanArgs) -> Result<()> {
    let recipe = resolve_beam(&args.beam, common)?;
    let field = recipe.realize(&common.frame()?, &common.grid_spec()?)?;
    let cfg = common.scan_config();
    let out = &common.out;
    let pair = scan_pair(&recipe, &field, &cfg, args.analytic_order)?;
    for (s, name) in pair.iter().zip(["identity", "minus_identity"]) {
        io::write_scan_csv(&out.join(format!("scan_{name}.csv")), s)?;
        tables::write_scan(&out.join(format!("scan_{name}.dat")), s)?;
    }
    println!(
        "wrote {}x{} scans ({} engine) to {}",
        cfg.k_plus,
        cfg.k_minus,
        cfg.engine,
        out.display()
    );
    if args.cross_check {
        let reference = scan_pair(&recipe, &field, &cfg.with_engine(Engine::Analytic), args.analytic_order)?;
        let dev = pair[0]
            .max_abs_diff(&reference[0])?
            .max(pair[1].max_abs_diff(&reference[1])?);
        let text = format!("engine={}\nreference=analytic\nmax_deviation={dev:?}\n", cfg.engine);
        write_text(&out.join("cross_check.txt"), &text)?;
        print!("{text}");
    }
    Ok(())
}

pub fn reconstruct(common: &Common, args: &ReconstructArgs) -> Result<()> {
    if args.coefficients {
        eprintln!("warning: the scans determine mode weights only; coefficient phases are not recoverable");
    }
    let identity = io::read_scan_csv(&args.identity)?;
    let parity = io::read_scan_csv(&args.parity)?;
    let order = common
        .max_order
        .unwrap_or_else(|| sampling_bound(identity.k_plus().min(identity.k_minus())));
    let report = reconstruct_hg(&identity, &parity, order)?;
    let out = &common.out;
    io::write_weights_csv(&out.join("weights.csv"), &report.weights)?;
    tables::write_weights(&out.join("weights.dat"), &report.weights)?;
    io::write_report_json(&out.join("report.json"), &report)?;
    println!(
        "max_order={} residual={:e} clamped_mass={:e} sampling_ok={}",
        report.max_order, report.residual, report.clamped_mass, report.sampling_ok
    );
    if !report.sampling_ok {
        eprintln!("warning: sampling_ok is false; weights may be aliased or the scans inconsistent");
    }
    if report.mixed_engines {
        eprintln!("warning: the two scans come from different engines");
    }
    if let Some(path) = &args.compare {
        let oracle = read_weights(path)?;
        let c = compare_weights(&report.weights, &oracle.truncated(order));
        write_comparison(&out.join("compare.csv"), &c)?;
        println!("max_error={:e} total_variation={:e}", c.max_error, c.total_variation);
    }
    Ok(())
}

pub fn misalignment_study(common: &Common, args: &MisalignmentArgs) -> Result<()> {
    let field = realize(&args.beam, common)?;
    let frame = common.frame()?;
    let order = max_order(common);
    let oracle = modes::decompose(&field, order)?.spectrum.weights();
    let cfg = common.scan_config().with_engine(Engine::LensTrain);
    let mut rows = Vec::new();
    for &delta in &args.deltas {
        let offsets = [LensOffset::s_plus_middle(delta * frame.w0())];
        let identity = scan_train(&field, &cfg.with_compensator(CompensatorSetting::Identity), &offsets)?;
        let parity = scan_train(
            &field,
            &cfg.with_compensator(CompensatorSetting::MinusIdentity),
            &offsets,
        )?;
        let report = reconstruct_hg(&identity, &parity, order)?;
        let error = compare_weights(&report.weights, &oracle).max_error;
        println!("delta/w0={delta:e} error={error:e}");
        rows.push(vec![delta, error]);
    }
    let mut csv = String::from("delta_over_w0,max_weight_error\n");
    for r in &rows {
        writeln!(csv, "{:?},{:?}", r[0], r[1])?;
    }
    write_text(&common.out.join("misalignment.csv"), &csv)?;
    tables::write_columns(
        &common.out.join("misalignment.dat"),
        &["delta_over_w0", "max_weight_error"],
        &rows,
    )?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
    let fit = match loglog_slope(&pts) {
        Some(s) => format!("slope={s:?}\n"),
        None => "slope=nan\n".to_string(),
    };
    write_text(&common.out.join("misalignment_fit.txt"), &fit)?;
    print!("{fit}");
    Ok(())
}

pub fn compare(common: &Common, args: &CompareArgs) -> Result<()> {
    let a = read_weights(&args.a)?;
    let b = read_weights(&args.b)?;
    let c = compare_weights(&a, &b);
    write_comparison(&common.out.join("compare.csv"), &c)?;
    println!("max_error={:e} total_variation={:e}", c.max_error, c.total_variation);
    if let Some(tol) = args.tol {
        if c.max_error.is_nan() || c.max_error > tol {
            return Err(ToleranceFailure(format!("max per-mode error {:e} exceeds {tol:e}", c.max_error)).into());
        }
    }
    Ok(())
}
