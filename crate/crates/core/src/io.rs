//! File formats: spectrum and weight CSVs, the binary field container, field
//! CSV, scan CSV, train CSV, beam recipes and the reconstruction report.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! text format reproduces values bit-for-bit on reading.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::beams::BeamRecipe;
use crate::error::{Error, Result};
use crate::frame::{ComplexField, GridSpec, PhysicalFrame};
use crate::interferometer::{CompensatorSetting, Engine, IntensityScan};
use crate::modes::{ModeIndex, ModeSpectrum, WeightSpectrum};
use crate::optics::{ElementKind, OpticalTrain, Radius};
use crate::reconstruction::ReconstructionReport;

pub const FIELD_MAGIC: &[u8; 4] = b"MSPC";
pub const FIELD_VERSION: u32 = 1;
pub const FIELD_HEADER_LEN: usize = 64;

const EXPECTED: &str = "expected an MSPC field container, a field CSV (x,y,re,im), a spectrum CSV \
(nx,ny,re,im), a weight CSV (nx,ny,weight), a scan CSV (phi_plus,phi_minus,delta_i) or a key=value recipe";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    FieldBinary,
    FieldCsv,
    SpectrumCsv,
    WeightsCsv,
    ScanCsv,
    TrainCsv,
    Recipe,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Identifies a file from its magic bytes or first meaningful line.
pub fn detect_format(path: &Path) -> Result<FileFormat> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(FIELD_MAGIC) {
        return Ok(FileFormat::FieldBinary);
    }
    let unknown = |message: String| Error::UnknownFormat {
        path: path.to_path_buf(),
        message,
    };
    let text = std::str::from_utf8(&bytes).map_err(|_| unknown(format!("unrecognized binary data; {EXPECTED}")))?;
    for line in text.lines().map(str::trim) {
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if c.trim_start().starts_with("compensator=") {
                return Ok(FileFormat::ScanCsv);
            }
            continue;
        }
        let header: String = line.chars().filter(|c| !c.is_whitespace()).collect();
        return match header.as_str() {
            "x,y,re,im" => Ok(FileFormat::FieldCsv),
            "nx,ny,re,im" => Ok(FileFormat::SpectrumCsv),
            "nx,ny,weight" => Ok(FileFormat::WeightsCsv),
            "phi_plus,phi_minus,delta_i" => Ok(FileFormat::ScanCsv),
            h if h.starts_with("kind,") => Ok(FileFormat::TrainCsv),
            h if h.contains('=') => Ok(FileFormat::Recipe),
            h => {
                let fields: Vec<&str> = h.split(',').collect();
                let numeric = fields.iter().all(|f| f.parse::<f64>().is_ok());
                match (numeric, fields.len()) {
                    (true, 4) => Ok(FileFormat::SpectrumCsv),
                    (true, 3) => Ok(FileFormat::WeightsCsv),
                    _ => Err(unknown(format!("unrecognized first line '{line}'; {EXPECTED}"))),
                }
            }
        };
    }
    Err(unknown(format!("file is empty; {EXPECTED}")))
}

/// Splits a CSV line, returning each field with its 1-based column.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in line.char_indices() {
        if c == ',' {
            out.push((start + 1, &line[start..i]));
            start = i + 1;
        }
    }
    out.push((start + 1, &line[start..]));
    out.into_iter()
        .map(|(col, f)| {
            let lead = f.len() - f.trim_start().len();
            (col + lead, f.trim())
        })
        .collect()
}

struct CsvRows<'a> {
    path: String,
    rows: Vec<(usize, Vec<(usize, &'a str)>)>,
    comments: Vec<(usize, &'a str)>,
}

impl<'a> CsvRows<'a> {
    /// Data rows of `text`, skipping blanks, `#` comments and an optional
    /// header equal to `header`.
    fn parse(path: &Path, text: &'a str, header: &str, width: usize) -> Result<Self> {
        let path = display(path);
        let mut rows = Vec::new();
        let mut comments = Vec::new();
        let mut seen_data = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() {
                continue;
            }
            if let Some(c) = line.trim_start().strip_prefix('#') {
                comments.push((line_no, c.trim()));
                continue;
            }
            let f = fields(line);
            if !seen_data && f.iter().map(|x| x.1).collect::<Vec<_>>().join(",") == header {
                seen_data = true;
                continue;
            }
            seen_data = true;
            if f.len() != width {
                return Err(Error::parse(
                    &path,
                    line_no,
                    1,
                    format!("expected {width} comma-separated fields ({header}), found {}", f.len()),
                ));
            }
            rows.push((line_no, f));
        }
        Ok(Self { path, rows, comments })
    }

    fn float(&self, line: usize, field: (usize, &str)) -> Result<f64> {
        field.1.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
            Error::parse(
                &self.path,
                line,
                field.0,
                format!("'{}' is not a finite number", field.1),
            )
        })
    }

    fn index(&self, line: usize, field: (usize, &str)) -> Result<u32> {
        field.1.parse::<u32>().map_err(|_| {
            Error::parse(
                &self.path,
                line,
                field.0,
                format!("'{}' is not a non-negative mode index", field.1),
            )
        })
    }
}

pub fn write_spectrum_csv(path: &Path, spectrum: &ModeSpectrum) -> Result<()> {
    let mut s = String::from("nx,ny,re,im\n");
    for (k, c) in spectrum.iter() {
        writeln!(s, "{},{},{:?},{:?}", k.nx, k.ny, c.re, c.im).unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

/// Reads a spectrum CSV; coefficients are dimensionless so the result
/// carries the unit frame.
pub fn read_spectrum_csv(path: &Path) -> Result<ModeSpectrum> {
    let text = fs::read_to_string(path)?;
    let csv = CsvRows::parse(path, &text, "nx,ny,re,im", 4)?;
    let mut entries = BTreeMap::new();
    for (line, f) in &csv.rows {
        let k = ModeIndex::new(csv.index(*line, f[0])?, csv.index(*line, f[1])?);
        let c = Complex64::new(csv.float(*line, f[2])?, csv.float(*line, f[3])?);
        if entries.insert(k, c).is_some() {
            return Err(Error::parse(
                &csv.path,
                *line,
                1,
                format!("duplicate mode ({},{})", k.nx, k.ny),
            ));
        }
    }
    if entries.is_empty() {
        return Err(Error::parse(&csv.path, 1, 1, "no spectrum rows"));
    }
    Ok(ModeSpectrum::new(PhysicalFrame::unit(), entries))
}

pub fn write_weights_csv(path: &Path, weights: &WeightSpectrum) -> Result<()> {
    let mut s = String::from("nx,ny,weight\n");
    for (k, w) in weights.iter() {
        writeln!(s, "{},{},{:?}", k.nx, k.ny, w).unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_weights_csv(path: &Path) -> Result<WeightSpectrum> {
    let text = fs::read_to_string(path)?;
    let csv = CsvRows::parse(path, &text, "nx,ny,weight", 3)?;
    let mut raw = Vec::with_capacity(csv.rows.len());
    for (line, f) in &csv.rows {
        raw.push((
            ModeIndex::new(csv.index(*line, f[0])?, csv.index(*line, f[1])?),
            csv.float(*line, f[2])?,
        ));
    }
    WeightSpectrum::from_raw(raw)
}

pub fn write_field_binary(path: &Path, field: &ComplexField) -> Result<()> {
    let g = field.grid();
    let mut buf = Vec::with_capacity(FIELD_HEADER_LEN + 16 * g.len());
    buf.extend_from_slice(FIELD_MAGIC);
    buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.samples_x() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.samples_y() as u64).to_le_bytes());
    buf.extend_from_slice(&g.half_window().to_le_bytes());
    buf.extend_from_slice(&field.frame().w0().to_le_bytes());
    buf.extend_from_slice(&field.frame().lambdabar().to_le_bytes());
    buf.resize(FIELD_HEADER_LEN, 0);
    for v in field.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_field_binary(path: &Path) -> Result<ComplexField> {
    let bytes = fs::read(path)?;
    let p = display(path);
    if !bytes.starts_with(FIELD_MAGIC) {
        return Err(Error::UnknownFormat {
            path: path.to_path_buf(),
            message: format!("missing MSPC magic; {EXPECTED}"),
        });
    }
    if bytes.len() < FIELD_HEADER_LEN {
        return Err(Error::parse(&p, 1, bytes.len() + 1, "truncated header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FIELD_VERSION {
        return Err(Error::parse(
            &p,
            1,
            5,
            format!("unsupported container version {version}"),
        ));
    }
    let (nx, ny) = (u64_at(8) as usize, u64_at(16) as usize);
    let bad_header = |e: Error| Error::parse(&p, 1, 9, e.to_string());
    let grid = GridSpec::new(nx, ny, f64_at(24)).map_err(bad_header)?;
    let frame = PhysicalFrame::new(f64_at(32), f64_at(40)).map_err(|e| Error::parse(&p, 1, 33, e.to_string()))?;
    let expected = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(FIELD_HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::parse(
            &p,
            1,
            FIELD_HEADER_LEN + 1,
            format!(
                "payload size {} does not match a {nx}x{ny} field",
                bytes.len() - FIELD_HEADER_LEN
            ),
        ));
    }
    let data = bytes[FIELD_HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    ComplexField::from_samples(grid, frame, data)
}

/// Field CSV with coordinates in units of w0; the frame is recorded in
/// `# w0=` and `# lambdabar=` comment lines.
pub fn write_field_csv(path: &Path, field: &ComplexField) -> Result<()> {
    let g = field.grid();
    let mut s = format!(
        "# w0={:?}\n# lambdabar={:?}\nx,y,re,im\n",
        field.frame().w0(),
        field.frame().lambdabar()
    );
    let (xs, ys) = (g.xs(), g.ys());
    for (iy, y) in ys.iter().enumerate() {
        for (ix, x) in xs.iter().enumerate() {
            let v = field.at(ix, iy);
            writeln!(s, "{x:?},{y:?},{:?},{:?}", v.re, v.im).unwrap();
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_field_csv(path: &Path) -> Result<ComplexField> {
    let text = fs::read_to_string(path)?;
    let csv = CsvRows::parse(path, &text, "x,y,re,im", 4)?;
    let mut w0 = 1.0;
    let mut lambdabar = 0.5;
    for (line, c) in &csv.comments {
        if let Some((k, v)) = c.split_once('=') {
            let parse = || {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::parse(
                        &csv.path,
                        *line,
                        1,
                        format!("bad value '{}' for {}", v.trim(), k.trim()),
                    )
                })
            };
            match k.trim() {
                "w0" => w0 = parse()?,
                "lambdabar" => lambdabar = parse()?,
                _ => {}
            }
        }
    }
    let frame = PhysicalFrame::new(w0, lambdabar).map_err(|e| Error::parse(&csv.path, 1, 1, e.to_string()))?;
    let mut pts = Vec::with_capacity(csv.rows.len());
    for (line, f) in &csv.rows {
        pts.push((
            *line,
            csv.float(*line, f[0])?,
            csv.float(*line, f[1])?,
            Complex64::new(csv.float(*line, f[2])?, csv.float(*line, f[3])?),
        ));
    }
    let distinct = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        v
    };
    let xs = distinct(pts.iter().map(|p| p.1).collect());
    let ys = distinct(pts.iter().map(|p| p.2).collect());
    let (nx, ny) = (xs.len(), ys.len());
    if nx < 2 || ny < 2 || nx * ny != pts.len() {
        return Err(Error::parse(
            &csv.path,
            1,
            1,
            format!(
                "{} rows do not form a rectangular grid ({nx} x values, {ny} y values)",
                pts.len()
            ),
        ));
    }
    let dx = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
    let dy = (ys[ny - 1] - ys[0]) / (ny - 1) as f64;
    let half = nx as f64 * dx / 2.0;
    if (ny as f64 * dy / 2.0 - half).abs() > 1e-9 * half {
        return Err(Error::parse(
            &csv.path,
            1,
            1,
            "x and y windows differ; only square windows are supported",
        ));
    }
    let grid = GridSpec::new(nx, ny, half).map_err(|e| Error::parse(&csv.path, 1, 1, e.to_string()))?;
    let (gx, gy) = (grid.xs(), grid.ys());
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut filled = vec![false; grid.len()];
    for (line, x, y, v) in pts {
        let ix = ((x - gx[0]) / dx).round();
        let iy = ((y - gy[0]) / dy).round();
        let ok = |i: f64, n: usize, axis: &[f64], c: f64, d: f64| {
            i >= 0.0 && (i as usize) < n && (axis[i as usize] - c).abs() < 1e-6 * d
        };
        if !ok(ix, nx, &gx, x, dx) || !ok(iy, ny, &gy, y, dy) {
            return Err(Error::parse(
                &csv.path,
                line,
                1,
                format!("point ({x}, {y}) is off the centred grid"),
            ));
        }
        let i = iy as usize * nx + ix as usize;
        if filled[i] {
            return Err(Error::parse(&csv.path, line, 1, format!("duplicate point ({x}, {y})")));
        }
        filled[i] = true;
        data[i] = v;
    }
    ComplexField::from_samples(grid, frame, data)
}

/// Reads either field format.
pub fn read_field(path: &Path) -> Result<ComplexField> {
    match detect_format(path)? {
        FileFormat::FieldBinary => read_field_binary(path),
        FileFormat::FieldCsv => read_field_csv(path),
        other => Err(Error::UnknownFormat {
            path: path.to_path_buf(),
            message: format!("expected a field file, found {other:?}"),
        }),
    }
}

pub fn write_scan_csv(path: &Path, scan: &IntensityScan) -> Result<()> {
    let mut s = format!(
        "# compensator={}\n# engine={}\n# K_plus={}\n# K_minus={}\nphi_plus,phi_minus,delta_i\n",
        scan.compensator,
        scan.engine,
        scan.k_plus(),
        scan.k_minus()
    );
    for (i, a) in scan.phi_plus.iter().enumerate() {
        for (j, b) in scan.phi_minus.iter().enumerate() {
            writeln!(s, "{a:?},{b:?},{:?}", scan.get(i, j)).unwrap();
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_scan_csv(path: &Path) -> Result<IntensityScan> {
    let text = fs::read_to_string(path)?;
    let csv = CsvRows::parse(path, &text, "phi_plus,phi_minus,delta_i", 3)?;
    let mut compensator = None;
    let mut engine = None;
    let mut k_plus = None;
    let mut k_minus = None;
    for (line, c) in &csv.comments {
        let Some((k, v)) = c.split_once('=') else { continue };
        let (k, v) = (k.trim(), v.trim());
        let err = |m: String| Error::parse(&csv.path, *line, 1, m);
        match k {
            "compensator" => compensator = Some(v.parse::<CompensatorSetting>().map_err(err)?),
            "engine" => engine = Some(v.parse::<Engine>().map_err(err)?),
            "K_plus" => k_plus = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
            "K_minus" => k_minus = Some(v.parse::<usize>().map_err(|e| err(e.to_string()))?),
            _ => {}
        }
    }
    let missing = |what: &str| Error::parse(&csv.path, 1, 1, format!("missing '# {what}=' header line"));
    let compensator = compensator.ok_or_else(|| missing("compensator"))?;
    let engine = engine.ok_or_else(|| missing("engine"))?;
    let kp = k_plus.ok_or_else(|| missing("K_plus"))?;
    let km = k_minus.ok_or_else(|| missing("K_minus"))?;
    if csv.rows.len() != kp * km || kp == 0 || km == 0 {
        return Err(Error::parse(
            &csv.path,
            1,
            1,
            format!("{} data rows for a {kp}x{km} scan", csv.rows.len()),
        ));
    }
    let mut phi_plus = Vec::with_capacity(kp);
    let mut phi_minus = Vec::with_capacity(km);
    let mut values = Vec::with_capacity(kp * km);
    for (r, (line, f)) in csv.rows.iter().enumerate() {
        let (a, b, v) = (
            csv.float(*line, f[0])?,
            csv.float(*line, f[1])?,
            csv.float(*line, f[2])?,
        );
        let (i, j) = (r / km, r % km);
        if j == 0 {
            phi_plus.push(a);
        } else if a != phi_plus[i] {
            return Err(Error::parse(
                &csv.path,
                *line,
                f[0].0,
                "phi_plus changes within a row of the scan grid",
            ));
        }
        if i == 0 {
            phi_minus.push(b);
        } else if b != phi_minus[j] {
            return Err(Error::parse(
                &csv.path,
                *line,
                f[1].0,
                "phi_minus differs from the first row",
            ));
        }
        values.push(v);
    }
    Ok(IntensityScan {
        phi_plus,
        phi_minus,
        values,
        compensator,
        engine,
    })
}

/// Train table: axial lengths in units of z0, offsets in units of w0.
pub fn write_train_csv(path: &Path, train: &OpticalTrain, frame: &PhysicalFrame) -> Result<()> {
    let z0 = frame.z0();
    let w0 = frame.w0();
    let radius = |r: Radius| match r {
        Radius::Finite(v) => format!("{:?}", v / z0),
        Radius::Flat => "flat".to_string(),
    };
    let mut s = String::from(
        "# lengths in units of z0, offsets in units of w0\nkind,param1,param2,angle,offset_x,offset_y,position\n",
    );
    for (e, pos) in train.elements.iter().zip(train.positions()) {
        let (kind, p1, p2, angle) = match e.kind {
            ElementKind::SphericalLens { radius: r, index } => ("spherical", radius(r), format!("{index:?}"), 0.0),
            ElementKind::CylindricalLens {
                radius: r,
                index,
                angle,
            } => ("cylindrical", radius(r), format!("{index:?}"), angle),
            ElementKind::FreeSpace { distance } => ("free", format!("{:?}", distance / z0), String::new(), 0.0),
            ElementKind::Parity => ("parity", String::new(), String::new(), 0.0),
        };
        writeln!(
            s,
            "{kind},{p1},{p2},{angle:?},{:?},{:?},{:?}",
            e.offset.0 / w0,
            e.offset.1 / w0,
            pos / z0
        )
        .unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_report_json(path: &Path, report: &ReconstructionReport) -> Result<()> {
    let s = serde_json::to_string_pretty(&report.summary()).expect("plain struct serializes");
    fs::write(path, s + "\n")?;
    Ok(())
}

/// Parses `key=value` recipe text (`#` starts a comment).
pub fn parse_recipe(path: &Path, text: &str) -> Result<BeamRecipe> {
    let p = display(path);
    let mut keys: BTreeMap<String, (usize, usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::parse(&p, i + 1, 1, "expected key=value"));
        };
        let key = line[..eq].trim().to_string();
        let value = &line[eq + 1..];
        let col = eq + 2 + (value.len() - value.trim_start().len());
        if keys
            .insert(key.clone(), (i + 1, col, value.trim().to_string()))
            .is_some()
        {
            return Err(Error::parse(&p, i + 1, 1, format!("duplicate key '{key}'")));
        }
    }
    let get = |k: &str| keys.get(k);
    let num = |k: &str, default: Option<f64>| -> Result<f64> {
        match get(k) {
            Some((line, col, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(&p, *line, *col, format!("'{v}' is not a finite number for {k}"))),
            None => default.ok_or_else(|| Error::parse(&p, 1, 1, format!("missing key '{k}'"))),
        }
    };
    let list = |k: &str| -> Result<Vec<f64>> {
        let (line, col, v) = get(k).ok_or_else(|| Error::parse(&p, 1, 1, format!("missing key '{k}'")))?;
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(&p, *line, *col, format!("'{}' is not a number in {k}", x.trim())))
            })
            .collect()
    };
    let (tline, tcol, kind) = get("type").ok_or_else(|| Error::parse(&p, 1, 1, "missing key 'type'"))?;
    let allowed: &[&str] = match kind.as_str() {
        "astigmatic" => &["type", "wx", "wy", "tilt"],
        "necklace" => &["type", "poles", "r0", "width"],
        "multiring" => &["type", "radii", "amplitudes", "ellipticity", "width"],
        other => {
            return Err(Error::parse(
                &p,
                *tline,
                *tcol,
                format!("unknown beam type '{other}' (expected astigmatic, necklace or multiring)"),
            ))
        }
    };
    if let Some((k, (line, _, _))) = keys.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        return Err(Error::parse(&p, *line, 1, format!("unknown key '{k}' for type={kind}")));
    }
    let recipe = match kind.as_str() {
        "astigmatic" => BeamRecipe::AstigmaticGaussian {
            wx: num("wx", None)?,
            wy: num("wy", None)?,
            tilt: num("tilt", Some(0.0))?,
        },
        "necklace" => {
            let (line, col, v) = get("poles").ok_or_else(|| Error::parse(&p, 1, 1, "missing key 'poles'"))?;
            let poles = v
                .parse::<u32>()
                .map_err(|_| Error::parse(&p, *line, *col, format!("'{v}' is not a pole count")))?;
            BeamRecipe::Necklace {
                poles,
                r0: num("r0", None)?,
                width: num("width", None)?,
            }
        }
        _ => BeamRecipe::Multiring {
            radii: list("radii")?,
            amplitudes: list("amplitudes")?,
            ellipticity: num("ellipticity", Some(0.0))?,
            width: num("width", None)?,
        },
    };
    recipe.validate()?;
    Ok(recipe)
}

pub fn read_recipe(path: &Path) -> Result<BeamRecipe> {
    parse_recipe(path, &fs::read_to_string(path)?)
}

pub fn write_recipe(path: &Path, recipe: &BeamRecipe) -> Result<()> {
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    let s = match recipe {
        BeamRecipe::AstigmaticGaussian { wx, wy, tilt } => {
            format!("type=astigmatic\nwx={wx:?}\nwy={wy:?}\ntilt={tilt:?}\n")
        }
        BeamRecipe::Necklace { poles, r0, width } => {
            format!("type=necklace\npoles={poles}\nr0={r0:?}\nwidth={width:?}\n")
        }
        BeamRecipe::Multiring {
            radii,
            amplitudes,
            ellipticity,
            width,
        } => format!(
            "type=multiring\nradii={}\namplitudes={}\nellipticity={ellipticity:?}\nwidth={width:?}\n",
            join(radii),
            join(amplitudes)
        ),
        BeamRecipe::CoefficientList(s) => return write_spectrum_csv(path, s),
        BeamRecipe::SampledField(src) => {
            fs::copy(src, path)?;
            return Ok(());
        }
    };
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_columns() {
        assert_eq!(fields("1, 2,x"), vec![(1, "1"), (4, "2"), (6, "x")]);
    }

    #[test]
    fn recipe_errors_carry_positions() {
        let p = Path::new("r.txt");
        let e = parse_recipe(p, "type=necklace\npoles=six\nr0=1\nwidth=0.5\n").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 7)),
            other => panic!("{other}"),
        }
        assert!(parse_recipe(p, "type=blob\n").is_err());
        assert!(parse_recipe(p, "type=necklace\npoles=6\nr0=1\nwidth=0.5\ncolour=red\n").is_err());
        let ok = parse_recipe(
            p,
            "# showcase\ntype=multiring\nradii=0, 1.5\namplitudes=1,0.6\nwidth=0.6\n",
        )
        .unwrap();
        assert!(matches!(ok, BeamRecipe::Multiring { ref radii, .. } if radii == &vec![0.0, 1.5]));
    }
}
