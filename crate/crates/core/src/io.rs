//! File formats.
//!
//! Samples CSV: header `hx,hy,hz,rx,ry,rz,rho_deg,value[,sigma]` (or `rho_rad`
//! when angles are stored in radians); lines starting with `#` are comments.
//! Floats are written with 17 significant digits.
//!
//! Model JSON, tagged by `type`:
//! `{"type":"uniform"}`,
//! `{"type":"rbf","components":[{"kernel":"dlvp","kappa":4,"center":[q0,q1,q2,q3],"weight":1}]}`,
//! `{"type":"harmonic","L":4,"coeffs":[[l,m,n,value],...]}`.
//!
//! Coefficient CSV: header `l,m,n,value`, even `l` only.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dir3, Quat};
use crate::harmonics::{CoeffTable, HarmonicOdf};
use crate::kernels::{KernelKind, KernelSpec};
use crate::reconstruction::{OdfModel, RbfComponent, RbfMixture, SampleRecord};

/// Directions whose norm is within this of one are renormalized on input.
pub const DIRECTION_TOL: f64 = 1e-6;

/// Unit of angles on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

impl AngleUnit {
    fn column(self) -> &'static str {
        match self {
            AngleUnit::Degrees => "rho_deg",
            AngleUnit::Radians => "rho_rad",
        }
    }

    /// Radians from a value in this unit.
    pub fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Degrees => v.to_radians(),
            AngleUnit::Radians => v,
        }
    }

    /// Value in this unit whose conversion back by [`AngleUnit::to_radians`]
    /// reproduces `rad` exactly when such a value exists, otherwise the
    /// nearest one.
    pub fn from_radians(self, rad: f64) -> f64 {
        match self {
            AngleUnit::Radians => rad,
            AngleUnit::Degrees => {
                let d0 = rad.to_degrees();
                if d0.to_radians() == rad || !d0.is_finite() || d0 == 0.0 {
                    return d0;
                }
                let mut up = d0;
                let mut down = d0;
                for _ in 0..4 {
                    up = next_up(up);
                    down = next_down(down);
                    if up.to_radians() == rad {
                        return up;
                    }
                    if down.to_radians() == rad {
                        return down;
                    }
                }
                d0
            }
        }
    }
}

fn next_up(x: f64) -> f64 {
    if x >= 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_dir(fields: &[f64], line: usize, what: &str) -> Result<Dir3> {
    let n = (fields[0] * fields[0] + fields[1] * fields[1] + fields[2] * fields[2]).sqrt();
    if n.is_nan() || (n - 1.0).abs() > DIRECTION_TOL {
        return Err(parse_err(line, format!("{what} has norm {n}, not a unit vector")));
    }
    // already unit to rounding: keep the bits
    if (n - 1.0).abs() <= 1e-14 {
        return Ok(Dir3::new_unchecked(fields[0], fields[1], fields[2]));
    }
    Dir3::new(fields[0], fields[1], fields[2]).map_err(|e| parse_err(line, e.to_string()))
}

/// Reads samples from any reader.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<SampleRecord>> {
    let mut rdr =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let unit = match names.get(6).copied() {
        Some("rho_deg") => AngleUnit::Degrees,
        Some("rho_rad") => AngleUnit::Radians,
        _ => return Err(parse_err(1, format!("bad header {names:?}"))),
    };
    let base = ["hx", "hy", "hz", "rx", "ry", "rz"];
    let ok = names.len() >= 8
        && names.len() <= 9
        && names[..6] == base
        && names[7] == "value"
        && (names.len() == 8 || names[8] == "sigma");
    if !ok {
        return Err(parse_err(1, format!("bad header {names:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| parse_err(line, format!("'{s}': {e}"))))
            .collect::<Result<_>>()?;
        let h = parse_dir(&vals[0..3], line, "h")?;
        let r = parse_dir(&vals[3..6], line, "r")?;
        let rho = unit.to_radians(vals[6]);
        let sigma = vals.get(8).copied();
        let s = SampleRecord::new(h, r, rho, vals[7], sigma).map_err(|e| parse_err(line, e.to_string()))?;
        out.push(s);
    }
    Ok(out)
}

pub fn parse_samples(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>> {
    read_samples(BufReader::new(File::open(path)?))
}

/// Writes samples; `comments` are emitted as leading `#` lines. A `sigma`
/// column is written when any record carries one.
pub fn write_samples<W: Write>(mut w: W, records: &[SampleRecord], unit: AngleUnit, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let with_sigma = records.iter().any(|r| r.sigma.is_some());
    write!(w, "hx,hy,hz,rx,ry,rz,{},value", unit.column())?;
    if with_sigma {
        write!(w, ",sigma")?;
    }
    writeln!(w)?;
    for r in records {
        let fields = [r.h.x, r.h.y, r.h.z, r.r.x, r.r.y, r.r.z, unit.from_radians(r.rho), r.value];
        let mut line: Vec<String> = fields.iter().map(|&x| fmt_f64(x)).collect();
        if with_sigma {
            line.push(fmt_f64(r.sigma.unwrap_or(0.0)));
        }
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn emit_samples(
    records: &[SampleRecord],
    path: impl AsRef<Path>,
    unit: AngleUnit,
    comments: &[String],
) -> Result<()> {
    let mut f = std::io::BufWriter::new(File::create(path)?);
    write_samples(&mut f, records, unit, comments)?;
    f.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ComponentFile {
    kernel: KernelKind,
    kappa: f64,
    center: [f64; 4],
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ModelFile {
    Uniform,
    Rbf {
        components: Vec<ComponentFile>,
    },
    Harmonic {
        #[serde(rename = "L")]
        lmax: usize,
        coeffs: Vec<(usize, i64, i64, f64)>,
    },
}

/// Parses a model from JSON text. Centers are renormalized when within
/// [`DIRECTION_TOL`] of unit length.
pub fn model_from_json(text: &str) -> Result<OdfModel> {
    let file: ModelFile = serde_json::from_str(text)?;
    Ok(match file {
        ModelFile::Uniform => OdfModel::Uniform,
        ModelFile::Rbf { components } => {
            let comps = components
                .into_iter()
                .map(|c| {
                    let q = Quat::from_array(c.center);
                    if (q.norm() - 1.0).abs() > DIRECTION_TOL {
                        return Err(Error::NotUnit { norm: q.norm(), tol: DIRECTION_TOL });
                    }
                    let center = if (q.norm() - 1.0).abs() <= 1e-14 { q } else { q.normalize()? };
                    Ok(RbfComponent { center, weight: c.weight, spec: KernelSpec::new(c.kernel, c.kappa)? })
                })
                .collect::<Result<Vec<_>>>()?;
            OdfModel::Rbf(RbfMixture::new(comps)?)
        }
        ModelFile::Harmonic { lmax, coeffs } => {
            let mut t = CoeffTable::zeros(lmax);
            for (l, m, n, v) in coeffs {
                t.set(l, m, n, v)?;
            }
            OdfModel::Harmonic(HarmonicOdf::new(t))
        }
    })
}

/// Serializes a model to pretty-printed JSON.
pub fn model_to_json(model: &OdfModel) -> Result<String> {
    let file = match model {
        OdfModel::Uniform => ModelFile::Uniform,
        OdfModel::Rbf(m) => ModelFile::Rbf {
            components: m
                .components()
                .iter()
                .map(|c| ComponentFile {
                    kernel: c.spec.kind(),
                    kappa: c.spec.kappa(),
                    center: c.center.to_array(),
                    weight: c.weight,
                })
                .collect(),
        },
        OdfModel::Harmonic(h) => ModelFile::Harmonic { lmax: h.table().lmax(), coeffs: h.table().entries() },
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<OdfModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_model(model: &OdfModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model_to_json(model)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes `l,m,n,value` rows.
pub fn write_coeffs<W: Write>(mut w: W, table: &CoeffTable, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "l,m,n,value")?;
    for (l, m, n, v) in table.entries() {
        writeln!(w, "{l},{m},{n},{}", fmt_f64(v))?;
    }
    Ok(())
}

/// Reads `l,m,n,value` rows; the table degree is the largest `l` present.
pub fn read_coeffs<R: Read>(reader: R) -> Result<CoeffTable> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !seen_header {
            if t.replace(' ', "") != "l,m,n,value" {
                return Err(parse_err(i + 1, format!("bad header '{t}'")));
            }
            seen_header = true;
            continue;
        }
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(parse_err(i + 1, "expected 4 fields"));
        }
        let bad = |e: String| parse_err(i + 1, e);
        let l: usize = parts[0].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let m: i64 = parts[1].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let n: i64 = parts[2].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let v: f64 = parts[3].parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        rows.push((i + 1, l, m, n, v));
    }
    let lmax = rows.iter().map(|r| r.1).max().unwrap_or(0);
    let mut t = CoeffTable::zeros(lmax);
    for (line, l, m, n, v) in rows {
        t.set(l, m, n, v).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_records(n: usize, seed: u64) -> Vec<SampleRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let h = Dir3::random(&mut rng);
                let r = Dir3::random(&mut rng);
                let rho = rng.gen_range(0.0..std::f64::consts::PI);
                let v = rng.gen_range(-2.0..30.0);
                SampleRecord::new(h, r, rho, v, Some(0.01)).unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_file_with_header() {
        let s = read_samples("hx,hy,hz,rx,ry,rz,rho_deg,value\n".as_bytes()).unwrap();
        assert!(s.is_empty());
        assert!(read_samples("hx,hy,hz,rx,ry,rz,rho,value\n".as_bytes()).is_err());
    }

    #[test]
    fn radian_round_trip_is_bitwise() {
        let recs = random_records(100, 1);
        let mut buf = Vec::new();
        write_samples(&mut buf, &recs, AngleUnit::Radians, &["test".into()]).unwrap();
        let back = read_samples(buf.as_slice()).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn degree_round_trip() {
        let recs = random_records(100, 2);
        let mut buf = Vec::new();
        write_samples(&mut buf, &recs, AngleUnit::Degrees, &[]).unwrap();
        let back = read_samples(buf.as_slice()).unwrap();
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!((a.h, a.r, a.value, a.sigma), (b.h, b.r, b.value, b.sigma));
            let ulps = (a.rho.to_bits() as i64 - b.rho.to_bits() as i64).abs();
            assert!(ulps <= 1, "{} vs {}", a.rho, b.rho);
        }
        // the written text is a fixed point of parse then emit
        let mut again = Vec::new();
        write_samples(&mut again, &back, AngleUnit::Degrees, &[]).unwrap();
        let mut third = Vec::new();
        write_samples(&mut third, &read_samples(again.as_slice()).unwrap(), AngleUnit::Degrees, &[]).unwrap();
        assert_eq!(again, third);
    }

    #[test]
    fn direction_tolerance() {
        let s = 1.0 + 1e-7;
        let text = format!("# c\nhx,hy,hz,rx,ry,rz,rho_deg,value\n{s},0,0,0,0,1,30,1.5\n");
        let recs = read_samples(text.as_bytes()).unwrap();
        assert_eq!(recs[0].h, Dir3::E1);
        assert!((recs[0].rho - 30f64.to_radians()).abs() < 1e-16);
        let text = "hx,hy,hz,rx,ry,rz,rho_deg,value\n1,0,0,0,0,1,30,1.5\n1.01,0,0,0,0,1,30,1.5\n";
        match read_samples(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "hx,hy,hz,rx,ry,rz,rho_deg,value\n1,0,0,0,0,1,190,1.5\n";
        assert!(matches!(read_samples(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{"type":"rbf","components":[
            {"kernel":"dlvp","kappa":4,"center":[1,0,0,0],"weight":0.25},
            {"kernel":"abel_poisson","kappa":0.5,"center":[0,0.6,0.8,0],"weight":0.75}]}"#;
        let m = model_from_json(text).unwrap();
        let again = model_from_json(&model_to_json(&m).unwrap()).unwrap();
        match (m, again) {
            (OdfModel::Rbf(a), OdfModel::Rbf(b)) => assert_eq!(a, b),
            _ => panic!("wrong variant"),
        }
        assert!(matches!(model_from_json(r#"{"type":"uniform"}"#).unwrap(), OdfModel::Uniform));
        let h = model_from_json(r#"{"type":"harmonic","L":2,"coeffs":[[0,0,0,12.566],[2,1,-1,0.5]]}"#).unwrap();
        match h {
            OdfModel::Harmonic(h) => assert_eq!(h.table().get(2, 1, -1), 0.5),
            _ => panic!("wrong variant"),
        }
        assert!(model_from_json(r#"{"type":"harmonic","L":2,"coeffs":[[1,0,0,1]]}"#).is_err());
        assert!(model_from_json(
            r#"{"type":"rbf","components":[{"kernel":"dlvp","kappa":4,"center":[1,0,0,0],"weight":0.5}]}"#
        )
        .is_err());
    }

    #[test]
    fn coeff_csv_round_trip() {
        let mut t = CoeffTable::zeros(4);
        t.set(0, 0, 0, 4.0 * std::f64::consts::PI).unwrap();
        t.set(4, -3, 2, -1.0 / 3.0).unwrap();
        let mut buf = Vec::new();
        write_coeffs(&mut buf, &t, &["hash abc".into()]).unwrap();
        let back = read_coeffs(buf.as_slice()).unwrap();
        assert_eq!(back.max_abs_diff(&t), 0.0);
        assert!(read_coeffs("l,m,n,value\n3,0,0,1\n".as_bytes()).is_err());
    }
}
