//! On-disk formats: raw little-endian f32 payloads with JSON sidecars, and
//! 16-bit PGM images.
//!
//! A payload at `path` has its sidecar at `path` + ".json". Volumes are
//! stored x fastest; projections u fastest, then v, then view.

use crate::error::{Error, Result};
use crate::geometry::ConeGeometry;
use crate::scalar::Real;
use crate::volume::{Image2D, ProjectionSet, Volume3D};
use serde_json::{json, Map, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const DTYPE: &str = "f32le";

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn sidecar_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Sidecar {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn read_sidecar(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(sidecar_path(path))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(sidecar_err("<root>", "expected a JSON object")),
        Err(e) => Err(sidecar_err("<root>", e.to_string())),
    }
}

fn field<'a>(m: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    m.get(name).ok_or_else(|| sidecar_err(name, "missing"))
}

fn dims3(m: &Map<String, Value>) -> Result<[usize; 3]> {
    let arr = field(m, "dims")?
        .as_array()
        .ok_or_else(|| sidecar_err("dims", "expected an array of three integers"))?;
    if arr.len() != 3 {
        return Err(sidecar_err("dims", format!("expected 3 entries, got {}", arr.len())));
    }
    let mut d = [0usize; 3];
    for (o, v) in d.iter_mut().zip(arr) {
        *o = v
            .as_u64()
            .filter(|&x| x > 0)
            .ok_or_else(|| sidecar_err("dims", "entries must be positive integers"))? as usize;
    }
    Ok(d)
}

fn positive(m: &Map<String, Value>, name: &str) -> Result<f64> {
    field(m, name)?
        .as_f64()
        .filter(|x| x.is_finite() && *x > 0.0)
        .ok_or_else(|| sidecar_err(name, "must be a positive number"))
}

fn expect_str(m: &Map<String, Value>, name: &str, want: &str) -> Result<()> {
    match field(m, name)?.as_str() {
        Some(s) if s == want => Ok(()),
        Some(s) => Err(sidecar_err(name, format!("expected \"{want}\", got \"{s}\""))),
        None => Err(sidecar_err(name, "expected a string")),
    }
}

fn write_payload<T: Real>(path: &Path, data: &[T]) -> Result<()> {
    let mut buf = Vec::with_capacity(4 * data.len());
    for v in data {
        buf.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

fn read_payload<T: Real>(path: &Path, expected: usize) -> Result<Vec<T>> {
    let bytes = fs::read(path)?;
    if bytes.len() != 4 * expected {
        return Err(Error::dims("payload bytes", 4 * expected, bytes.len()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
        .collect())
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| sidecar_err("<root>", e.to_string()))?;
    fs::write(sidecar_path(path), text + "\n")?;
    Ok(())
}

pub fn write_volume<T: Real>(path: &Path, vol: &Volume3D<T>) -> Result<()> {
    write_payload(path, &vol.data)?;
    write_json(
        path,
        &json!({
            "dims": [vol.n, vol.n, vol.n],
            "voxel_mm": vol.voxel_mm.to_f64(),
            "dtype": DTYPE,
            "order": "x-fastest",
        }),
    )
}

pub fn read_volume<T: Real>(path: &Path) -> Result<Volume3D<T>> {
    let m = read_sidecar(path)?;
    let d = dims3(&m)?;
    if d[0] != d[1] || d[1] != d[2] {
        return Err(sidecar_err("dims", "volumes must be cubic"));
    }
    let voxel = positive(&m, "voxel_mm")?;
    expect_str(&m, "dtype", DTYPE)?;
    expect_str(&m, "order", "x-fastest")?;
    let data = read_payload(path, d[0] * d[1] * d[2])?;
    Volume3D::from_data(d[0], T::lit(voxel), data)
}

/// Writes projections; the geometry, when given, is echoed in the sidecar.
pub fn write_projections<T: Real>(path: &Path, p: &ProjectionSet<T>, geom: Option<&ConeGeometry<T>>) -> Result<()> {
    write_payload(path, &p.data)?;
    let mut v = json!({
        "dims": [p.nu, p.nv, p.n_views],
        "pitch_u_mm": p.pitch_u_mm.to_f64(),
        "pitch_v_mm": p.pitch_v_mm.to_f64(),
        "dtype": DTYPE,
        "order": "u-fastest",
    });
    if let Some(g) = geom {
        v["geometry"] = geometry_json(g);
    }
    write_json(path, &v)
}

fn geometry_json<T: Real>(g: &ConeGeometry<T>) -> Value {
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    json!({
        "so_mm": f(g.so_mm),
        "sd_mm": f(g.sd_mm),
        "det_width_mm": f(g.det_width_mm),
        "det_height_mm": f(g.det_height_mm),
        "nu": g.nu,
        "nv": g.nv,
        "n_views": g.n_views,
        "object_extent_mm": f(g.object_extent_mm),
    })
}

/// Projections plus the echoed geometry, if the sidecar carries one.
pub fn read_projections<T: Real>(path: &Path) -> Result<(ProjectionSet<T>, Option<ConeGeometry<f64>>)> {
    let m = read_sidecar(path)?;
    let d = dims3(&m)?;
    let pu = positive(&m, "pitch_u_mm")?;
    let pv = positive(&m, "pitch_v_mm")?;
    expect_str(&m, "dtype", DTYPE)?;
    expect_str(&m, "order", "u-fastest")?;
    let geom = match m.get("geometry") {
        None => None,
        Some(v) => Some(geometry_from_value(v.clone())?),
    };
    let data = read_payload(path, d[0] * d[1] * d[2])?;
    Ok((
        ProjectionSet {
            nu: d[0],
            nv: d[1],
            n_views: d[2],
            pitch_u_mm: T::lit(pu),
            pitch_v_mm: T::lit(pv),
            data,
        },
        geom,
    ))
}

fn geometry_from_value(v: Value) -> Result<ConeGeometry<f64>> {
    let g: ConeGeometry<f64> = serde_json::from_value(v).map_err(|e| sidecar_err("geometry", e.to_string()))?;
    g.validate()?;
    Ok(g)
}

pub fn read_geometry(path: &Path) -> Result<ConeGeometry<f64>> {
    let text = fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| sidecar_err("geometry", e.to_string()))?;
    geometry_from_value(v)
}

pub fn write_geometry<T: Real>(path: &Path, g: &ConeGeometry<T>) -> Result<()> {
    let text = serde_json::to_string_pretty(&geometry_json(g)).map_err(|e| sidecar_err("geometry", e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Binary 16-bit PGM, min-max windowed, first row at the top.
pub fn write_pgm16<T: Real>(path: &Path, img: &Image2D<T>) -> Result<()> {
    let vals: Vec<f64> = img.data.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("image".into()));
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut f = fs::File::create(path)?;
    write!(f, "P5\n{} {}\n65535\n", img.n, img.n)?;
    let mut buf = Vec::with_capacity(2 * vals.len());
    for v in vals {
        let q = (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        buf.extend_from_slice(&q.to_be_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a square binary PGM (8 or 16 bit) scaled to [0, 1].
pub fn read_pgm<T: Real>(path: &Path) -> Result<Image2D<T>> {
    let bytes = fs::read(path)?;
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::invalid("pgm", "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::invalid("pgm", "only binary (P5) images are supported"));
    }
    let num = |s: String| s.parse::<usize>().map_err(|_| Error::invalid("pgm", "bad header number"));
    let w = num(token()?)?;
    let h = num(token()?)?;
    let maxval = num(token()?)?;
    if w != h || w == 0 {
        return Err(Error::invalid("pgm", "image must be square"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::invalid("pgm", "maxval out of range"));
    }
    let body = &bytes[(pos + 1).min(bytes.len())..];
    let bpp = if maxval < 256 { 1 } else { 2 };
    if body.len() < w * h * bpp {
        return Err(Error::dims("pgm payload", w * h * bpp, body.len()));
    }
    let data = (0..w * h)
        .map(|i| {
            let v = if bpp == 1 {
                body[i] as f64
            } else {
                u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as f64
            };
            T::lit(v / maxval as f64)
        })
        .collect();
    Image2D::from_data(w, data)
}
