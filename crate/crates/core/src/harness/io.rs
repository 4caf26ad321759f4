//! Arrays on disk: a JSON header `<stem>.json` next to a raw little-endian
//! payload `<stem>.bin`. Rows are stored contiguously (`j·n_x + i` for
//! fields, `k·n_s + j` for sinograms). `c128` interleaves real and
//! imaginary parts; `f64` is used only when every imaginary part is `+0.0`,
//! so a round trip is bit exact either way.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_geometry, Complex, Grid2D, Point, ScalarField};
use crate::transforms::Sinogram;

pub const FORMAT: &str = "wradon-array";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Field,
    Sinogram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

impl Dtype {
    fn width(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::C128 => 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridHeader {
    pub n_x: usize,
    pub n_y: usize,
    pub spacing: f64,
    pub center: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorHeader {
    pub n_theta: usize,
    pub n_s: usize,
    pub s_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayHeader {
    pub format: String,
    pub version: u32,
    pub kind: ArrayKind,
    pub dtype: Dtype,
    /// `[rows, columns]`.
    pub shape: [usize; 2],
    pub grid: GridHeader,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorHeader>,
    pub mask_radius: f64,
}

impl ArrayHeader {
    /// Payload size in bytes, or `None` on overflow.
    pub fn payload_len(&self) -> Option<usize> {
        self.shape[0]
            .checked_mul(self.shape[1])?
            .checked_mul(self.dtype.width())
    }

    fn check(&self, kind: ArrayKind) -> Result<()> {
        if self.format != FORMAT {
            return Err(Error::Format(format!("unknown format {:?}", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::Format(format!("unsupported version {}", self.version)));
        }
        if self.kind != kind {
            return Err(Error::Format(format!(
                "expected a {kind:?} header, found {:?}",
                self.kind
            )));
        }
        if !(self.mask_radius.is_finite() && self.mask_radius >= 0.0) {
            return Err(Error::Format(format!("invalid mask radius {}", self.mask_radius)));
        }
        let expected = match (kind, self.detector) {
            (ArrayKind::Field, None) => [self.grid.n_y, self.grid.n_x],
            (ArrayKind::Sinogram, Some(d)) => [d.n_theta, d.n_s],
            (ArrayKind::Field, Some(_)) => return Err(Error::Format("field header carries a detector".into())),
            (ArrayKind::Sinogram, None) => return Err(Error::Format("sinogram header lacks a detector".into())),
        };
        if self.shape != expected {
            return Err(Error::Format(format!(
                "shape {:?} does not match {:?}",
                self.shape, expected
            )));
        }
        Ok(())
    }

    fn grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        Grid2D::with_center(g.n_x, g.n_y, g.spacing, Point::new(g.center[0], g.center[1]))
            .map_err(|e| Error::Format(format!("invalid grid: {e}")))
    }
}

fn grid_header(grid: &Grid2D) -> GridHeader {
    GridHeader {
        n_x: grid.n_x(),
        n_y: grid.n_y(),
        spacing: grid.spacing(),
        center: [grid.center().x, grid.center().y],
    }
}

fn dtype_for(values: &[Complex]) -> Dtype {
    if values.iter().all(|v| v.im.to_bits() == 0) {
        Dtype::F64
    } else {
        Dtype::C128
    }
}

fn encode_values(values: &[Complex], dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * dtype.width());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        if dtype == Dtype::C128 {
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

fn decode_values(header: &ArrayHeader, payload: &[u8]) -> Result<Vec<Complex>> {
    let expected = header
        .payload_len()
        .ok_or_else(|| Error::Format("array size overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let word = |chunk: &[u8]| f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    let values: Vec<Complex> = match header.dtype {
        Dtype::F64 => payload.chunks_exact(8).map(|c| Complex::new(word(c), 0.0)).collect(),
        Dtype::C128 => payload
            .chunks_exact(16)
            .map(|c| Complex::new(word(&c[..8]), word(&c[8..])))
            .collect(),
    };
    if let Some(idx) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Format(format!("non-finite value at index {idx}")));
    }
    Ok(values)
}

fn parse_header(header: &str) -> Result<ArrayHeader> {
    serde_json::from_str(header).map_err(|e| Error::Format(format!("bad header: {e}")))
}

pub fn encode_field(field: &ScalarField, mask_radius: f64) -> (String, Vec<u8>) {
    let grid = field.grid();
    let dtype = dtype_for(field.values());
    let header = ArrayHeader {
        format: FORMAT.into(),
        version: VERSION,
        kind: ArrayKind::Field,
        dtype,
        shape: [grid.n_y(), grid.n_x()],
        grid: grid_header(grid),
        detector: None,
        mask_radius,
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    (json, encode_values(field.values(), dtype))
}

/// Decodes untrusted bytes; every size and value is validated.
pub fn decode_field(header: &str, payload: &[u8]) -> Result<(ScalarField, ArrayHeader)> {
    let header = parse_header(header)?;
    header.check(ArrayKind::Field)?;
    let values = decode_values(&header, payload)?;
    let field = ScalarField::from_values(header.grid()?, values)?;
    Ok((field, header))
}

pub fn encode_sinogram(p: &Sinogram) -> (String, Vec<u8>) {
    let geom = p.geometry();
    let dtype = dtype_for(p.values());
    let header = ArrayHeader {
        format: FORMAT.into(),
        version: VERSION,
        kind: ArrayKind::Sinogram,
        dtype,
        shape: [p.n_angles(), p.n_offsets()],
        grid: grid_header(geom.grid()),
        detector: Some(DetectorHeader {
            n_theta: p.n_angles(),
            n_s: p.n_offsets(),
            s_max: geom.axis().s_max(),
        }),
        mask_radius: geom.mask().radius,
    };
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    (json, encode_values(p.values(), dtype))
}

/// Decodes untrusted bytes; the payload size is checked before any
/// geometry is built.
pub fn decode_sinogram(header: &str, payload: &[u8]) -> Result<Sinogram> {
    let header = parse_header(header)?;
    header.check(ArrayKind::Sinogram)?;
    let values = decode_values(&header, payload)?;
    let d = header.detector.expect("checked above");
    let geom = build_geometry(header.grid()?, d.n_theta, d.n_s, d.s_max)
        .map_err(|e| Error::Format(format!("invalid geometry: {e}")))?;
    Sinogram::from_values(geom, values)
}

/// `(stem.json, stem.bin)`; any extension on `path` is replaced.
pub fn sidecar_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("json"), path.with_extension("bin"))
}

fn write_pair(path: &Path, (header, payload): (String, Vec<u8>)) -> Result<()> {
    let (json, bin) = sidecar_paths(path);
    fs::write(json, header)?;
    fs::write(bin, payload)?;
    Ok(())
}

fn read_pair(path: &Path) -> Result<(String, Vec<u8>)> {
    let (json, bin) = sidecar_paths(path);
    Ok((fs::read_to_string(json)?, fs::read(bin)?))
}

pub fn write_field(path: &Path, field: &ScalarField, mask_radius: f64) -> Result<()> {
    write_pair(path, encode_field(field, mask_radius))
}

pub fn read_field(path: &Path) -> Result<(ScalarField, ArrayHeader)> {
    let (header, payload) = read_pair(path)?;
    decode_field(&header, &payload)
}

pub fn write_sinogram(path: &Path, p: &Sinogram) -> Result<()> {
    write_pair(path, encode_sinogram(p))
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    let (header, payload) = read_pair(path)?;
    decode_sinogram(&header, &payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(complex: bool) -> ScalarField {
        let grid = Grid2D::with_center(5, 3, 0.25, Point::new(0.1, -0.2)).unwrap();
        ScalarField::from_fn(grid, |p| {
            Complex::new(p.x - 2.0 * p.y, if complex { p.x * p.y } else { 0.0 })
        })
    }

    #[test]
    fn real_field_uses_f64() {
        let (header, payload) = encode_field(&field(false), 0.5);
        assert!(header.contains("\"f64\""));
        assert_eq!(payload.len(), 15 * 8);
        let (back, h) = decode_field(&header, &payload).unwrap();
        assert_eq!(back, field(false));
        assert_eq!(h.mask_radius, 0.5);
    }

    #[test]
    fn negative_zero_imaginary_needs_c128() {
        let f = field(false).map(|v| Complex::new(v.re, -0.0));
        let (header, payload) = encode_field(&f, 0.5);
        assert!(header.contains("\"c128\""));
        let (back, _) = decode_field(&header, &payload).unwrap();
        assert!(back.values().iter().all(|v| v.im.to_bits() == (-0.0f64).to_bits()));
    }

    #[test]
    fn complex_field_round_trips() {
        let (header, payload) = encode_field(&field(true), 1.0);
        assert_eq!(payload.len(), 15 * 16);
        assert_eq!(decode_field(&header, &payload).unwrap().0, field(true));
    }

    #[test]
    fn sinogram_round_trips_through_files() {
        let geom = build_geometry(Grid2D::square(9, 1.0).unwrap(), 6, 11, 1.0).unwrap();
        let p = Sinogram::from_fn(geom, |k, j| Complex::new(k as f64, -(j as f64)));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        write_sinogram(&path, &p).unwrap();
        assert!(dir.path().join("p.json").exists());
        assert_eq!(read_sinogram(&dir.path().join("p")).unwrap(), p);
    }

    #[test]
    fn rejects_malformed_input() {
        let (header, payload) = encode_field(&field(false), 0.5);
        assert!(decode_field(&header, &payload[1..]).is_err());
        assert!(decode_field("{}", &payload).is_err());
        assert!(decode_field(&header.replace("\"field\"", "\"sinogram\""), &payload).is_err());
        assert!(decode_field(&header.replace("wradon-array", "other"), &payload).is_err());
        let mut nan = payload.clone();
        nan[..8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode_field(&header, &nan), Err(Error::Format(_))));
        let huge = header
            .replace("\"n_x\": 5", "\"n_x\": 18446744073709551615")
            .replace("[\n    3,\n    5\n  ]", "[3, 18446744073709551615]");
        assert!(decode_field(&huge, &payload).is_err());
        assert!(decode_sinogram(&header, &payload).is_err());
    }
}
