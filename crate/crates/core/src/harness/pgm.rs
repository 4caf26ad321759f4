use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::geometry::{Mask, ScalarField};

/// 16-bit binary PGM of the real part, top row first (largest `y`). Gray
/// levels span the masked minimum to the masked maximum; pixels outside that
/// range are clamped.
pub fn encode_pgm(field: &ScalarField, mask: &Mask) -> Vec<u8> {
    let grid = field.grid();
    let inside = mask.pixels(grid);
    let (lo, hi) = inside
        .iter()
        .map(|&idx| field.values()[idx].re)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;

    let mut out = format!("P5\n{} {}\n65535\n", grid.n_x(), grid.n_y()).into_bytes();
    out.reserve(grid.len() * 2);
    for j in (0..grid.n_y()).rev() {
        for i in 0..grid.n_x() {
            let level = if span > 0.0 {
                ((field.get(i, j).re - lo) / span * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn write_pgm(path: &Path, field: &ScalarField, mask: &Mask) -> Result<()> {
    fs::write(path, encode_pgm(field, mask))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Complex, Grid2D};

    #[test]
    fn ramp_maps_to_full_range() {
        let grid = Grid2D::new(3, 2, 1.0).unwrap();
        let f = ScalarField::from_values(grid, (0..6).map(|v| Complex::new(v as f64, 0.0)).collect()).unwrap();
        let bytes = encode_pgm(&f, &Mask::disk(10.0));
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let levels: Vec<u16> = bytes[header.len()..]
            .chunks(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect();
        assert_eq!(levels, vec![39321, 52428, 65535, 0, 13107, 26214]);
    }

    #[test]
    fn flat_field_is_black() {
        let f = ScalarField::constant(Grid2D::new(4, 4, 1.0).unwrap(), Complex::new(2.0, 0.0));
        assert!(encode_pgm(&f, &Mask::disk(10.0))[14..].iter().all(|&b| b == 0));
    }
}
