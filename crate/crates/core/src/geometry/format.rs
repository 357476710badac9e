//! Binary persistence and PNG rendering of continua.
//!
//! Layout (little endian): `b"GRDC"`, `u32` version, origin re/im and cell
//! width as `f64`, `min_x`, `min_y` as `i32`, `width`, `height` as `u32`,
//! then the row-major bitmask packed LSB-first, rows starting at `min_y`.

use super::raster::Bitmap;
use super::{Cell, CellSet, GridContinuum};
use crate::dynamics::ComplexPoint;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"GRDC";
const VERSION: u32 = 1;

pub fn write_continuum<W: Write>(s: &GridContinuum, mut out: W) -> Result<()> {
    let bm = Bitmap::from_cells(s.cells(), 0);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&s.origin().re.to_le_bytes())?;
    out.write_all(&s.origin().im.to_le_bytes())?;
    out.write_all(&s.cell_width().to_le_bytes())?;
    out.write_all(&bm.min_x.to_le_bytes())?;
    out.write_all(&bm.min_y.to_le_bytes())?;
    out.write_all(&(bm.width as u32).to_le_bytes())?;
    out.write_all(&(bm.height as u32).to_le_bytes())?;
    let mut bytes = vec![0u8; bm.bits.len().div_ceil(8)];
    for (k, &b) in bm.bits.iter().enumerate() {
        if b {
            bytes[k / 8] |= 1 << (k % 8);
        }
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn read_continuum<R: Read>(mut input: R) -> Result<GridContinuum> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not a continuum file".into()));
    }
    let version = u32::from_le_bytes(read_n(&mut input)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let re = f64::from_le_bytes(read_n(&mut input)?);
    let im = f64::from_le_bytes(read_n(&mut input)?);
    let w = f64::from_le_bytes(read_n(&mut input)?);
    let min_x = i32::from_le_bytes(read_n(&mut input)?);
    let min_y = i32::from_le_bytes(read_n(&mut input)?);
    let width = u32::from_le_bytes(read_n(&mut input)?) as usize;
    let height = u32::from_le_bytes(read_n(&mut input)?) as usize;
    let n = width
        .checked_mul(height)
        .filter(|&n| n <= 1 << 32)
        .ok_or_else(|| Error::Format("bitmap dimensions too large".into()))?;
    let mut bytes = vec![0u8; n.div_ceil(8)];
    input.read_exact(&mut bytes)?;
    let mut cells = CellSet::new();
    for k in 0..n {
        if bytes[k / 8] >> (k % 8) & 1 == 1 {
            cells.insert(Cell::new(min_x + (k % width) as i32, min_y + (k / width) as i32));
        }
    }
    GridContinuum::new(Complex64::new(re, im), w, cells)
}

fn read_n<R: Read, const N: usize>(input: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    input.read_exact(&mut b)?;
    Ok(b)
}

/// Black-on-white raster of the cells, one pixel per cell, north up.
pub fn write_png(s: &GridContinuum, path: &std::path::Path) -> Result<()> {
    write_png_with_overlay(s, &[], path)
}

/// As [`write_png`], with polylines drawn in red on top.
pub fn write_png_with_overlay(s: &GridContinuum, overlays: &[Vec<ComplexPoint>], path: &std::path::Path) -> Result<()> {
    let (x0, y0, x1, y1) = s.bounds();
    let (pad, w, h) = (2, (x1 - x0 + 5) as u32, (y1 - y0 + 5) as u32);
    let mut img = image::RgbImage::from_pixel(w, h, image::Rgb([255, 255, 255]));
    let px = |c: Cell| ((c.x - x0 + pad) as u32, h - 1 - (c.y - y0 + pad) as u32);
    for &c in s.cells() {
        let (u, v) = px(c);
        img.put_pixel(u, v, image::Rgb([0, 0, 0]));
    }
    let frame = s.frame();
    for line in overlays {
        for seg in line.windows(2) {
            let steps = ((seg[1] - seg[0]).norm() / (0.5 * frame.cell_width)).ceil().max(1.0) as usize;
            for k in 0..=steps {
                let z = seg[0] + (seg[1] - seg[0]) * (k as f64 / steps as f64);
                let c = frame.cell_at(z);
                let (u, v) = (c.x - x0 + pad, c.y - y0 + pad);
                if u >= 0 && v >= 0 && (u as u32) < w && (v as u32) < h {
                    img.put_pixel(u as u32, h - 1 - v as u32, image::Rgb([220, 20, 20]));
                }
            }
        }
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let cells: CellSet = (0..13).map(|k| Cell::new(k - 3, (k * k) % 3 - 7)).collect();
        let cells: CellSet = super::super::raster::dilate(&cells);
        let s = GridContinuum::new(Complex64::new(-1.25, 0.5), 0.125, cells).unwrap();
        let mut buf = Vec::new();
        write_continuum(&s, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"GRDC");
        let back = read_continuum(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert!(read_continuum(&buf[..20]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_continuum(&bad[..]), Err(Error::Format(_))));
    }
}
