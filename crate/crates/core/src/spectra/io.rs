//! Grid file formats.
//!
//! Binary layout (little endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HGRD"
//! 4       4     k        (u32)
//! 8       4     n_x      (u32)
//! 12      4     n_t      (u32)
//! 16      8     L_x      (f64)
//! 24      8     L_t      (f64)
//! 32      8·N   samples, complex64 as (f32 re, f32 im), row-major, time fastest
//! ```
//!
//! An optional mask section may follow the samples: magic "HMSK" and two
//! bit-packed arrays of `⌈N/8⌉` bytes each (`v_mask` then `t_nonneg_mask`),
//! least significant bit first.
//!
//! The JSON form is `{"k", "n_x", "n_t", "l_x", "l_t", "re": [...], "im": [...]}`
//! with optional boolean arrays `"v_mask"` and `"t_nonneg_mask"`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GridFunction, Lattice};
use crate::error::{Error, Result};

const GRID_MAGIC: &[u8; 4] = b"HGRD";
const MASK_MAGIC: &[u8; 4] = b"HMSK";
pub const HEADER_LEN: usize = 32;

/// A grid read from disk, with masks if the file carried them.
#[derive(Debug, Clone)]
pub struct GridFile {
    pub grid: GridFunction,
    pub masks: Option<(Vec<bool>, Vec<bool>)>,
}

#[derive(Serialize, Deserialize)]
struct JsonGrid {
    k: usize,
    n_x: usize,
    n_t: usize,
    l_x: f64,
    l_t: f64,
    re: Vec<f64>,
    im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_mask: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_nonneg_mask: Option<Vec<bool>>,
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

fn f32_at(bytes: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

fn unpack_bits(bytes: &[u8], n: usize) -> Vec<bool> {
    (0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect()
}

pub fn encode_binary(grid: &GridFunction, masks: Option<(&[bool], &[bool])>) -> Result<Vec<u8>> {
    let lat = grid.lattice();
    let n = lat.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n);
    out.extend_from_slice(GRID_MAGIC);
    for v in [lat.k, lat.n_x, lat.n_t] {
        let v = u32::try_from(v).map_err(|_| Error::Argument("dimension exceeds u32".into()))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&lat.l_x.to_le_bytes());
    out.extend_from_slice(&lat.l_t.to_le_bytes());
    for c in grid.samples() {
        out.extend_from_slice(&(c.re as f32).to_le_bytes());
        out.extend_from_slice(&(c.im as f32).to_le_bytes());
    }
    if let Some((v, t)) = masks {
        if v.len() != n || t.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: v.len().min(t.len()),
            });
        }
        out.extend_from_slice(MASK_MAGIC);
        out.extend(pack_bits(v));
        out.extend(pack_bits(t));
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<GridFile> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != GRID_MAGIC {
        return Err(Error::Parse("missing HGRD header".into()));
    }
    let lat = Lattice::new(
        u32_at(bytes, 4) as usize,
        u32_at(bytes, 8) as usize,
        u32_at(bytes, 12) as usize,
        f64_at(bytes, 16),
        f64_at(bytes, 24),
    )
    .map_err(|e| Error::Parse(format!("bad header: {e}")))?;
    let n = lat.len();
    let body_end = HEADER_LEN + 8 * n;
    if bytes.len() < body_end {
        return Err(Error::Parse(format!(
            "truncated samples: need {} bytes, file has {}",
            body_end,
            bytes.len()
        )));
    }
    let samples = (0..n)
        .map(|i| {
            let at = HEADER_LEN + 8 * i;
            Complex64::new(f32_at(bytes, at) as f64, f32_at(bytes, at + 4) as f64)
        })
        .collect();
    let grid = GridFunction::new(lat, samples)?;

    let rest = &bytes[body_end..];
    let masks = if rest.is_empty() {
        None
    } else {
        let packed = n.div_ceil(8);
        if rest.len() != 4 + 2 * packed || &rest[..4] != MASK_MAGIC {
            return Err(Error::Parse("malformed mask section".into()));
        }
        Some((
            unpack_bits(&rest[4..4 + packed], n),
            unpack_bits(&rest[4 + packed..], n),
        ))
    };
    Ok(GridFile { grid, masks })
}

pub fn encode_json(grid: &GridFunction, masks: Option<(&[bool], &[bool])>) -> Result<String> {
    let lat = grid.lattice();
    let doc = JsonGrid {
        k: lat.k,
        n_x: lat.n_x,
        n_t: lat.n_t,
        l_x: lat.l_x,
        l_t: lat.l_t,
        re: grid.samples().iter().map(|c| c.re).collect(),
        im: grid.samples().iter().map(|c| c.im).collect(),
        v_mask: masks.map(|m| m.0.to_vec()),
        t_nonneg_mask: masks.map(|m| m.1.to_vec()),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn decode_json(text: &str) -> Result<GridFile> {
    let doc: JsonGrid = serde_json::from_str(text)?;
    let lat = Lattice::new(doc.k, doc.n_x, doc.n_t, doc.l_x, doc.l_t)?;
    if doc.re.len() != doc.im.len() {
        return Err(Error::Parse("re and im arrays differ in length".into()));
    }
    let samples = doc.re.iter().zip(&doc.im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let grid = GridFunction::new(lat, samples)?;
    let masks = match (doc.v_mask, doc.t_nonneg_mask) {
        (None, None) => None,
        (Some(v), Some(t)) => {
            if v.len() != lat.len() || t.len() != lat.len() {
                return Err(Error::Shape {
                    expected: lat.len(),
                    got: v.len().min(t.len()),
                });
            }
            Some((v, t))
        }
        _ => return Err(Error::Parse("v_mask and t_nonneg_mask must be given together".into())),
    };
    Ok(GridFile { grid, masks })
}

/// Reads a grid, choosing the format from the file contents.
pub fn read_grid(path: &Path) -> Result<GridFile> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(GRID_MAGIC) {
        decode_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?;
        decode_json(&text)
    }
}

/// Writes JSON when the extension is `.json`, binary otherwise.
pub fn write_grid(path: &Path, grid: &GridFunction, masks: Option<(&[bool], &[bool])>) -> Result<()> {
    if path.extension().is_some_and(|e| e == "json") {
        fs::write(path, encode_json(grid, masks)?)?;
    } else {
        fs::write(path, encode_binary(grid, masks)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid() -> GridFunction {
        let lat = Lattice::new(1, 4, 8, 2.0, 3.0).unwrap();
        GridFunction::from_fn(lat, |x, t| Complex64::new(x[0] + 0.25, t))
    }

    #[test]
    fn binary_round_trip() {
        let g = sample_grid();
        let bytes = encode_binary(&g, None).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 8 * 32);
        let back = decode_binary(&bytes).unwrap();
        assert!(back.masks.is_none());
        assert_eq!(back.grid.lattice(), g.lattice());
        // values are exactly representable in f32
        assert_eq!(back.grid.samples(), g.samples());
    }

    #[test]
    fn binary_masks_round_trip() {
        let g = sample_grid();
        let n = g.lattice().len();
        let v: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let t: Vec<bool> = (0..n).map(|i| i % 8 >= 4).collect();
        let bytes = encode_binary(&g, Some((&v, &t))).unwrap();
        let back = decode_binary(&bytes).unwrap();
        assert_eq!(back.masks, Some((v, t)));
    }

    #[test]
    fn json_round_trip() {
        let g = sample_grid();
        let back = decode_json(&encode_json(&g, None).unwrap()).unwrap();
        assert_eq!(back.grid, g);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode_binary(b"NOPE").is_err());
        let g = sample_grid();
        let bytes = encode_binary(&g, None).unwrap();
        assert!(decode_binary(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_json("{\"k\":1}").is_err());
    }
}
