//! Land-sea mask file.
//!
//! A short ASCII header followed by the raw bit grid:
//!
//! ```text
//! LANDMASK v1\n
//! lat_min=44\n
//! lat_max=46\n
//! lon_min=-62\n
//! lon_max=-60\n
//! cell_deg=1\n
//! rows=2\n
//! cols=2\n
//! END\n
//! <ceil(rows*cols/8) bytes>
//! ```
//!
//! Header keys may come in any order; `rows` and `cols` must agree with the
//! bounds and cell size. Bit `r * cols + c` (row 0 south, column 0 west) is
//! bit `idx % 8` of byte `idx / 8`, least significant first; 1 is land.
//! Padding bits in the last byte are zero.

use std::io::Write;
use std::path::Path;

use trackfuse_core::quality::LandSeaMask;

use crate::error::{Error, Result};

const MAGIC: &str = "LANDMASK v1";

pub fn read_mask(path: &Path) -> Result<LandSeaMask> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_mask(&bytes, path)
}

pub fn parse_mask(bytes: &[u8], path: &Path) -> Result<LandSeaMask> {
    let bad = |r: &str| Error::format(path, r);
    let mut rest = bytes;
    let mut next_line = || -> Result<String> {
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header"))?;
        let l = std::str::from_utf8(&rest[..end])
            .map_err(|_| bad("header is not ASCII"))?
            .to_string();
        rest = &rest[end + 1..];
        Ok(l)
    };
    if next_line()? != MAGIC {
        return Err(bad("not a LANDMASK v1 file"));
    }
    let mut kv = std::collections::BTreeMap::new();
    loop {
        let l = next_line()?;
        if l == "END" {
            break;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| bad(&format!("bad header line `{l}`")))?;
        if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(bad(&format!("repeated header key `{k}`")));
        }
    }
    let num = |k: &str| -> Result<f64> {
        kv.get(k)
            .ok_or_else(|| bad(&format!("missing header key `{k}`")))?
            .parse()
            .map_err(|_| bad(&format!("header key `{k}` is not a number")))
    };
    let dim = |k: &str| -> Result<usize> {
        kv.get(k)
            .ok_or_else(|| bad(&format!("missing header key `{k}`")))?
            .parse()
            .map_err(|_| bad(&format!("header key `{k}` is not a count")))
    };
    let mask = LandSeaMask::new(
        num("lat_min")?,
        num("lat_max")?,
        num("lon_min")?,
        num("lon_max")?,
        num("cell_deg")?,
        rest.to_vec(),
    )
    .map_err(|e| bad(&e.to_string()))?;
    if mask.dims() != (dim("rows")?, dim("cols")?) {
        return Err(bad("rows/cols disagree with bounds and cell size"));
    }
    Ok(mask)
}

pub fn write_mask(w: &mut impl Write, mask: &LandSeaMask) -> std::io::Result<()> {
    let (lat_min, lat_max, lon_min, lon_max) = mask.bounds();
    let (rows, cols) = mask.dims();
    write!(
        w,
        "{MAGIC}\nlat_min={lat_min}\nlat_max={lat_max}\nlon_min={lon_min}\nlon_max={lon_max}\ncell_deg={}\nrows={rows}\ncols={cols}\nEND\n",
        mask.cell_deg()
    )?;
    w.write_all(mask.cells())
}
