//! Camera rig config: one `name=offset_degrees` per line, offsets clockwise
//! from the aircraft nose. Blank lines and `#` comments are ignored; order is
//! kept and becomes the feature column order.

use std::path::Path;

use trackfuse_core::solar::CameraRig;

use crate::error::{Error, Result};

pub fn read_rig(path: &Path) -> Result<CameraRig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rig(&text, path)
}

pub fn parse_rig(text: &str, path: &Path) -> Result<CameraRig> {
    let mut rig = CameraRig::new();
    for (n, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Row {
            path: path.into(),
            row: n as u64 + 1,
            field: "camera".into(),
            reason,
        };
        let (name, off) = l
            .split_once('=')
            .ok_or_else(|| bad(format!("expected name=offset, got `{l}`")))?;
        let name = name.trim();
        if name.contains(',') {
            return Err(bad(format!("camera name `{name}` contains a comma")));
        }
        let off: f64 = off
            .trim()
            .parse()
            .map_err(|_| bad(format!("offset `{}` is not a number", off.trim())))?;
        rig.add(name, off).map_err(|e| bad(e.to_string()))?;
    }
    Ok(rig)
}
