//! Little-endian binary dataset layout.
//!
//! ```text
//! header   "ITTB" u32 version u32 d u32 num_classes u32 num_samples
//!          u32 patch_h u32 patch_w u32 flags
//! classes  num_classes × { u32 class_id, u16 name_len, name bytes, d × f32 }
//! bg       d × f32
//! samples  num_samples × { u32 class_id, d × f32, [patch_h·patch_w·d × f32] }
//! ```
//!
//! Floats are `f32` on disk and widened to `f64` on load.

use std::io::{self, Read, Write};

use super::{Dataset, EmbeddingSample};
use crate::embedding::{FeatureVector, PatchGrid, TextEmbedding};
use crate::error::{IttaError, Result};
use crate::registry::BACKGROUND_ID;

pub const MAGIC: [u8; 4] = *b"ITTB";
pub const VERSION: u32 = 1;
/// Header flag: every sample carries a patch grid.
pub const FLAG_PATCHES: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub version: u32,
    pub dim: u32,
    pub num_classes: u32,
    pub num_samples: u32,
    pub patch_h: u32,
    pub patch_w: u32,
    pub flags: u32,
}

/// Serializes `ds`, returning the number of bytes written.
pub fn write_dataset<W: Write>(ds: &Dataset, mut w: W) -> Result<u64> {
    ds.validate()?;
    let h = &ds.header;
    let mut n = 0u64;
    w.write_all(&MAGIC)?;
    n += 4;
    for v in [
        h.version,
        h.dim,
        h.num_classes,
        h.num_samples,
        h.patch_h,
        h.patch_w,
        h.flags,
    ] {
        w.write_all(&v.to_le_bytes())?;
        n += 4;
    }
    for c in &ds.classes {
        w.write_all(&c.class_id.to_le_bytes())?;
        w.write_all(&(c.name.len() as u16).to_le_bytes())?;
        w.write_all(c.name.as_bytes())?;
        n += 6 + c.name.len() as u64;
        n += write_vector(&mut w, &c.vector)?;
    }
    n += write_vector(&mut w, &ds.background.vector)?;
    for s in &ds.samples {
        w.write_all(&s.class_id.to_le_bytes())?;
        n += 4;
        n += write_vector(&mut w, &s.global)?;
        if let Some(grid) = &s.patches {
            for f in grid.features() {
                n += write_vector(&mut w, f)?;
            }
        }
    }
    Ok(n)
}

fn write_vector<W: Write>(w: &mut W, v: &FeatureVector) -> Result<u64> {
    let mut buf = Vec::with_capacity(v.dim() * 4);
    for &x in v.as_slice() {
        buf.extend_from_slice(&(x as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(buf.len() as u64)
}

/// Parses and fully validates a dataset.
pub fn read_dataset<R: Read>(mut r: R) -> Result<Dataset> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if magic != MAGIC {
        return Err(IttaError::format("bad magic"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(IttaError::format("version"));
    }
    let header = DatasetHeader {
        version,
        dim: read_u32(&mut r)?,
        num_classes: read_u32(&mut r)?,
        num_samples: read_u32(&mut r)?,
        patch_h: read_u32(&mut r)?,
        patch_w: read_u32(&mut r)?,
        flags: read_u32(&mut r)?,
    };
    if header.dim < 2 {
        return Err(IttaError::format(format!("dimension {} < 2", header.dim)));
    }
    let d = header.dim as usize;
    let with_patches = header.flags & FLAG_PATCHES != 0;
    let (ph, pw) = (header.patch_h as usize, header.patch_w as usize);
    if with_patches && ph * pw == 0 {
        return Err(IttaError::format("patch grid flagged but empty"));
    }

    let mut classes = Vec::with_capacity(header.num_classes.min(1 << 16) as usize);
    for _ in 0..header.num_classes {
        let class_id = read_u32(&mut r)?;
        let mut len = [0u8; 2];
        read_exact(&mut r, &mut len)?;
        let mut name = vec![0u8; u16::from_le_bytes(len) as usize];
        read_exact(&mut r, &mut name)?;
        let name = String::from_utf8(name).map_err(|_| IttaError::format("class name is not UTF-8"))?;
        let vector = read_unit_vector(&mut r, d)?;
        classes.push(TextEmbedding {
            class_id,
            name,
            vector,
        });
    }
    let background = TextEmbedding {
        class_id: BACKGROUND_ID,
        name: "background".to_string(),
        vector: read_unit_vector(&mut r, d)?,
    };

    let mut samples = Vec::with_capacity(header.num_samples.min(1 << 20) as usize);
    for _ in 0..header.num_samples {
        let class_id = read_u32(&mut r)?;
        let global = read_unit_vector(&mut r, d)?;
        let patches = if with_patches {
            let mut feats = Vec::with_capacity(ph * pw);
            for _ in 0..ph * pw {
                feats.push(read_unit_vector(&mut r, d)?);
            }
            Some(PatchGrid::new(ph, pw, feats)?)
        } else {
            None
        };
        samples.push(EmbeddingSample {
            class_id,
            global,
            patches,
        });
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(IttaError::format("trailing bytes after last sample"));
    }

    let ds = Dataset {
        header,
        classes,
        background,
        samples,
    };
    ds.validate()?;
    Ok(ds)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => IttaError::format("truncated"),
        _ => IttaError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_unit_vector<R: Read>(r: &mut R, d: usize) -> Result<FeatureVector> {
    let mut buf = vec![0u8; d * 4];
    read_exact(r, &mut buf)?;
    let mut values = Vec::with_capacity(d);
    for chunk in buf.chunks_exact(4) {
        let x = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !x.is_finite() {
            return Err(IttaError::format("nan/inf"));
        }
        values.push(x as f64);
    }
    FeatureVector::unit(values).map_err(|_| IttaError::format("vector is not unit-norm"))
}
