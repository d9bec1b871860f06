//! Embedding datasets: the binary file format, stream construction, and a
//! synthetic generator.

mod format;
mod stream;
mod synth;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

pub use format::{read_dataset, write_dataset, DatasetHeader, FLAG_PATCHES, MAGIC, VERSION};
pub use stream::{build_stream, unseen_class_count, ShufflePolicy, StreamSpec};
pub use synth::{synth_generate, SynthConfig, SynthDataset};

use crate::embedding::{FeatureVector, PatchGrid, TextEmbedding};
use crate::error::{IttaError, Result};
use crate::registry::ClassId;

/// One element of a test stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSample {
    pub class_id: ClassId,
    pub global: FeatureVector,
    pub patches: Option<PatchGrid>,
}

/// A fully loaded dataset: header, class table, background prompt and
/// samples in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub classes: Vec<TextEmbedding>,
    pub background: TextEmbedding,
    pub samples: Vec<EmbeddingSample>,
}

impl Dataset {
    /// Assembles a dataset and derives a matching header.
    pub fn from_parts(
        classes: Vec<TextEmbedding>,
        background: TextEmbedding,
        samples: Vec<EmbeddingSample>,
    ) -> Result<Self> {
        let d = background.vector.dim();
        let (patch_h, patch_w, flags) = match samples.first().and_then(|s| s.patches.as_ref()) {
            Some(grid) => (grid.height() as u32, grid.width() as u32, FLAG_PATCHES),
            None => (0, 0, 0),
        };
        let header = DatasetHeader {
            version: VERSION,
            dim: d as u32,
            num_classes: classes.len() as u32,
            num_samples: samples.len() as u32,
            patch_h,
            patch_w,
            flags,
        };
        let ds = Dataset {
            header,
            classes,
            background,
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn dim(&self) -> usize {
        self.header.dim as usize
    }

    pub fn has_patches(&self) -> bool {
        self.header.flags & FLAG_PATCHES != 0
    }

    pub fn class(&self, class_id: ClassId) -> Option<&TextEmbedding> {
        self.classes.iter().find(|c| c.class_id == class_id)
    }

    pub fn class_ids(&self) -> Vec<ClassId> {
        self.classes.iter().map(|c| c.class_id).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Checks that the header agrees with the payload.
    pub fn validate(&self) -> Result<()> {
        let h = &self.header;
        if h.version != VERSION {
            return Err(IttaError::format("version"));
        }
        if h.dim < 2 {
            return Err(IttaError::format(format!("dimension {} < 2", h.dim)));
        }
        let d = h.dim as usize;
        if h.num_classes as usize != self.classes.len() {
            return Err(IttaError::format("num_classes does not match class table"));
        }
        if h.num_samples as usize != self.samples.len() {
            return Err(IttaError::format("num_samples does not match payload"));
        }
        let with_patches = h.flags & FLAG_PATCHES != 0;
        if with_patches && h.patch_h as u64 * h.patch_w as u64 == 0 {
            return Err(IttaError::format("patch grid flagged but empty"));
        }
        let check_vec = |v: &FeatureVector, what: &str| -> Result<()> {
            if v.dim() != d {
                return Err(IttaError::format(format!(
                    "{what}: dimension {} does not match header {d}",
                    v.dim()
                )));
            }
            if !v.is_unit() {
                return Err(IttaError::format(format!("{what}: not unit-norm")));
            }
            Ok(())
        };
        check_vec(&self.background.vector, "background")?;
        let mut ids: Vec<ClassId> = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            if c.class_id >= h.num_classes {
                return Err(IttaError::format(format!(
                    "class id {} out of range",
                    c.class_id
                )));
            }
            if c.name.len() > u16::MAX as usize {
                return Err(IttaError::format("class name too long"));
            }
            check_vec(&c.vector, &format!("class {}", c.class_id))?;
            ids.push(c.class_id);
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(IttaError::format("duplicate class id"));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if ids.binary_search(&s.class_id).is_err() {
                return Err(IttaError::format(format!(
                    "sample {i}: class {} not in class table",
                    s.class_id
                )));
            }
            check_vec(&s.global, &format!("sample {i}"))?;
            match (&s.patches, with_patches) {
                (Some(grid), true) => {
                    if grid.height() != h.patch_h as usize || grid.width() != h.patch_w as usize {
                        return Err(IttaError::format(format!("sample {i}: patch grid shape")));
                    }
                    for f in grid.features() {
                        check_vec(f, &format!("sample {i} patch"))?;
                    }
                }
                (None, false) => {}
                _ => {
                    return Err(IttaError::format(format!(
                        "sample {i}: patch presence disagrees with header flags"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        read_dataset(BufReader::new(file))
    }

    /// Writes the dataset to `path`, returning the byte count.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<u64> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        let n = write_dataset(self, &mut w)?;
        use std::io::Write;
        w.flush()?;
        Ok(n)
    }
}
