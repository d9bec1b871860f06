use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::embedding::TextEmbedding;
use crate::error::{IttaError, Result};
use crate::registry::{ClassId, ClassRegistry};
use crate::tta::TtaEngine;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    pub true_class_id: ClassId,
    pub was_new: bool,
    pub detection_index: Option<usize>,
}

/// Ground-truth labeler backed by the dataset's class table.
#[derive(Debug, Clone)]
pub struct Oracle {
    class_table: HashMap<ClassId, TextEmbedding>,
}

impl Oracle {
    pub fn new(class_table: &[TextEmbedding]) -> Self {
        Oracle {
            class_table: class_table.iter().map(|c| (c.class_id, c.clone())).collect(),
        }
    }

    /// Reveals `true_class_id`. An unregistered class is appended to the
    /// registry and announced to the engine.
    pub fn query(
        &self,
        true_class_id: ClassId,
        registry: &mut ClassRegistry,
        engine: &mut dyn TtaEngine,
        stream_index: usize,
    ) -> Result<OracleResult> {
        if registry.contains(true_class_id) {
            return Ok(OracleResult {
                true_class_id,
                was_new: false,
                detection_index: None,
            });
        }
        let entry = self
            .class_table
            .get(&true_class_id)
            .ok_or_else(|| IttaError::Data(format!("class {true_class_id} missing from class table")))?;
        registry.push_discovered(entry.clone())?;
        engine.on_registry_expanded(true_class_id)?;
        Ok(OracleResult {
            true_class_id,
            was_new: true,
            detection_index: Some(stream_index),
        })
    }
}
