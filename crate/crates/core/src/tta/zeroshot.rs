use super::{Prediction, TtaEngine};
use crate::dataset::EmbeddingSample;
use crate::error::Result;
use crate::registry::{classify, ClassId, ClassRegistry};

/// Stateless zero-shot evaluation.
pub fn zs_predict(
    sample: &EmbeddingSample,
    registry: &ClassRegistry,
    logit_scale: f64,
) -> Result<Prediction> {
    let (probabilities, class_id) = classify(&sample.global, registry, logit_scale)?;
    Ok(Prediction {
        probabilities,
        class_id,
    })
}

#[derive(Debug, Clone)]
pub struct ZeroShot {
    logit_scale: f64,
}

impl ZeroShot {
    pub fn new(logit_scale: f64) -> Self {
        ZeroShot { logit_scale }
    }
}

impl TtaEngine for ZeroShot {
    fn name(&self) -> &'static str {
        "zseval"
    }

    fn predict(&self, sample: &EmbeddingSample, registry: &ClassRegistry) -> Result<Prediction> {
        zs_predict(sample, registry, self.logit_scale)
    }

    fn observe(&mut self, _: &EmbeddingSample, _: &Prediction) -> Result<()> {
        Ok(())
    }

    fn on_registry_expanded(&mut self, _: ClassId) -> Result<()> {
        Ok(())
    }
}
