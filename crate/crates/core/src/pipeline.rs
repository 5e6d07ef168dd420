//! End-to-end runs: split, train, calibrate on validation, evaluate on test.

use crate::centroid::{CentroidMode, CentroidModel};
use crate::corpus::{split_corpus, CorpusSplit, Document, Vocabulary};
use crate::error::Result;
use crate::evaluation::{evaluate, flat_baseline, EvalSummary};
use crate::policies::PolicyKind;
use crate::router::{Calibration, Router, ThresholdChoice};
use crate::taxonomy::Taxonomy;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
    pub mode: CentroidMode,
    pub policy: Option<PolicyKind>,
    pub threshold: ThresholdChoice,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            val_fraction: 0.2,
            test_fraction: 0.3,
            seed: 1,
            mode: CentroidMode::PositiveOnly,
            policy: None,
            threshold: ThresholdChoice::Eer,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub split: CorpusSplit,
    pub model: CentroidModel,
    pub calibration: Calibration,
}

/// Splits `docs`, trains on the training part and calibrates on validation.
pub fn train_pipeline(
    t: &Taxonomy,
    docs: &[Document],
    config: &PipelineConfig,
) -> Result<TrainedPipeline> {
    let split = split_corpus(docs, config.val_fraction, config.test_fraction, config.seed)?;
    let vocabulary = Vocabulary::build(&split.train)?;
    let model = CentroidModel::train(&split.train, t, vocabulary, config.mode, config.policy)?;
    let calibration = {
        let router = Router::new(&model, t)?;
        Calibration::fit(&router, &split.validation, config.threshold)?
    };
    Ok(TrainedPipeline {
        split,
        model,
        calibration,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub summary: EvalSummary,
    pub flat_accuracy: f64,
}

impl TrainedPipeline {
    pub fn evaluate(&self, t: &Taxonomy) -> Result<Experiment> {
        let router = Router::new(&self.model, t)?;
        let summary = evaluate(&router, &self.calibration, &self.split.test)?;
        let flat_accuracy = flat_baseline(
            &self.split.train,
            &self.split.test,
            t,
            self.model.vocabulary(),
        )?;
        Ok(Experiment {
            summary,
            flat_accuracy,
        })
    }
}
