//! Accept/reject evaluation, the flat baseline, report rendering and the
//! synthetic corpus generator.

mod report;
mod synthetic;

pub use report::{parse_summary_csv, render_report, ComparisonRow, Report, SummaryRow};
pub use synthetic::{generate_synthetic, SyntheticCorpus, SyntheticSpec};

use rayon::prelude::*;

use crate::corpus::{Document, SparseVector, Vocabulary};
use crate::error::{Error, Result};
use crate::router::{classify_with_reject, route_covers, Calibration, Router};
use crate::taxonomy::{NodeId, NodeIdx, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub total: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Rejected and mislabeled.
    pub true_rejections: usize,
    /// Rejected but correctly labeled.
    pub false_rejections: usize,
    /// Correct decodes, ignoring rejection.
    pub correct: usize,
    pub correct_accepted: usize,
    pub overall_accuracy: f64,
    /// Correct among accepted; 0 when nothing is accepted.
    pub boosted_accuracy: f64,
    /// Percentage points gained over `overall_accuracy`.
    pub accuracy_boost: f64,
}

impl EvalSummary {
    /// Builds the summary from per-document `(correct, accepted)` outcomes.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut s = EvalSummary {
            total: 0,
            accepted: 0,
            rejected: 0,
            true_rejections: 0,
            false_rejections: 0,
            correct: 0,
            correct_accepted: 0,
            overall_accuracy: 0.0,
            boosted_accuracy: 0.0,
            accuracy_boost: 0.0,
        };
        for (correct, accepted) in outcomes {
            s.total += 1;
            s.correct += correct as usize;
            match (accepted, correct) {
                (true, true) => {
                    s.accepted += 1;
                    s.correct_accepted += 1;
                }
                (true, false) => s.accepted += 1,
                (false, true) => {
                    s.rejected += 1;
                    s.false_rejections += 1;
                }
                (false, false) => {
                    s.rejected += 1;
                    s.true_rejections += 1;
                }
            }
        }
        let rate = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        s.overall_accuracy = rate(s.correct, s.total);
        s.boosted_accuracy = rate(s.correct_accepted, s.accepted);
        s.accuracy_boost = 100.0 * (s.boosted_accuracy - s.overall_accuracy);
        s
    }

    pub fn rejection_rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.rejected as f64 / self.total as f64
        }
    }
}

/// Classifies every test document with rejection and tallies the outcome.
/// A decode is correct when its route passes through the true label.
pub fn evaluate(
    router: &Router<'_>,
    calibration: &Calibration,
    test: &[Document],
) -> Result<EvalSummary> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let t = router.taxonomy();
    let outcomes = test
        .par_iter()
        .map(|doc| {
            let trace = router.decode_document(doc);
            let correct = route_covers(t, &trace, &doc.label)?;
            let decision = classify_with_reject(trace, calibration)?;
            Ok((correct, decision.is_accepted()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalSummary::from_outcomes(outcomes))
}

/// Nearest-centroid classifier over the leaves, ignoring the hierarchy.
#[derive(Debug, Clone)]
pub struct FlatClassifier {
    leaves: Vec<(NodeIdx, SparseVector)>,
}

impl FlatClassifier {
    /// One centroid per leaf, from the documents labeled exactly at that leaf.
    pub fn train(train: &[Document], t: &Taxonomy, v: &Vocabulary) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let leaves = t.leaves();
        if leaves.is_empty() {
            return Err(Error::NoCategories);
        }
        let vectors: Vec<SparseVector> = train.par_iter().map(|d| v.vectorize(d)).collect();
        let by_id = train
            .iter()
            .zip(&vectors)
            .map(|(d, vec)| (d.doc_id.as_str(), vec))
            .collect();
        let leaves = leaves
            .into_iter()
            .map(|leaf| {
                let members =
                    crate::policies::most_specific_examples(train, t, t.id(leaf).as_str())?;
                Ok((leaf, crate::centroid::mean_vector(&members, &by_id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FlatClassifier { leaves })
    }

    /// Highest-similarity leaf, first in left-to-right leaf order on ties.
    pub fn predict_idx(&self, doc: &SparseVector) -> NodeIdx {
        let mut best = (self.leaves[0].0, doc.dot(&self.leaves[0].1));
        for (leaf, centroid) in &self.leaves[1..] {
            let s = doc.dot(centroid);
            if s > best.1 {
                best = (*leaf, s);
            }
        }
        best.0
    }

    pub fn predict<'t>(&self, t: &'t Taxonomy, doc: &SparseVector) -> &'t NodeId {
        t.id(self.predict_idx(doc))
    }
}

/// Flat nearest-centroid accuracy on `test`. A prediction is correct when it
/// equals the true label or lies below it, as for the hierarchical decoder.
pub fn flat_baseline(
    train: &[Document],
    test: &[Document],
    t: &Taxonomy,
    v: &Vocabulary,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let flat = FlatClassifier::train(train, t, v)?;
    let hits = test
        .par_iter()
        .map(|doc| {
            let predicted = flat.predict_idx(&v.vectorize(doc));
            let label = t.idx(doc.label.as_str())?;
            Ok(predicted == label || t.is_ancestor_idx(label, predicted))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / test.len() as f64)
}
