//! Top-down route decoding, per-level confidence, level-weighted reliability,
//! equal-error-rate thresholding and accept/reject classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centroid::{CentroidModel, NodeCentroid};
use crate::corpus::{Document, SparseVector};
use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, NodeIdx, Route, Taxonomy};

pub const CALIBRATION_FORMAT_VERSION: u32 = 1;

/// One decision in the top-down walk.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStep {
    pub chosen: NodeId,
    /// The chosen node and its siblings, in taxonomy child order.
    pub group: Vec<(NodeId, f64)>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteTrace {
    pub route: Route,
    pub steps: Vec<LevelStep>,
    /// Unset until level weights are applied.
    pub reliability: Option<f64>,
}

impl RouteTrace {
    pub fn leaf(&self) -> &NodeId {
        self.route.leaf().expect("decoded routes are non-empty")
    }

    pub fn with_reliability(mut self, weights: &LevelWeights) -> Result<Self> {
        self.reliability = Some(reliability(&self.steps, weights)?);
        Ok(self)
    }
}

/// Score of `chosen` over the sum of its sibling group, itself included.
/// A group whose scores sum to zero gets the uniform value `1 / |group|`.
pub fn confidence_score(group: &[(NodeId, f64)], chosen: &str) -> Result<f64> {
    let score = group
        .iter()
        .find(|(id, _)| id.as_str() == chosen)
        .map(|&(_, s)| s)
        .ok_or_else(|| Error::NotInGroup(chosen.to_string()))?;
    Ok(ratio(
        score,
        group.iter().map(|&(_, s)| s).sum(),
        group.len(),
    ))
}

fn ratio(score: f64, total: f64, group_len: usize) -> f64 {
    if total > 0.0 {
        score / total
    } else {
        1.0 / group_len as f64
    }
}

/// Recognition rate per depth; `weights[0]` is depth 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LevelWeights(Vec<f64>);

impl LevelWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::InvalidValue(format!(
                "level weight {w} outside [0, 1]"
            )));
        }
        Ok(LevelWeights(weights))
    }

    pub fn get(&self, depth: usize) -> Option<f64> {
        depth.checked_sub(1).and_then(|i| self.0.get(i)).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_depth(&self) -> usize {
        self.0.len()
    }
}

/// Weighted sum of step confidences, step `k` using the weight of depth `k + 1`.
pub fn reliability(steps: &[LevelStep], weights: &LevelWeights) -> Result<f64> {
    steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            weights
                .get(k + 1)
                .map(|w| w * step.confidence)
                .ok_or(Error::MissingWeight(k + 1))
        })
        .sum()
}

/// A model bound to the taxonomy it was trained over.
#[derive(Debug, Clone)]
pub struct Router<'a> {
    model: &'a CentroidModel,
    taxonomy: &'a Taxonomy,
    by_idx: Vec<Option<&'a NodeCentroid>>,
}

impl<'a> Router<'a> {
    pub fn new(model: &'a CentroidModel, taxonomy: &'a Taxonomy) -> Result<Self> {
        model.check_taxonomy(taxonomy)?;
        if taxonomy.is_leaf_idx(taxonomy.root_idx()) {
            return Err(Error::NoCategories);
        }
        let by_idx = (0..taxonomy.len())
            .map(|i| model.centroids().get(taxonomy.id(i).as_str()))
            .collect();
        Ok(Router {
            model,
            taxonomy,
            by_idx,
        })
    }

    pub fn model(&self) -> &'a CentroidModel {
        self.model
    }

    pub fn taxonomy(&self) -> &'a Taxonomy {
        self.taxonomy
    }

    fn node_score(&self, node: NodeIdx, doc: &SparseVector) -> f64 {
        self.by_idx[node].map_or(0.0, |c| self.model.score(c, doc))
    }

    /// Greedy descent from the root: at every level take the highest-scoring
    /// child (first in child order on ties) until a leaf is reached.
    pub fn decode(&self, doc: &SparseVector) -> RouteTrace {
        let t = self.taxonomy;
        let mut steps = Vec::new();
        let mut nodes = Vec::new();
        let mut current = t.root_idx();
        while !t.is_leaf_idx(current) {
            let children = t.children_idx(current);
            let scores: Vec<f64> = children.iter().map(|&c| self.node_score(c, doc)).collect();
            let mut best = 0;
            for (k, &s) in scores.iter().enumerate().skip(1) {
                if s > scores[best] {
                    best = k;
                }
            }
            let confidence = ratio(scores[best], scores.iter().sum(), scores.len());
            let chosen = children[best];
            steps.push(LevelStep {
                chosen: t.id(chosen).clone(),
                group: children
                    .iter()
                    .zip(&scores)
                    .map(|(&c, &s)| (t.id(c).clone(), s))
                    .collect(),
                confidence,
            });
            nodes.push(t.id(chosen).clone());
            current = chosen;
        }
        RouteTrace {
            route: Route { nodes },
            steps,
            reliability: None,
        }
    }

    pub fn decode_document(&self, doc: &Document) -> RouteTrace {
        self.decode(&self.model.vectorize(doc))
    }

    /// Decodes many documents in parallel, preserving input order.
    pub fn decode_all(&self, docs: &[Document]) -> Vec<RouteTrace> {
        docs.par_iter().map(|d| self.decode_document(d)).collect()
    }

    /// Fraction of validation documents routed to the right node at each
    /// depth, counting only documents whose true path reaches that depth.
    pub fn calibrate_weights(&self, validation: &[Document]) -> Result<LevelWeights> {
        if validation.is_empty() {
            return Err(Error::EmptyValidationSet);
        }
        let traces = self.decode_all(validation);
        self.weights_from_traces(validation, &traces)
    }

    pub fn weights_from_traces(
        &self,
        docs: &[Document],
        traces: &[RouteTrace],
    ) -> Result<LevelWeights> {
        let t = self.taxonomy;
        let max_depth = t.max_depth();
        let mut eligible = vec![0usize; max_depth];
        let mut correct = vec![0usize; max_depth];
        for (doc, trace) in docs.iter().zip(traces) {
            let truth = t.path_idx(t.idx(doc.label.as_str())?);
            for (k, &node) in truth.iter().enumerate() {
                eligible[k] += 1;
                if trace.route.nodes.get(k).map(NodeId::as_str) == Some(t.id(node).as_str()) {
                    correct[k] += 1;
                }
            }
        }
        LevelWeights::new(
            eligible
                .iter()
                .zip(&correct)
                .map(|(&e, &c)| if e == 0 { 0.0 } else { c as f64 / e as f64 })
                .collect(),
        )
    }

    pub fn classify(&self, calibration: &Calibration, doc: &SparseVector) -> Result<Decision> {
        classify_with_reject(self.decode(doc), calibration)
    }
}

/// Decodes one document vector; see [`Router::decode`].
pub fn decode(model: &CentroidModel, t: &Taxonomy, doc: &SparseVector) -> Result<RouteTrace> {
    Ok(Router::new(model, t)?.decode(doc))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Accepted { label: NodeId, reliability: f64 },
    Rejected { label: NodeId, reliability: f64 },
}

impl Decision {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Decision::Accepted { .. })
    }

    /// Decoded leaf, reported for rejections too.
    pub fn label(&self) -> &NodeId {
        match self {
            Decision::Accepted { label, .. } | Decision::Rejected { label, .. } => label,
        }
    }

    pub fn reliability(&self) -> f64 {
        match self {
            Decision::Accepted { reliability, .. } | Decision::Rejected { reliability, .. } => {
                *reliability
            }
        }
    }
}

/// Accepts iff the route reliability is strictly above the threshold.
pub fn classify_with_reject(trace: RouteTrace, calibration: &Calibration) -> Result<Decision> {
    let r = reliability(&trace.steps, &calibration.level_weights)?;
    let label = trace.leaf().clone();
    Ok(if r > calibration.threshold {
        Decision::Accepted {
            label,
            reliability: r,
        }
    } else {
        Decision::Rejected {
            label,
            reliability: r,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EerPoint {
    pub threshold: f64,
    /// |FA - FR| at `threshold`.
    pub gap: f64,
    pub false_acceptance: f64,
    pub false_rejection: f64,
}

/// Error rates at `threshold`, with acceptance meaning `reliability > threshold`.
///
/// Returns `(FA, FR)`: the share of incorrect samples accepted and the share of
/// correct samples rejected.
pub fn error_rates(samples: &[(f64, bool)], threshold: f64) -> (f64, f64) {
    let (fa, n_inc, fr, n_cor) = error_counts(samples, threshold);
    (
        fa as f64 / n_inc.max(1) as f64,
        fr as f64 / n_cor.max(1) as f64,
    )
}

fn error_counts(samples: &[(f64, bool)], threshold: f64) -> (usize, usize, usize, usize) {
    let mut counts = (0, 0, 0, 0);
    for &(r, correct) in samples {
        if correct {
            counts.3 += 1;
            if r <= threshold {
                counts.2 += 1;
            }
        } else {
            counts.1 += 1;
            if r > threshold {
                counts.0 += 1;
            }
        }
    }
    counts
}

/// Threshold at which false acceptance and false rejection are closest.
///
/// Candidates are every distinct observed reliability, the midpoints between
/// consecutive distinct values, and both infinities. Ties on the gap go to the
/// larger threshold. Gaps are compared exactly as integer cross-products.
pub fn eer_threshold(samples: &[(f64, bool)]) -> Result<EerPoint> {
    if let Some(&(r, _)) = samples.iter().find(|(r, _)| r.is_nan()) {
        return Err(Error::InvalidValue(format!("reliability {r}")));
    }
    let mut correct: Vec<f64> = samples.iter().filter(|s| s.1).map(|s| s.0).collect();
    let mut incorrect: Vec<f64> = samples.iter().filter(|s| !s.1).map(|s| s.0).collect();
    if correct.is_empty() {
        return Err(Error::EerUndefined("no correctly labeled samples"));
    }
    if incorrect.is_empty() {
        return Err(Error::EerUndefined("no mislabeled samples"));
    }
    correct.sort_by(f64::total_cmp);
    incorrect.sort_by(f64::total_cmp);
    let (n_cor, n_inc) = (correct.len() as u128, incorrect.len() as u128);

    let candidates = threshold_candidates(samples);

    let mut best: Option<(u128, f64, usize, usize)> = None;
    for tau in candidates {
        let fr = correct.partition_point(|&r| r <= tau);
        let fa = incorrect.len() - incorrect.partition_point(|&r| r <= tau);
        // |fa/n_inc - fr/n_cor| scaled by n_inc * n_cor
        let gap = (fa as u128 * n_cor).abs_diff(fr as u128 * n_inc);
        // Candidates ascend, so `<=` keeps the larger threshold on ties.
        if best.is_none_or(|(g, ..)| gap <= g) {
            best = Some((gap, tau, fa, fr));
        }
    }
    let (_, threshold, fa, fr) = best.expect("candidate list is never empty");
    let false_acceptance = fa as f64 / n_inc as f64;
    let false_rejection = fr as f64 / n_cor as f64;
    Ok(EerPoint {
        threshold,
        gap: (false_acceptance - false_rejection).abs(),
        false_acceptance,
        false_rejection,
    })
}

/// Sorted sweep grid: -inf, observed values with midpoints between them, +inf.
pub fn threshold_candidates(samples: &[(f64, bool)]) -> Vec<f64> {
    let mut values: Vec<f64> = samples
        .iter()
        .map(|s| s.0)
        .filter(|r| r.is_finite())
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut out = Vec::with_capacity(2 * values.len() + 1);
    out.push(f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if k > 0 {
            out.push(values[k - 1] + (v - values[k - 1]) / 2.0);
        }
        out.push(v);
    }
    out.push(f64::INFINITY);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSource {
    /// Equal-error-rate point on the validation set.
    Eer,
    /// Set by the operator.
    Manual,
    /// Negative infinity: everything is accepted.
    AcceptAll,
    /// The validation set had only correct (or only wrong) routes, so the EER
    /// is undefined; everything is accepted (or rejected).
    Degenerate,
}

impl ThresholdSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdSource::Eer => "eer",
            ThresholdSource::Manual => "manual",
            ThresholdSource::AcceptAll => "accept-all",
            ThresholdSource::Degenerate => "degenerate",
        }
    }
}

/// How the acceptance threshold is chosen when calibrating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdChoice {
    Eer,
    Manual(f64),
    AcceptAll,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub level_weights: LevelWeights,
    pub threshold: f64,
    pub source: ThresholdSource,
    /// Achieved |FA - FR| on validation, when the threshold came from the sweep.
    pub eer_gap: Option<f64>,
    pub validation_size: usize,
}

impl Calibration {
    /// Level weights from the validation routes, then the threshold from the
    /// validation reliabilities.
    pub fn fit(
        router: &Router<'_>,
        validation: &[Document],
        choice: ThresholdChoice,
    ) -> Result<Self> {
        if validation.is_empty() {
            return Err(Error::EmptyValidationSet);
        }
        let traces = router.decode_all(validation);
        let level_weights = router.weights_from_traces(validation, &traces)?;
        let t = router.taxonomy();

        let (threshold, source, eer_gap) = match choice {
            ThresholdChoice::Manual(tau) => {
                if tau.is_nan() {
                    return Err(Error::InvalidValue("threshold is NaN".into()));
                }
                (tau, ThresholdSource::Manual, None)
            }
            ThresholdChoice::AcceptAll => (f64::NEG_INFINITY, ThresholdSource::AcceptAll, None),
            ThresholdChoice::Eer => {
                let samples = validation
                    .iter()
                    .zip(&traces)
                    .map(|(doc, trace)| {
                        let r = reliability(&trace.steps, &level_weights)?;
                        Ok((r, route_covers(t, trace, &doc.label)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                match eer_threshold(&samples) {
                    Ok(point) => (point.threshold, ThresholdSource::Eer, Some(point.gap)),
                    Err(Error::EerUndefined(_)) => {
                        let all_correct = samples.iter().all(|s| s.1);
                        let tau = if all_correct {
                            f64::NEG_INFINITY
                        } else {
                            f64::INFINITY
                        };
                        (tau, ThresholdSource::Degenerate, None)
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(Calibration {
            level_weights,
            threshold,
            source,
            eer_gap,
            validation_size: validation.len(),
        })
    }

    pub fn with_threshold(mut self, choice: ThresholdChoice) -> Self {
        match choice {
            ThresholdChoice::Manual(tau) => {
                self.threshold = tau;
                self.source = ThresholdSource::Manual;
                self.eer_gap = None;
            }
            ThresholdChoice::AcceptAll => {
                self.threshold = f64::NEG_INFINITY;
                self.source = ThresholdSource::AcceptAll;
                self.eer_gap = None;
            }
            ThresholdChoice::Eer => {}
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CalibrationFile {
            format_version: CALIBRATION_FORMAT_VERSION,
            level_weights: self
                .level_weights
                .as_slice()
                .iter()
                .map(f64::to_string)
                .collect(),
            threshold: self.threshold.to_string(),
            threshold_source: self.source,
            eer_gap: self.eer_gap.map(|g| g.to_string()),
            validation_size: self.validation_size,
        };
        let mut out = serde_json::to_string_pretty(&file)?;
        out.push('\n');
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != CALIBRATION_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: header.format_version,
                expected: CALIBRATION_FORMAT_VERSION,
            });
        }
        let file: CalibrationFile = serde_json::from_str(text)?;
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| Error::InvalidValue(format!("bad number {s:?}")))
        };
        Ok(Calibration {
            level_weights: LevelWeights::new(
                file.level_weights
                    .iter()
                    .map(|w| real(w))
                    .collect::<Result<_>>()?,
            )?,
            threshold: real(&file.threshold)?,
            source: file.threshold_source,
            eer_gap: file.eer_gap.as_deref().map(real).transpose()?,
            validation_size: file.validation_size,
        })
    }
}

// Reals are written as shortest round-trip decimal strings so that the
// infinite thresholds survive JSON.
#[derive(Serialize, Deserialize)]
struct CalibrationFile {
    format_version: u32,
    level_weights: Vec<String>,
    threshold: String,
    threshold_source: ThresholdSource,
    eer_gap: Option<String>,
    validation_size: usize,
}

/// True when the decoded route passes through `label`. For leaf labels this
/// is exact-match correctness.
pub fn route_covers(t: &Taxonomy, trace: &RouteTrace, label: &NodeId) -> Result<bool> {
    let depth = t.depth(label.as_str())?;
    Ok(trace.route.nodes.get(depth.wrapping_sub(1)) == Some(label))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(items: &[(&str, f64)]) -> Vec<(NodeId, f64)> {
        items
            .iter()
            .map(|&(n, s)| (NodeId::new(n).unwrap(), s))
            .collect()
    }

    #[test]
    fn confidence_examples() {
        let g = group(&[("A", 0.6), ("B", 0.3), ("C", 0.1)]);
        assert!((confidence_score(&g, "A").unwrap() - 0.6).abs() < 1e-12);
        assert_eq!(confidence_score(&group(&[("X", 0.4)]), "X").unwrap(), 1.0);
        assert_eq!(
            confidence_score(&group(&[("A", 0.0), ("B", 0.0)]), "A").unwrap(),
            0.5
        );
        assert!(matches!(
            confidence_score(&g, "Z"),
            Err(Error::NotInGroup(_))
        ));
    }

    fn step(conf: f64) -> LevelStep {
        LevelStep {
            chosen: NodeId::new("x").unwrap(),
            group: group(&[("x", 1.0)]),
            confidence: conf,
        }
    }

    #[test]
    fn reliability_examples() {
        let w = LevelWeights::new(vec![1.0, 0.8]).unwrap();
        let r = reliability(&[step(0.6), step(0.5)], &w).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let zero = LevelWeights::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(reliability(&[step(0.6), step(0.5)], &zero).unwrap(), 0.0);
        let one = LevelWeights::new(vec![0.9]).unwrap();
        assert_eq!(reliability(&[step(1.0)], &one).unwrap(), 0.9);
        assert_eq!(
            reliability(&[step(1.0), step(1.0)], &one),
            Err(Error::MissingWeight(2))
        );
        assert!(LevelWeights::new(vec![1.5]).is_err());
    }

    fn samples(correct: &[f64], incorrect: &[f64]) -> Vec<(f64, bool)> {
        correct
            .iter()
            .map(|&r| (r, true))
            .chain(incorrect.iter().map(|&r| (r, false)))
            .collect()
    }

    #[test]
    fn eer_examples() {
        let p = eer_threshold(&samples(&[0.9, 0.8, 0.7], &[0.4, 0.3])).unwrap();
        assert_eq!((p.threshold, p.gap), (0.55, 0.0));

        let p = eer_threshold(&samples(&[0.6], &[0.6])).unwrap();
        assert_eq!(p.gap, 1.0);
        assert_eq!(p.threshold, f64::INFINITY);
        assert_eq!((p.false_acceptance, p.false_rejection), (0.0, 1.0));

        let p = eer_threshold(&samples(&[1.0], &[0.0])).unwrap();
        assert_eq!((p.threshold, p.gap), (0.5, 0.0));

        assert!(matches!(
            eer_threshold(&samples(&[0.5, 0.6], &[])),
            Err(Error::EerUndefined(_))
        ));
        assert!(matches!(
            eer_threshold(&samples(&[], &[0.1])),
            Err(Error::EerUndefined(_))
        ));
        assert!(eer_threshold(&samples(&[f64::NAN], &[0.1])).is_err());
    }

    #[test]
    fn candidate_grid() {
        let c = threshold_candidates(&samples(&[0.2, 0.4], &[0.2]));
        assert_eq!(
            c,
            vec![
                f64::NEG_INFINITY,
                0.2,
                0.30000000000000004,
                0.4,
                f64::INFINITY
            ]
        );
    }

    fn calib(threshold: f64, weights: Vec<f64>) -> Calibration {
        Calibration {
            level_weights: LevelWeights::new(weights).unwrap(),
            threshold,
            source: ThresholdSource::Manual,
            eer_gap: None,
            validation_size: 0,
        }
    }

    fn trace(confidences: &[f64]) -> RouteTrace {
        RouteTrace {
            route: Route {
                nodes: (0..confidences.len())
                    .map(|k| NodeId::new(format!("n{k}")).unwrap())
                    .collect(),
            },
            steps: confidences.iter().map(|&c| step(c)).collect(),
            reliability: None,
        }
    }

    #[test]
    fn strict_acceptance() {
        let d = classify_with_reject(trace(&[0.9]), &calib(0.5, vec![1.0])).unwrap();
        assert!(d.is_accepted());
        assert_eq!(d.label().as_str(), "n0");
        let d = classify_with_reject(trace(&[0.5]), &calib(0.5, vec![1.0])).unwrap();
        assert!(!d.is_accepted());
        let d = classify_with_reject(trace(&[0.0]), &calib(f64::NEG_INFINITY, vec![1.0])).unwrap();
        assert!(d.is_accepted());
    }

    #[test]
    fn calibration_json_round_trip() {
        let mut c = calib(f64::NEG_INFINITY, vec![1.0, 0.75, 0.0]);
        c.source = ThresholdSource::AcceptAll;
        c.validation_size = 12;
        assert_eq!(Calibration::from_json(&c.to_json().unwrap()).unwrap(), c);

        let mut c = calib(0.1 + 0.2, vec![0.3]);
        c.source = ThresholdSource::Eer;
        c.eer_gap = Some(1.0 / 3.0);
        let json = c.to_json().unwrap();
        assert_eq!(Calibration::from_json(&json).unwrap(), c);
        let bumped = json.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(
            Calibration::from_json(&bumped),
            Err(Error::FormatVersion { found: 9, .. })
        ));
    }
}
