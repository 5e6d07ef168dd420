//! Fixtures shared by the benchmarks.

use routeconf::{
    generate_synthetic, load_corpus, train_pipeline, Document, PipelineConfig, SyntheticSpec,
    Taxonomy, TrainedPipeline,
};

pub struct Fixture {
    pub taxonomy: Taxonomy,
    pub docs: Vec<Document>,
}

impl Fixture {
    pub fn synthetic(depth: usize, branching: usize, docs_per_leaf: usize, noise: f64) -> Self {
        let files = generate_synthetic(&SyntheticSpec {
            depth,
            branching,
            docs_per_leaf,
            noise,
            ..Default::default()
        })
        .expect("valid synthetic spec");
        let taxonomy = Taxonomy::parse(&files.taxonomy).expect("generated taxonomy parses");
        let docs = load_corpus(&files.corpus, &taxonomy).expect("generated corpus loads");
        Fixture { taxonomy, docs }
    }

    pub fn train(&self) -> TrainedPipeline {
        train_pipeline(&self.taxonomy, &self.docs, &PipelineConfig::default())
            .expect("training succeeds")
    }
}

/// Deterministic `(reliability, correct)` pairs for threshold sweeps.
pub fn reliability_samples(n: usize, seed: u64) -> Vec<(f64, bool)> {
    let mut rng = routeconf::rng::SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let correct = rng.unit() < 0.8;
            let r = if correct {
                0.4 + 0.6 * rng.unit()
            } else {
                0.8 * rng.unit()
            };
            (r, correct)
        })
        .collect()
}
