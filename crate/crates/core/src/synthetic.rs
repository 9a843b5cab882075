//! Seeded synthetic grading corpora with a known reliability signal.
//!
//! Every item gets a hidden reliability `q` drawn uniformly from
//! `[q_min, q_max]`; each of its `N` samples reproduces the gold score with
//! probability `q` and otherwise picks one of the other labels uniformly.
//! Rationales are templated from the sampled score with random filler, so
//! samples that agree on the score also overlap lexically.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::response::{ConfigKey, GradingSample, ResponseSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub items_per_config: usize,
    pub samples: usize,
    pub label_min: i64,
    pub label_max: i64,
    pub q_min: f64,
    pub q_max: f64,
    /// Probability that a sample's score is unparseable.
    pub invalid_rate: f64,
    pub seed: u64,
    pub configs: Vec<ConfigKey>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            items_per_config: 500,
            samples: 5,
            label_min: 0,
            label_max: 3,
            q_min: 0.3,
            q_max: 1.0,
            invalid_rate: 0.0,
            seed: 20240601,
            configs: vec![ConfigKey::new("synthetic-model", "q1", crate::response::Strategy::ZeroShotCot)],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticItem {
    pub set: ResponseSet,
    /// Hidden per-item reliability.
    pub q: f64,
}

const QUALITY: [&[&str]; 5] = [
    &["misses the question entirely", "offers no relevant reasoning", "shows no grasp of the concept"],
    &["mentions a related idea", "gives a vague and partial claim", "names the topic without explaining it"],
    &["explains the main mechanism", "links the evidence to a partial conclusion", "covers most required steps"],
    &["gives a complete and precise explanation", "connects every claim to evidence", "uses the model correctly throughout"],
    &["goes beyond the rubric with insight", "justifies each step rigorously", "anticipates counterexamples"],
];

const FILLER: [&str; 12] = [
    "the student", "in this answer", "according to the rubric", "overall", "notably", "as written",
    "on balance", "for this item", "in context", "to be fair", "in short", "as expected",
];

fn rationale(rng: &mut ChaCha8Rng, score: i64, label_min: i64) -> String {
    let bank = QUALITY[((score - label_min) as usize).min(QUALITY.len() - 1)];
    let first = bank.choose(rng).expect("non-empty bank");
    let second = bank.choose(rng).expect("non-empty bank");
    let filler = FILLER.choose(rng).expect("non-empty filler");
    format!("The response {first}. {filler}, it {second}. Score: {score}.")
}

pub fn generate(spec: &SyntheticSpec) -> Vec<SyntheticItem> {
    assert!(spec.samples >= 2 && spec.label_min < spec.label_max);
    assert!((0.0..=1.0).contains(&spec.q_min) && spec.q_min <= spec.q_max && spec.q_max <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels: Vec<i64> = (spec.label_min..=spec.label_max).collect();
    let mut out = Vec::with_capacity(spec.items_per_config * spec.configs.len());
    for config in &spec.configs {
        for i in 0..spec.items_per_config {
            let gold = *labels.choose(&mut rng).expect("labels");
            let q = rng.gen_range(spec.q_min..=spec.q_max);
            let samples = (0..spec.samples)
                .map(|s| {
                    let score = if rng.gen_bool(q) {
                        gold
                    } else {
                        let others: Vec<i64> = labels.iter().copied().filter(|&l| l != gold).collect();
                        *others.choose(&mut rng).expect("at least two labels")
                    };
                    let text = rationale(&mut rng, score, spec.label_min);
                    let invalid = spec.invalid_rate > 0.0 && rng.gen_bool(spec.invalid_rate);
                    GradingSample {
                        score: (!invalid).then_some(score),
                        raw: if invalid { "I am unable to assign a grade.".into() } else { text.clone() },
                        rationale: text,
                        sample_index: s,
                    }
                })
                .collect();
            let set = ResponseSet::new(
                format!("item-{i:04}"),
                config.clone(),
                gold,
                (spec.label_min, spec.label_max),
                samples,
            )
            .expect("generator respects response-set invariants");
            out.push(SyntheticItem { set, q });
        }
    }
    out
}
