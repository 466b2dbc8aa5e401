use serde::{Deserialize, Serialize};

use super::active::{active_learn, ActiveOutcome, ActiveParams};
use super::cure::{cure_cluster, stratified_sample, CureParams};
use super::distance::model_input;
use super::forest::ForestParams;
use super::importance::{permutation_importance, Importance};
use crate::content_space::{AttributeRanges, FeatureVector};
use crate::dataset::Record;
use crate::error::{Error, Result};
use crate::oracle::Quality;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnParams {
    pub validation: usize,
    pub cure: CureParams,
    pub forest: ForestParams,
    pub active: ActiveParams,
    /// Shuffles per feature in the importance test.
    pub permutations: usize,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            validation: 800,
            cure: CureParams::default(),
            forest: ForestParams::default(),
            active: ActiveParams::default(),
            permutations: 10,
        }
    }
}

pub struct LearnOutcome {
    pub clusters: usize,
    /// Dataset indices of the validation set.
    pub validation: Vec<usize>,
    /// Dataset index of each pool position.
    pub pool: Vec<usize>,
    pub active: ActiveOutcome,
    pub importance: Vec<Importance>,
}

/// Clusters the dataset, draws a cluster-stratified validation set and runs
/// active learning on the remaining records, whose stored labels play the
/// annotator.
pub fn learn_from_records(records: &[Record], params: &LearnParams, ranges: &AttributeRanges, rng_seed: u64) -> Result<LearnOutcome> {
    if records.len() <= params.validation {
        return Err(Error::InvalidArgument(format!(
            "dataset of {} records leaves no pool after {} validation records",
            records.len(),
            params.validation
        )));
    }
    let quality: Vec<Quality> = records.iter().map(|r| r.label.quality()).collect();
    if !(quality.contains(&Quality::High) && quality.contains(&Quality::Low)) {
        return Err(Error::SingleClass);
    }
    let fvs: Vec<FeatureVector> = records.iter().map(|r| r.segment.to_feature_vector()).collect();
    let clustering = cure_cluster(&fvs, &params.cure, ranges, seed::derive(rng_seed, 0))?;
    let validation = stratified_sample(&clustering, params.validation, seed::derive(rng_seed, 1));
    let mut in_val = vec![false; records.len()];
    for &i in &validation {
        in_val[i] = true;
    }
    let pool: Vec<usize> = (0..records.len()).filter(|&i| !in_val[i]).collect();
    let rows: Vec<Vec<f64>> = pool.iter().map(|&i| model_input(&fvs[i], ranges)).collect();
    let val: Vec<(Vec<f64>, Quality)> = validation.iter().map(|&i| (model_input(&fvs[i], ranges), quality[i])).collect();
    let active = active_learn(&rows, |p| quality[pool[p]], &val, &params.forest, &params.active, seed::derive(rng_seed, 2))?;
    let labeled_val: Vec<(FeatureVector, Quality)> = validation.iter().map(|&i| (fvs[i].clone(), quality[i])).collect();
    let importance = permutation_importance(&active.forest, &labeled_val, ranges, params.permutations, seed::derive(rng_seed, 3));
    Ok(LearnOutcome { clusters: clustering.k, validation, pool, active, importance })
}
