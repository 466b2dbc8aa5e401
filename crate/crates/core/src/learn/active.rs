use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::forest::{train_forest, Forest, ForestParams};
use super::ErrorRates;
use crate::error::{Error, Result};
use crate::oracle::Quality;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveParams {
    /// Randomly chosen labels for the first forest.
    pub initial: usize,
    /// Most uncertain pool items labeled per iteration.
    pub batch: usize,
    pub max_iterations: usize,
    /// Consecutive iterations without a new best before stopping.
    pub patience: usize,
}

impl Default for ActiveParams {
    fn default() -> Self {
        ActiveParams { initial: 100, batch: 100, max_iterations: 30, patience: 2 }
    }
}

/// Validation result after one training round; round 0 is the initial forest.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    pub labels_used: usize,
    pub rates: ErrorRates,
    /// Best balanced accuracy seen up to and including this round.
    pub best_accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct ActiveOutcome {
    /// The forest with the best validation balanced accuracy.
    pub forest: Forest,
    pub best_round: usize,
    pub history: Vec<Round>,
    /// Pool indices labeled, in labeling order.
    pub labeled: Vec<usize>,
    pub exhausted: bool,
}

pub const CURVE_HEADER: &str = "iteration,labels_used,val_accuracy,typeI,typeII,HTER,best_accuracy";

impl ActiveOutcome {
    pub fn curve_csv(&self) -> String {
        let mut s = format!("{CURVE_HEADER}\n");
        for (i, r) in self.history.iter().enumerate() {
            s.push_str(&format!(
                "{i},{},{},{},{},{},{}\n",
                r.labels_used,
                r.rates.balanced_accuracy(),
                r.rates.type_i,
                r.rates.type_ii,
                r.rates.hter(),
                r.best_accuracy
            ));
        }
        s
    }
}

/// Pool positions of the `k` highest-uncertainty items; ties go to the lower position.
pub fn most_uncertain(forest: &Forest, pool: &[Vec<f64>], candidates: &[usize], k: usize) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = candidates.iter().map(|&i| (forest.uncertainty(&pool[i]), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Uncertainty-driven pool-based learning: label a random start set, then
/// repeatedly label the batch the current forest is least sure about.
pub fn active_learn(
    pool: &[Vec<f64>],
    mut annotate: impl FnMut(usize) -> Quality,
    validation: &[(Vec<f64>, Quality)],
    forest_params: &ForestParams,
    params: &ActiveParams,
    rng_seed: u64,
) -> Result<ActiveOutcome> {
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation set"));
    }
    if params.initial == 0 || params.batch == 0 {
        return Err(Error::InvalidArgument("initial and batch sizes must be positive".into()));
    }
    let mut rng = seed::rng(seed::derive(rng_seed, 0));
    let mut unlabeled = vec![true; pool.len()];
    let mut labeled = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut take = |i: usize, rows: &mut Vec<Vec<f64>>, labels: &mut Vec<Quality>, labeled: &mut Vec<usize>, unlabeled: &mut [bool]| {
        unlabeled[i] = false;
        labeled.push(i);
        rows.push(pool[i].clone());
        labels.push(annotate(i));
    };

    let mut start: Vec<usize> = sample(&mut rng, pool.len(), params.initial.min(pool.len())).into_vec();
    start.sort_unstable();
    for i in start {
        take(i, &mut rows, &mut labels, &mut labeled, &mut unlabeled);
    }
    // a one-class start set cannot train; keep drawing at random
    while !(labels.contains(&Quality::Low) && labels.contains(&Quality::High)) {
        let rest: Vec<usize> = (0..pool.len()).filter(|&i| unlabeled[i]).collect();
        if rest.is_empty() {
            return Err(Error::SingleClass);
        }
        let mut more: Vec<usize> = sample(&mut rng, rest.len(), params.batch.min(rest.len()))
            .into_iter()
            .map(|j| rest[j])
            .collect();
        more.sort_unstable();
        for i in more {
            take(i, &mut rows, &mut labels, &mut labeled, &mut unlabeled);
        }
    }

    let evaluate = |f: &Forest| {
        let pairs: Vec<(Quality, Quality)> = validation.iter().map(|(x, y)| (*y, f.predict(x).label)).collect();
        ErrorRates::from_pairs(&pairs)
    };

    let mut forest = train_forest(&rows, &labels, forest_params, seed::derive(rng_seed, 1))?;
    let rates = evaluate(&forest);
    let mut best = (forest.clone(), 0usize, rates.balanced_accuracy());
    let mut history = vec![Round { labels_used: rows.len(), rates, best_accuracy: best.2 }];
    let mut stale = 0;
    let mut exhausted = false;
    for round in 1..=params.max_iterations {
        let rest: Vec<usize> = (0..pool.len()).filter(|&i| unlabeled[i]).collect();
        if rest.is_empty() {
            exhausted = true;
            break;
        }
        for i in most_uncertain(&forest, pool, &rest, params.batch) {
            take(i, &mut rows, &mut labels, &mut labeled, &mut unlabeled);
        }
        forest = train_forest(&rows, &labels, forest_params, seed::derive(rng_seed, 1 + round as u64))?;
        let rates = evaluate(&forest);
        let acc = rates.balanced_accuracy();
        if acc > best.2 {
            best = (forest.clone(), round, acc);
            stale = 0;
        } else {
            stale += 1;
        }
        history.push(Round { labels_used: rows.len(), rates, best_accuracy: best.2 });
        if stale >= params.patience {
            break;
        }
    }
    Ok(ActiveOutcome { forest: best.0, best_round: best.1, history, labeled, exhausted })
}
