//! Quality evaluation: mixed-type distance, CURE clustering for validation
//! stratification, a cost-sensitive oblique forest and active learning.

mod active;
mod cure;
mod distance;
mod forest;
mod importance;
mod pipeline;

pub use active::{active_learn, most_uncertain, ActiveOutcome, ActiveParams, Round, CURVE_HEADER};
pub use cure::{choose_k, cure_cluster, stratified_quotas, stratified_sample, Clustering, CureParams, Dendrogram, Merge};
pub use distance::{mixed_distance, model_input, INPUT_WIDTH};
pub use forest::{train_forest, Forest, ForestParams, Node, Prediction, Tree, MODEL_HEADER};
pub use importance::{importance_csv, permutation_importance, Importance, IMPORTANCE_HEADER};
pub use pipeline::{learn_from_records, LearnOutcome, LearnParams};

use crate::oracle::Quality;

/// Confusion rates with high quality as the positive class. Type I is a
/// high segment judged low, type II a low segment judged high.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRates {
    pub type_i: f64,
    pub type_ii: f64,
    pub accuracy: f64,
    pub high: usize,
    pub low: usize,
}

impl ErrorRates {
    /// From (truth, prediction) pairs.
    pub fn from_pairs(pairs: &[(Quality, Quality)]) -> ErrorRates {
        let mut high = 0;
        let mut low = 0;
        let mut miss_high = 0;
        let mut miss_low = 0;
        for &(y, p) in pairs {
            match y {
                Quality::High => {
                    high += 1;
                    if p == Quality::Low {
                        miss_high += 1;
                    }
                }
                Quality::Low => {
                    low += 1;
                    if p == Quality::High {
                        miss_low += 1;
                    }
                }
            }
        }
        let rate = |m: usize, n: usize| if n == 0 { 0.0 } else { m as f64 / n as f64 };
        ErrorRates {
            type_i: rate(miss_high, high),
            type_ii: rate(miss_low, low),
            accuracy: rate(high + low - miss_high - miss_low, high + low),
            high,
            low,
        }
    }

    pub fn hter(&self) -> f64 {
        (self.type_i + self.type_ii) / 2.0
    }

    pub fn balanced_accuracy(&self) -> f64 {
        1.0 - self.hter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Quality::*;

    #[test]
    fn rates_from_confusion() {
        let pairs = [(High, High), (High, Low), (High, High), (High, High), (Low, Low), (Low, High)];
        let r = ErrorRates::from_pairs(&pairs);
        assert_eq!(r.type_i, 0.25);
        assert_eq!(r.type_ii, 0.5);
        assert_eq!(r.hter(), 0.375);
        assert!((r.accuracy - 4.0 / 6.0).abs() < 1e-15);
    }
}
