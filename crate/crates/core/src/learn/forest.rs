//! Cost-sensitive oblique random forest.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Quality;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Input columns combined in each candidate hyperplane.
    pub combined_features: usize,
    /// Candidate hyperplanes tried at each node.
    pub candidates_per_node: usize,
    /// Class weights; low quality is the costlier class to misjudge.
    pub low_weight: f64,
    pub high_weight: f64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: 9,
            combined_features: 5,
            candidates_per_node: 10,
            low_weight: 2.0,
            high_weight: 1.0,
        }
    }
}

impl ForestParams {
    fn weight(&self, q: Quality) -> f64 {
        match q {
            Quality::Low => self.low_weight,
            Quality::High => self.high_weight,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Goes left when the projection is at most `threshold`.
    Split {
        features: Vec<usize>,
        coefficients: Vec<f64>,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Weighted class counts (low, high) of the training rows reaching this leaf.
    Leaf { counts: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn project(features: &[usize], coefficients: &[f64], x: &[f64]) -> f64 {
    features.iter().zip(coefficients).map(|(&f, c)| c * x[f]).sum()
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split { features, coefficients, threshold, left, right } => {
                    i = if project(features, coefficients, x) <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Weighted majority of the reached leaf; ties go to low.
    pub fn predict(&self, x: &[f64]) -> Quality {
        let [l, h] = self.leaf(x);
        if h > l {
            Quality::High
        } else {
            Quality::Low
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Forest {
    pub inputs: usize,
    pub trees: Vec<Tree>,
}

/// Forest output: majority label and the fraction of trees voting for it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: Quality,
    pub confidence: f64,
}

impl Prediction {
    pub fn uncertainty(&self) -> f64 {
        1.0 - self.confidence
    }
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let high = self.trees.iter().filter(|t| t.predict(x) == Quality::High).count();
        let low = self.trees.len() - high;
        let (label, votes) = if high > low { (Quality::High, high) } else { (Quality::Low, low) };
        Prediction { label, confidence: votes as f64 / self.trees.len() as f64 }
    }

    pub fn uncertainty(&self, x: &[f64]) -> f64 {
        self.predict(x).uncertainty()
    }
}

/// Gini impurity of weighted counts, times their total weight.
fn weighted_gini(l: f64, h: f64) -> f64 {
    let t = l + h;
    if t <= 0.0 {
        0.0
    } else {
        t - (l * l + h * h) / t
    }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Quality],
    params: &'a ForestParams,
    rng: seed::Rng,
    nodes: Vec<Node>,
}

struct Candidate {
    features: Vec<usize>,
    coefficients: Vec<f64>,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn counts(&self, sample: &[(usize, f64)]) -> [f64; 2] {
        let mut c = [0.0; 2];
        for &(i, w) in sample {
            c[self.labels[i].index()] += w;
        }
        c
    }

    fn best_split(&mut self, sample: &[(usize, f64)]) -> Option<Candidate> {
        let width = self.rows[0].len();
        let f = self.params.combined_features.min(width).max(1);
        let mut best: Option<Candidate> = None;
        let mut proj: Vec<(f64, usize)> = Vec::with_capacity(sample.len());
        let total = self.counts(sample);
        for _ in 0..self.params.candidates_per_node.max(1) {
            let mut features = sample_cols(&mut self.rng, width, f);
            features.sort_unstable();
            let coefficients: Vec<f64> = (0..f).map(|_| self.rng.random_range(-1.0..=1.0)).collect();
            proj.clear();
            proj.extend(
                sample
                    .iter()
                    .enumerate()
                    .map(|(k, &(i, _))| (project(&features, &coefficients, &self.rows[i]), k)),
            );
            proj.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = [0.0; 2];
            for w in 0..proj.len() - 1 {
                let (i, wt) = sample[proj[w].1];
                left[self.labels[i].index()] += wt;
                if proj[w].0 == proj[w + 1].0 {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let imp = weighted_gini(left[0], left[1]) + weighted_gini(right[0], right[1]);
                if best.as_ref().is_none_or(|b| imp < b.impurity) {
                    best = Some(Candidate {
                        features: features.clone(),
                        coefficients: coefficients.clone(),
                        threshold: 0.5 * (proj[w].0 + proj[w + 1].0),
                        impurity: imp,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, sample: Vec<(usize, f64)>, depth: usize) -> usize {
        let counts = self.counts(&sample);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        if depth >= self.params.max_depth || counts[0] <= 0.0 || counts[1] <= 0.0 || sample.len() < 2 {
            return id;
        }
        let Some(split) = self.best_split(&sample) else {
            return id;
        };
        if split.impurity >= weighted_gini(counts[0], counts[1]) - 1e-12 {
            return id;
        }
        let (l, r): (Vec<_>, Vec<_>) = sample
            .into_iter()
            .partition(|&(i, _)| project(&split.features, &split.coefficients, &self.rows[i]) <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            features: split.features,
            coefficients: split.coefficients,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

fn sample_cols(rng: &mut seed::Rng, width: usize, f: usize) -> Vec<usize> {
    sample(rng, width, f).into_vec()
}

fn train_tree(rows: &[Vec<f64>], labels: &[Quality], params: &ForestParams, tree_seed: u64) -> Tree {
    let mut rng = seed::rng(tree_seed);
    let n = rows.len();
    // rows are drawn in proportion to their class weight
    let draw = WeightedIndex::new(labels.iter().map(|&q| params.weight(q))).expect("weights are positive");
    let mut mult = vec![0u32; n];
    for _ in 0..n {
        mult[draw.sample(&mut rng)] += 1;
    }
    let sample: Vec<(usize, f64)> = mult
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(i, &m)| (i, m as f64 * params.weight(labels[i])))
        .collect();
    let mut b = Builder { rows, labels, params, rng, nodes: Vec::new() };
    b.grow(sample, 0);
    Tree { nodes: b.nodes }
}

/// Trains every tree on its own bootstrap. Per-tree seeds derive from
/// `rng_seed`, so the forest does not depend on thread scheduling.
pub fn train_forest(rows: &[Vec<f64>], labels: &[Quality], params: &ForestParams, rng_seed: u64) -> Result<Forest> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidArgument(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    let inputs = rows[0].len();
    if inputs == 0 || rows.iter().any(|r| r.len() != inputs) {
        return Err(Error::InvalidArgument("training rows differ in width".into()));
    }
    if !labels.contains(&Quality::Low) || !labels.contains(&Quality::High) {
        return Err(Error::SingleClass);
    }
    if params.n_trees == 0 || params.low_weight <= 0.0 || params.high_weight <= 0.0 {
        return Err(Error::InvalidArgument("forest needs trees and positive class weights".into()));
    }
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| train_tree(rows, labels, params, seed::derive(rng_seed, t as u64)))
        .collect();
    Ok(Forest { inputs, trees })
}

pub const MODEL_HEADER: &str = "CPFOREST v1";

fn list<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Forest {
    /// Text model file. Floats print in shortest round-trip form.
    pub fn to_model_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MODEL_HEADER}");
        let _ = writeln!(s, "forest trees={} inputs={}", self.trees.len(), self.inputs);
        for (t, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(s, "tree {t} nodes={}", tree.nodes.len());
            for (i, n) in tree.nodes.iter().enumerate() {
                match n {
                    Node::Split { features, coefficients, threshold, left, right } => {
                        let _ = writeln!(
                            s,
                            "{i} split ([{}], [{}], {threshold}, {left}, {right})",
                            list(features),
                            list(coefficients)
                        );
                    }
                    Node::Leaf { counts } => {
                        let _ = writeln!(s, "{i} leaf ({}, {})", counts[0], counts[1]);
                    }
                }
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn parse_model_text(text: &str) -> Result<Forest> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::parse(0, format!("model ends before {what}")));
        let (n, header) = next("header")?;
        if header != MODEL_HEADER {
            return Err(Error::parse(n, format!("expected '{MODEL_HEADER}'")));
        }
        let (n, line) = next("forest line")?;
        let (n_trees, inputs) = match kv2(line, "forest", "trees", "inputs") {
            Some(v) => v,
            None => return Err(Error::parse(n, "expected 'forest trees=<n> inputs=<n>'")),
        };
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let (n, line) = next("tree")?;
            let rest = line
                .strip_prefix(&format!("tree {t} "))
                .ok_or_else(|| Error::parse(n, format!("expected 'tree {t}'")))?;
            let count: usize = rest
                .strip_prefix("nodes=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(n, "bad node count"))?;
            let mut nodes = Vec::with_capacity(count);
            for i in 0..count {
                let (n, line) = next("node")?;
                nodes.push(parse_node(line, i, count, inputs).map_err(|m| Error::parse(n, m))?);
            }
            trees.push(Tree { nodes });
        }
        let (n, end) = next("end")?;
        if end != "end" {
            return Err(Error::parse(n, "expected 'end'"));
        }
        if trees.is_empty() {
            return Err(Error::parse(2, "forest has no trees"));
        }
        Ok(Forest { inputs, trees })
    }
}

fn kv2(line: &str, tag: &str, a: &str, b: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    if it.next()? != tag {
        return None;
    }
    let x = it.next()?.strip_prefix(a)?.strip_prefix('=')?.parse().ok()?;
    let y = it.next()?.strip_prefix(b)?.strip_prefix('=')?.parse().ok()?;
    it.next().is_none().then_some((x, y))
}

fn parse_node(line: &str, index: usize, count: usize, inputs: usize) -> std::result::Result<Node, String> {
    let rest = line
        .strip_prefix(&format!("{index} "))
        .ok_or_else(|| format!("expected node {index}"))?;
    let inner = |s: &str| -> std::result::Result<String, String> {
        s.strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .map(str::to_string)
            .ok_or_else(|| "node tuple must be parenthesized".to_string())
    };
    let float = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad number '{}'", s.trim()));
    if let Some(t) = rest.strip_prefix("leaf ") {
        let body = inner(t)?;
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 2 {
            return Err("leaf needs two counts".into());
        }
        return Ok(Node::Leaf { counts: [float(parts[0])?, float(parts[1])?] });
    }
    let t = rest.strip_prefix("split ").ok_or("expected split or leaf")?;
    let body = inner(t)?;
    // ([features], [coefficients], threshold, left, right)
    let (feat, rest) = bracketed(&body)?;
    let rest = rest.trim_start().strip_prefix(',').ok_or("missing comma")?;
    let (coef, rest) = bracketed(rest.trim_start())?;
    let tail: Vec<&str> = rest.trim_start().strip_prefix(',').ok_or("missing comma")?.split(',').collect();
    if tail.len() != 3 {
        return Err("split needs threshold, left and right".into());
    }
    let features = feat
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad feature id '{s}'")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let coefficients = coef.split(',').map(float).collect::<std::result::Result<Vec<_>, _>>()?;
    let child = |s: &str| -> std::result::Result<usize, String> {
        let c: usize = s.trim().parse().map_err(|_| format!("bad child '{}'", s.trim()))?;
        if c <= index || c >= count {
            return Err(format!("child {c} out of order"));
        }
        Ok(c)
    };
    if features.len() != coefficients.len() || features.iter().any(|&f| f >= inputs) {
        return Err("split features and coefficients disagree".into());
    }
    Ok(Node::Split {
        features,
        coefficients,
        threshold: float(tail[0])?,
        left: child(tail[1])?,
        right: child(tail[2])?,
    })
}

fn bracketed(s: &str) -> std::result::Result<(&str, &str), String> {
    let s = s.strip_prefix('[').ok_or("expected '['")?;
    let end = s.find(']').ok_or("missing ']'")?;
    Ok((&s[..end], &s[end + 1..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable(n: usize, seed_: u64) -> (Vec<Vec<f64>>, Vec<Quality>) {
        let mut rng = seed::rng(seed_);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let x: f64 = rng.random_range(0.0..1.0);
            let y: f64 = rng.random_range(0.0..1.0);
            if (x + y - 1.0).abs() < 0.02 {
                continue;
            }
            rows.push(vec![x, y]);
            labels.push(if x + y > 1.0 { Quality::High } else { Quality::Low });
        }
        (rows, labels)
    }

    fn small() -> ForestParams {
        ForestParams { combined_features: 2, ..ForestParams::default() }
    }

    #[test]
    fn separable_training_accuracy() {
        let (rows, labels) = separable(200, 1);
        let f = train_forest(&rows, &labels, &small(), 9).unwrap();
        let ok = rows.iter().zip(&labels).filter(|(r, l)| f.predict(r).label == **l).count();
        assert!(ok as f64 / rows.len() as f64 >= 0.98);
        assert!(f.trees.iter().all(|t| t.depth() <= 9));
    }

    #[test]
    fn deterministic_and_order_free() {
        let (rows, labels) = separable(150, 2);
        let a = train_forest(&rows, &labels, &small(), 4).unwrap();
        let b = train_forest(&rows, &labels, &small(), 4).unwrap();
        assert_eq!(a, b);
        let mut rev = a.clone();
        rev.trees.reverse();
        for r in &rows {
            assert_eq!(a.predict(r), rev.predict(r));
        }
    }

    #[test]
    fn single_class_rejected() {
        let rows = vec![vec![0.0], vec![1.0]];
        let labels = vec![Quality::High, Quality::High];
        assert!(matches!(train_forest(&rows, &labels, &small(), 0), Err(Error::SingleClass)));
    }

    #[test]
    fn vote_fraction() {
        let leaf = |l: f64, h: f64| Tree { nodes: vec![Node::Leaf { counts: [l, h] }] };
        let mut trees: Vec<Tree> = (0..30).map(|_| leaf(0.0, 3.0)).collect();
        trees.extend((0..20).map(|_| leaf(2.0, 1.0)));
        let f = Forest { inputs: 1, trees };
        let p = f.predict(&[0.0]);
        assert_eq!(p.label, Quality::High);
        assert!((p.uncertainty() - 0.4).abs() < 1e-12);

        let tie = Forest { inputs: 1, trees: (0..50).map(|i| if i < 25 { leaf(0.0, 1.0) } else { leaf(1.0, 0.0) }).collect() };
        assert_eq!(tie.predict(&[0.0]), Prediction { label: Quality::Low, confidence: 0.5 });
        // equal weighted leaf counts vote low
        assert_eq!(leaf(2.0, 2.0).predict(&[0.0]), Quality::Low);
    }

    #[test]
    fn model_text_round_trip() {
        let (rows, labels) = separable(120, 3);
        let f = train_forest(&rows, &labels, &small(), 8).unwrap();
        let text = f.to_model_text();
        assert!(text.starts_with("CPFOREST v1\n"));
        let g = Forest::parse_model_text(&text).unwrap();
        assert_eq!(g, f);
        assert_eq!(g.to_model_text(), text);
    }

    #[test]
    fn bad_model_rejected() {
        assert!(Forest::parse_model_text("CPFOREST v2\n").is_err());
        let t = "CPFOREST v1\nforest trees=1 inputs=2\ntree 0 nodes=1\n0 split ([0], [1], 0.5, 1, 2)\nend\n";
        assert!(Forest::parse_model_text(t).is_err());
        let t = "CPFOREST v1\nforest trees=1 inputs=2\ntree 0 nodes=1\n0 leaf (1, 2)\nend\n";
        assert!(Forest::parse_model_text(t).is_ok());
    }
}
