//! Random forest of CART trees with Gini splitting.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scalar::Scalar;

/// How many candidate features each split examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "rule", content = "count")]
pub enum MaxFeatures {
    /// `ceil(sqrt(D))`.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (1..=d).find(|m| m * m >= d).unwrap_or(1),
            MaxFeatures::All => d,
            MaxFeatures::Count(m) => m.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    /// Draw a bootstrap resample per tree; disabling it is mainly a test hook.
    pub bootstrap: bool,
    pub seed: u64,
    /// Unlimited when `None`.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_features: MaxFeatures::Sqrt, bootstrap: true, seed: 0, max_depth: None, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum Node<T> {
    Leaf { label: Label, counts: [usize; 2] },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: T, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecisionTree<T> {
    /// Root at index 0.
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn predict_row(&self, x: &[T]) -> Label {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label, .. } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ForestModel<T> {
    pub params: ForestParams,
    pub n_features: usize,
    pub trees: Vec<DecisionTree<T>>,
}

impl<T: Scalar> ForestModel<T> {
    /// Per-label vote counts over all trees.
    pub fn votes(&self, x: &[T]) -> [usize; 2] {
        let mut v = [0; 2];
        for tree in &self.trees {
            v[tree.predict_row(x) as usize] += 1;
        }
        v
    }

    /// Majority vote; a tie goes to label 0.
    pub fn predict_row(&self, x: &[T]) -> Label {
        let v = self.votes(x);
        Label::from(v[1] > v[0])
    }
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn draw_bootstrap(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Bootstrap sample of tree `tree`, exactly as drawn during training.
pub fn bootstrap_rows(n_rows: usize, seed: u64, tree: usize) -> Vec<usize> {
    draw_bootstrap(&mut tree_rng(seed, tree), n_rows)
}

/// Rows never drawn into the bootstrap sample of tree `tree`.
pub fn out_of_bag_rows(n_rows: usize, seed: u64, tree: usize) -> Vec<usize> {
    let mut seen = vec![false; n_rows];
    for r in bootstrap_rows(n_rows, seed, tree) {
        seen[r] = true;
    }
    (0..n_rows).filter(|&r| !seen[r]).collect()
}

fn majority(counts: [usize; 2]) -> Label {
    Label::from(counts[1] > counts[0])
}

fn class_counts(targets: &[Label], rows: &[usize]) -> [usize; 2] {
    let mut c = [0; 2];
    for &r in rows {
        c[targets[r] as usize] += 1;
    }
    c
}

/// Split quality as the fraction `num / den` where larger is better:
/// `(a_L^2 + b_L^2) / n_L + (a_R^2 + b_R^2) / n_R`. Maximizing it minimizes
/// the size-weighted Gini impurity of the children.
#[derive(Clone, Copy)]
struct Quality {
    num: u128,
    den: u128,
}

impl Quality {
    fn new(left: [usize; 2], right: [usize; 2]) -> Self {
        let sq = |c: [usize; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        Self { num: sq(left) * nr + sq(right) * nl, den: nl * nr }
    }

    fn beats(&self, other: &Quality) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct SplitChoice<T> {
    feature: usize,
    threshold: T,
    quality: Quality,
}

fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = lo + (hi - lo) / T::lit(2.0);
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Best threshold on one feature, or `None` if the feature is constant over
/// `rows`.
fn best_on_feature<T: Scalar>(
    data: &Dataset<T>,
    rows: &[usize],
    feature: usize,
    total: [usize; 2],
    buf: &mut Vec<(T, Label)>,
) -> Option<(T, Quality)> {
    buf.clear();
    buf.extend(rows.iter().map(|&r| (data.row(r)[feature], data.targets()[r])));
    buf.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut left = [0usize; 2];
    let mut best: Option<(T, Quality)> = None;
    for k in 0..buf.len() - 1 {
        left[buf[k].1 as usize] += 1;
        if buf[k].0 < buf[k + 1].0 {
            let right = [total[0] - left[0], total[1] - left[1]];
            let q = Quality::new(left, right);
            if best.as_ref().is_none_or(|(_, b)| q.beats(b)) {
                best = Some((midpoint(buf[k].0, buf[k + 1].0), q));
            }
        }
    }
    best
}

struct Builder<'a, T> {
    data: &'a Dataset<T>,
    params: &'a ForestParams,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node<T>>,
    buf: Vec<(T, Label)>,
}

impl<T: Scalar> Builder<'_, T> {
    /// `mtry` distinct features, ascending.
    fn candidates(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        if self.mtry >= d {
            return (0..d).collect();
        }
        let mut pool: Vec<usize> = (0..d).collect();
        for i in 0..self.mtry {
            let j = self.rng.random_range(i..d);
            pool.swap(i, j);
        }
        let mut chosen = pool[..self.mtry].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn search(&mut self, rows: &[usize], features: &[usize], total: [usize; 2]) -> Option<SplitChoice<T>> {
        let mut best: Option<SplitChoice<T>> = None;
        for &f in features {
            if let Some((threshold, quality)) = best_on_feature(self.data, rows, f, total, &mut self.buf) {
                if best.as_ref().is_none_or(|b| quality.beats(&b.quality)) {
                    best = Some(SplitChoice { feature: f, threshold, quality });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = class_counts(self.data.targets(), &rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { label: majority(counts), counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || rows.len() < self.params.min_samples_split.max(2) {
            return id;
        }
        let features = self.candidates();
        let mut choice = self.search(&rows, &features, counts);
        if choice.is_none() {
            // every sampled feature is constant here; fall back to the rest
            let rest: Vec<usize> = (0..self.data.n_features()).filter(|f| !features.contains(f)).collect();
            choice = self.search(&rows, &rest, counts);
        }
        let Some(choice) = choice else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.data.row(r)[choice.feature] <= choice.threshold);
        drop(rows);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature: choice.feature, threshold: choice.threshold, left, right };
        id
    }
}

fn build_tree<T: Scalar>(data: &Dataset<T>, params: &ForestParams, tree: usize) -> DecisionTree<T> {
    let mut rng = tree_rng(params.seed, tree);
    let rows = if params.bootstrap { draw_bootstrap(&mut rng, data.n_rows()) } else { (0..data.n_rows()).collect() };
    let mut b = Builder {
        data,
        params,
        mtry: params.max_features.resolve(data.n_features()),
        rng,
        nodes: Vec::new(),
        buf: Vec::with_capacity(rows.len()),
    };
    b.grow(rows, 0);
    DecisionTree { nodes: b.nodes }
}

/// Trains `n_trees` trees. Tree `i` draws from its own stream of the root
/// seed, so the forest is fully determined by `params`.
pub fn rf_train<T: Scalar>(data: &Dataset<T>, params: &ForestParams) -> Result<ForestModel<T>> {
    data.require_both_classes()?;
    if params.n_trees == 0 {
        return Err(Error::param("n_trees", "must be at least 1"));
    }
    if let MaxFeatures::Count(0) = params.max_features {
        return Err(Error::param("max_features", "must be at least 1"));
    }
    let trees = (0..params.n_trees).map(|t| build_tree(data, params, t)).collect();
    Ok(ForestModel { params: params.clone(), n_features: data.n_features(), trees })
}
