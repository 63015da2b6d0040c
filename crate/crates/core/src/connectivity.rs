//! Channel correlation matrices, thresholded graphs and hierarchical ordering.
//!
//! The correlation is the uncentered cosine form
//! `R_ij = Σ x_i x_j / sqrt(Σ x_i² · Σ x_j²)`, which equals Pearson's
//! coefficient once every channel has been zero-centered over the full
//! recording. The adjacency matrix keeps an edge when `R_ij >= tau`, with no
//! self-loops.

use std::fmt::Write as _;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Label, Recording};
use crate::scalar::{self, Scalar};

/// Which timepoints enter a correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateFilter {
    All,
    State(Label),
}

impl StateFilter {
    pub fn matches(self, label: Label) -> bool {
        match self {
            StateFilter::All => true,
            StateFilter::State(s) => s == label,
        }
    }
}

impl std::fmt::Display for StateFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateFilter::All => f.write_str("all"),
            StateFilter::State(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for StateFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(StateFilter::All),
            "0" | "open" => Ok(StateFilter::State(0)),
            "1" | "blink" | "closed" => Ok(StateFilter::State(1)),
            _ => Err(Error::param("state", format!("expected 0, 1 or all, got {s:?}"))),
        }
    }
}

/// Symmetric channel-by-channel correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CorrMatrix<T> {
    pub labels: Vec<String>,
    values: Vec<T>,
}

impl<T: Scalar> CorrMatrix<T> {
    /// Builds a matrix from row-major values, mirroring the upper triangle so
    /// the result is exactly symmetric.
    pub fn from_rows(labels: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::param("rows", format!("expected a {n}x{n} matrix")));
        }
        let mut values = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                values[i * n + j] = rows[i][j];
                values[j * n + i] = rows[i][j];
            }
        }
        Ok(Self { labels, values })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.size() + j]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.values.chunks(self.size()).map(<[T]>::to_vec).collect()
    }

    /// Reorders rows and columns by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.size();
        let mut values = vec![T::zero(); n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                values[a * n + b] = self.get(i, j);
            }
        }
        Self { labels: order.iter().map(|&i| self.labels[i].clone()).collect(), values }
    }

    /// CSV with channel names as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.size() {
                let _ = write!(out, ",{}", self.get(i, j));
            }
            out.push('\n');
        }
        out
    }
}

/// Tolerance used to decide whether a channel counts as zero-centered.
///
/// Scaled by the square root of the machine epsilon: a centered `f32`
/// channel keeps a residual mean of up to half an ulp of the removed level,
/// which is far above any fixed `f64`-sized tolerance.
fn centered_tolerance<T: Scalar>(values: &[T]) -> T {
    let scale = values.iter().fold(T::one(), |m, v| m.max(v.abs()));
    T::epsilon().sqrt() * scale
}

/// Correlation matrix over the timepoints whose label matches `filter`.
///
/// Every channel must be zero-centered over the whole recording.
pub fn correlation_matrix<T: Scalar>(rec: &Recording<T>, filter: StateFilter) -> Result<CorrMatrix<T>> {
    correlation_matrix_in(rec, filter, 0..rec.len())
}

/// Like [`correlation_matrix`] but restricted to timepoints in `range`.
pub fn correlation_matrix_in<T: Scalar>(
    rec: &Recording<T>,
    filter: StateFilter,
    range: Range<usize>,
) -> Result<CorrMatrix<T>> {
    if range.end > rec.len() || range.start > range.end {
        return Err(Error::param("range", format!("{range:?} outside 0..{}", rec.len())));
    }
    for c in rec.channels() {
        let m = scalar::mean(&c.values);
        if m.abs() > centered_tolerance(&c.values) {
            return Err(Error::NotCentered { channel: c.name.clone(), mean: m.as_f64() });
        }
    }
    let rows: Vec<usize> = range.filter(|&t| filter.matches(rec.labels()[t])).collect();
    if rows.len() < 2 {
        return Err(Error::EmptySubset(rows.len()));
    }
    let series: Vec<Vec<T>> = rec
        .channels()
        .iter()
        .map(|c| rows.iter().map(|&t| c.values[t]).collect())
        .collect();
    let energy: Vec<T> = series.iter().map(|s| scalar::ordered_sum(s.iter().map(|&v| v * v))).collect();
    if let Some(i) = energy.iter().position(|e| *e == T::zero()) {
        return Err(Error::DegenerateChannel(rec.channel(i).name.clone()));
    }

    let n = series.len();
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        values[i * n + i] = T::one();
        for j in i + 1..n {
            let cross = scalar::ordered_sum(series[i].iter().zip(&series[j]).map(|(&a, &b)| a * b));
            let r = (cross / (energy[i] * energy[j]).sqrt()).max(-T::one()).min(T::one());
            values[i * n + j] = r;
            values[j * n + i] = r;
        }
    }
    Ok(CorrMatrix { labels: rec.names(), values })
}

/// Binary undirected graph obtained by thresholding a correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelGraph<T> {
    pub labels: Vec<String>,
    pub tau: T,
    pub eye_state: StateFilter,
    adjacency: Vec<bool>,
}

impl<T: Scalar> ChannelGraph<T> {
    /// Graph from an explicit edge list; edges are unordered index pairs.
    pub fn from_edges(labels: Vec<String>, tau: T, eye_state: StateFilter, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::param("edges", format!("invalid edge ({i}, {j}) for {n} nodes")));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        Ok(Self { labels, tau, eye_state, adjacency })
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.size() + j]
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.size()).filter(|&j| self.has_edge(i, j)).count()
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.size();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.size();
        (0..n).map(|i| (0..n).map(|j| u8::from(self.has_edge(i, j))).collect()).collect()
    }
}

/// Thresholds a correlation matrix: `A_ij = 1` iff `i != j` and `C_ij >= tau`.
pub fn adjacency<T: Scalar>(corr: &CorrMatrix<T>, tau: T, eye_state: StateFilter) -> Result<ChannelGraph<T>> {
    if !(tau > -T::one() && tau < T::one()) {
        return Err(Error::param("tau", format!("must lie in (-1, 1), got {tau}")));
    }
    let n = corr.size();
    let mut adjacency = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            adjacency[i * n + j] = i != j && corr.get(i, j) >= tau;
        }
    }
    Ok(ChannelGraph { labels: corr.labels.clone(), tau, eye_state, adjacency })
}

/// Mean node degree, `2|E| / C`.
pub fn average_degree<T: Scalar>(g: &ChannelGraph<T>) -> f64 {
    if g.size() == 0 {
        return 0.0;
    }
    let total: usize = (0..g.size()).map(|i| g.degree(i)).sum();
    total as f64 / g.size() as f64
}

/// One agglomeration step. Clusters `0..C` are the leaves; the cluster
/// created at step `k` gets id `C + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

/// Average-linkage agglomerative clustering on `d_ij = 1 - C_ij`.
///
/// Among equally distant pairs the one with the lowest `(left, right)`
/// cluster ids merges first; the lower id always becomes the left child.
pub fn linkage<T: Scalar>(corr: &CorrMatrix<T>) -> Vec<Merge> {
    let n = corr.size();
    if n < 2 {
        return Vec::new();
    }
    let total = 2 * n - 1;
    let mut dist = vec![T::zero(); total * total];
    for i in 0..n {
        for j in 0..n {
            dist[i * total + j] = T::one() - corr.get(i, j);
        }
    }
    let mut size = vec![0usize; total];
    size[..n].fill(1);
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(usize, usize, T)> = None;
        // `active` stays sorted, so pairs are scanned in (left, right) order
        for (p, &a) in active.iter().enumerate() {
            for &b in &active[p + 1..] {
                let d = dist[a * total + b];
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.expect("at least two active clusters");
        let new = n + step;
        size[new] = size[a] + size[b];
        let (wa, wb) = (T::from_count(size[a]), T::from_count(size[b]));
        for &k in &active {
            if k != a && k != b {
                let v = (wa * dist[a * total + k] + wb * dist[b * total + k]) / (wa + wb);
                dist[new * total + k] = v;
                dist[k * total + new] = v;
            }
        }
        active.retain(|&k| k != a && k != b);
        active.push(new);
        merges.push(Merge { left: a, right: b, distance: d.as_f64(), size: size[new] });
    }
    merges
}

/// Leaf order of the average-linkage dendrogram (left subtree first).
pub fn cluster_order<T: Scalar>(corr: &CorrMatrix<T>) -> Vec<usize> {
    let n = corr.size();
    if n < 2 {
        return (0..n).collect();
    }
    let merges = linkage(corr);
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![2 * n - 2];
    while let Some(id) = stack.pop() {
        if id < n {
            order.push(id);
        } else {
            let m = &merges[id - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    order
}

/// Graph serialization formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// `# key: value` header lines followed by one `A B` line per edge.
    EdgeList,
    /// Graphviz DOT.
    Dot,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edge-list" | "edgelist" | "edges" => Ok(GraphFormat::EdgeList),
            "dot" => Ok(GraphFormat::Dot),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

/// Serializes a graph. Edges appear sorted by channel index pair.
pub fn export_graph<T: Scalar>(g: &ChannelGraph<T>, format: GraphFormat) -> String {
    let mut out = String::new();
    match format {
        GraphFormat::EdgeList => {
            let _ = writeln!(out, "# state: {}", g.eye_state);
            let _ = writeln!(out, "# tau: {}", g.tau);
            let _ = writeln!(out, "# nodes: {}", g.labels.join(" "));
            for (i, j) in g.edges() {
                let _ = writeln!(out, "{} {}", g.labels[i], g.labels[j]);
            }
        }
        GraphFormat::Dot => {
            let _ = writeln!(out, "graph eye_state_{} {{", g.eye_state);
            let _ = writeln!(out, "  // tau: {}", g.tau);
            for l in &g.labels {
                let _ = writeln!(out, "  \"{l}\";");
            }
            for (i, j) in g.edges() {
                let _ = writeln!(out, "  \"{}\" -- \"{}\";", g.labels[i], g.labels[j]);
            }
            out.push_str("}\n");
        }
    }
    out
}

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse { what: "graph", message: message.into() }
}

/// Reads back a graph written by [`export_graph`].
pub fn import_graph<T: Scalar>(text: &str, format: GraphFormat) -> Result<ChannelGraph<T>> {
    let mut labels: Vec<String> = Vec::new();
    let mut tau: Option<T> = None;
    let mut state = StateFilter::All;
    let mut named_edges: Vec<(String, String)> = Vec::new();

    match format {
        GraphFormat::EdgeList => {
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
                if let Some(meta) = line.strip_prefix('#') {
                    let Some((key, value)) = meta.split_once(':') else { continue };
                    let value = value.trim();
                    match key.trim() {
                        "state" => state = value.parse()?,
                        "tau" => tau = Some(value.parse().map_err(|_| parse_err(format!("bad tau {value:?}")))?),
                        "nodes" => labels = value.split_whitespace().map(str::to_string).collect(),
                        _ => {}
                    }
                    continue;
                }
                let mut parts = line.split_whitespace();
                match (parts.next(), parts.next(), parts.next()) {
                    (Some(a), Some(b), None) => named_edges.push((a.to_string(), b.to_string())),
                    _ => return Err(parse_err(format!("bad edge line {line:?}"))),
                }
            }
        }
        GraphFormat::Dot => {
            for line in text.lines().map(str::trim) {
                if let Some(rest) = line.strip_prefix("graph eye_state_") {
                    state = rest.trim_end_matches('{').trim().parse()?;
                } else if let Some(rest) = line.strip_prefix("// tau:") {
                    let value = rest.trim();
                    tau = Some(value.parse().map_err(|_| parse_err(format!("bad tau {value:?}")))?);
                } else if line.starts_with('"') {
                    let body = line.trim_end_matches(';');
                    if let Some((a, b)) = body.split_once("--") {
                        named_edges.push((a.trim().trim_matches('"').to_string(), b.trim().trim_matches('"').to_string()));
                    } else {
                        labels.push(body.trim_matches('"').to_string());
                    }
                }
            }
        }
    }

    let tau = tau.ok_or_else(|| parse_err("missing tau"))?;
    let index = |name: &str| {
        labels.iter().position(|l| l == name).ok_or_else(|| parse_err(format!("unknown node {name:?}")))
    };
    let edges = named_edges
        .iter()
        .map(|(a, b)| Ok((index(a)?, index(b)?)))
        .collect::<Result<Vec<_>>>()?;
    ChannelGraph::from_edges(labels, tau, state, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ChannelSeries;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    fn corr(rows: &[&[f64]]) -> CorrMatrix<f64> {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        CorrMatrix::from_rows(names(rows.len()), &rows).unwrap()
    }

    fn recording(channels: Vec<Vec<f64>>, labels: Vec<u8>) -> Recording<f64> {
        let chans = channels.into_iter().enumerate().map(|(i, v)| ChannelSeries::new(format!("c{i}"), v)).collect();
        Recording::new(chans, labels, 128).unwrap()
    }

    #[test]
    fn hand_evaluated_correlation() {
        // Σxy = 1, sqrt(2 * 2) = 2
        let rec = recording(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0]], vec![0, 0, 1]);
        let c = correlation_matrix(&rec, StateFilter::All).unwrap();
        assert!((c.get(0, 1) - 0.5).abs() < 1e-15);
        assert_eq!(c.get(0, 2), -1.0);
        assert_eq!(c.get(1, 1), 1.0);
        assert_eq!(c.get(1, 0), c.get(0, 1));
    }

    #[test]
    fn correlation_preconditions() {
        let rec = recording(vec![vec![1.0, 2.0, 3.0], vec![0.0, 1.0, -1.0]], vec![0, 0, 1]);
        assert!(matches!(correlation_matrix(&rec, StateFilter::All), Err(Error::NotCentered { .. })));

        let rec = recording(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0]], vec![0, 0, 1]);
        assert!(matches!(correlation_matrix(&rec, StateFilter::State(1)), Err(Error::EmptySubset(1))));

        let rec = recording(vec![vec![1.0, 0.0, -1.0], vec![0.0, 1.0, -1.0]], vec![1, 0, 0]);
        assert!(correlation_matrix(&rec, StateFilter::State(0)).is_ok());
        let rec = recording(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, -1.0]], vec![0, 0, 1]);
        assert!(matches!(correlation_matrix(&rec, StateFilter::State(0)), Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn threshold_examples() {
        let c = corr(&[&[1.0, 0.7, 0.2], &[0.7, 1.0, 0.9], &[0.2, 0.9, 1.0]]);
        let g = adjacency(&c, 0.6, StateFilter::All).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
        assert!((0..3).all(|i| !g.has_edge(i, i)));
        assert!((average_degree(&g) - 4.0 / 3.0).abs() < 1e-15);

        let c = corr(&[&[1.0, 0.65], &[0.65, 1.0]]);
        assert!(adjacency(&c, 0.6, StateFilter::All).unwrap().has_edge(0, 1));
        // closed threshold
        assert!(adjacency(&c, 0.65, StateFilter::All).unwrap().has_edge(0, 1));
        assert!(adjacency(&c, 1.0, StateFilter::All).is_err());
    }

    #[test]
    fn degree_extremes() {
        let full: Vec<Vec<f64>> = (0..14).map(|_| vec![1.0; 14]).collect();
        let c = CorrMatrix::from_rows(names(14), &full).unwrap();
        assert_eq!(average_degree(&adjacency(&c, 0.5, StateFilter::All).unwrap()), 13.0);
        let eye: Vec<Vec<f64>> = (0..14).map(|i| (0..14).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let c = CorrMatrix::from_rows(names(14), &eye).unwrap();
        assert_eq!(average_degree(&adjacency(&c, 0.5, StateFilter::All).unwrap()), 0.0);
    }

    #[test]
    fn two_channel_order() {
        let c = corr(&[&[1.0, 0.3], &[0.3, 1.0]]);
        assert_eq!(cluster_order(&c), vec![0, 1]);
    }

    #[test]
    fn identical_channels_merge_first() {
        let c = corr(&[
            &[1.0, 0.2, 0.1, 0.2],
            &[0.2, 1.0, 0.3, 1.0],
            &[0.1, 0.3, 1.0, 0.3],
            &[0.2, 1.0, 0.3, 1.0],
        ]);
        let m = linkage(&c);
        assert_eq!((m[0].left, m[0].right), (1, 3));
        assert_eq!(m[0].distance, 0.0);
        let order = cluster_order(&c);
        let p1 = order.iter().position(|&i| i == 1).unwrap();
        let p3 = order.iter().position(|&i| i == 3).unwrap();
        assert_eq!(p1.abs_diff(p3), 1);
    }

    #[test]
    fn edge_list_and_dot() {
        let labels = vec!["AF3".to_string(), "F7".to_string(), "F3".to_string()];
        let empty = ChannelGraph::from_edges(labels.clone(), 0.7f64, StateFilter::State(1), &[]).unwrap();
        let text = export_graph(&empty, GraphFormat::EdgeList);
        assert!(text.lines().all(|l| l.starts_with('#')));

        let one = ChannelGraph::from_edges(labels, 0.7f64, StateFilter::State(1), &[(1, 0)]).unwrap();
        let text = export_graph(&one, GraphFormat::EdgeList);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec!["AF3 F7"]);
        assert_eq!(import_graph::<f64>(&text, GraphFormat::EdgeList).unwrap(), one);

        let dot = export_graph(&one, GraphFormat::Dot);
        assert!(dot.contains("\"AF3\" -- \"F7\";"));
        assert_eq!(import_graph::<f64>(&dot, GraphFormat::Dot).unwrap(), one);

        assert!(matches!("graphml".parse::<GraphFormat>(), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn permuted_csv() {
        let c = corr(&[&[1.0, 0.5], &[0.5, 1.0]]);
        assert_eq!(c.to_csv(), "channel,c0,c1\nc0,1,0.5\nc1,0.5,1\n");
        let p = c.permuted(&[1, 0]);
        assert_eq!(p.labels, vec!["c1", "c0"]);
        assert_eq!(p.get(0, 1), 0.5);
    }
}
