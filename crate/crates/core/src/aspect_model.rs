//! Aspect schemas, label graphs and per-aspect label distances.
//!
//! A document is described by one label per aspect (topic, frame, ...). The
//! distance between two documents is a convex blend of per-aspect label
//! distances, so everything downstream is driven by the tables held here.
//!
//! Label distances come from an explicit table, from a label graph, or both.
//! With a graph, the distance between two labels is their shortest-path length
//! divided by the largest shortest-path length between any two label nodes.
//! Explicit entries always win over graph-derived ones. Pairs that are covered
//! by neither default to `1.0`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the blend-weight sum.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Symmetric label-distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f64>,
}

impl DistanceTable {
    /// A table over `labels` where every distinct pair starts at `fill`.
    fn filled(labels: &[String], fill: f64) -> Self {
        let n = labels.len();
        let mut values = vec![fill; n * n];
        for i in 0..n {
            values[i * n + i] = 0.0;
        }
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self {
            labels: labels.to_vec(),
            index,
            values,
        }
    }

    fn set(&mut self, i: usize, j: usize, value: f64) {
        let n = self.labels.len();
        self.values[i * n + j] = value;
        self.values[j * n + i] = value;
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Distance by label index. Panics on out-of-range indices.
    #[inline]
    pub fn by_index(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.by_index(self.index_of(a)?, self.index_of(b)?))
    }

    /// Every unordered pair of distinct labels, once, in label order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        let n = self.labels.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).map(move |j| (self.labels[i].as_str(), self.labels[j].as_str(), self.by_index(i, j)))
        })
    }
}

/// Undirected label graph. Nodes are the aspect's labels plus any internal
/// grouping nodes. Edges are stored as `[parent, child]` so that the
/// orientation can be used for ancestor tests; distances ignore it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl LabelGraph {
    fn validate(&self, aspect: &str) -> Result<()> {
        let mut seen = HashSet::new();
        for node in &self.nodes {
            if node.is_empty() {
                return Err(Error::Validation(format!("aspect '{aspect}': empty graph node name")));
            }
            if !seen.insert(node.as_str()) {
                return Err(Error::Validation(format!(
                    "aspect '{aspect}': duplicate graph node '{node}'"
                )));
            }
        }
        let mut edges = HashSet::new();
        for (a, b) in &self.edges {
            for end in [a, b] {
                if !seen.contains(end.as_str()) {
                    return Err(Error::Validation(format!(
                        "aspect '{aspect}': edge references unknown node '{end}'"
                    )));
                }
            }
            if a == b {
                return Err(Error::Validation(format!(
                    "aspect '{aspect}': self-loop on graph node '{a}'"
                )));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !edges.insert(key) {
                return Err(Error::Validation(format!(
                    "aspect '{aspect}': duplicate graph edge '{a}'-'{b}'"
                )));
            }
        }
        Ok(())
    }

    fn adjacency(&self) -> (HashMap<&str, usize>, Vec<Vec<usize>>) {
        let index: HashMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (a, b) in &self.edges {
            let (i, j) = (index[a.as_str()], index[b.as_str()]);
            adj[i].push(j);
            adj[j].push(i);
        }
        (index, adj)
    }

    fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; adj.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components as sorted node-name lists, ordered by first node.
    pub fn components(&self) -> Vec<Vec<String>> {
        let (_, adj) = self.adjacency();
        let mut assigned = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        for start in 0..self.nodes.len() {
            if assigned[start] {
                continue;
            }
            let mut comp: Vec<String> = Self::bfs(&adj, start)
                .iter()
                .enumerate()
                .filter(|(_, d)| d.is_some())
                .map(|(i, _)| {
                    assigned[i] = true;
                    self.nodes[i].clone()
                })
                .collect();
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// True when `node` equals `label` or reaches it along parent→child edges.
    pub fn is_ancestor_or_self(&self, node: &str, label: &str) -> bool {
        if node == label {
            return true;
        }
        let mut stack = vec![node];
        let mut visited = HashSet::from([node]);
        while let Some(cur) = stack.pop() {
            for (parent, child) in &self.edges {
                if parent == cur && visited.insert(child.as_str()) {
                    if child == label {
                        return true;
                    }
                    stack.push(child);
                }
            }
        }
        false
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }
}

/// One dimension along which documents vary.
#[derive(Debug, Clone, PartialEq)]
pub struct Aspect {
    name: String,
    labels: Vec<String>,
    graph: Option<LabelGraph>,
    explicit: Vec<(String, String, f64)>,
    distances: DistanceTable,
}

impl Aspect {
    /// Builds and validates an aspect, resolving its full distance table.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        explicit: Vec<(String, String, f64)>,
        graph: Option<LabelGraph>,
    ) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Validation("aspect name must be non-empty".into()));
        }
        if labels.is_empty() {
            return Err(Error::Validation(format!("aspect '{name}' has no labels")));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.is_empty() {
                return Err(Error::Validation(format!("aspect '{name}': empty label")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::Validation(format!("aspect '{name}': duplicate label '{label}'")));
            }
        }
        let mut pairs = HashSet::new();
        for (a, b, v) in &explicit {
            for l in [a, b] {
                if !seen.contains(l.as_str()) {
                    return Err(Error::Validation(format!(
                        "aspect '{name}': distance entry references unknown label '{l}'"
                    )));
                }
            }
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Validation(format!(
                    "aspect '{name}': distance out of range for ({a}, {b}): {v}"
                )));
            }
            if a == b && *v != 0.0 {
                return Err(Error::Validation(format!(
                    "aspect '{name}': distance of '{a}' to itself must be 0, got {v}"
                )));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            if !pairs.insert(key) {
                return Err(Error::Validation(format!(
                    "aspect '{name}': duplicate distance entry for ({a}, {b})"
                )));
            }
        }
        if let Some(graph) = &graph {
            graph.validate(&name)?;
            if let Some(missing) = labels.iter().find(|l| !graph.contains(l)) {
                return Err(Error::Validation(format!(
                    "aspect '{name}': label '{missing}' is not a graph node"
                )));
            }
        }

        let mut aspect = Self {
            distances: DistanceTable::filled(&labels, 1.0),
            name,
            labels,
            graph,
            explicit,
        };
        aspect.distances = if aspect.graph.is_some() {
            derive_distances_from_graph(&aspect)?
        } else {
            aspect.explicit_only_table()
        };
        Ok(aspect)
    }

    fn explicit_only_table(&self) -> DistanceTable {
        let mut table = DistanceTable::filled(&self.labels, 1.0);
        let mut covered = HashSet::new();
        for (a, b, v) in &self.explicit {
            let (i, j) = (table.index_of(a).unwrap(), table.index_of(b).unwrap());
            table.set(i, j, *v);
            covered.insert((i.min(j), i.max(j)));
        }
        let n = self.labels.len();
        let missing = n * n.saturating_sub(1) / 2 - covered.iter().filter(|(i, j)| i != j).count();
        if missing > 0 {
            log::warn!(
                "aspect '{}': {missing} label pair(s) have no distance; defaulting to 1.0",
                self.name
            );
        }
        table
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn graph(&self) -> Option<&LabelGraph> {
        self.graph.as_ref()
    }

    /// Entries given explicitly, before graph derivation or defaults.
    pub fn explicit_distances(&self) -> &[(String, String, f64)] {
        &self.explicit
    }

    pub fn distances(&self) -> &DistanceTable {
        &self.distances
    }
}

/// Derives the label-distance table of `aspect` from its label graph.
///
/// Explicit entries on the aspect override the derived values.
pub fn derive_distances_from_graph(aspect: &Aspect) -> Result<DistanceTable> {
    let graph = aspect
        .graph
        .as_ref()
        .ok_or_else(|| Error::Contract(format!("aspect '{}' has no label graph", aspect.name)))?;
    let components = graph.components();
    if components.len() > 1 {
        let listing: Vec<String> = components.iter().map(|c| format!("{{{}}}", c.join(", "))).collect();
        return Err(Error::Derivation(format!(
            "label graph of aspect '{}' is disconnected: {}",
            aspect.name,
            listing.join(" ")
        )));
    }

    let (index, adj) = graph.adjacency();
    let n = aspect.labels.len();
    let mut hops = vec![0usize; n * n];
    for (i, label) in aspect.labels.iter().enumerate() {
        let from = LabelGraph::bfs(&adj, index[label.as_str()]);
        for (j, other) in aspect.labels.iter().enumerate() {
            // connected, so every node is reachable
            hops[i * n + j] = from[index[other.as_str()]].unwrap_or(0);
        }
    }
    let diameter = hops.iter().copied().max().unwrap_or(0);

    let mut table = DistanceTable::filled(&aspect.labels, 0.0);
    if diameter > 0 {
        for i in 0..n {
            for j in i + 1..n {
                table.set(i, j, hops[i * n + j] as f64 / diameter as f64);
            }
        }
    }
    for (a, b, v) in &aspect.explicit {
        let (i, j) = (table.index_of(a).unwrap(), table.index_of(b).unwrap());
        table.set(i, j, *v);
    }
    Ok(table)
}

/// Aspects plus the convex blend weights used for document distance.
#[derive(Debug, Clone, PartialEq)]
pub struct AspectSchema {
    aspects: Vec<Aspect>,
    weights: Vec<f64>,
}

impl AspectSchema {
    pub fn new(aspects: Vec<Aspect>, weights: &BTreeMap<String, f64>) -> Result<Self> {
        if aspects.is_empty() {
            return Err(Error::Validation("schema has no aspects".into()));
        }
        let mut names = HashSet::new();
        for a in &aspects {
            if !names.insert(a.name.as_str()) {
                return Err(Error::Validation(format!("duplicate aspect name '{}'", a.name)));
            }
        }
        let weights = Self::resolve_weights(&aspects, weights)?;
        Ok(Self { aspects, weights })
    }

    fn resolve_weights(aspects: &[Aspect], weights: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        if let Some(unknown) = weights.keys().find(|k| !aspects.iter().any(|a| &a.name == *k)) {
            return Err(Error::Validation(format!(
                "weight given for unknown aspect '{unknown}'"
            )));
        }
        let mut out = Vec::with_capacity(aspects.len());
        for a in aspects {
            let w = *weights
                .get(&a.name)
                .ok_or_else(|| Error::Validation(format!("no blend weight for aspect '{}'", a.name)))?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Validation(format!(
                    "blend weight for aspect '{}' must be non-negative, got {w}",
                    a.name
                )));
            }
            out.push(w);
        }
        let sum: f64 = out.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Validation(format!("blend weights sum to {sum}, expected 1")));
        }
        Ok(out)
    }

    /// Same aspects with a different blend.
    pub fn with_weights(&self, weights: &BTreeMap<String, f64>) -> Result<Self> {
        Ok(Self {
            aspects: self.aspects.clone(),
            weights: Self::resolve_weights(&self.aspects, weights)?,
        })
    }

    pub fn aspects(&self) -> &[Aspect] {
        &self.aspects
    }

    pub fn len(&self) -> usize {
        self.aspects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }

    pub fn aspect_index(&self, name: &str) -> Option<usize> {
        self.aspects.iter().position(|a| a.name == name)
    }

    pub fn aspect(&self, name: &str) -> Result<&Aspect> {
        self.aspect_index(name)
            .map(|i| &self.aspects[i])
            .ok_or_else(|| Error::Lookup(format!("unknown aspect '{name}'")))
    }

    /// Blend weights aligned with [`AspectSchema::aspects`].
    pub fn weight_vector(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights(&self) -> BTreeMap<String, f64> {
        self.aspects
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| (a.name.clone(), *w))
            .collect()
    }

    /// Looks up the distance between two labels of one aspect.
    pub fn label_distance(&self, aspect: &str, l1: &str, l2: &str) -> Result<f64> {
        let a = self.aspect(aspect)?;
        for l in [l1, l2] {
            if a.distances.index_of(l).is_none() {
                return Err(Error::Lookup(format!("unknown label '{l}' for aspect '{aspect}'")));
            }
        }
        Ok(a.distances.get(l1, l2).unwrap_or(0.0))
    }

    /// Maps an aspect→label map onto per-aspect label indices.
    pub fn encode(&self, labels: &BTreeMap<String, String>) -> Result<Vec<usize>> {
        if let Some(extra) = labels.keys().find(|k| self.aspect_index(k).is_none()) {
            return Err(Error::Validation(format!("label given for unknown aspect '{extra}'")));
        }
        self.aspects
            .iter()
            .map(|a| {
                let label = labels
                    .get(&a.name)
                    .ok_or_else(|| Error::Contract(format!("missing label for aspect '{}'", a.name)))?;
                a.distances
                    .index_of(label)
                    .ok_or_else(|| Error::Validation(format!("unknown label '{label}' for aspect '{}'", a.name)))
            })
            .collect()
    }

    /// Blended distance between two encoded label vectors.
    #[inline]
    pub fn encoded_distance(&self, x: &[usize], y: &[usize]) -> f64 {
        self.aspects
            .iter()
            .zip(&self.weights)
            .zip(x.iter().zip(y))
            .map(|((a, w), (&i, &j))| w * a.distances.by_index(i, j))
            .sum()
    }

    pub fn to_json(&self) -> String {
        let file = SchemaFile {
            aspects: self
                .aspects
                .iter()
                .map(|a| AspectFile {
                    name: a.name.clone(),
                    labels: a.labels.clone(),
                    distances: a.explicit.clone(),
                    graph: a.graph.clone(),
                })
                .collect(),
            weights: self.weights(),
        };
        serde_json::to_string(&file).expect("schema serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    aspects: Vec<AspectFile>,
    weights: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AspectFile {
    name: String,
    labels: Vec<String>,
    #[serde(default)]
    distances: Vec<(String, String, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graph: Option<LabelGraph>,
}

/// Parses and validates a JSON schema document.
pub fn load_schema(text: &str) -> Result<AspectSchema> {
    let file: SchemaFile = serde_json::from_str(text).map_err(|e| Error::json(&e))?;
    let aspects = file
        .aspects
        .into_iter()
        .map(|a| Aspect::new(a.name, a.labels, a.distances, a.graph))
        .collect::<Result<Vec<_>>>()?;
    AspectSchema::new(aspects, &file.weights)
}
