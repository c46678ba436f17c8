//! Document distance and the diversity measures built on it.
//!
//! `div(D)` is the mean blended distance over all unordered pairs of `D`.
//! Collections with fewer than two documents have diversity 0; the reported
//! `pair_count` tells that case apart from a genuinely homogeneous list.
//! All pairwise sums run in index order so results are bit-for-bit stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aspect_model::{AspectSchema, WEIGHT_SUM_TOLERANCE};
use crate::corpus_io::{sig12, sig12_map, Corpus};
use crate::error::{Error, Result};

/// A term from a document's content, labelled like a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyword {
    pub term: String,
    pub labels: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentProfile {
    pub id: String,
    /// Exactly one label per schema aspect.
    pub labels: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance: Option<f64>,
    /// Epoch seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<Keyword>,
}

impl DocumentProfile {
    pub fn new<'a>(id: impl Into<String>, labels: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            id: id.into(),
            labels: labels
                .into_iter()
                .map(|(a, l)| (a.to_string(), l.to_string()))
                .collect(),
            relevance: None,
            timestamp: None,
            keywords: Vec::new(),
        }
    }

    pub fn with_relevance(mut self, relevance: f64) -> Self {
        self.relevance = Some(relevance);
        self
    }

    pub fn with_timestamp(mut self, ts: i64) -> Self {
        self.timestamp = Some(ts);
        self
    }

    pub fn validate(&self, schema: &AspectSchema) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("document id must be non-empty".into()));
        }
        schema
            .encode(&self.labels)
            .map_err(|e| annotate(e, &format!("document '{}'", self.id)))?;
        if let Some(r) = self.relevance {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Validation(format!(
                    "document '{}': relevance {r} outside [0, 1]",
                    self.id
                )));
            }
        }
        for kw in &self.keywords {
            schema
                .encode(&kw.labels)
                .map_err(|e| annotate(e, &format!("document '{}', keyword '{}'", self.id, kw.term)))?;
        }
        Ok(())
    }
}

fn annotate(err: Error, context: &str) -> Error {
    match err {
        Error::Validation(m) => Error::Validation(format!("{context}: {m}")),
        Error::Contract(m) => Error::Contract(format!("{context}: {m}")),
        Error::Lookup(m) => Error::Lookup(format!("{context}: {m}")),
        other => other,
    }
}

/// `div(D)` together with its per-aspect decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    #[serde(serialize_with = "sig12")]
    pub overall: f64,
    #[serde(serialize_with = "sig12_map")]
    pub per_aspect: BTreeMap<String, f64>,
    /// Number of unordered pairs averaged over.
    pub pair_count: usize,
}

fn encode_all<'a, I>(schema: &AspectSchema, labels: I) -> Result<Vec<Vec<usize>>>
where
    I: IntoIterator<Item = &'a BTreeMap<String, String>>,
{
    labels.into_iter().map(|l| schema.encode(l)).collect()
}

fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Blended distance `Σ_a w_a · dist_a(label_a(x), label_a(y))`.
pub fn doc_distance(schema: &AspectSchema, x: &DocumentProfile, y: &DocumentProfile) -> Result<f64> {
    let ex = schema.encode(&x.labels)?;
    let ey = schema.encode(&y.labels)?;
    Ok(schema.encoded_distance(&ex, &ey))
}

pub(crate) fn report_from_encoded(schema: &AspectSchema, encoded: &[Vec<usize>]) -> DiversityReport {
    let n = encoded.len();
    let pairs = pair_count(n);
    let mut overall = 0.0;
    let mut per_aspect = vec![0.0; schema.len()];
    for i in 0..n {
        for j in i + 1..n {
            overall += schema.encoded_distance(&encoded[i], &encoded[j]);
            for (a, aspect) in schema.aspects().iter().enumerate() {
                per_aspect[a] += aspect.distances().by_index(encoded[i][a], encoded[j][a]);
            }
        }
    }
    let norm = |s: f64| if pairs == 0 { 0.0 } else { s / pairs as f64 };
    DiversityReport {
        overall: norm(overall),
        per_aspect: schema
            .aspects()
            .iter()
            .zip(per_aspect)
            .map(|(a, s)| (a.name().to_string(), norm(s)))
            .collect(),
        pair_count: pairs,
    }
}

/// Mean pairwise distance of `docs`, overall and per aspect.
pub fn collection_diversity(schema: &AspectSchema, docs: &[DocumentProfile]) -> Result<DiversityReport> {
    let encoded = encode_all(schema, docs.iter().map(|d| &d.labels))?;
    Ok(report_from_encoded(schema, &encoded))
}

/// `div(D)` using only one aspect's label distance.
pub fn per_aspect_diversity(schema: &AspectSchema, docs: &[DocumentProfile], aspect: &str) -> Result<f64> {
    let a = schema.aspect(aspect)?;
    let table = a.distances();
    let labels =
        docs.iter()
            .map(|d| {
                let label = d.labels.get(aspect).ok_or_else(|| {
                    Error::Contract(format!("document '{}' has no label for aspect '{aspect}'", d.id))
                })?;
                table
                    .index_of(label)
                    .ok_or_else(|| Error::Validation(format!("unknown label '{label}' for aspect '{aspect}'")))
            })
            .collect::<Result<Vec<_>>>()?;
    let n = labels.len();
    if n < 2 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += table.by_index(labels[i], labels[j]);
        }
    }
    Ok(sum / pair_count(n) as f64)
}

/// Which part of a consumption sequence counts as "recent".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum WindowSpec {
    /// The whole sequence.
    #[default]
    All,
    /// The last `n` items.
    Last(usize),
    /// Items with `timestamp >= cutoff`.
    Since(i64),
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowSpec::All => f.write_str("all"),
            WindowSpec::Last(n) => write!(f, "last:{n}"),
            WindowSpec::Since(t) => write!(f, "since:{t}"),
        }
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    /// Accepts `all`, `N`, `last:N` or `since:EPOCH`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("invalid window '{s}' (expected all, N, last:N or since:EPOCH)"));
        let s = s.trim();
        if s == "all" {
            return Ok(WindowSpec::All);
        }
        if let Some(rest) = s.strip_prefix("since:") {
            return rest.parse().map(WindowSpec::Since).map_err(|_| bad());
        }
        let n = s.strip_prefix("last:").unwrap_or(s);
        n.parse().map(WindowSpec::Last).map_err(|_| bad())
    }
}

/// The suffix of `sequence` that falls inside `window`.
pub fn window_items(sequence: &[DocumentProfile], window: WindowSpec) -> Result<&[DocumentProfile]> {
    for pair in sequence.windows(2) {
        if let (Some(a), Some(b)) = (pair[0].timestamp, pair[1].timestamp) {
            if b < a {
                return Err(Error::Contract(format!(
                    "sequence not sorted by timestamp: '{}' ({a}) precedes '{}' ({b})",
                    pair[0].id, pair[1].id
                )));
            }
        }
    }
    match window {
        WindowSpec::All => Ok(sequence),
        WindowSpec::Last(n) => Ok(&sequence[sequence.len().saturating_sub(n)..]),
        WindowSpec::Since(cutoff) => {
            let mut start = sequence.len();
            for (i, d) in sequence.iter().enumerate().rev() {
                let ts = d
                    .timestamp
                    .ok_or_else(|| Error::Contract(format!("time-based window needs a timestamp on '{}'", d.id)))?;
                if ts < cutoff {
                    break;
                }
                start = i;
            }
            Ok(&sequence[start..])
        }
    }
}

/// Diversity of the items inside `window`, ignoring their order.
pub fn window_diversity(
    schema: &AspectSchema,
    sequence: &[DocumentProfile],
    window: WindowSpec,
) -> Result<DiversityReport> {
    collection_diversity(schema, window_items(sequence, window)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub user: String,
    pub doc: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ts: Option<i64>,
}

/// Interaction records plus the convex weight of each interaction type.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLog {
    records: Vec<InteractionRecord>,
    type_weights: BTreeMap<String, f64>,
}

impl InteractionLog {
    pub fn new(records: Vec<InteractionRecord>, type_weights: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((t, w)) = type_weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::Validation(format!(
                "weight for interaction type '{t}' must be non-negative, got {w}"
            )));
        }
        let sum: f64 = type_weights.values().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Validation(format!(
                "interaction type weights sum to {sum}, expected 1"
            )));
        }
        let log = Self {
            records: Vec::new(),
            type_weights,
        };
        log.extended(records)
    }

    /// A copy with more records appended.
    pub fn extended(&self, more: impl IntoIterator<Item = InteractionRecord>) -> Result<Self> {
        let mut out = self.clone();
        for r in more {
            if !out.type_weights.contains_key(&r.kind) {
                return Err(Error::Validation(format!(
                    "interaction type '{}' has no weight",
                    r.kind
                )));
            }
            out.records.push(r);
        }
        Ok(out)
    }

    /// Only the records of one user, same weights.
    pub fn for_user(&self, user: &str) -> Self {
        Self {
            records: self.records.iter().filter(|r| r.user == user).cloned().collect(),
            type_weights: self.type_weights.clone(),
        }
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn type_weights(&self) -> &BTreeMap<String, f64> {
        &self.type_weights
    }

    /// Distinct document ids per interaction type, in first-seen order.
    pub fn documents_by_type(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for r in &self.records {
            let docs = out.entry(r.kind.as_str()).or_default();
            if !docs.contains(&r.doc.as_str()) {
                docs.push(r.doc.as_str());
            }
        }
        out
    }
}

/// Weighted interaction diversity and its per-type terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionDiversity {
    #[serde(serialize_with = "sig12")]
    pub overall: f64,
    /// `div(D_type)` for every weighted type (0 when fewer than two documents).
    #[serde(serialize_with = "sig12_map")]
    pub per_type: BTreeMap<String, f64>,
}

pub fn interaction_breakdown(
    schema: &AspectSchema,
    corpus: &Corpus,
    log: &InteractionLog,
) -> Result<InteractionDiversity> {
    let unresolved: BTreeSet<&str> = log
        .records
        .iter()
        .map(|r| r.doc.as_str())
        .filter(|id| corpus.get(id).is_none())
        .collect();
    if !unresolved.is_empty() {
        let ids: Vec<&str> = unresolved.into_iter().collect();
        return Err(Error::Lookup(format!(
            "interaction log references unknown documents: {}",
            ids.join(", ")
        )));
    }
    let by_type = log.documents_by_type();
    let mut overall = 0.0;
    let mut per_type = BTreeMap::new();
    for (kind, weight) in &log.type_weights {
        let value = match by_type.get(kind.as_str()) {
            Some(ids) if ids.len() >= 2 => {
                let encoded = encode_all(schema, ids.iter().map(|id| &corpus.get(id).unwrap().labels))?;
                report_from_encoded(schema, &encoded).overall
            }
            _ => 0.0,
        };
        overall += weight * value;
        per_type.insert(kind.clone(), value);
    }
    Ok(InteractionDiversity { overall, per_type })
}

/// `Σ_type w_type · div(D_type)` over the documents interacted with per type.
pub fn interaction_diversity(schema: &AspectSchema, corpus: &Corpus, log: &InteractionLog) -> Result<f64> {
    interaction_breakdown(schema, corpus, log).map(|b| b.overall)
}

/// Diversity of a summary's keywords, each treated as a pseudo-document.
pub fn keyword_diversity(schema: &AspectSchema, keywords: &[Keyword]) -> Result<f64> {
    if keywords.is_empty() {
        return Err(Error::Contract("keyword list is empty".into()));
    }
    let encoded = encode_all(schema, keywords.iter().map(|k| &k.labels))?;
    Ok(report_from_encoded(schema, &encoded).overall)
}

/// Shannon entropy of one aspect's label distribution, normalised by the log
/// of the number of distinct labels present (at least 2).
pub fn entropy_diversity(schema: &AspectSchema, docs: &[DocumentProfile], aspect: &str) -> Result<f64> {
    let a = schema.aspect(aspect)?;
    if docs.is_empty() {
        return Err(Error::Contract("entropy of an empty collection is undefined".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        let label = d
            .labels
            .get(aspect)
            .ok_or_else(|| Error::Contract(format!("document '{}' has no label for aspect '{aspect}'", d.id)))?;
        if a.distances().index_of(label).is_none() {
            return Err(Error::Validation(format!(
                "unknown label '{label}' for aspect '{aspect}'"
            )));
        }
        *counts.entry(label).or_default() += 1;
    }
    if counts.len() < 2 {
        return Ok(0.0);
    }
    let n = docs.len() as f64;
    let h: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    Ok((h / (counts.len() as f64).ln()).clamp(0.0, 1.0))
}
