//! Line-delimited JSON loaders and report writers.

use std::collections::BTreeMap;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::aspect_model::AspectSchema;
use crate::error::{Error, Result};
use crate::metrics::{DocumentProfile, InteractionLog, InteractionRecord};

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub(crate) fn sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig12(*x))
}

pub(crate) fn sig12_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig12(*v)),
        None => s.serialize_none(),
    }
}

pub(crate) fn sig12_map<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k, round_sig12(*v))))
}

pub(crate) fn fmt_num(x: f64) -> String {
    round_sig12(x).to_string()
}

/// Validated documents keyed by id, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    documents: IndexMap<String, DocumentProfile>,
}

impl Corpus {
    pub fn from_documents(schema: &AspectSchema, docs: impl IntoIterator<Item = DocumentProfile>) -> Result<Self> {
        let mut documents = IndexMap::new();
        for d in docs {
            d.validate(schema)?;
            if documents.contains_key(&d.id) {
                return Err(Error::Validation(format!("duplicate document id '{}'", d.id)));
            }
            documents.insert(d.id.clone(), d);
        }
        Ok(Self { documents })
    }

    pub fn get(&self, id: &str) -> Option<&DocumentProfile> {
        self.documents.get(id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocumentProfile> + '_ {
        self.documents.values()
    }

    pub fn to_vec(&self) -> Vec<DocumentProfile> {
        self.documents.values().cloned().collect()
    }

    /// Documents for `ids`, in the given order.
    pub fn select<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<DocumentProfile>> {
        let missing: Vec<&str> = ids
            .iter()
            .map(AsRef::as_ref)
            .filter(|id| !self.documents.contains_key(*id))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Lookup(format!("unknown document id(s): {}", missing.join(", "))));
        }
        Ok(ids.iter().map(|id| self.documents[id.as_ref()].clone()).collect())
    }
}

fn parse_lines<T: serde::de::DeserializeOwned>(text: &str) -> impl Iterator<Item = (usize, Result<T>)> + '_ {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            (line, serde_json::from_str(l).map_err(|e| Error::json_at_line(line, &e)))
        })
}

fn at_line(line: usize, err: Error) -> Error {
    match err {
        Error::Validation(m) => Error::Validation(format!("line {line}: {m}")),
        Error::Contract(m) => Error::Validation(format!("line {line}: {m}")),
        Error::Lookup(m) => Error::Lookup(format!("line {line}: {m}")),
        other => other,
    }
}

/// Parses one document per line and validates each against `schema`.
pub fn load_corpus(schema: &AspectSchema, text: &str) -> Result<Corpus> {
    let mut documents: IndexMap<String, DocumentProfile> = IndexMap::new();
    for (line, parsed) in parse_lines::<DocumentProfile>(text) {
        let doc = parsed?;
        doc.validate(schema).map_err(|e| at_line(line, e))?;
        if documents.contains_key(&doc.id) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate document id '{}'",
                doc.id
            )));
        }
        documents.insert(doc.id.clone(), doc);
    }
    Ok(Corpus { documents })
}

/// Parses a time-ordered document sequence (same line format as a corpus).
pub fn load_sequence(schema: &AspectSchema, text: &str) -> Result<Vec<DocumentProfile>> {
    load_corpus(schema, text).map(|c| c.to_vec())
}

pub fn write_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for d in corpus.documents() {
        out.push_str(&serde_json::to_string(d).expect("document serializes"));
        out.push('\n');
    }
    out
}

/// Parses interaction records without weighting them.
pub fn load_interaction_records(text: &str) -> Result<Vec<InteractionRecord>> {
    parse_lines::<InteractionRecord>(text).map(|(_, r)| r).collect()
}

pub fn load_interactions(text: &str, type_weights: BTreeMap<String, f64>) -> Result<InteractionLog> {
    InteractionLog::new(load_interaction_records(text)?, type_weights)
}

/// Equal weights over the interaction types that occur in `records`.
pub fn uniform_type_weights(records: &[InteractionRecord]) -> BTreeMap<String, f64> {
    let types: std::collections::BTreeSet<&str> = records.iter().map(|r| r.kind.as_str()).collect();
    let w = 1.0 / types.len().max(1) as f64;
    types.into_iter().map(|t| (t.to_string(), w)).collect()
}

/// Parses `like=0.5,share=0.5` style weight lists.
pub fn parse_weights(spec: &str) -> Result<BTreeMap<String, f64>> {
    spec.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Validation(format!("expected name=weight, got '{part}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Validation(format!("invalid weight '{v}' for '{k}'")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Validation(format!("unknown report format '{other}'"))),
        }
    }
}

/// Anything that can be written as a CSV table.
pub trait Tabular {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

/// Serialises a report deterministically. Numbers carry 12 significant digits.
pub fn write_report<R: Serialize + Tabular>(report: &R, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.csv_header()).expect("in-memory write");
            for row in report.csv_rows() {
                w.write_record(row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
        }
    }
}

impl Tabular for crate::metrics::DiversityReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["aspect", "value"]
    }

    /// One row per aspect, sorted by name, then the blended value.
    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.per_aspect
            .iter()
            .map(|(a, v)| vec![a.clone(), fmt_num(*v)])
            .chain(std::iter::once(vec!["overall".to_string(), fmt_num(self.overall)]))
            .collect()
    }
}
