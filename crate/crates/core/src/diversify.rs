//! Diversification for lists, sequences, summaries and interactions, plus a
//! relevance/diversity trade-off re-ranker.
//!
//! Every selector is deterministic. Scores within [`TIE_TOLERANCE`] of the best
//! count as tied, and ties go to the smaller id unless a mode states a
//! different secondary criterion.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aspect_model::AspectSchema;
use crate::corpus_io::{fmt_num, sig12, sig12_opt, Corpus, Tabular};
use crate::error::{Error, Result};
use crate::metrics::{
    collection_diversity, interaction_breakdown, keyword_diversity, window_diversity, window_items, DiversityReport,
    DocumentProfile, InteractionLog, InteractionRecord, WindowSpec,
};
use crate::oracle::{binomial, combined_objective, max_objective_oracle};
use crate::rules::{apply_rules, check_requirements, Applied, Rule, RuleSet};

/// A swap must raise diversity by more than this to be accepted.
pub const SWAP_EPSILON: f64 = 1e-12;
pub const TIE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_GAMMA: f64 = 0.5;
/// Combined re-ranking also reports the exact optimum up to this many subsets.
pub const EXACT_CHECK_LIMIT: u128 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    List,
    Sequence,
    Summary,
    Interaction,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::List => "list",
            Mode::Sequence => "sequence",
            Mode::Summary => "summary",
            Mode::Interaction => "interaction",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "list" => Ok(Mode::List),
            "sequence" => Ok(Mode::Sequence),
            "summary" => Ok(Mode::Summary),
            "interaction" => Ok(Mode::Interaction),
            other => Err(Error::Validation(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub id: String,
    /// `div(S) − div(S \ {id})`.
    #[serde(serialize_with = "sig12")]
    pub marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub doc: String,
    #[serde(rename = "type")]
    pub kind: String,
    /// Interaction diversity of the log extended by this suggestion.
    #[serde(serialize_with = "sig12")]
    pub overall: f64,
    /// Diversity of the suggestion's own interaction type after extension.
    #[serde(serialize_with = "sig12")]
    pub own_type: f64,
    /// Interaction diversity before extension.
    #[serde(serialize_with = "sig12")]
    pub before: f64,
}

/// One decision taken while building a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Seed {
        id: String,
        partner: Option<String>,
        #[serde(serialize_with = "sig12")]
        distance: f64,
    },
    Add {
        id: String,
        #[serde(serialize_with = "sig12")]
        gain: f64,
        #[serde(serialize_with = "sig12")]
        diversity: f64,
        #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "sig12_opt")]
        score: Option<f64>,
    },
    Swap {
        removed: String,
        added: String,
        #[serde(serialize_with = "sig12")]
        before: f64,
        #[serde(serialize_with = "sig12")]
        after: f64,
    },
    LocalOptimum {
        #[serde(serialize_with = "sig12")]
        diversity: f64,
    },
    BudgetExhausted {
        swaps: usize,
    },
    NoveltyFilter {
        removed: Vec<String>,
    },
    Pick {
        id: String,
        window: String,
        #[serde(serialize_with = "sig12")]
        diversity: f64,
        #[serde(serialize_with = "sig12")]
        recency: f64,
        tied: usize,
    },
    Suggest {
        doc: String,
        #[serde(rename = "type")]
        interaction: String,
        #[serde(serialize_with = "sig12")]
        overall: f64,
        options: usize,
    },
    KeywordDiversity {
        #[serde(serialize_with = "sig12")]
        value: f64,
    },
    ExactObjective {
        #[serde(serialize_with = "sig12")]
        greedy: f64,
        #[serde(serialize_with = "sig12")]
        exact: f64,
    },
    Warning {
        message: String,
    },
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceRecord::Seed { id, partner, distance } => match partner {
                Some(p) => write!(f, "seed {id} (farthest pair with {p}, distance {})", fmt_num(*distance)),
                None => write!(f, "seed {id} (only candidate)"),
            },
            TraceRecord::Add {
                id,
                gain,
                diversity,
                score,
            } => {
                write!(
                    f,
                    "add {id}: diversity {} (gain {})",
                    fmt_num(*diversity),
                    fmt_num(*gain)
                )?;
                if let Some(s) = score {
                    write!(f, ", score {}", fmt_num(*s))?;
                }
                Ok(())
            }
            TraceRecord::Swap {
                removed,
                added,
                before,
                after,
            } => write!(
                f,
                "swap {removed} -> {added}: diversity {} -> {}",
                fmt_num(*before),
                fmt_num(*after)
            ),
            TraceRecord::LocalOptimum { diversity } => {
                write!(f, "no improving swap left at diversity {}", fmt_num(*diversity))
            }
            TraceRecord::BudgetExhausted { swaps } => write!(f, "swap budget exhausted after {swaps} swap(s)"),
            TraceRecord::NoveltyFilter { removed } => {
                write!(f, "dropped already-seen candidates: {}", removed.join(", "))
            }
            TraceRecord::Pick {
                id,
                window,
                diversity,
                recency,
                tied,
            } => write!(
                f,
                "pick {id}: window {window} diversity {}, recency score {} ({tied} tied on diversity)",
                fmt_num(*diversity),
                fmt_num(*recency)
            ),
            TraceRecord::Suggest {
                doc,
                interaction,
                overall,
                options,
            } => write!(
                f,
                "suggest {interaction} {doc}: interaction diversity {} (best of {options} option(s))",
                fmt_num(*overall)
            ),
            TraceRecord::KeywordDiversity { value } => write!(f, "keyword diversity {}", fmt_num(*value)),
            TraceRecord::ExactObjective { greedy, exact } => write!(
                f,
                "objective {} (exhaustive optimum {})",
                fmt_num(*greedy),
                fmt_num(*exact)
            ),
            TraceRecord::Warning { message } => write!(f, "warning: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankResult {
    pub mode: Mode,
    pub selected: Vec<String>,
    /// `div` of the selected documents.
    pub diversity: DiversityReport,
    /// The quantity the mode optimised.
    #[serde(serialize_with = "sig12")]
    pub objective: f64,
    #[serde(default)]
    pub contributions: Vec<Contribution>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "sig12_opt")]
    pub keyword_diversity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<Suggestion>,
    #[serde(default)]
    pub rules: Applied,
    #[serde(default)]
    pub trace: Vec<TraceRecord>,
}

impl Tabular for RerankResult {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["rank", "id", "contribution"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.selected
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let c = self
                    .contributions
                    .iter()
                    .find(|c| &c.id == id)
                    .map_or_else(String::new, |c| fmt_num(c.marginal));
                vec![(i + 1).to_string(), id.clone(), c]
            })
            .collect()
    }
}

impl Tabular for crate::oracle::OracleResult {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["id", "best_value"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.best_subset
            .iter()
            .map(|id| vec![id.clone(), fmt_num(self.best_value)])
            .collect()
    }
}

fn unique_ids<'a>(docs: impl IntoIterator<Item = &'a DocumentProfile>) -> Result<()> {
    let mut seen = HashSet::new();
    for d in docs {
        if !seen.insert(d.id.as_str()) {
            return Err(Error::Contract(format!("duplicate document id '{}'", d.id)));
        }
    }
    Ok(())
}

/// Dense pairwise distance matrix.
struct Pairwise {
    n: usize,
    d: Vec<f64>,
}

impl Pairwise {
    fn new(schema: &AspectSchema, docs: &[DocumentProfile]) -> Result<Self> {
        let enc = docs
            .iter()
            .map(|d| schema.encode(&d.labels))
            .collect::<Result<Vec<_>>>()?;
        let n = docs.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = schema.encoded_distance(&enc[i], &enc[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Ok(Self { n, d })
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    fn sum_to(&self, c: usize, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.get(c, j)).sum()
    }
}

fn pairs(m: usize) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

fn mean(sum: f64, m: usize) -> f64 {
    if m < 2 {
        0.0
    } else {
        sum / pairs(m)
    }
}

/// Index of the best score; near-ties go to the smallest id.
fn argmax_by_id<'a>(scored: impl IntoIterator<Item = (usize, f64, &'a str)>) -> Option<(usize, f64)> {
    let scored: Vec<_> = scored.into_iter().collect();
    let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .into_iter()
        .filter(|s| s.1 >= top - TIE_TOLERANCE)
        .min_by(|a, b| a.2.cmp(b.2))
        .map(|(i, v, _)| (i, v))
}

/// Assembles a result whose diversity report is recomputed from `docs`.
fn finish(
    schema: &AspectSchema,
    mode: Mode,
    docs: &[DocumentProfile],
    objective: f64,
    trace: Vec<TraceRecord>,
) -> Result<RerankResult> {
    let diversity = collection_diversity(schema, docs)?;
    let mut contributions = Vec::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        let rest: Vec<DocumentProfile> = docs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, x)| x.clone())
            .collect();
        contributions.push(Contribution {
            id: d.id.clone(),
            marginal: diversity.overall - collection_diversity(schema, &rest)?.overall,
        });
    }
    Ok(RerankResult {
        mode,
        selected: docs.iter().map(|d| d.id.clone()).collect(),
        diversity,
        objective,
        contributions,
        keyword_diversity: None,
        suggestion: None,
        rules: Applied::default(),
        trace,
    })
}

/// Repeatedly replaces an over-represented list item with the pool item
/// that raises diversity the most.
///
/// Items are tried in order of how little they contribute (their removal
/// hurts diversity least); the first one with a strictly improving
/// substitute is swapped out. The swapped-out item returns to the pool.
/// Stops at `budget` swaps or when no improving swap exists.
pub fn swap_diversify(
    schema: &AspectSchema,
    list: &[DocumentProfile],
    pool: &[DocumentProfile],
    budget: usize,
) -> Result<RerankResult> {
    if list.is_empty() {
        return Err(Error::Contract("cannot diversify an empty list".into()));
    }
    unique_ids(list.iter().chain(pool)).map_err(|e| Error::Contract(format!("list and pool must be disjoint: {e}")))?;

    let all: Vec<DocumentProfile> = list.iter().chain(pool).cloned().collect();
    let pw = Pairwise::new(schema, &all)?;
    let m = list.len();
    let mut current: Vec<usize> = (0..m).collect();
    let mut available: Vec<usize> = (m..all.len()).collect();
    let mut trace = Vec::new();
    let mut swaps = 0;

    let total = |set: &[usize]| -> f64 {
        let mut s = 0.0;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                s += pw.get(i, j);
            }
        }
        s
    };

    loop {
        let sum = total(&current);
        let cur = mean(sum, m);
        if swaps == budget {
            if budget > 0 {
                trace.push(TraceRecord::BudgetExhausted { swaps });
            }
            break;
        }
        let contribution: Vec<f64> = current.iter().map(|&i| pw.sum_to(i, &current) - pw.get(i, i)).collect();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            contribution[a]
                .total_cmp(&contribution[b])
                .then_with(|| all[current[a]].id.cmp(&all[current[b]].id))
        });

        let mut accepted = None;
        for pos in order {
            let base = sum - contribution[pos];
            let others: Vec<usize> = current
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != pos)
                .map(|(_, &i)| i)
                .collect();
            let best = argmax_by_id(
                available
                    .iter()
                    .enumerate()
                    .map(|(slot, &c)| (slot, mean(base + pw.sum_to(c, &others), m), all[c].id.as_str())),
            );
            if let Some((slot, value)) = best {
                if value > cur + SWAP_EPSILON {
                    accepted = Some((pos, slot, value));
                    break;
                }
            }
        }

        let Some((pos, slot, after)) = accepted else {
            trace.push(TraceRecord::LocalOptimum { diversity: cur });
            break;
        };
        let out = current[pos];
        let inn = available[slot];
        trace.push(TraceRecord::Swap {
            removed: all[out].id.clone(),
            added: all[inn].id.clone(),
            before: cur,
            after,
        });
        current[pos] = inn;
        available[slot] = out;
        swaps += 1;
    }

    let docs: Vec<DocumentProfile> = current.iter().map(|&i| all[i].clone()).collect();
    let final_div = collection_diversity(schema, &docs)?.overall;
    finish(schema, Mode::List, &docs, final_div, trace)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::Contract(format!(
            "k must be between 1 and the pool size {n}, got {k}"
        )));
    }
    Ok(())
}

/// Greedy max-dispersion selection.
///
/// Seeds with the smaller-id member of the most distant pair, then keeps
/// adding the candidate that maximises the diversity of the selection.
pub fn greedy_select(schema: &AspectSchema, pool: &[DocumentProfile], k: usize) -> Result<RerankResult> {
    check_k(k, pool.len())?;
    unique_ids(pool)?;
    let pw = Pairwise::new(schema, pool)?;
    let n = pool.len();
    let id = |i: usize| pool[i].id.as_str();

    let mut trace = Vec::new();
    let (seed, partner, distance) = if n == 1 {
        (0, None, 0.0)
    } else {
        let far = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| pw.get(i, j))
            .fold(f64::NEG_INFINITY, f64::max);
        let in_far_pair = |i: usize| (0..n).any(|j| j != i && pw.get(i, j) >= far - TIE_TOLERANCE);
        let seed = (0..n).filter(|&i| in_far_pair(i)).min_by_key(|&i| id(i)).unwrap();
        let partner = (0..n)
            .filter(|&j| j != seed && pw.get(seed, j) >= far - TIE_TOLERANCE)
            .min_by_key(|&j| id(j))
            .unwrap();
        (seed, Some(id(partner).to_string()), far)
    };
    trace.push(TraceRecord::Seed {
        id: id(seed).to_string(),
        partner,
        distance,
    });

    let mut selected = vec![seed];
    let mut taken = vec![false; n];
    taken[seed] = true;
    let mut sum = 0.0;
    while selected.len() < k {
        let m = selected.len();
        let cur = mean(sum, m);
        let (c, value) = argmax_by_id(
            (0..n)
                .filter(|&c| !taken[c])
                .map(|c| (c, mean(sum + pw.sum_to(c, &selected), m + 1), id(c))),
        )
        .expect("k <= n leaves a candidate");
        sum += pw.sum_to(c, &selected);
        selected.push(c);
        taken[c] = true;
        trace.push(TraceRecord::Add {
            id: id(c).to_string(),
            gain: value - cur,
            diversity: value,
            score: None,
        });
    }

    let docs: Vec<DocumentProfile> = selected.iter().map(|&i| pool[i].clone()).collect();
    let value = collection_diversity(schema, &docs)?.overall;
    finish(schema, Mode::List, &docs, value, trace)
}

/// Result of one sequence step.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePick {
    pub id: String,
    /// Diversity of the window plus the picked item.
    pub diversity: f64,
    /// Recency-weighted distance of the pick to the window items.
    pub recency: f64,
    /// Candidates tied on window diversity (including the pick).
    pub tied: usize,
    /// Candidate ids dropped because they already appear in the history.
    pub seen: Vec<String>,
}

/// Chooses the candidate that makes the current window most diverse.
///
/// Ties on window diversity go to the candidate farther from recent items,
/// scoring each window item by `gamma^age` with the newest item at age 0.
/// Remaining ties go to the smaller id.
pub fn next_in_sequence(
    schema: &AspectSchema,
    history: &[DocumentProfile],
    candidates: &[DocumentProfile],
    window: WindowSpec,
    gamma: f64,
) -> Result<SequencePick> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Contract(format!("gamma must be in (0, 1], got {gamma}")));
    }
    let history_ids: HashSet<&str> = history.iter().map(|h| h.id.as_str()).collect();
    let (fresh, seen): (Vec<&DocumentProfile>, Vec<&DocumentProfile>) =
        candidates.iter().partition(|c| !history_ids.contains(c.id.as_str()));
    if fresh.is_empty() {
        return Err(Error::Contract("no candidates left to choose from".into()));
    }
    let items = window_items(history, window)?;
    let enc_items = items
        .iter()
        .map(|d| schema.encode(&d.labels))
        .collect::<Result<Vec<_>>>()?;
    let m = items.len();
    let mut window_sum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            window_sum += schema.encoded_distance(&enc_items[i], &enc_items[j]);
        }
    }

    let mut scored = Vec::with_capacity(fresh.len());
    for c in &fresh {
        let ec = schema.encode(&c.labels)?;
        let dists: Vec<f64> = enc_items.iter().map(|e| schema.encoded_distance(&ec, e)).collect();
        let diversity = mean(window_sum + dists.iter().sum::<f64>(), m + 1);
        let mut weight = 1.0;
        let mut recency = 0.0;
        for d in dists.iter().rev() {
            recency += weight * d;
            weight *= gamma;
        }
        scored.push((c.id.as_str(), diversity, recency));
    }

    let top = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<_> = scored.into_iter().filter(|s| s.1 >= top - TIE_TOLERANCE).collect();
    let top_recency = tied.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let tied_count = tied.len();
    let (id, diversity, recency) = tied
        .into_iter()
        .filter(|s| s.2 >= top_recency - TIE_TOLERANCE)
        .min_by(|a, b| a.0.cmp(b.0))
        .expect("non-empty");
    Ok(SequencePick {
        id: id.to_string(),
        diversity,
        recency,
        tied: tied_count,
        seen: seen.iter().map(|d| d.id.clone()).collect(),
    })
}

/// Picks diverse source articles for a generated summary.
///
/// Same selection as [`greedy_select`], with `k` capped at the pool size and
/// the keyword diversity of the chosen sources reported when available.
pub fn select_summary_sources(schema: &AspectSchema, pool: &[DocumentProfile], k: usize) -> Result<RerankResult> {
    if pool.is_empty() || k == 0 {
        return Err(Error::Contract("summary needs a non-empty pool and k >= 1".into()));
    }
    let mut result = greedy_select(schema, pool, k.min(pool.len()))?;
    result.mode = Mode::Summary;
    if pool.len() >= 2 && collection_diversity(schema, pool)?.overall == 0.0 {
        result.trace.push(TraceRecord::Warning {
            message: "all candidate sources share the same labels; the summary cannot be diversified".into(),
        });
    }
    let keywords: Vec<_> = result
        .selected
        .iter()
        .filter_map(|id| pool.iter().find(|d| &d.id == id))
        .flat_map(|d| d.keywords.iter().cloned())
        .collect();
    if !keywords.is_empty() {
        let value = keyword_diversity(schema, &keywords)?;
        result.keyword_diversity = Some(value);
        result.trace.push(TraceRecord::KeywordDiversity { value });
    }
    Ok(result)
}

/// Suggests the (document, interaction type) option that most raises the
/// weighted interaction diversity, preferring options that also diversify
/// their own interaction type; remaining ties go to the smaller (type, id).
pub fn suggest_interaction(
    schema: &AspectSchema,
    corpus: &Corpus,
    log: &InteractionLog,
    options: &[(String, String)],
) -> Result<Suggestion> {
    if options.is_empty() {
        return Err(Error::Contract("no interaction options to choose from".into()));
    }
    let unknown: Vec<&str> = options
        .iter()
        .map(|(d, _)| d.as_str())
        .filter(|d| corpus.get(d).is_none())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Lookup(format!(
            "unknown option document(s): {}",
            unknown.join(", ")
        )));
    }
    let before = interaction_breakdown(schema, corpus, log)?.overall;

    let mut scored = Vec::with_capacity(options.len());
    for (doc, kind) in options {
        let extended = log.extended([InteractionRecord {
            user: String::new(),
            doc: doc.clone(),
            kind: kind.clone(),
            ts: None,
        }])?;
        let b = interaction_breakdown(schema, corpus, &extended)?;
        scored.push(Suggestion {
            doc: doc.clone(),
            kind: kind.clone(),
            overall: b.overall,
            own_type: b.per_type.get(kind).copied().unwrap_or(0.0),
            before,
        });
    }
    let top = scored.iter().map(|s| s.overall).fold(f64::NEG_INFINITY, f64::max);
    scored.retain(|s| s.overall >= top - TIE_TOLERANCE);
    let top_own = scored.iter().map(|s| s.own_type).fold(f64::NEG_INFINITY, f64::max);
    scored.retain(|s| s.own_type >= top_own - TIE_TOLERANCE);
    Ok(scored
        .into_iter()
        .min_by(|a, b| (&a.kind, &a.doc).cmp(&(&b.kind, &b.doc)))
        .expect("non-empty"))
}

/// Greedy trade-off between relevance and diversity.
///
/// Each step adds the candidate maximising
/// `lambda · relevance + (1 − lambda) · div(selected + candidate)`. On the
/// first step, where that diversity is always 0, the candidate's largest
/// distance to any other pool member stands in for it, so `lambda = 0`
/// reproduces [`greedy_select`] and `lambda = 1` is a plain top-k.
pub fn rerank_combined(schema: &AspectSchema, pool: &[DocumentProfile], k: usize, lambda: f64) -> Result<RerankResult> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Contract(format!("lambda must be in [0, 1], got {lambda}")));
    }
    check_k(k, pool.len())?;
    unique_ids(pool)?;
    let relevance = pool
        .iter()
        .map(|d| {
            d.relevance
                .ok_or_else(|| Error::Contract(format!("document '{}' has no relevance score", d.id)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let pw = Pairwise::new(schema, pool)?;
    let n = pool.len();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let mut sum = 0.0;
    let mut trace = Vec::new();
    while selected.len() < k {
        let m = selected.len();
        let cur = mean(sum, m);
        let diversity_term = |c: usize| {
            if m == 0 {
                (0..n).filter(|&j| j != c).map(|j| pw.get(c, j)).fold(0.0, f64::max)
            } else {
                mean(sum + pw.sum_to(c, &selected), m + 1)
            }
        };
        let (c, score) = argmax_by_id((0..n).filter(|&c| !taken[c]).map(|c| {
            (
                c,
                lambda * relevance[c] + (1.0 - lambda) * diversity_term(c),
                pool[c].id.as_str(),
            )
        }))
        .expect("k <= n leaves a candidate");
        sum += pw.sum_to(c, &selected);
        selected.push(c);
        taken[c] = true;
        let now = mean(sum, m + 1);
        trace.push(TraceRecord::Add {
            id: pool[c].id.clone(),
            gain: now - cur,
            diversity: now,
            score: Some(score),
        });
    }

    let docs: Vec<DocumentProfile> = selected.iter().map(|&i| pool[i].clone()).collect();
    let objective = combined_objective(schema, &docs, lambda)?;
    if binomial(n, k) <= EXACT_CHECK_LIMIT {
        let exact = max_objective_oracle(schema, pool, k, lambda)?;
        trace.push(TraceRecord::ExactObjective {
            greedy: objective,
            exact: exact.best_value,
        });
    }
    finish(schema, Mode::List, &docs, objective, trace)
}

/// Parameters of one re-ranking request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankRequest {
    pub mode: Mode,
    pub k: usize,
    /// Replaces the schema's blend weights for this request.
    #[serde(default)]
    pub weights: Option<BTreeMap<String, f64>>,
    /// Relevance/diversity trade-off; `None` means pure diversity.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub window: WindowSpec,
    /// Switches list mode to swap-based post-processing.
    #[serde(default)]
    pub swap_budget: Option<usize>,
    pub gamma: f64,
}

impl RerankRequest {
    pub fn new(mode: Mode, k: usize) -> Self {
        Self {
            mode,
            k,
            weights: None,
            lambda: None,
            window: WindowSpec::All,
            swap_budget: None,
            gamma: DEFAULT_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        if let Some(l) = self.lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Contract(format!("lambda must be in [0, 1], got {l}")));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Contract(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Everything a request may draw on besides its parameters.
#[derive(Debug, Clone, Copy)]
pub struct RerankInputs<'a> {
    pub corpus: &'a Corpus,
    /// Time-ordered consumption history; its ids are never recommended again.
    pub history: Option<&'a [DocumentProfile]>,
    pub interactions: Option<&'a InteractionLog>,
    /// Explicit (document id, interaction type) options for interaction mode.
    pub options: Option<&'a [(String, String)]>,
    pub rules: Option<&'a RuleSet>,
    pub request_rules: &'a [Rule],
}

impl<'a> RerankInputs<'a> {
    pub fn new(corpus: &'a Corpus) -> Self {
        Self {
            corpus,
            history: None,
            interactions: None,
            options: None,
            rules: None,
            request_rules: &[],
        }
    }
}

/// Runs one request end to end: novelty filter, rule pre-filter, the mode's
/// diversifier, then the rule post-check.
pub fn rerank(schema: &AspectSchema, request: &RerankRequest, inputs: RerankInputs<'_>) -> Result<RerankResult> {
    request.validate()?;
    let owned_schema;
    let schema = match &request.weights {
        Some(w) => {
            owned_schema = schema.with_weights(w)?;
            &owned_schema
        }
        None => schema,
    };

    let mut pre_trace = Vec::new();
    let mut candidates = inputs.corpus.to_vec();
    if let Some(history) = inputs.history {
        let seen: HashSet<&str> = history.iter().map(|h| h.id.as_str()).collect();
        let removed: Vec<String> = candidates
            .iter()
            .filter(|c| seen.contains(c.id.as_str()))
            .map(|c| c.id.clone())
            .collect();
        if !removed.is_empty() {
            candidates.retain(|c| !seen.contains(c.id.as_str()));
            pre_trace.push(TraceRecord::NoveltyFilter { removed });
        }
    }

    let empty_rules = RuleSet::default();
    let ruleset = inputs.rules.unwrap_or(&empty_rules);
    let applied = apply_rules(schema, ruleset, inputs.request_rules, &candidates)?;
    let candidates = applied.candidates;

    let mut result = match request.mode {
        Mode::List => {
            if let Some(budget) = request.swap_budget {
                check_k(request.k, candidates.len())?;
                let mut ranked = candidates.clone();
                if ranked.iter().all(|d| d.relevance.is_some()) {
                    ranked.sort_by(|a, b| {
                        b.relevance
                            .unwrap()
                            .total_cmp(&a.relevance.unwrap())
                            .then_with(|| a.id.cmp(&b.id))
                    });
                }
                let (list, pool) = ranked.split_at(request.k);
                swap_diversify(schema, list, pool, budget)?
            } else if let Some(lambda) = request.lambda {
                rerank_combined(schema, &candidates, request.k, lambda)?
            } else {
                greedy_select(schema, &candidates, request.k)?
            }
        }
        Mode::Summary => select_summary_sources(schema, &candidates, request.k)?,
        Mode::Sequence => {
            let history = inputs
                .history
                .ok_or_else(|| Error::Contract("sequence mode requires a history".into()))?;
            run_sequence(schema, history, &candidates, request)?
        }
        Mode::Interaction => {
            let log = inputs
                .interactions
                .ok_or_else(|| Error::Contract("interaction mode requires an interaction log".into()))?;
            run_interaction(schema, inputs.corpus, log, &candidates, inputs.options)?
        }
    };

    let selected_docs: Vec<DocumentProfile> = result
        .selected
        .iter()
        .filter_map(|id| candidates.iter().find(|c| &c.id == id).cloned())
        .collect();
    result.rules = Applied {
        adjustments: applied.adjustments,
        violations: check_requirements(schema, ruleset, inputs.request_rules, &selected_docs),
    };
    pre_trace.append(&mut result.trace);
    result.trace = pre_trace;
    Ok(result)
}

fn run_sequence(
    schema: &AspectSchema,
    history: &[DocumentProfile],
    candidates: &[DocumentProfile],
    request: &RerankRequest,
) -> Result<RerankResult> {
    let mut history = history.to_vec();
    let mut remaining = candidates.to_vec();
    let mut picked = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..request.k.min(candidates.len()) {
        let pick = next_in_sequence(schema, &history, &remaining, request.window, request.gamma)?;
        trace.push(TraceRecord::Pick {
            id: pick.id.clone(),
            window: request.window.to_string(),
            diversity: pick.diversity,
            recency: pick.recency,
            tied: pick.tied,
        });
        let pos = remaining
            .iter()
            .position(|d| d.id == pick.id)
            .expect("pick is a candidate");
        let mut doc = remaining.remove(pos);
        // keep the extended history sorted
        doc.timestamp = match (history.last().and_then(|h| h.timestamp), doc.timestamp) {
            (Some(last), Some(own)) => Some(last.max(own)),
            (Some(last), None) => Some(last),
            (None, own) => own,
        };
        picked.push(doc.clone());
        history.push(doc);
    }
    if picked.is_empty() {
        return Err(Error::Contract("no candidates left to choose from".into()));
    }
    let objective = window_diversity(schema, &history, request.window)?.overall;
    let picked_ids: Vec<&str> = picked.iter().map(|d| d.id.as_str()).collect();
    let originals: Vec<DocumentProfile> = candidates
        .iter()
        .filter(|c| picked_ids.contains(&c.id.as_str()))
        .cloned()
        .collect();
    let ordered: Vec<DocumentProfile> = picked_ids
        .iter()
        .map(|id| originals.iter().find(|d| d.id == *id).unwrap().clone())
        .collect();
    let mut result = finish(schema, Mode::Sequence, &ordered, objective, trace)?;
    result.mode = Mode::Sequence;
    Ok(result)
}

fn run_interaction(
    schema: &AspectSchema,
    corpus: &Corpus,
    log: &InteractionLog,
    candidates: &[DocumentProfile],
    options: Option<&[(String, String)]>,
) -> Result<RerankResult> {
    let allowed: HashSet<&str> = candidates.iter().map(|d| d.id.as_str()).collect();
    let mut trace = Vec::new();
    let options: Vec<(String, String)> = match options {
        Some(given) => {
            let (keep, dropped): (Vec<_>, Vec<_>) =
                given.iter().cloned().partition(|(d, _)| allowed.contains(d.as_str()));
            if !dropped.is_empty() {
                trace.push(TraceRecord::Warning {
                    message: format!(
                        "options dropped by filters: {}",
                        dropped
                            .iter()
                            .map(|(d, t)| format!("{t}:{d}"))
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                });
            }
            keep
        }
        None => {
            let logged: HashSet<(&str, &str)> = log
                .records()
                .iter()
                .map(|r| (r.doc.as_str(), r.kind.as_str()))
                .collect();
            log.type_weights()
                .keys()
                .flat_map(|t| candidates.iter().map(move |d| (d.id.clone(), t.clone())))
                .filter(|(d, t)| !logged.contains(&(d.as_str(), t.as_str())))
                .collect()
        }
    };
    let suggestion = suggest_interaction(schema, corpus, log, &options)?;
    trace.push(TraceRecord::Suggest {
        doc: suggestion.doc.clone(),
        interaction: suggestion.kind.clone(),
        overall: suggestion.overall,
        options: options.len(),
    });
    let doc = corpus.get(&suggestion.doc).expect("resolved").clone();
    let mut result = finish(schema, Mode::Interaction, &[doc], suggestion.overall, trace)?;
    result.suggestion = Some(suggestion);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, doc, guiding_corpus, guiding_pool, guiding_schema};
    use crate::oracle::{max_diversity_oracle, max_sequence_oracle};

    const EPS: f64 = 1e-12;

    #[test]
    fn swap_reaches_three_quarters() {
        let s = guiding_schema();
        let list: Vec<_> = (1..=4).map(|i| doc(&format!("ch{i}"), "Climate", "Health")).collect();
        let pool = vec![
            doc("is", "Immigration", "Security"),
            doc("ccu", "Climate", "Cultural"),
            doc("ie", "Immigration", "Economy"),
        ];
        let r = swap_diversify(&s, &list, &pool, 10).unwrap();
        assert!((r.diversity.overall - 0.75).abs() < EPS);
        let swaps: Vec<_> = r
            .trace
            .iter()
            .filter(|t| matches!(t, TraceRecord::Swap { .. }))
            .collect();
        assert_eq!(swaps.len(), 3);
        assert!(matches!(r.trace.last(), Some(TraceRecord::LocalOptimum { .. })));
        let union: Vec<_> = list.iter().chain(&pool).cloned().collect();
        let best = max_diversity_oracle(&s, &union, 4).unwrap();
        assert!((best.best_value - r.diversity.overall).abs() < EPS);
    }

    #[test]
    fn swap_with_empty_pool_is_noop() {
        let s = guiding_schema();
        let list = fixtures::reference_lists()[1].clone();
        let r = swap_diversify(&s, &list, &[], 5).unwrap();
        assert_eq!(r.selected, vec!["d1", "d2", "d3", "d4"]);
        assert!(!r.trace.iter().any(|t| matches!(t, TraceRecord::Swap { .. })));
    }

    #[test]
    fn swap_keeps_optimal_list() {
        let s = guiding_schema();
        let pool = guiding_pool();
        let best = max_diversity_oracle(&s, &pool, 4).unwrap();
        let (list, rest): (Vec<_>, Vec<_>) = pool.into_iter().partition(|d| best.best_subset.contains(&d.id));
        let r = swap_diversify(&s, &list, &rest, 10).unwrap();
        let ids: Vec<_> = list.iter().map(|d| d.id.clone()).collect();
        assert_eq!(r.selected, ids);
    }

    #[test]
    fn swap_respects_budget_and_contracts() {
        let s = guiding_schema();
        let list: Vec<_> = (1..=4).map(|i| doc(&format!("ch{i}"), "Climate", "Health")).collect();
        let pool = vec![
            doc("is", "Immigration", "Security"),
            doc("ie", "Immigration", "Economy"),
        ];
        let r = swap_diversify(&s, &list, &pool, 1).unwrap();
        assert_eq!(r.trace.len(), 2);
        assert!(matches!(r.trace[1], TraceRecord::BudgetExhausted { swaps: 1 }));
        assert!(swap_diversify(&s, &[], &pool, 1).is_err());
        assert!(swap_diversify(&s, &list, &list[..1], 1).is_err());
    }

    #[test]
    fn greedy_matches_oracle_on_guiding_pool() {
        let s = guiding_schema();
        let pool = guiding_pool();
        for k in 1..=8 {
            let g = greedy_select(&s, &pool, k).unwrap();
            let o = max_diversity_oracle(&s, &pool, k).unwrap();
            assert!((g.diversity.overall - o.best_value).abs() < 1e-9, "k={k}");
            assert_eq!(g.selected.len(), k);
        }
        let r = greedy_select(&s, &pool, 4).unwrap();
        assert!((r.diversity.overall - 0.75).abs() < EPS);
    }

    #[test]
    fn greedy_edge_cases() {
        let s = guiding_schema();
        let same: Vec<_> = (0..5).map(|i| doc(&format!("x{i}"), "Climate", "Health")).collect();
        assert_eq!(greedy_select(&s, &same, 3).unwrap().diversity.overall, 0.0);
        let pool = guiding_pool();
        let all = greedy_select(&s, &pool, 8).unwrap();
        assert_eq!(all.diversity.overall, collection_diversity(&s, &pool).unwrap().overall);
        assert!(matches!(greedy_select(&s, &pool, 9), Err(Error::Contract(_))));
        assert!(matches!(greedy_select(&s, &pool, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn greedy_seed_is_smallest_member_of_farthest_pair() {
        let s = guiding_schema();
        let r = greedy_select(&s, &guiding_pool(), 2).unwrap();
        assert_eq!(
            r.trace[0],
            TraceRecord::Seed {
                id: "climate-cultural".into(),
                partner: Some("immigration-economy".into()),
                distance: 1.0
            }
        );
        assert_eq!(r.selected, vec!["climate-cultural", "immigration-economy"]);
    }

    fn window() -> Vec<DocumentProfile> {
        vec![
            doc("h1", "Climate", "Health").with_timestamp(1),
            doc("h2", "Immigration", "Security").with_timestamp(2),
        ]
    }

    #[test]
    fn sequence_examples() {
        let s = guiding_schema();
        let w = window();
        let one = [doc("c", "Climate", "Health")];
        assert_eq!(next_in_sequence(&s, &w, &one, WindowSpec::All, 0.5).unwrap().id, "c");

        let cands = [doc("ch", "Climate", "Health"), doc("ie", "Immigration", "Economy")];
        let pick = next_in_sequence(&s, &w, &cands, WindowSpec::All, 0.5).unwrap();
        assert_eq!(pick.id, "ie");
        assert!((pick.diversity - 0.75).abs() < EPS);
    }

    #[test]
    fn sequence_recency_breaks_ties() {
        let s = guiding_schema();
        let w = window();
        // both reach 0.75; c-cu is at distance 1 from the newest item, i-e at 0.25
        let cands = [doc("i-e", "Immigration", "Economy"), doc("c-cu", "Climate", "Cultural")];
        let pick = next_in_sequence(&s, &w, &cands, WindowSpec::All, 0.5).unwrap();
        assert_eq!(pick.id, "c-cu");
        assert_eq!(pick.tied, 2);
        assert!((pick.recency - 1.125).abs() < EPS);

        // (I,H) and (C,S) tie on diversity and on recency as well: id decides
        let full_tie = [doc("z-ih", "Immigration", "Health"), doc("a-cs", "Climate", "Security")];
        let pick = next_in_sequence(&s, &w, &full_tie, WindowSpec::All, 0.5).unwrap();
        assert_eq!(pick.id, "a-cs");
        assert_eq!(
            max_sequence_oracle(&s, &w, &full_tie, WindowSpec::All, 0.5).unwrap(),
            "a-cs"
        );
    }

    #[test]
    fn sequence_filters_seen_and_validates() {
        let s = guiding_schema();
        let w = window();
        let cands = [doc("h2", "Immigration", "Security"), doc("x", "Climate", "Health")];
        let pick = next_in_sequence(&s, &w, &cands, WindowSpec::All, 0.5).unwrap();
        assert_eq!(pick.id, "x");
        assert_eq!(pick.seen, vec!["h2"]);
        assert!(next_in_sequence(&s, &w, &cands[..1], WindowSpec::All, 0.5).is_err());
        assert!(next_in_sequence(&s, &w, &cands, WindowSpec::All, 0.0).is_err());
        assert!(next_in_sequence(&s, &w, &[], WindowSpec::All, 0.5).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = guiding_schema();
        let pool = guiding_pool();
        let r = select_summary_sources(&s, &pool, 4).unwrap();
        assert_eq!(r.mode, Mode::Summary);
        assert_eq!(r.selected, greedy_select(&s, &pool, 4).unwrap().selected);
        assert!((r.diversity.overall - 0.75).abs() < EPS);
        assert!(r.keyword_diversity.is_some());

        let all = select_summary_sources(&s, &pool, 20).unwrap();
        assert_eq!(all.selected.len(), 8);

        let same: Vec<_> = (0..4).map(|i| doc(&format!("x{i}"), "Climate", "Health")).collect();
        let r = select_summary_sources(&s, &same, 2).unwrap();
        assert_eq!(r.diversity.overall, 0.0);
        assert!(r.trace.iter().any(|t| matches!(t, TraceRecord::Warning { .. })));
        assert!(r.keyword_diversity.is_none());
    }

    fn like_share_log() -> InteractionLog {
        crate::corpus_io::load_interactions(
            fixtures::INTERACTIONS,
            [("like".to_string(), 0.5), ("share".to_string(), 0.5)].into(),
        )
        .unwrap()
    }

    #[test]
    fn suggestion_prefers_share() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let options = vec![
            ("immigration-security".to_string(), "share".to_string()),
            ("climate-cultural".to_string(), "like".to_string()),
        ];
        let sug = suggest_interaction(&s, &corpus, &like_share_log(), &options).unwrap();
        assert_eq!((sug.doc.as_str(), sug.kind.as_str()), ("immigration-security", "share"));
        assert!((sug.overall - 0.5).abs() < EPS);
        assert_eq!(sug.before, 0.0);
    }

    #[test]
    fn suggestion_ties_and_errors() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let log = like_share_log();
        let single = vec![("climate-economy".to_string(), "like".to_string())];
        assert_eq!(
            suggest_interaction(&s, &corpus, &log, &single).unwrap().doc,
            "climate-economy"
        );
        // symmetric options: identical extended values, (type, id) decides
        let tie = vec![
            ("immigration-security".to_string(), "share".to_string()),
            ("immigration-security".to_string(), "like".to_string()),
            ("immigration-economy".to_string(), "like".to_string()),
        ];
        let sug = suggest_interaction(&s, &corpus, &log, &tie).unwrap();
        assert_eq!((sug.kind.as_str(), sug.doc.as_str()), ("like", "immigration-economy"));
        assert!(suggest_interaction(&s, &corpus, &log, &[]).is_err());
        let bad = vec![("nope".to_string(), "like".to_string())];
        assert!(matches!(
            suggest_interaction(&s, &corpus, &log, &bad),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn combined_endpoints() {
        let s = guiding_schema();
        let pool = guiding_pool();
        let top = rerank_combined(&s, &pool, 3, 1.0).unwrap();
        assert_eq!(
            top.selected,
            vec!["climate-health", "climate-cultural", "immigration-health"]
        );
        let div = rerank_combined(&s, &pool, 4, 0.0).unwrap();
        let greedy = greedy_select(&s, &pool, 4).unwrap();
        assert_eq!(div.selected, greedy.selected);
    }

    #[test]
    fn combined_records_exact_objective() {
        let s = guiding_schema();
        let r = rerank_combined(&s, &guiding_pool(), 4, 0.5).unwrap();
        let Some(TraceRecord::ExactObjective { greedy, exact }) = r.trace.last() else {
            panic!("missing exact objective record");
        };
        assert!(greedy <= &(exact + 1e-12));
        assert_eq!(*greedy, r.objective);
    }

    #[test]
    fn combined_needs_relevance() {
        let s = guiding_schema();
        let pool = fixtures::reference_lists()[3].clone();
        assert!(matches!(rerank_combined(&s, &pool, 2, 0.5), Err(Error::Contract(_))));
        assert!(rerank_combined(&s, &guiding_pool(), 2, 1.5).is_err());
    }

    #[test]
    fn pipeline_list_with_rules() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let rs = crate::rules::load_rules(&s, fixtures::RULES, Default::default()).unwrap();
        let mut inputs = RerankInputs::new(&corpus);
        inputs.rules = Some(&rs);
        let r = rerank(&s, &RerankRequest::new(Mode::List, 4), inputs).unwrap();
        assert!(r.selected.iter().all(|id| !id.ends_with("security")));
        assert_eq!(r.rules.adjustments.len(), 2);
        assert!(r.rules.violations.is_empty());
    }

    #[test]
    fn pipeline_reports_unmet_requirement() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let rs = crate::rules::load_rules(&s, fixtures::RULES, Default::default()).unwrap();
        let mut inputs = RerankInputs::new(&corpus);
        inputs.rules = Some(&rs);
        let mut req = RerankRequest::new(Mode::List, 2);
        req.lambda = Some(1.0);
        let r = rerank(&s, &req, inputs).unwrap();
        assert_eq!(r.selected, vec!["climate-health", "climate-cultural"]);
        assert_eq!(r.rules.violations.len(), 1);
        assert_eq!(r.rules.violations[0].rule, "want-immigration");
    }

    #[test]
    fn pipeline_sequence_and_interaction() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let history = crate::corpus_io::load_sequence(&s, fixtures::HISTORY).unwrap();
        let mut inputs = RerankInputs::new(&corpus);
        assert!(rerank(&s, &RerankRequest::new(Mode::Sequence, 1), inputs).is_err());
        inputs.history = Some(&history);
        let r = rerank(&s, &RerankRequest::new(Mode::Sequence, 2), inputs).unwrap();
        assert_eq!(r.selected.len(), 2);
        assert_eq!(r.mode, Mode::Sequence);

        let log = like_share_log();
        let options = vec![
            ("immigration-security".to_string(), "share".to_string()),
            ("climate-cultural".to_string(), "like".to_string()),
        ];
        let mut inputs = RerankInputs::new(&corpus);
        inputs.interactions = Some(&log);
        inputs.options = Some(&options);
        let r = rerank(&s, &RerankRequest::new(Mode::Interaction, 1), inputs).unwrap();
        assert_eq!(r.selected, vec!["immigration-security"]);
        assert_eq!(r.suggestion.unwrap().kind, "share");
    }

    #[test]
    fn pipeline_swap_mode() {
        let s = guiding_schema();
        let corpus = guiding_corpus();
        let mut req = RerankRequest::new(Mode::List, 4);
        req.swap_budget = Some(10);
        let r = rerank(&s, &req, RerankInputs::new(&corpus)).unwrap();
        assert!((r.diversity.overall - 0.75).abs() < EPS);
    }

    #[test]
    fn result_json_round_trips() {
        let s = guiding_schema();
        let r = greedy_select(&s, &guiding_pool(), 4).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: RerankResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back.selected, r.selected);
        assert_eq!(back.trace.len(), r.trace.len());
    }
}
