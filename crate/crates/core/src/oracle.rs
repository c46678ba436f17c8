//! Exhaustive reference answers for small instances.
//!
//! These are deliberately plain: they enumerate every subset or candidate and
//! re-evaluate the collection metrics from scratch, so that the heuristics in
//! [`crate::diversify`] can be checked against them.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::aspect_model::AspectSchema;
use crate::corpus_io::sig12;
use crate::error::{Error, Result};
use crate::metrics::{collection_diversity, doc_distance, window_items, DocumentProfile, WindowSpec};

/// Most subsets an exhaustive search may evaluate.
pub const ORACLE_SUBSET_LIMIT: u128 = 10_000_000;

const TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_subset: Vec<String>,
    #[serde(serialize_with = "sig12")]
    pub best_value: f64,
    pub evaluated: u64,
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn check_pool(pool: &[DocumentProfile], k: usize) -> Result<Vec<&DocumentProfile>> {
    if k == 0 || k > pool.len() {
        return Err(Error::Contract(format!(
            "k must be between 1 and the pool size {}, got {k}",
            pool.len()
        )));
    }
    let mut seen = HashSet::new();
    if let Some(d) = pool.iter().find(|d| !seen.insert(d.id.as_str())) {
        return Err(Error::Contract(format!("duplicate document id '{}' in pool", d.id)));
    }
    let subsets = binomial(pool.len(), k);
    if subsets > ORACLE_SUBSET_LIMIT {
        return Err(Error::GuardExceeded {
            subsets,
            limit: ORACLE_SUBSET_LIMIT,
        });
    }
    let mut sorted: Vec<&DocumentProfile> = pool.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(sorted)
}

/// Visits every k-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exhaustive search for a k-subset maximizing a set function. Among
/// near-ties the lexicographically smallest sorted id list wins.
fn exhaustive_max(
    sorted: &[&DocumentProfile],
    k: usize,
    mut value: impl FnMut(&[&DocumentProfile]) -> Result<f64>,
) -> Result<(Vec<String>, u64)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluated = 0u64;
    let mut failure = None;
    let mut buf = Vec::with_capacity(k);
    for_each_subset(sorted.len(), k, |idx| {
        if failure.is_some() {
            return;
        }
        buf.clear();
        buf.extend(idx.iter().map(|&i| sorted[i]));
        evaluated += 1;
        match value(&buf) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(b, _)| v > b + TIE) {
                    best = Some((v, idx.to_vec()));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, idx) = best.expect("at least one subset");
    Ok((idx.iter().map(|&i| sorted[i].id.clone()).collect(), evaluated))
}

/// Exact maximum of `div(S)` over all k-subsets of `pool`.
pub fn max_diversity_oracle(schema: &AspectSchema, pool: &[DocumentProfile], k: usize) -> Result<OracleResult> {
    let sorted = check_pool(pool, k)?;
    let owned = |s: &[&DocumentProfile]| s.iter().map(|d| (*d).clone()).collect::<Vec<_>>();
    let (best_subset, evaluated) =
        exhaustive_max(&sorted, k, |s| Ok(collection_diversity(schema, &owned(s))?.overall))?;
    let chosen: Vec<DocumentProfile> = best_subset
        .iter()
        .map(|id| sorted.iter().find(|d| &d.id == id).map(|d| (*d).clone()).unwrap())
        .collect();
    Ok(OracleResult {
        best_value: collection_diversity(schema, &chosen)?.overall,
        best_subset,
        evaluated,
    })
}

/// `lambda · mean relevance + (1 − lambda) · div(S)`, the set objective
/// that combined re-ranking greedily approximates.
pub fn combined_objective(schema: &AspectSchema, docs: &[DocumentProfile], lambda: f64) -> Result<f64> {
    let mut rel = 0.0;
    for d in docs {
        rel += d
            .relevance
            .ok_or_else(|| Error::Contract(format!("document '{}' has no relevance score", d.id)))?;
    }
    let mean = if docs.is_empty() { 0.0 } else { rel / docs.len() as f64 };
    Ok(lambda * mean + (1.0 - lambda) * collection_diversity(schema, docs)?.overall)
}

/// Exact maximum of [`combined_objective`] over all k-subsets.
pub fn max_objective_oracle(
    schema: &AspectSchema,
    pool: &[DocumentProfile],
    k: usize,
    lambda: f64,
) -> Result<OracleResult> {
    let sorted = check_pool(pool, k)?;
    let owned = |s: &[&DocumentProfile]| s.iter().map(|d| (*d).clone()).collect::<Vec<_>>();
    let (best_subset, evaluated) = exhaustive_max(&sorted, k, |s| combined_objective(schema, &owned(s), lambda))?;
    let chosen: Vec<DocumentProfile> = best_subset
        .iter()
        .map(|id| sorted.iter().find(|d| &d.id == id).map(|d| (*d).clone()).unwrap())
        .collect();
    Ok(OracleResult {
        best_value: combined_objective(schema, &chosen, lambda)?,
        best_subset,
        evaluated,
    })
}

/// Reference for `next_in_sequence`: appends each candidate to the window,
/// re-evaluates everything from scratch, and applies the same selection
/// rule (post-window diversity, then recency-weighted distance, then id).
pub fn max_sequence_oracle(
    schema: &AspectSchema,
    history: &[DocumentProfile],
    candidates: &[DocumentProfile],
    window: WindowSpec,
    gamma: f64,
) -> Result<String> {
    let seen: HashSet<&str> = history.iter().map(|h| h.id.as_str()).collect();
    let fresh: Vec<&DocumentProfile> = candidates.iter().filter(|c| !seen.contains(c.id.as_str())).collect();
    if fresh.is_empty() {
        return Err(Error::Contract("no candidates left to choose from".into()));
    }
    let items = window_items(history, window)?;

    let mut scored = Vec::with_capacity(fresh.len());
    for c in fresh {
        let mut extended = items.to_vec();
        extended.push(c.clone());
        let div = collection_diversity(schema, &extended)?.overall;
        let mut recency = 0.0;
        for (age, h) in items.iter().rev().enumerate() {
            recency += gamma.powi(age as i32) * doc_distance(schema, c, h)?;
        }
        scored.push((c.id.clone(), div, recency));
    }

    let top_div = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored.retain(|s| s.1 >= top_div - TIE);
    let top_rec = scored.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    scored.retain(|s| s.2 >= top_rec - TIE);
    Ok(scored.into_iter().map(|s| s.0).min().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{doc, guiding_pool, guiding_schema};

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(8, 0), 1);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn subset_enumeration_is_complete_and_ordered() {
        let mut all = Vec::new();
        for_each_subset(5, 3, |s| all.push(s.to_vec()));
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn pair_reaches_full_diversity() {
        let r = max_diversity_oracle(&guiding_schema(), &guiding_pool(), 2).unwrap();
        assert_eq!(r.best_value, 1.0);
        assert_eq!(r.evaluated, 28);
        assert_eq!(r.best_subset, vec!["climate-cultural", "immigration-economy"]);
    }

    #[test]
    fn four_items_reach_three_quarters() {
        let r = max_diversity_oracle(&guiding_schema(), &guiding_pool(), 4).unwrap();
        assert_eq!(r.best_value, 0.75);
        assert_eq!(r.evaluated, 70);
    }

    #[test]
    fn singleton_is_zero() {
        let r = max_diversity_oracle(&guiding_schema(), &guiding_pool(), 1).unwrap();
        assert_eq!(r.best_value, 0.0);
        assert_eq!(r.best_subset, vec!["climate-cultural"]);
    }

    #[test]
    fn bad_k_and_guard() {
        let s = guiding_schema();
        assert!(matches!(
            max_diversity_oracle(&s, &guiding_pool(), 9),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            max_diversity_oracle(&s, &guiding_pool(), 0),
            Err(Error::Contract(_))
        ));
        let big: Vec<_> = (0..60).map(|i| doc(&format!("d{i:02}"), "Climate", "Health")).collect();
        assert!(matches!(
            max_diversity_oracle(&s, &big, 30),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn pool_order_does_not_matter() {
        let s = guiding_schema();
        let mut pool = guiding_pool();
        let a = max_diversity_oracle(&s, &pool, 3).unwrap();
        pool.reverse();
        assert_eq!(max_diversity_oracle(&s, &pool, 3).unwrap(), a);
    }

    #[test]
    fn sequence_oracle_examples() {
        let s = guiding_schema();
        let window = vec![doc("h1", "Climate", "Health"), doc("h2", "Immigration", "Security")];
        let single = [doc("c", "Climate", "Health")];
        assert_eq!(
            max_sequence_oracle(&s, &window, &single, WindowSpec::All, 0.5).unwrap(),
            "c"
        );
        let cands = [doc("ch", "Climate", "Health"), doc("ie", "Immigration", "Economy")];
        assert_eq!(
            max_sequence_oracle(&s, &window, &cands, WindowSpec::All, 0.5).unwrap(),
            "ie"
        );
        // equal post-window diversity (0.75); c-cu is farther from the most recent item
        let tie = [doc("i-e", "Immigration", "Economy"), doc("c-cu", "Climate", "Cultural")];
        assert_eq!(
            max_sequence_oracle(&s, &window, &tie, WindowSpec::All, 0.5).unwrap(),
            "c-cu"
        );
        assert!(max_sequence_oracle(&s, &window, &[], WindowSpec::All, 0.5).is_err());
    }
}
