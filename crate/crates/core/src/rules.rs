//! Scoped symbolic rules over aspect labels.
//!
//! Rules are evaluated in a fixed order: global, then context rules whose tag
//! is active, then request rules. `exclude` removes candidates before any
//! diversification runs, `boost` shifts relevance, and `require_at_least` is
//! only checked against the final selection and reported as a violation.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::aspect_model::AspectSchema;
use crate::corpus_io::{fmt_num, sig12_opt};
use crate::diversify::RerankResult;
use crate::error::{Error, Result};
use crate::metrics::DocumentProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Global,
    Context,
    Request,
}

impl std::fmt::Display for Scope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scope::Global => "global",
            Scope::Context => "context",
            Scope::Request => "request",
        })
    }
}

/// Boolean expression over a document's labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Eq {
        aspect: String,
        value: String,
    },
    In {
        aspect: String,
        values: Vec<String>,
    },
    All(Vec<Predicate>),
    Any(Vec<Predicate>),
    Not(Box<Predicate>),
    /// The label is `node` or lies below it in the aspect's label graph.
    Ancestor {
        aspect: String,
        node: String,
    },
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Validation(format!("predicate is missing '{key}': {obj}")))
}

fn string(v: &Value, what: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::Validation(format!("{what} must be a string, got {v}")))
}

impl Predicate {
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Validation(format!("predicate must be an object, got {v}")))?;
        let list = |xs: &Value| -> Result<Vec<Predicate>> {
            xs.as_array()
                .ok_or_else(|| Error::Validation(format!("combinator needs an array, got {xs}")))?
                .iter()
                .map(Predicate::from_json)
                .collect()
        };
        if let Some(xs) = obj.get("all") {
            return Ok(Predicate::All(list(xs)?));
        }
        if let Some(xs) = obj.get("any") {
            return Ok(Predicate::Any(list(xs)?));
        }
        if let Some(inner) = obj.get("not") {
            return Ok(Predicate::Not(Box::new(Predicate::from_json(inner)?)));
        }
        if let Some(a) = obj.get("ancestor") {
            return Ok(Predicate::Ancestor {
                aspect: string(field(a, "aspect")?, "ancestor aspect")?,
                node: string(field(a, "node")?, "ancestor node")?,
            });
        }
        let aspect = string(field(v, "aspect")?, "aspect")?;
        let op = string(field(v, "op")?, "op")?;
        let value = field(v, "value")?;
        match op.as_str() {
            "eq" => Ok(Predicate::Eq {
                aspect,
                value: string(value, "eq value")?,
            }),
            "in" => Ok(Predicate::In {
                aspect,
                values: value
                    .as_array()
                    .ok_or_else(|| Error::Validation(format!("'in' needs an array value, got {value}")))?
                    .iter()
                    .map(|x| string(x, "'in' value"))
                    .collect::<Result<_>>()?,
            }),
            other => Err(Error::Validation(format!("unknown predicate op '{other}'"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Predicate::Eq { aspect, value } => json!({"aspect": aspect, "op": "eq", "value": value}),
            Predicate::In { aspect, values } => json!({"aspect": aspect, "op": "in", "value": values}),
            Predicate::All(xs) => json!({"all": xs.iter().map(Predicate::to_json).collect::<Vec<_>>()}),
            Predicate::Any(xs) => json!({"any": xs.iter().map(Predicate::to_json).collect::<Vec<_>>()}),
            Predicate::Not(x) => json!({"not": x.to_json()}),
            Predicate::Ancestor { aspect, node } => json!({"ancestor": {"aspect": aspect, "node": node}}),
        }
    }

    pub fn validate(&self, schema: &AspectSchema) -> Result<()> {
        let label = |aspect: &str, l: &str| -> Result<()> {
            let a = schema.aspect(aspect).map_err(|e| Error::Validation(e.to_string()))?;
            if a.labels().iter().any(|x| x == l) {
                Ok(())
            } else {
                Err(Error::Validation(format!("unknown label '{l}' for aspect '{aspect}'")))
            }
        };
        match self {
            Predicate::Eq { aspect, value } => label(aspect, value),
            Predicate::In { aspect, values } => values.iter().try_for_each(|v| label(aspect, v)),
            Predicate::All(xs) | Predicate::Any(xs) => xs.iter().try_for_each(|x| x.validate(schema)),
            Predicate::Not(x) => x.validate(schema),
            Predicate::Ancestor { aspect, node } => {
                let a = schema.aspect(aspect).map_err(|e| Error::Validation(e.to_string()))?;
                match a.graph() {
                    Some(g) if g.contains(node) => Ok(()),
                    Some(_) => Err(Error::Validation(format!(
                        "unknown graph node '{node}' for aspect '{aspect}'"
                    ))),
                    None => Err(Error::Validation(format!(
                        "aspect '{aspect}' has no label graph for ancestor tests"
                    ))),
                }
            }
        }
    }

    pub fn matches(&self, schema: &AspectSchema, doc: &DocumentProfile) -> bool {
        let label = |aspect: &str| doc.labels.get(aspect).map(String::as_str);
        match self {
            Predicate::Eq { aspect, value } => label(aspect) == Some(value.as_str()),
            Predicate::In { aspect, values } => label(aspect).is_some_and(|l| values.iter().any(|v| v == l)),
            Predicate::All(xs) => xs.iter().all(|x| x.matches(schema, doc)),
            Predicate::Any(xs) => xs.iter().any(|x| x.matches(schema, doc)),
            Predicate::Not(x) => !x.matches(schema, doc),
            Predicate::Ancestor { aspect, node } => {
                let graph = schema.aspect(aspect).ok().and_then(|a| a.graph());
                match (graph, label(aspect)) {
                    (Some(g), Some(l)) => g.is_ancestor_or_self(node, l),
                    _ => false,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Exclude,
    RequireAtLeast(usize),
    Boost(f64),
}

impl Action {
    fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .filter(|o| o.len() == 1)
            .ok_or_else(|| Error::Validation(format!("action must be an object with one key, got {v}")))?;
        let (key, val) = obj.iter().next().unwrap();
        match key.as_str() {
            "exclude" if val == &Value::Bool(true) => Ok(Action::Exclude),
            "boost" => val
                .as_f64()
                .map(Action::Boost)
                .ok_or_else(|| Error::Validation(format!("boost must be a number, got {val}"))),
            "require_at_least" => val
                .as_u64()
                .map(|m| Action::RequireAtLeast(m as usize))
                .ok_or_else(|| Error::Validation(format!("require_at_least must be a count, got {val}"))),
            _ => Err(Error::Validation(format!("unknown action {v}"))),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Action::Exclude => json!({"exclude": true}),
            Action::RequireAtLeast(m) => json!({"require_at_least": m}),
            Action::Boost(d) => json!({"boost": d}),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct Rule {
    pub id: String,
    pub scope: Scope,
    /// Activation tag; only for context-scoped rules.
    pub context: Option<String>,
    pub predicate: Predicate,
    pub action: Action,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    context: Option<String>,
    predicate: Value,
    action: Value,
}

impl TryFrom<RawRule> for Rule {
    type Error = Error;

    fn try_from(raw: RawRule) -> Result<Self> {
        let rule = Rule {
            predicate: Predicate::from_json(&raw.predicate)?,
            action: Action::from_json(&raw.action)?,
            id: raw.id,
            scope: raw.scope,
            context: raw.context,
        };
        rule.check_shape()?;
        Ok(rule)
    }
}

impl From<Rule> for RawRule {
    fn from(r: Rule) -> Self {
        RawRule {
            predicate: r.predicate.to_json(),
            action: r.action.to_json(),
            id: r.id,
            scope: r.scope,
            context: r.context,
        }
    }
}

impl Rule {
    pub fn new(id: impl Into<String>, scope: Scope, predicate: Predicate, action: Action) -> Self {
        Self {
            id: id.into(),
            scope,
            context: None,
            predicate,
            action,
        }
    }

    pub fn in_context(mut self, tag: impl Into<String>) -> Self {
        self.context = Some(tag.into());
        self
    }

    fn check_shape(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("rule id must be non-empty".into()));
        }
        match (self.scope, &self.context) {
            (Scope::Context, None) => {
                return Err(Error::Validation(format!(
                    "context rule '{}' has no context tag",
                    self.id
                )))
            }
            (Scope::Global | Scope::Request, Some(_)) => {
                return Err(Error::Validation(format!(
                    "rule '{}': only context rules take a context tag",
                    self.id
                )))
            }
            _ => {}
        }
        match self.action {
            Action::Boost(d) if !(-1.0..=1.0).contains(&d) => Err(Error::Validation(format!(
                "rule '{}': boost {d} outside [-1, 1]",
                self.id
            ))),
            Action::RequireAtLeast(0) => Err(Error::Validation(format!(
                "rule '{}': require_at_least needs m >= 1",
                self.id
            ))),
            _ => Ok(()),
        }
    }

    pub fn validate(&self, schema: &AspectSchema) -> Result<()> {
        self.check_shape()?;
        self.predicate
            .validate(schema)
            .map_err(|e| Error::Validation(format!("rule '{}': {e}", self.id)))
    }
}

/// Loaded rules plus the context tags that are currently active.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    context_tags: BTreeSet<String>,
}

impl RuleSet {
    pub fn new(schema: &AspectSchema, rules: Vec<Rule>, context_tags: BTreeSet<String>) -> Result<Self> {
        let mut ids = HashSet::new();
        for r in &rules {
            r.validate(schema)?;
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Validation(format!("duplicate rule id '{}'", r.id)));
            }
        }
        Ok(Self { rules, context_tags })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn context_tags(&self) -> &BTreeSet<String> {
        &self.context_tags
    }

    /// Active rules in precedence order.
    fn active<'a>(&'a self, request: &'a [Rule]) -> impl Iterator<Item = &'a Rule> + 'a {
        let stored = |scope: Scope| {
            self.rules
                .iter()
                .filter(move |r| r.scope == scope && r.context.as_ref().is_none_or(|t| self.context_tags.contains(t)))
        };
        stored(Scope::Global)
            .chain(stored(Scope::Context))
            .chain(stored(Scope::Request))
            .chain(request.iter())
    }

    fn check_request(&self, schema: &AspectSchema, request: &[Rule]) -> Result<()> {
        let mut ids: HashSet<&str> = self.rules.iter().map(|r| r.id.as_str()).collect();
        for r in request {
            if r.scope != Scope::Request {
                return Err(Error::Contract(format!(
                    "rule '{}' passed with the request must have request scope",
                    r.id
                )));
            }
            r.validate(schema)?;
            if !ids.insert(r.id.as_str()) {
                return Err(Error::Validation(format!("duplicate rule id '{}'", r.id)));
            }
        }
        Ok(())
    }
}

/// Parses one rule per line.
pub fn load_rules(schema: &AspectSchema, text: &str, context_tags: BTreeSet<String>) -> Result<RuleSet> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rule: Rule = serde_json::from_str(line).map_err(|e| Error::json_at_line(i + 1, &e))?;
        rule.validate(schema)
            .map_err(|e| Error::Validation(format!("line {}: {e}", i + 1)))?;
        rules.push(rule);
    }
    RuleSet::new(schema, rules, context_tags)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Adjustment {
    Excluded {
        id: String,
        rule: String,
        scope: Scope,
    },
    Boosted {
        id: String,
        rule: String,
        scope: Scope,
        delta: f64,
        #[serde(serialize_with = "sig12_opt")]
        before: Option<f64>,
        #[serde(serialize_with = "sig12_opt")]
        after: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub required: usize,
    pub found: usize,
}

/// Everything the rule layer did to one request.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Applied {
    #[serde(default)]
    pub adjustments: Vec<Adjustment>,
    #[serde(default)]
    pub violations: Vec<Violation>,
}

impl Applied {
    pub fn is_empty(&self) -> bool {
        self.adjustments.is_empty() && self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleApplication {
    pub candidates: Vec<DocumentProfile>,
    pub adjustments: Vec<Adjustment>,
}

/// Runs exclude and boost rules over `candidates`.
pub fn apply_rules(
    schema: &AspectSchema,
    ruleset: &RuleSet,
    request_rules: &[Rule],
    candidates: &[DocumentProfile],
) -> Result<RuleApplication> {
    ruleset.check_request(schema, request_rules)?;
    let mut alive: Vec<Option<DocumentProfile>> = candidates.iter().cloned().map(Some).collect();
    let mut adjustments = Vec::new();
    for rule in ruleset.active(request_rules) {
        for slot in alive.iter_mut() {
            let Some(doc) = slot else { continue };
            if !rule.predicate.matches(schema, doc) {
                continue;
            }
            match rule.action {
                Action::Exclude => {
                    adjustments.push(Adjustment::Excluded {
                        id: doc.id.clone(),
                        rule: rule.id.clone(),
                        scope: rule.scope,
                    });
                    *slot = None;
                }
                Action::Boost(delta) => {
                    let before = doc.relevance;
                    doc.relevance = before.map(|r| (r + delta).clamp(0.0, 1.0));
                    adjustments.push(Adjustment::Boosted {
                        id: doc.id.clone(),
                        rule: rule.id.clone(),
                        scope: rule.scope,
                        delta,
                        before,
                        after: doc.relevance,
                    });
                }
                Action::RequireAtLeast(_) => {}
            }
        }
    }
    Ok(RuleApplication {
        candidates: alive.into_iter().flatten().collect(),
        adjustments,
    })
}

/// Checks every active `require_at_least` rule against a final selection.
pub fn check_requirements(
    schema: &AspectSchema,
    ruleset: &RuleSet,
    request_rules: &[Rule],
    selected: &[DocumentProfile],
) -> Vec<Violation> {
    ruleset
        .active(request_rules)
        .filter_map(|rule| match rule.action {
            Action::RequireAtLeast(m) => {
                let found = selected.iter().filter(|d| rule.predicate.matches(schema, d)).count();
                (found < m).then(|| Violation {
                    rule: rule.id.clone(),
                    required: m,
                    found,
                })
            }
            _ => None,
        })
        .collect()
}

/// Plain-text account of a re-ranking result and the rules around it.
pub fn explain_result(result: &RerankResult, applied: &Applied) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode: {}", result.mode);
    let _ = writeln!(
        out,
        "diversity: {} over {} pair(s); objective: {}",
        fmt_num(result.diversity.overall),
        result.diversity.pair_count,
        fmt_num(result.objective)
    );
    if let Some(s) = &result.suggestion {
        let _ = writeln!(
            out,
            "suggestion: {} '{}' (interaction diversity {} -> {}, {} diversity {})",
            s.kind,
            s.doc,
            fmt_num(s.before),
            fmt_num(s.overall),
            s.kind,
            fmt_num(s.own_type)
        );
    }
    if let Some(k) = result.keyword_diversity {
        let _ = writeln!(out, "keyword diversity: {}", fmt_num(k));
    }

    let _ = writeln!(out, "selected ({}):", result.selected.len());
    for (rank, id) in result.selected.iter().enumerate() {
        let contribution = result
            .contributions
            .iter()
            .find(|c| &c.id == id)
            .map_or_else(|| "n/a".to_string(), |c| fmt_num(c.marginal));
        let _ = writeln!(out, "  {}. {id}  contribution {contribution}", rank + 1);
        for adj in &applied.adjustments {
            if let Adjustment::Boosted {
                id: bid,
                rule,
                delta,
                before,
                after,
                ..
            } = adj
            {
                if bid == id {
                    let show = |v: &Option<f64>| v.map_or("none".to_string(), fmt_num);
                    let _ = writeln!(
                        out,
                        "     boost {delta:+} by {rule} (relevance {} -> {})",
                        show(before),
                        show(after)
                    );
                }
            }
        }
    }

    let _ = writeln!(out, "trace:");
    if result.trace.is_empty() {
        let _ = writeln!(out, "  (empty)");
    }
    for record in &result.trace {
        let _ = writeln!(out, "  {record}");
    }

    if applied.is_empty() {
        let _ = writeln!(out, "rules: none");
        return out;
    }
    let _ = writeln!(out, "rules:");
    for adj in &applied.adjustments {
        match adj {
            Adjustment::Excluded { id, rule, scope } => {
                let _ = writeln!(out, "  excluded {id} by {rule} ({scope} scope)");
            }
            Adjustment::Boosted { id, rule, delta, .. } => {
                let _ = writeln!(out, "  boosted {id} by {rule} ({delta:+})");
            }
        }
    }
    for v in &applied.violations {
        let _ = writeln!(
            out,
            "  violation: {} requires at least {} matching item(s), found {}",
            v.rule, v.required, v.found
        );
    }
    out
}
