//! The two-topic / four-frame example used throughout the tests, docs and
//! benchmarks.

use crate::aspect_model::{load_schema, Aspect, AspectSchema};
use crate::corpus_io::{load_corpus, Corpus};
use crate::metrics::DocumentProfile;

pub const GUIDING_SCHEMA: &str = include_str!("../fixtures/guiding_schema.json");
/// Same distances as [`GUIDING_SCHEMA`], derived from label graphs.
pub const GUIDING_GRAPH_SCHEMA: &str = include_str!("../fixtures/guiding_graph_schema.json");
pub const GUIDING_CORPUS: &str = include_str!("../fixtures/guiding_corpus.jsonl");
pub const INTERACTIONS: &str = include_str!("../fixtures/interactions.jsonl");
pub const RULES: &str = include_str!("../fixtures/rules.jsonl");
pub const HISTORY: &str = include_str!("../fixtures/history.jsonl");

pub fn guiding_schema() -> AspectSchema {
    load_schema(GUIDING_SCHEMA).expect("fixture schema is valid")
}

pub fn guiding_corpus() -> Corpus {
    load_corpus(&guiding_schema(), GUIDING_CORPUS).expect("fixture corpus is valid")
}

/// All eight topic × frame combinations.
pub fn guiding_pool() -> Vec<DocumentProfile> {
    guiding_corpus().to_vec()
}

pub fn doc(id: &str, topic: &str, frame: &str) -> DocumentProfile {
    DocumentProfile::new(id, [("topic", topic), ("frame", frame)])
}

/// The four four-item lists: homogeneous, topic-only, frame-only, both.
pub fn reference_lists() -> [Vec<DocumentProfile>; 4] {
    let list = |items: [(&str, &str); 4]| {
        items
            .iter()
            .enumerate()
            .map(|(i, (t, f))| doc(&format!("d{}", i + 1), t, f))
            .collect::<Vec<_>>()
    };
    [
        list([("Climate", "Health"); 4]),
        list([
            ("Climate", "Health"),
            ("Climate", "Health"),
            ("Immigration", "Health"),
            ("Immigration", "Health"),
        ]),
        list([
            ("Climate", "Health"),
            ("Climate", "Cultural"),
            ("Climate", "Security"),
            ("Climate", "Economy"),
        ]),
        list([
            ("Climate", "Health"),
            ("Climate", "Cultural"),
            ("Immigration", "Security"),
            ("Immigration", "Economy"),
        ]),
    ]
}

/// The frame aspect of [`GUIDING_GRAPH_SCHEMA`].
pub fn frame_graph_aspect() -> Aspect {
    load_schema(GUIDING_GRAPH_SCHEMA)
        .expect("fixture schema is valid")
        .aspect("frame")
        .expect("frame aspect")
        .clone()
}
