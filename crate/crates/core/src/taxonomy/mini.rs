//! Hand-written taxonomy fixtures.
//!
//! One record per line:
//!
//! ```text
//! # comment
//! node <id> <label>
//! edge <child-id> <parent-id>
//! ```
//!
//! Edges point from a node to its hypernym. Node order in the file is the
//! tie-break key used when ranking concepts.

use std::ops::Deref;

use super::graph::{GraphBuilder, RawSynset, SynsetGraph};
use crate::error::{Error, Result};

const SOURCE: &str = "taxonomy fixture";

/// The Figure-3 style fixture shipped with the crate (cat, dinosaur, jeep).
pub const FIG3_FIXTURE: &str = include_str!("../../fixtures/fig3.tax");

/// The desk-scale fixture used by the end-to-end experiments.
pub const DESK_FIXTURE: &str = include_str!("../../fixtures/desk.tax");

/// A [`SynsetGraph`] loaded from the fixture format.
#[derive(Debug, Clone)]
pub struct MiniTaxonomy(SynsetGraph);

impl MiniTaxonomy {
    pub fn graph(&self) -> &SynsetGraph {
        &self.0
    }

    pub fn into_graph(self) -> SynsetGraph {
        self.0
    }
}

impl Deref for MiniTaxonomy {
    type Target = SynsetGraph;

    fn deref(&self) -> &SynsetGraph {
        &self.0
    }
}

pub fn load_mini_taxonomy(text: &str) -> Result<MiniTaxonomy> {
    let mut builder = GraphBuilder::new();
    let mut edges = Vec::new();
    let mut order = 0u64;

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, char::is_whitespace);
        let record = parts.next().unwrap_or_default();
        let mut field = |name: &str| -> Result<&str> {
            parts
                .next()
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::parse(SOURCE, line_no, name, "missing"))
        };
        match record {
            "node" => {
                let id = field("id")?;
                let label = field("label")?;
                if id.contains(char::is_whitespace) {
                    return Err(Error::parse(SOURCE, line_no, "id", "ids cannot contain whitespace"));
                }
                let pushed = builder.push(RawSynset {
                    id: id.to_string(),
                    order,
                    lemmas: vec![label.to_string()],
                    gloss: String::new(),
                    hypernyms: Vec::new(),
                });
                if !pushed {
                    return Err(Error::parse(SOURCE, line_no, "id", format!("duplicate node id {id:?}")));
                }
                order += 1;
            }
            "edge" => {
                let child = field("child")?.to_string();
                let rest = field("parent")?;
                let mut ids = rest.split_whitespace();
                let parent = ids.next().unwrap_or_default().to_string();
                if ids.next().is_some() {
                    return Err(Error::parse(SOURCE, line_no, "edge", "trailing fields"));
                }
                edges.push((child, parent));
            }
            other => {
                return Err(Error::parse(SOURCE, line_no, "record", format!("unknown record type {other:?}")))
            }
        }
    }

    for (child, parent) in &edges {
        if !builder.contains(parent) {
            return Err(Error::Integrity(format!("edge {child} -> {parent}: undeclared node {parent:?}")));
        }
        builder.add_hypernym(child, parent)?;
    }
    builder.finish().map(MiniTaxonomy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node() {
        let t = load_mini_taxonomy("node only thing\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.roots().count(), 1);
        assert_eq!(t.senses("thing").len(), 1);
    }

    #[test]
    fn comments_and_blank_lines() {
        let t = load_mini_taxonomy("# header\n\nnode a root # trailing\nnode b leaf\nedge b a\n").unwrap();
        assert_eq!(t.get("b").unwrap().hypernyms, vec![0]);
        assert_eq!(t.get("a").unwrap().label(), "root");
    }

    #[test]
    fn duplicate_id_is_parse_error() {
        let err = load_mini_taxonomy("node a x\nnode a y\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, ref field, .. } if field == "id"));
    }

    #[test]
    fn undeclared_edge_target_is_integrity_error() {
        let err = load_mini_taxonomy("node a x\nedge a ghost\n").unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
        let err = load_mini_taxonomy("node a x\nedge ghost a\n").unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn cycle_is_integrity_error() {
        let err = load_mini_taxonomy("node a x\nnode b y\nnode c z\nedge a b\nedge b c\nedge c a\n").unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn unknown_record_rejected() {
        let err = load_mini_taxonomy("vertex a x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { ref field, .. } if field == "record"));
    }

    #[test]
    fn bundled_fixtures_load() {
        let fig3 = load_mini_taxonomy(FIG3_FIXTURE).unwrap();
        assert_eq!(fig3.roots().count(), 1);
        let leaves = fig3
            .synsets()
            .iter()
            .enumerate()
            .filter(|(i, _)| fig3.synsets().iter().all(|s| !s.hypernyms.contains(i)))
            .count();
        assert_eq!(leaves, 3);
        load_mini_taxonomy(DESK_FIXTURE).unwrap();
    }
}
