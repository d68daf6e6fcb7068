//! Anchor-text scoring: patterns with priority values, higher values for
//! texts more likely to lead to a password-reset page.
//!
//! Matching is case-insensitive substring matching over the anchor text, so
//! "Settings" matches the pattern "setting". When several patterns match,
//! the link gets the maximum matching priority ("change password" must beat
//! its own substring "password"). Links matching no pattern are not
//! navigation candidates at all.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;
use url::Url;

use crate::page::{visit_key, LinkRef};

/// Ordered pattern table. Patterns are stored lowercase and are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityTable {
    entries: Vec<(String, i64)>,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `pattern<TAB>priority`")]
    Malformed { line: usize },
    #[error("line {line}: priority is not an integer")]
    BadPriority { line: usize },
    #[error("line {line}: duplicate pattern {pattern:?}")]
    DuplicatePattern { line: usize, pattern: String },
}

/// The built-in pattern/priority table.
pub fn default_table() -> PriorityTable {
    PriorityTable::new(vec![
        ("privacy", 0),
        ("setting", 1),
        ("profile", 2),
        ("account", 3),
        ("security", 4),
        ("preference", 5),
        ("my login", 6),
        ("edit profile", 7),
        ("password", 8),
        ("change password", 100),
    ])
}

impl PriorityTable {
    fn new(entries: Vec<(&str, i64)>) -> PriorityTable {
        PriorityTable {
            entries: entries.into_iter().map(|(p, v)| (p.to_string(), v)).collect(),
        }
    }

    /// Exact-pattern lookup (not substring matching).
    pub fn lookup(&self, pattern: &str) -> Option<i64> {
        let p = pattern.to_lowercase();
        self.entries.iter().find(|(e, _)| *e == p).map(|(_, v)| *v)
    }

    /// Scores a text: the maximum priority over all patterns occurring in it
    /// (case-insensitively), or `None` when no pattern matches.
    pub fn score_text(&self, text: &str) -> Option<i64> {
        let t = text.to_lowercase();
        self.entries.iter().filter(|(p, _)| t.contains(p)).map(|(_, v)| *v).max()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, i64)> {
        self.entries.iter().map(|(p, v)| (p.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Loads a table from `pattern<TAB>priority` lines. Empty lines and lines
    /// starting with `#` are ignored; patterns are lowercased and must be
    /// unique.
    pub fn from_reader<R: Read>(reader: R) -> Result<PriorityTable, TableError> {
        let mut entries: Vec<(String, i64)> = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let n = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (pattern, prio) =
                trimmed.split_once('\t').ok_or(TableError::Malformed { line: n })?;
            let pattern = pattern.trim().to_lowercase();
            if pattern.is_empty() {
                return Err(TableError::Malformed { line: n });
            }
            let prio: i64 =
                prio.trim().parse().map_err(|_| TableError::BadPriority { line: n })?;
            if entries.iter().any(|(p, _)| *p == pattern) {
                return Err(TableError::DuplicatePattern { line: n, pattern });
            }
            entries.push((pattern, prio));
        }
        Ok(PriorityTable { entries })
    }

    pub fn load(path: &Path) -> Result<PriorityTable, TableError> {
        Self::from_reader(std::fs::File::open(path)?)
    }
}

impl Default for PriorityTable {
    fn default() -> Self {
        default_table()
    }
}

/// A link that matched the table, with its position on the page.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredLink {
    pub link: LinkRef,
    pub priority: i64,
    /// Position of the link in document order; breaks priority ties.
    pub doc_index: usize,
}

/// Scores one link, or `None` when its text matches no pattern.
pub fn score_link(link: &LinkRef, doc_index: usize, table: &PriorityTable) -> Option<ScoredLink> {
    table
        .score_text(&link.text)
        .map(|priority| ScoredLink { link: link.clone(), priority, doc_index })
}

/// Ranks a page's links for traversal: drops links matching no pattern and
/// links already visited, then sorts by priority descending with document
/// order breaking ties. Deterministic.
pub fn rank_links(
    links: &[LinkRef],
    table: &PriorityTable,
    visited: &HashSet<Url>,
) -> Vec<ScoredLink> {
    let mut scored: Vec<ScoredLink> = links
        .iter()
        .enumerate()
        .filter(|(_, l)| !visited.contains(&visit_key(&l.href)))
        .filter_map(|(i, l)| score_link(l, i, table))
        .collect();
    scored.sort_by_key(|s| (std::cmp::Reverse(s.priority), s.doc_index));
    scored
}
