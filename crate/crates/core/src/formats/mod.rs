//! Text and JSON documents for the four artifact kinds: transaction data,
//! taxonomy sets, rule sets and generalized rule sets.
//!
//! Transactions and taxonomies use line-oriented text. Rule sets and
//! generalized rule sets are JSON documents with a versioned header; rule
//! sets can also be imported from (and exported to) Borgelt's
//! `consequent <- antecedent (support%, confidence%)` listing.
//!
//! Every parser takes arbitrary input and answers with a value or an
//! [`Error`] carrying a line and column. Every writer is canonical:
//! `write(parse(write(x))) == write(x)` byte for byte.

mod generalized;
mod rules;
mod taxonomy;
mod transactions;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generalized::{parse_generalized, write_generalized};
pub use rules::{export_borgelt_rules, import_borgelt_rules, parse_ruleset, parse_ruleset_any, write_ruleset};
pub use taxonomy::{parse_taxonomies, write_taxonomies};
pub use transactions::{parse_transactions, write_transactions};

pub const FORMAT_VERSION: &str = "1";

/// Prefix of the header comment carried by the text formats.
const TEXT_HEADER: &str = "# genrules-format:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArtifactKind {
    #[serde(rename = "transactions")]
    Transactions,
    #[serde(rename = "taxonomy")]
    Taxonomy,
    #[serde(rename = "ruleset")]
    RuleSet,
    #[serde(rename = "generalized-ruleset")]
    GeneralizedRuleSet,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 4] = [
        ArtifactKind::Transactions,
        ArtifactKind::Taxonomy,
        ArtifactKind::RuleSet,
        ArtifactKind::GeneralizedRuleSet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Transactions => "transactions",
            ArtifactKind::Taxonomy => "taxonomy",
            ArtifactKind::RuleSet => "ruleset",
            ArtifactKind::GeneralizedRuleSet => "generalized-ruleset",
        }
    }
}

impl FromStr for ArtifactKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ArtifactKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Document(format!("unknown artifact kind {s:?}")))
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentHeader {
    pub format_version: String,
    pub kind: ArtifactKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl DocumentHeader {
    pub fn new(kind: ArtifactKind) -> Self {
        DocumentHeader {
            format_version: FORMAT_VERSION.to_string(),
            kind,
            created_at: None,
        }
    }

    fn check(&self, expected: ArtifactKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::Document(format!(
                "expected a {expected} document, found {}",
                self.kind
            )));
        }
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported {} format version {:?}",
                self.kind, self.format_version
            )));
        }
        Ok(())
    }
}

/// A parsed value plus the non-fatal issues found on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

/// UTF-8 decoding with the position of the first bad byte.
pub fn decode(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let good = &bytes[..e.valid_up_to()];
        let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = good.len() - good.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
        Error::parse(line, column, "invalid UTF-8")
    })
}

/// Checks that `text` parses as `kind`, returning the parser warnings.
pub fn validate_document(kind: ArtifactKind, text: &str) -> Result<Vec<String>> {
    Ok(match kind {
        ArtifactKind::Transactions => parse_transactions(text)?.warnings,
        ArtifactKind::Taxonomy => parse_taxonomies(text)?.warnings,
        ArtifactKind::RuleSet => parse_ruleset_any(text)?.warnings,
        ArtifactKind::GeneralizedRuleSet => {
            parse_generalized(text)?;
            Vec::new()
        }
    })
}

fn text_header(kind: ArtifactKind) -> String {
    format!("{TEXT_HEADER} {kind} {FORMAT_VERSION}\n")
}

/// Validates a `# genrules-format: kind version` comment, if `line` is one.
fn check_text_header(line: &str, lineno: usize, expected: ArtifactKind) -> Result<()> {
    let Some(rest) = line.strip_prefix(TEXT_HEADER) else {
        return Ok(());
    };
    let mut parts = rest.split_whitespace();
    let (Some(kind), Some(version), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::parse(lineno, 1, "malformed format header"));
    };
    DocumentHeader {
        format_version: version.to_string(),
        kind: kind.parse().map_err(|e: Error| Error::parse(lineno, 1, e.to_string()))?,
        created_at: None,
    }
    .check(expected)
    .map_err(|e| Error::parse(lineno, 1, e.to_string()))
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(e.line(), e.column(), e.to_string())
}

/// Lines without their terminator, numbered from 1; a trailing `\r` is
/// dropped.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_reports_position() {
        let err = decode(b"ab\ncd\xffe").unwrap_err();
        assert_eq!(err, Error::parse(2, 3, "invalid UTF-8"));
        assert_eq!(decode(b"ok").unwrap(), "ok");
    }

    #[test]
    fn kinds_round_trip_names() {
        for k in ArtifactKind::ALL {
            assert_eq!(k.as_str().parse::<ArtifactKind>().unwrap(), k);
        }
        assert!("data".parse::<ArtifactKind>().is_err());
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let err = parse_transactions("# genrules-format: taxonomy 1\na b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_transactions("# genrules-format: transactions 9\na b\n").unwrap_err();
        assert!(err.to_string().contains("version"));
    }
}
