use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AssociationRule, Itemset, MiningParams, RuleSet};

use super::{json_error, numbered_lines, ArtifactKind, DocumentHeader, Parsed};

#[derive(Serialize, Deserialize)]
struct RuleSetDocument {
    header: DocumentHeader,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mining_params: Option<MiningParams>,
    rules: Vec<AssociationRule>,
}

pub fn write_ruleset(rules: &RuleSet) -> String {
    let doc = RuleSetDocument {
        header: DocumentHeader::new(ArtifactKind::RuleSet),
        mining_params: rules.mining_params,
        rules: rules.rules().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("rule sets always serialize");
    text.push('\n');
    text
}

pub fn parse_ruleset(text: &str) -> Result<Parsed<RuleSet>> {
    let doc: RuleSetDocument = serde_json::from_str(text).map_err(json_error)?;
    doc.header.check(ArtifactKind::RuleSet)?;
    if let Some(params) = &doc.mining_params {
        params.validate()?;
    }
    let mut warnings = Vec::new();
    let mut set = RuleSet::new();
    for rule in doc.rules {
        let rule = AssociationRule::new(rule.lhs, rule.rhs, rule.support, rule.confidence)?;
        let shown = rule.to_string();
        if !set.insert(rule) {
            warnings.push(format!("duplicate rule {shown} dropped"));
        }
    }
    set.mining_params = doc.mining_params;
    Ok(Parsed { value: set, warnings })
}

/// JSON documents start with `{`; anything else is read as a Borgelt listing.
pub fn parse_ruleset_any(text: &str) -> Result<Parsed<RuleSet>> {
    if text.trim_start().starts_with('{') {
        parse_ruleset(text)
    } else {
        import_borgelt_rules(text)
    }
}

/// Moves the decimal point of a plain or scientific decimal literal by
/// `shift` places and returns it in scientific form, so that percentages
/// convert to fractions without a rounding step of their own.
fn shift_decimal(literal: &str, shift: i32) -> Option<String> {
    let (mantissa, exp) = match literal.find(['e', 'E']) {
        Some(p) => (&literal[..p], literal[p + 1..].parse::<i32>().ok()?),
        None => (literal, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits_ok(int) || !digits_ok(frac) {
        return None;
    }
    let exp = exp.checked_add(shift)?.checked_sub(frac.len() as i32)?;
    Some(format!("{int}{frac}e{exp}"))
}

fn percent_to_fraction(literal: &str) -> Option<f64> {
    let value: f64 = shift_decimal(literal, -2)?.parse().ok()?;
    (0.0..=1.0).contains(&value).then_some(value)
}

/// Shortest percentage literal that reads back as exactly `fraction`.
fn fraction_to_percent(fraction: f64) -> String {
    if fraction == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{fraction:e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    // value = digits * 10^(point - digits.len()), point counted from the left
    let point = exp + 2 + int.len() as i32;
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    }
}

fn parse_items(field: &str, lineno: usize, column: usize) -> Result<Itemset> {
    let items = Itemset::parse(field.split_whitespace())
        .map_err(|e| Error::parse(lineno, column, e.to_string()))?;
    if items.is_empty() {
        return Err(Error::parse(lineno, column, "empty item list"));
    }
    Ok(items)
}

/// Reads `consequent <- antecedent (support%, confidence%)` lines.
///
/// A line without the parenthesized pair yields a rule without measures and
/// a warning. Any other shape is rejected with its line number.
pub fn import_borgelt_rules(text: &str) -> Result<Parsed<RuleSet>> {
    let mut set = RuleSet::new();
    let mut warnings = Vec::new();
    for (lineno, line) in numbered_lines(text) {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((rhs_text, rest)) = line.split_once("<-") else {
            return Err(Error::parse(lineno, 1, "expected `consequent <- antecedent (s, c)`"));
        };
        let lhs_column = rhs_text.chars().count() + 3;
        let (lhs_text, measures) = match rest.find('(') {
            Some(open) => {
                let inner = rest[open + 1..].trim_end();
                let Some(inner) = inner.strip_suffix(')') else {
                    return Err(Error::parse(lineno, lhs_column + open, "unclosed measure list"));
                };
                let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
                let [s, c] = parts.as_slice() else {
                    return Err(Error::parse(
                        lineno,
                        lhs_column + open,
                        format!("expected (support, confidence), found {} value(s)", parts.len()),
                    ));
                };
                let bad = |what: &str, v: &str| {
                    Error::parse(lineno, lhs_column + open, format!("bad {what} percentage {v:?}"))
                };
                let s = percent_to_fraction(s).ok_or_else(|| bad("support", s))?;
                let c = percent_to_fraction(c).ok_or_else(|| bad("confidence", c))?;
                (&rest[..open], Some((s, c)))
            }
            None => (rest, None),
        };
        let rhs = parse_items(rhs_text, lineno, 1)?;
        let lhs = parse_items(lhs_text, lineno, lhs_column)?;
        let (support, confidence) = match measures {
            Some((s, c)) => (Some(s), Some(c)),
            None => {
                warnings.push(format!("line {lineno}: rule has no measures"));
                (None, None)
            }
        };
        let rule = AssociationRule::new(lhs, rhs, support, confidence)
            .map_err(|e| Error::parse(lineno, 1, e.to_string()))?;
        let shown = rule.to_string();
        if !set.insert(rule) {
            warnings.push(format!("line {lineno}: duplicate rule {shown} dropped"));
        }
    }
    Ok(Parsed { value: set, warnings })
}

/// The inverse of [`import_borgelt_rules`]. Mining parameters are not part
/// of the listing; items containing whitespace cannot be written.
pub fn export_borgelt_rules(rules: &RuleSet) -> Result<String> {
    let mut out = String::new();
    for rule in rules {
        if let Some(bad) = rule.lhs.iter().chain(rule.rhs.iter()).find(|i| i.as_str().contains(char::is_whitespace)) {
            return Err(Error::Document(format!(
                "item {bad:?} contains whitespace and cannot be written as a Borgelt rule"
            )));
        }
        out.push_str(&format!("{} <- {}", rule.rhs.join(" "), rule.lhs.join(" ")));
        match (rule.support, rule.confidence) {
            (Some(s), Some(c)) => out.push_str(&format!(
                " ({}, {})\n",
                fraction_to_percent(s),
                fraction_to_percent(c)
            )),
            (None, None) => out.push('\n'),
            _ => {
                return Err(Error::Document(format!(
                    "rule {rule} has only one of support and confidence"
                )))
            }
        }
    }
    Ok(out)
}
