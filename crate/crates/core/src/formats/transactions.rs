use crate::error::{Error, Result};
use crate::model::{Item, Itemset, TransactionDatabase};

use super::{check_text_header, numbered_lines, text_header, ArtifactKind, Parsed};

/// One basket per line, items separated by runs of spaces or tabs. Blank
/// lines and `#` comments are skipped; repeated items within a line are
/// collapsed with a warning.
pub fn parse_transactions(text: &str) -> Result<Parsed<TransactionDatabase>> {
    let mut baskets = Vec::new();
    let mut warnings = Vec::new();
    for (lineno, line) in numbered_lines(text) {
        if line.starts_with('#') {
            check_text_header(line, lineno, ArtifactKind::Transactions)?;
            continue;
        }
        let mut items: Vec<Item> = Vec::new();
        let mut column = 1;
        for token in line.split([' ', '\t']) {
            if !token.is_empty() {
                let item = Item::new(token)
                    .map_err(|e| Error::parse(lineno, column, e.to_string()))?;
                items.push(item);
            }
            column += token.chars().count() + 1;
        }
        if items.is_empty() {
            continue;
        }
        let before = items.len();
        let set = Itemset::from(items);
        if set.len() < before {
            warnings.push(format!(
                "line {lineno}: {} duplicate item(s) collapsed",
                before - set.len()
            ));
        }
        baskets.push(set);
    }
    Ok(Parsed {
        value: TransactionDatabase::new(baskets),
        warnings,
    })
}

/// Canonical listing. Fails on items containing spaces (they would split on
/// re-read) and on empty baskets (they would vanish).
pub fn write_transactions(db: &TransactionDatabase) -> Result<String> {
    let mut out = text_header(ArtifactKind::Transactions);
    for t in db.transactions() {
        if t.items.is_empty() {
            return Err(Error::Document(format!("transaction {} is empty", t.id)));
        }
        if let Some(bad) = t.items.iter().find(|i| i.as_str().contains(' ')) {
            return Err(Error::Document(format!(
                "item {bad:?} in transaction {} contains a space",
                t.id
            )));
        }
        out.push_str(&t.items.join(" "));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_lines() {
        let db = parse_transactions("a b c\nb c\n").unwrap().value;
        assert_eq!(db.len(), 2);
        assert_eq!(db.transactions()[1].items, Itemset::parse(["b", "c"]).unwrap());
    }

    #[test]
    fn duplicates_collapse_with_warning() {
        let parsed = parse_transactions("# comment\na a b\n").unwrap();
        assert_eq!(parsed.value.len(), 1);
        assert_eq!(parsed.value.transactions()[0].items, Itemset::parse(["a", "b"]).unwrap());
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn clothing_example() {
        let text = "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
                    slipper t-shirt cap\ncap jacket\nt-shirt sandal\n";
        let db = parse_transactions(text).unwrap().value;
        assert_eq!(db.len(), 7);
        assert_eq!(db.universe().len(), 6);
    }

    #[test]
    fn separators_and_blank_lines() {
        let db = parse_transactions("  a\t\tb  \n\n   \r\nc\r\n").unwrap().value;
        assert_eq!(db.len(), 2);
        assert!(parse_transactions("").unwrap().value.is_empty());
        assert!(parse_transactions("# only comments\n").unwrap().value.is_empty());
    }

    #[test]
    fn control_characters_are_located() {
        let err = parse_transactions("a b\nc d\u{7}x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 3, .. }), "{err:?}");
    }

    #[test]
    fn writer_is_canonical() {
        let db = parse_transactions("b a\nc\n").unwrap().value;
        let text = write_transactions(&db).unwrap();
        assert_eq!(text, "# genrules-format: transactions 1\na b\nc\n");
        let again = write_transactions(&parse_transactions(&text).unwrap().value).unwrap();
        assert_eq!(again, text);
    }
}
