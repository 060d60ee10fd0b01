use crate::error::{Error, Result};
use crate::model::Item;
use crate::taxonomy::{build_taxonomy, TaxonomyEdge, TaxonomySet};

use super::{check_text_header, numbered_lines, text_header, ArtifactKind, Parsed};

struct Section {
    name: String,
    edges: Vec<TaxonomyEdge>,
}

/// `child<TAB>parent` edges, one per line, grouped into trees by `= name`
/// lines. Edges before the first `= name` form an unnamed tree.
pub fn parse_taxonomies(text: &str) -> Result<Parsed<TaxonomySet>> {
    let mut sections: Vec<Section> = Vec::new();
    for (lineno, line) in numbered_lines(text) {
        if line.starts_with('#') {
            check_text_header(line, lineno, ArtifactKind::Taxonomy)?;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('=') {
            sections.push(Section {
                name: name.trim().to_string(),
                edges: Vec::new(),
            });
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [child, parent] = fields.as_slice() else {
            return Err(Error::parse(
                lineno,
                1,
                format!(
                    "expected child<TAB>parent, found {} tab-separated field(s)",
                    fields.len()
                ),
            ));
        };
        let child_item =
            Item::new(child.trim()).map_err(|e| Error::parse(lineno, 1, e.to_string()))?;
        let parent_item = Item::new(parent.trim())
            .map_err(|e| Error::parse(lineno, child.chars().count() + 2, e.to_string()))?;
        if sections.is_empty() {
            sections.push(Section {
                name: String::new(),
                edges: Vec::new(),
            });
        }
        let section = sections.last_mut().expect("section pushed above");
        section.edges.push(TaxonomyEdge::new(child_item, parent_item));
    }

    let trees = sections
        .into_iter()
        .map(|s| build_taxonomy(s.edges, s.name))
        .collect::<Result<Vec<_>>>()?;
    Ok(Parsed {
        value: TaxonomySet::new(trees)?,
        warnings: Vec::new(),
    })
}

pub fn write_taxonomies(set: &TaxonomySet) -> String {
    let mut out = text_header(ArtifactKind::Taxonomy);
    for tax in set.taxonomies() {
        if tax.name().is_empty() {
            out.push_str("=\n");
        } else {
            out.push_str(&format!("= {}\n", tax.name()));
        }
        for edge in tax.edges() {
            out.push_str(&format!("{}\t{}\n", edge.child, edge.parent));
        }
    }
    out
}
