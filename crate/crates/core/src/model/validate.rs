use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    EmptyTitle,
    EmptyId,
    EmptyLabel,
    EmptyEvidenceText,
    DuplicateId,
    DanglingEndpoint,
    SelfLoop,
    DuplicateLinkPair,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::EmptyTitle => "empty_title",
            Rule::EmptyId => "empty_id",
            Rule::EmptyLabel => "empty_label",
            Rule::EmptyEvidenceText => "empty_evidence_text",
            Rule::DuplicateId => "duplicate_id",
            Rule::DanglingEndpoint => "dangling_endpoint",
            Rule::SelfLoop => "self_loop",
            Rule::DuplicateLinkPair => "duplicate_link_pair",
        };
        f.write_str(name)
    }
}

/// One broken invariant, naming the offending id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub id: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.rule, self.id, self.detail)
    }
}

pub(super) fn check(model: &ModelDocument) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule, id: &str, detail: String| {
        out.push(Violation {
            rule,
            id: id.to_owned(),
            detail,
        })
    };

    if model.title.trim().is_empty() {
        push(Rule::EmptyTitle, &model.id, "model title is empty".into());
    }

    // ids are shared across nodes, links and evidence
    let mut owned: Vec<(&str, &str)> = Vec::new();
    for node in &model.nodes {
        owned.push((&node.id, "node"));
        if node.label.trim().is_empty() {
            push(Rule::EmptyLabel, &node.id, "node label is empty".into());
        }
    }
    for link in &model.links {
        owned.push((&link.id, "link"));
        for item in &link.evidence {
            owned.push((&item.id, "evidence"));
            if item.text.trim().is_empty() {
                push(Rule::EmptyEvidenceText, &item.id, "evidence text is empty".into());
            }
        }
    }
    let mut seen: HashSet<&str> = HashSet::from([model.id.as_str()]);
    for (id, what) in owned {
        if id.is_empty() {
            push(Rule::EmptyId, id, format!("{what} has an empty id"));
        } else if !seen.insert(id) {
            push(Rule::DuplicateId, id, format!("{what} id is already used"));
        }
    }

    let node_ids: HashSet<&str> = model.nodes.iter().map(|n| n.id.as_str()).collect();
    let mut pairs: HashMap<(&str, &str), &str> = HashMap::new();
    for link in &model.links {
        for (end, name) in [(&link.source, "source"), (&link.target, "target")] {
            if !node_ids.contains(end.as_str()) {
                push(
                    Rule::DanglingEndpoint,
                    &link.id,
                    format!("{name} {end:?} is not a node of this model"),
                );
            }
        }
        if link.source == link.target {
            push(Rule::SelfLoop, &link.id, format!("link loops on {}", link.source));
        }
        if let Some(first) = pairs.insert((&link.source, &link.target), &link.id) {
            push(
                Rule::DuplicateLinkPair,
                &link.id,
                format!("same source and target as {first}"),
            );
        }
    }
    out
}
