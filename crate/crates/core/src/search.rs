//! Token-prefix search over a model's text: node labels, notes and tags,
//! link notes, and evidence text and locators.
//!
//! Text is split on non-alphanumeric characters and lower-cased one
//! character at a time. An item matches when every query token is a prefix
//! of one of its tokens and every filter passes. Scores add up a weight per
//! query token, taken from the heaviest field that token matched in.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EvidenceKind, ModelDocument, NodeKind, Polarity};

pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Label,
    Notes,
    LinkNotes,
    EvidenceText,
    Locator,
    Tag,
}

impl Field {
    pub fn weight(self) -> f64 {
        match self {
            Field::Label => 3.0,
            Field::EvidenceText => 2.0,
            Field::Tag => 1.5,
            Field::Notes | Field::LinkNotes | Field::Locator => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Label => "label",
            Field::Notes => "notes",
            Field::LinkNotes => "link_notes",
            Field::EvidenceText => "evidence_text",
            Field::Locator => "locator",
            Field::Tag => "tag",
        }
    }
}

/// What a hit points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Target {
    Node(String),
    Link(String),
    Evidence(String),
}

impl Target {
    pub fn id(&self) -> &str {
        match self {
            Target::Node(id) | Target::Link(id) | Target::Evidence(id) => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchQuery {
    pub text: String,
    pub kind_filter: Option<NodeKind>,
    pub polarity_filter: Option<Polarity>,
    pub evidence_filter: Option<EvidenceKind>,
    pub limit: usize,
}

impl Default for SearchQuery {
    fn default() -> Self {
        SearchQuery {
            text: String::new(),
            kind_filter: None,
            polarity_filter: None,
            evidence_filter: None,
            limit: DEFAULT_LIMIT,
        }
    }
}

impl SearchQuery {
    pub fn text(text: impl Into<String>) -> Self {
        SearchQuery {
            text: text.into(),
            ..SearchQuery::default()
        }
    }
}

/// Field text with the byte ranges of the matched tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub text: String,
    pub spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub target: Target,
    /// Model id, then the owning link for evidence, then the target id.
    pub owner_path: Vec<String>,
    pub matched_field: Field,
    pub score: f64,
    pub snippet: Snippet,
}

/// A token with its byte range in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<Token> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            let token = current.get_or_insert_with(|| Token {
                text: String::new(),
                start: i,
                end: i,
            });
            token.text.extend(c.to_lowercase());
            token.end = i + c.len_utf8();
        } else if let Some(token) = current.take() {
            tokens.push(token);
        }
    }
    tokens.extend(current);
    tokens
}

/// Inverted index from token to the items (and fields) containing it.
/// Built for one model revision; rebuild after any change.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchIndex {
    model_id: String,
    revision: u64,
    postings: BTreeMap<String, BTreeMap<Target, BTreeSet<Field>>>,
}

/// Every searchable text of the model with its owner and field.
fn fields(model: &ModelDocument) -> Vec<(Target, Field, &str)> {
    let mut out = Vec::new();
    for node in &model.nodes {
        let target = Target::Node(node.id.clone());
        out.push((target.clone(), Field::Label, node.label.as_str()));
        if let Some(notes) = &node.notes {
            out.push((target.clone(), Field::Notes, notes.as_str()));
        }
        for tag in &node.tags {
            out.push((target.clone(), Field::Tag, tag.as_str()));
        }
    }
    for link in &model.links {
        if let Some(notes) = &link.notes {
            out.push((Target::Link(link.id.clone()), Field::LinkNotes, notes.as_str()));
        }
        for item in &link.evidence {
            let target = Target::Evidence(item.id.clone());
            out.push((target.clone(), Field::EvidenceText, item.text.as_str()));
            if let Some(locator) = &item.locator {
                out.push((target, Field::Locator, locator.as_str()));
            }
        }
    }
    out
}

pub fn build_index(model: &ModelDocument) -> SearchIndex {
    let mut postings: BTreeMap<String, BTreeMap<Target, BTreeSet<Field>>> = BTreeMap::new();
    for (target, field, text) in fields(model) {
        for token in tokenize(text) {
            postings
                .entry(token.text)
                .or_default()
                .entry(target.clone())
                .or_default()
                .insert(field);
        }
    }
    SearchIndex {
        model_id: model.id.clone(),
        revision: model.revision,
        postings,
    }
}

impl SearchIndex {
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Number of distinct (token, item) pairs.
    pub fn len(&self) -> usize {
        self.postings.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Items holding `token`.
    pub fn items_for(&self, token: &str) -> impl Iterator<Item = &Target> {
        self.postings.get(token).into_iter().flat_map(BTreeMap::keys)
    }

    /// Items with a token starting with `prefix`, with the fields it was
    /// found in.
    fn prefix_matches(&self, prefix: &str) -> BTreeMap<&Target, BTreeSet<Field>> {
        let mut out: BTreeMap<&Target, BTreeSet<Field>> = BTreeMap::new();
        for (_, items) in self
            .postings
            .range(prefix.to_owned()..)
            .take_while(|(token, _)| token.starts_with(prefix))
        {
            for (target, fields) in items {
                out.entry(target).or_default().extend(fields);
            }
        }
        out
    }
}

fn passes_filters(model: &ModelDocument, target: &Target, q: &SearchQuery) -> bool {
    match target {
        Target::Node(id) => {
            let Some(node) = model.node(id) else { return false };
            q.polarity_filter.is_none()
                && q.evidence_filter.is_none()
                && q.kind_filter.is_none_or(|k| k == node.kind)
        }
        Target::Link(id) => {
            let Some(link) = model.link(id) else { return false };
            q.kind_filter.is_none()
                && q.evidence_filter.is_none()
                && q.polarity_filter.is_none_or(|p| p == link.polarity)
        }
        Target::Evidence(id) => {
            let Some((link, item)) = model.evidence(id) else { return false };
            q.kind_filter.is_none()
                && q.polarity_filter.is_none_or(|p| p == link.polarity)
                && q.evidence_filter.is_none_or(|k| k == item.kind)
        }
    }
}

fn owner_path(model: &ModelDocument, target: &Target) -> Vec<String> {
    match target {
        Target::Node(id) | Target::Link(id) => vec![model.id.clone(), id.clone()],
        Target::Evidence(id) => {
            let link = model.evidence(id).map(|(l, _)| l.id.clone()).unwrap_or_default();
            vec![model.id.clone(), link, id.clone()]
        }
    }
}

/// Text of `field` on `target`; for tags, the first tag matching a query
/// token (or the first tag).
fn field_text<'m>(model: &'m ModelDocument, target: &Target, field: Field, tokens: &[String]) -> &'m str {
    let found = match (target, field) {
        (Target::Node(id), _) => model.node(id).and_then(|n| match field {
            Field::Label => Some(n.label.as_str()),
            Field::Notes => n.notes.as_deref(),
            Field::Tag => n
                .tags
                .iter()
                .find(|t| tokenize(t).iter().any(|tok| tokens.iter().any(|q| tok.text.starts_with(q.as_str()))))
                .or(n.tags.first())
                .map(String::as_str),
            _ => None,
        }),
        (Target::Link(id), _) => model.link(id).and_then(|l| l.notes.as_deref()),
        (Target::Evidence(id), _) => model.evidence(id).and_then(|(_, e)| match field {
            Field::Locator => e.locator.as_deref(),
            _ => Some(e.text.as_str()),
        }),
    };
    found.unwrap_or("")
}

fn snippet(text: &str, tokens: &[String]) -> Snippet {
    let spans = tokenize(text)
        .into_iter()
        .filter(|t| tokens.iter().any(|q| t.text.starts_with(q.as_str())))
        .map(|t| (t.start, t.end))
        .collect();
    Snippet {
        text: text.to_owned(),
        spans,
    }
}

fn primary_field(target: &Target) -> Field {
    match target {
        Target::Node(_) => Field::Label,
        Target::Link(_) => Field::LinkNotes,
        Target::Evidence(_) => Field::EvidenceText,
    }
}

/// Runs `q` against an index built from the current revision of `model`.
///
/// Hits are ordered by descending score, then by target id. A query with no
/// tokens returns every item passing the filters, scored by the weight of
/// the item's main field.
pub fn query(index: &SearchIndex, model: &ModelDocument, q: &SearchQuery) -> Result<Vec<SearchHit>> {
    if index.revision != model.revision || index.model_id != model.id {
        return Err(Error::StaleIndex {
            index_revision: index.revision,
            model_revision: model.revision,
        });
    }
    if q.limit == 0 {
        return Err(Error::validation("search limit must be at least 1"));
    }
    let mut tokens: Vec<String> = Vec::new();
    for t in tokenize(&q.text) {
        if !tokens.contains(&t.text) {
            tokens.push(t.text);
        }
    }

    // target -> (score, heaviest matched field)
    let mut scored: BTreeMap<Target, (f64, Field)> = BTreeMap::new();
    if tokens.is_empty() {
        let all: BTreeSet<Target> = fields(model).into_iter().map(|(t, ..)| t).chain(
            model.links.iter().map(|l| Target::Link(l.id.clone())),
        ).collect();
        for target in all {
            let field = primary_field(&target);
            scored.insert(target, (field.weight(), field));
        }
    } else {
        let mut per_token = tokens.iter().map(|t| index.prefix_matches(t));
        let first = per_token.next().expect("at least one token");
        let mut acc: BTreeMap<Target, Vec<Field>> = first
            .into_iter()
            .map(|(t, fs)| (t.clone(), vec![best_field(&fs)]))
            .collect();
        for matches in per_token {
            acc.retain(|target, picked| match matches.get(target) {
                Some(fs) => {
                    picked.push(best_field(fs));
                    true
                }
                None => false,
            });
        }
        for (target, picked) in acc {
            let score = picked.iter().map(|f| f.weight()).sum();
            let top = picked
                .iter()
                .copied()
                .min_by(|a, b| b.weight().total_cmp(&a.weight()).then(a.cmp(b)))
                .expect("non-empty");
            scored.insert(target, (score, top));
        }
    }

    let mut hits: Vec<SearchHit> = scored
        .into_iter()
        .filter(|(target, _)| passes_filters(model, target, q))
        .map(|(target, (score, field))| SearchHit {
            owner_path: owner_path(model, &target),
            matched_field: field,
            score,
            snippet: snippet(field_text(model, &target, field, &tokens), &tokens),
            target,
        })
        .collect();
    hits.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.target.id().cmp(b.target.id()))
    });
    hits.truncate(q.limit);
    Ok(hits)
}

fn best_field(fields: &BTreeSet<Field>) -> Field {
    *fields
        .iter()
        .min_by(|a, b| b.weight().total_cmp(&a.weight()).then(a.cmp(b)))
        .expect("postings are never empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelKind, NodeDetails};

    fn sample() -> (ModelDocument, String, String) {
        let mut m = ModelDocument::new(ModelKind::ReferenceModel, "RM").unwrap();
        let a = m
            .add_node_with(
                NodeKind::InfluencingFactor,
                "Time pressure",
                NodeDetails {
                    notes: Some("protocol timing".into()),
                    tags: vec!["workload".into()],
                },
            )
            .unwrap();
        let b = m.add_node(NodeKind::KeyFactor, "Sketch quality").unwrap();
        let l = m.add_link(&a, &b, Polarity::Negative).unwrap();
        let e = m
            .attach_evidence(&l, EvidenceKind::Reference, "protocol study", Some("doi:10/x"))
            .unwrap();
        m.attach_evidence(&l, EvidenceKind::Assumption, "designers are experienced", None)
            .unwrap();
        (m, a, e)
    }

    #[test]
    fn tokenizer_splits_and_folds() {
        let toks: Vec<String> = tokenize("Protocol-study, ÄRGER 42x").into_iter().map(|t| t.text).collect();
        assert_eq!(toks, vec!["protocol", "study", "ärger", "42x"]);
        let t = &tokenize("  Hello")[0];
        assert_eq!((t.start, t.end), (2, 7));
    }

    #[test]
    fn empty_model_empty_index() {
        let m = ModelDocument::new(ModelKind::ReferenceModel, "RM").unwrap();
        assert!(build_index(&m).is_empty());
    }

    #[test]
    fn evidence_tokens_point_at_the_item() {
        let (m, _, e) = sample();
        let index = build_index(&m);
        for tok in ["protocol", "study"] {
            assert!(index.items_for(tok).any(|t| *t == Target::Evidence(e.clone())));
        }
    }

    #[test]
    fn prefix_matching_and_ranking() {
        let (m, a, e) = sample();
        let index = build_index(&m);
        let hits = query(&index, &m, &SearchQuery::text("proto")).unwrap();
        let targets: Vec<&Target> = hits.iter().map(|h| &h.target).collect();
        // evidence text (2.0) outranks node notes (1.0)
        assert_eq!(targets, vec![&Target::Evidence(e.clone()), &Target::Node(a.clone())]);
        assert_eq!(hits[0].matched_field, Field::EvidenceText);
        assert_eq!(hits[0].owner_path.len(), 3);
        assert_eq!(hits[0].snippet.spans, vec![(0, 8)]);
        assert_eq!(hits[1].matched_field, Field::Notes);
    }

    #[test]
    fn every_token_must_match() {
        let (m, _, e) = sample();
        let index = build_index(&m);
        let hits = query(&index, &m, &SearchQuery::text("protocol stu")).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].target, Target::Evidence(e));
        assert_eq!(hits[0].score, 4.0);
        assert!(query(&index, &m, &SearchQuery::text("protocol zebra")).unwrap().is_empty());
    }

    #[test]
    fn filter_only_query() {
        let (m, ..) = sample();
        let index = build_index(&m);
        let q = SearchQuery {
            evidence_filter: Some(EvidenceKind::Assumption),
            ..SearchQuery::default()
        };
        let hits = query(&index, &m, &q).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].snippet.text, "designers are experienced");
    }

    #[test]
    fn label_and_tag_weights() {
        let (m, a, _) = sample();
        let index = build_index(&m);
        let hits = query(&index, &m, &SearchQuery::text("time work")).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].target, Target::Node(a));
        assert_eq!(hits[0].score, 3.0 + 1.5);
        assert_eq!(hits[0].matched_field, Field::Label);
    }

    #[test]
    fn stale_index_is_refused() {
        let (mut m, a, _) = sample();
        let index = build_index(&m);
        m.update_node(&a, Default::default()).unwrap();
        assert!(matches!(
            query(&index, &m, &SearchQuery::default()),
            Err(Error::StaleIndex { .. })
        ));
    }

    #[test]
    fn limit_truncates() {
        let (m, ..) = sample();
        let index = build_index(&m);
        let q = SearchQuery {
            limit: 2,
            ..SearchQuery::default()
        };
        assert_eq!(query(&index, &m, &q).unwrap().len(), 2);
        let zero = SearchQuery { limit: 0, ..SearchQuery::default() };
        assert!(query(&index, &m, &zero).is_err());
    }
}
