use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::model::{CausalLink, FactorNode, ModelDocument, ModelKind, SCHEMA_VERSION};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentFile {
    schema_version: String,
    model: Header,
    nodes: Vec<FactorNode>,
    links: Vec<CausalLink>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    kind: ModelKind,
    id: String,
    title: String,
    revision: u64,
}

/// Canonical JSON value of a document, without checking invariants.
pub fn to_value(model: &ModelDocument) -> Value {
    let file = DocumentFile {
        schema_version: SCHEMA_VERSION.to_owned(),
        model: Header {
            kind: model.kind,
            id: model.id.clone(),
            title: model.title.clone(),
            revision: model.revision,
        },
        nodes: model.nodes.clone(),
        links: model.links.clone(),
    };
    sort_keys(serde_json::to_value(file).expect("document types serialize infallibly"))
}

/// Writes the canonical file text. Refuses documents that fail validation.
pub fn serialize(model: &ModelDocument) -> Result<String> {
    let violations = model.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidDocument(violations));
    }
    Ok(render(&to_value(model)))
}

/// Parses a document file and re-checks every model invariant.
pub fn deserialize(text: &str) -> Result<ModelDocument> {
    let model = parse_unchecked(text)?;
    let violations = model.validate();
    if violations.is_empty() {
        Ok(model)
    } else {
        Err(Error::InvalidDocument(violations))
    }
}

/// Parses a document file checking syntax, schema version and shape only.
/// Use [`ModelDocument::validate`] on the result to list broken invariants.
pub fn parse_unchecked(text: &str) -> Result<ModelDocument> {
    let value: Value = serde_json::from_str(text).map_err(parse_error)?;
    match value.get("schema_version") {
        Some(Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(Value::String(v)) => return Err(Error::UnsupportedVersion { found: Some(v.clone()) }),
        _ => return Err(Error::UnsupportedVersion { found: None }),
    }
    // second pass over the text so shape errors carry a line and column
    let file: DocumentFile = serde_json::from_str(text).map_err(parse_error)?;
    Ok(ModelDocument {
        id: file.model.id,
        kind: file.model.kind,
        title: file.model.title,
        nodes: file.nodes,
        links: file.links,
        revision: file.model.revision,
    })
}

/// Re-renders any JSON text in canonical form (sorted keys, pretty-printed,
/// trailing newline).
pub fn canonical(text: &str) -> Result<String> {
    let value: Value = serde_json::from_str(text).map_err(parse_error)?;
    Ok(render(&sort_keys(value)))
}

fn render(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize infallibly");
    text.push('\n');
    text
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

// Rebuilds every object with sorted keys, whatever map type serde_json uses.
fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut sorted = Map::new();
            for (k, v) in entries {
                sorted.insert(k, sort_keys(v));
            }
            Value::Object(sorted)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}
