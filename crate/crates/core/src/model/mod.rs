//! Typed causal model documents and their editing operations.
//!
//! A [`ModelDocument`] holds typed factor nodes and signed causal links.
//! Supporting evidence (assumptions, references, experiential input) lives
//! inside the link it supports, so removing a link removes its evidence.
//! Every successful mutation bumps [`ModelDocument::revision`] by exactly one;
//! a failed mutation leaves the document untouched.

mod validate;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids;

pub use validate::{Rule, Violation};

/// Schema tag written into every document file.
pub const SCHEMA_VERSION: &str = "dreams/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ReferenceModel,
    ImpactModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    InfluencingFactor,
    SuccessFactor,
    KeyFactor,
    AssumptionNode,
}

impl NodeKind {
    pub const ALL: [NodeKind; 4] = [
        NodeKind::InfluencingFactor,
        NodeKind::SuccessFactor,
        NodeKind::KeyFactor,
        NodeKind::AssumptionNode,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Polarity {
    /// Glyph used in rendered output. Negative uses U+2212 MINUS SIGN.
    pub fn glyph(self) -> &'static str {
        match self {
            Polarity::Positive => "+",
            Polarity::Negative => "\u{2212}",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceKind {
    Assumption,
    Reference,
    Experience,
}

impl EvidenceKind {
    pub const ALL: [EvidenceKind; 3] = [
        EvidenceKind::Assumption,
        EvidenceKind::Reference,
        EvidenceKind::Experience,
    ];
}

macro_rules! string_enum {
    ($ty:ty { $($variant:path => $name:literal $(| $alias:literal)*),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name $(| $alias)* => Ok($variant),)+
                    other => Err(Error::validation(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"),
                        other
                    ))),
                }
            }
        }
    };
}

string_enum!(ModelKind {
    ModelKind::ReferenceModel => "reference_model",
    ModelKind::ImpactModel => "impact_model",
});

string_enum!(NodeKind {
    NodeKind::InfluencingFactor => "influencing_factor",
    NodeKind::SuccessFactor => "success_factor",
    NodeKind::KeyFactor => "key_factor",
    NodeKind::AssumptionNode => "assumption_node",
});

string_enum!(Polarity {
    Polarity::Positive => "positive" | "+",
    Polarity::Negative => "negative" | "-" | "\u{2212}",
});

string_enum!(EvidenceKind {
    EvidenceKind::Assumption => "assumption",
    EvidenceKind::Reference => "reference",
    EvidenceKind::Experience => "experience",
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceItem {
    pub id: String,
    pub kind: EvidenceKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locator: Option<String>,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalLink {
    pub id: String,
    pub source: String,
    pub target: String,
    pub polarity: Polarity,
    #[serde(default)]
    pub evidence: Vec<EvidenceItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// A Reference Model or Impact Model.
///
/// Fields are public so raw documents (for instance hand-edited files) can be
/// represented and checked with [`ModelDocument::validate`]. The editing
/// methods keep every invariant and bump `revision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDocument {
    pub id: String,
    pub kind: ModelKind,
    pub title: String,
    pub nodes: Vec<FactorNode>,
    pub links: Vec<CausalLink>,
    pub revision: u64,
}

/// Optional fields for [`ModelDocument::add_node_with`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDetails {
    #[serde(default)]
    pub notes: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
}

/// Partial update of a node. `notes: Some(None)` clears the notes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodePatch {
    #[serde(default)]
    pub kind: Option<NodeKind>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default, with = "double_option", skip_serializing_if = "Option::is_none")]
    pub notes: Option<Option<String>>,
    #[serde(default)]
    pub tags: Option<Vec<String>>,
}

/// Partial update of a link. Endpoints are fixed; re-route by removing and
/// re-adding the link.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPatch {
    #[serde(default)]
    pub polarity: Option<Polarity>,
    #[serde(default, with = "double_option", skip_serializing_if = "Option::is_none")]
    pub notes: Option<Option<String>>,
}

// Distinguishes an absent field from an explicit `null`.
mod double_option {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Option<String>>, s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<String>>, D::Error> {
        Option::<String>::deserialize(d).map(Some)
    }
}

fn non_empty(text: &str, what: &str) -> Result<String> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        Err(Error::validation(format!("{what} must not be empty")))
    } else {
        Ok(trimmed.to_owned())
    }
}

impl ModelDocument {
    pub fn new(kind: ModelKind, title: &str) -> Result<Self> {
        Ok(ModelDocument {
            id: ids::fresh("m"),
            kind,
            title: non_empty(title, "title")?,
            nodes: Vec::new(),
            links: Vec::new(),
            revision: 0,
        })
    }

    pub fn schema_version(&self) -> &'static str {
        SCHEMA_VERSION
    }

    pub fn node(&self, id: &str) -> Option<&FactorNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn link(&self, id: &str) -> Option<&CausalLink> {
        self.links.iter().find(|l| l.id == id)
    }

    /// Looks up an evidence item together with the link that owns it.
    pub fn evidence(&self, id: &str) -> Option<(&CausalLink, &EvidenceItem)> {
        self.links
            .iter()
            .find_map(|l| l.evidence.iter().find(|e| e.id == id).map(|e| (l, e)))
    }

    pub fn evidence_count(&self) -> usize {
        self.links.iter().map(|l| l.evidence.len()).sum()
    }

    fn node_mut(&mut self, id: &str) -> Result<&mut FactorNode> {
        self.nodes
            .iter_mut()
            .find(|n| n.id == id)
            .ok_or_else(|| Error::not_found("node", id))
    }

    fn link_mut(&mut self, id: &str) -> Result<&mut CausalLink> {
        self.links
            .iter_mut()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::not_found("link", id))
    }

    fn id_in_use(&self, id: &str) -> bool {
        self.id == id
            || self.nodes.iter().any(|n| n.id == id)
            || self
                .links
                .iter()
                .any(|l| l.id == id || l.evidence.iter().any(|e| e.id == id))
    }

    fn fresh_id(&self, prefix: &str) -> String {
        loop {
            let id = ids::fresh(prefix);
            if !self.id_in_use(&id) {
                return id;
            }
        }
    }

    fn bump(&mut self) {
        self.revision += 1;
    }

    pub fn add_node(&mut self, kind: NodeKind, label: &str) -> Result<String> {
        self.add_node_with(kind, label, NodeDetails::default())
    }

    pub fn add_node_with(&mut self, kind: NodeKind, label: &str, details: NodeDetails) -> Result<String> {
        let label = non_empty(label, "node label")?;
        let id = self.fresh_id("n");
        self.nodes.push(FactorNode {
            id: id.clone(),
            kind,
            label,
            notes: details.notes,
            tags: details.tags,
        });
        self.bump();
        Ok(id)
    }

    pub fn add_link(&mut self, source: &str, target: &str, polarity: Polarity) -> Result<String> {
        for end in [source, target] {
            if self.node(end).is_none() {
                return Err(Error::not_found("node", end));
            }
        }
        if source == target {
            return Err(Error::validation_at("self-loops are not allowed", source));
        }
        if let Some(existing) = self
            .links
            .iter()
            .find(|l| l.source == source && l.target == target)
        {
            return Err(Error::Conflict {
                detail: format!("a link {source} -> {target} already exists"),
                id: Some(existing.id.clone()),
            });
        }
        let id = self.fresh_id("l");
        self.links.push(CausalLink {
            id: id.clone(),
            source: source.to_owned(),
            target: target.to_owned(),
            polarity,
            evidence: Vec::new(),
            notes: None,
        });
        self.bump();
        Ok(id)
    }

    /// Appends an evidence item to a link, stamped with the current time.
    pub fn attach_evidence(
        &mut self,
        link_id: &str,
        kind: EvidenceKind,
        text: &str,
        locator: Option<&str>,
    ) -> Result<String> {
        self.attach_evidence_at(link_id, kind, text, locator, Utc::now())
    }

    /// Like [`attach_evidence`](Self::attach_evidence) with an explicit
    /// timestamp (truncated to whole seconds).
    pub fn attach_evidence_at(
        &mut self,
        link_id: &str,
        kind: EvidenceKind,
        text: &str,
        locator: Option<&str>,
        created_at: DateTime<Utc>,
    ) -> Result<String> {
        if self.link(link_id).is_none() {
            return Err(Error::not_found("link", link_id));
        }
        let text = non_empty(text, "evidence text")?;
        let id = self.fresh_id("e");
        let link = self.link_mut(link_id)?;
        link.evidence.push(EvidenceItem {
            id: id.clone(),
            kind,
            text,
            locator: locator.map(str::to_owned),
            created_at: created_at.trunc_subsecs(0),
        });
        self.bump();
        Ok(id)
    }

    /// Removes a node and every link touching it. Returns the removed link ids.
    pub fn remove_node(&mut self, node_id: &str) -> Result<Vec<String>> {
        let index = self
            .nodes
            .iter()
            .position(|n| n.id == node_id)
            .ok_or_else(|| Error::not_found("node", node_id))?;
        self.nodes.remove(index);
        let mut removed = Vec::new();
        self.links.retain(|l| {
            let incident = l.source == node_id || l.target == node_id;
            if incident {
                removed.push(l.id.clone());
            }
            !incident
        });
        self.bump();
        Ok(removed)
    }

    pub fn update_node(&mut self, node_id: &str, patch: NodePatch) -> Result<()> {
        let label = patch
            .label
            .as_deref()
            .map(|l| non_empty(l, "node label"))
            .transpose()?;
        let node = self.node_mut(node_id)?;
        if let Some(kind) = patch.kind {
            node.kind = kind;
        }
        if let Some(label) = label {
            node.label = label;
        }
        if let Some(notes) = patch.notes {
            node.notes = notes;
        }
        if let Some(tags) = patch.tags {
            node.tags = tags;
        }
        self.bump();
        Ok(())
    }

    pub fn update_link(&mut self, link_id: &str, patch: LinkPatch) -> Result<()> {
        let link = self.link_mut(link_id)?;
        if let Some(polarity) = patch.polarity {
            link.polarity = polarity;
        }
        if let Some(notes) = patch.notes {
            link.notes = notes;
        }
        self.bump();
        Ok(())
    }

    pub fn update_link_polarity(&mut self, link_id: &str, polarity: Polarity) -> Result<()> {
        self.update_link(
            link_id,
            LinkPatch {
                polarity: Some(polarity),
                ..LinkPatch::default()
            },
        )
    }

    pub fn detach_evidence(&mut self, link_id: &str, evidence_id: &str) -> Result<EvidenceItem> {
        let link = self.link_mut(link_id)?;
        let index = link
            .evidence
            .iter()
            .position(|e| e.id == evidence_id)
            .ok_or_else(|| Error::not_found("evidence", evidence_id))?;
        let item = link.evidence.remove(index);
        self.bump();
        Ok(item)
    }

    /// Removes a link; its evidence goes with it.
    pub fn remove_link(&mut self, link_id: &str) -> Result<CausalLink> {
        let index = self
            .links
            .iter()
            .position(|l| l.id == link_id)
            .ok_or_else(|| Error::not_found("link", link_id))?;
        let link = self.links.remove(index);
        self.bump();
        Ok(link)
    }

    /// Checks every document invariant. An empty list means the document is valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate::check(self)
    }
}
