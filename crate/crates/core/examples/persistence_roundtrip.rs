//! Saves a model as a canonical document file and loads it back.
use std::path::Path;

use dreams::store::{deserialize, serialize, write_atomic, FILE_EXTENSION};
use dreams::{EvidenceKind, ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run(dir: &Path) -> Result<String, dreams::Error> {
    let mut m = ModelDocument::new(ModelKind::ReferenceModel, "Übergabe zwischen Teams")?;
    let a = m.add_node(NodeKind::InfluencingFactor, "Schnittstellen-Dokumentation")?;
    let b = m.add_node(NodeKind::SuccessFactor, "Nacharbeit ↓")?;
    let l = m.add_link(&a, &b, Polarity::Negative)?;
    m.attach_evidence(&l, EvidenceKind::Experience, "Projekt „Nordlicht“, 2023", None)?;

    let text = serialize(&m)?;
    let path = dir.join(format!("{}{FILE_EXTENSION}", m.id));
    write_atomic(&path, text.as_bytes())?;

    let back = deserialize(&std::fs::read_to_string(&path)?)?;
    assert_eq!(back, m);
    assert_eq!(serialize(&back)?, text);
    Ok(text)
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    print!("{}", run(&std::env::temp_dir())?);
    Ok(())
}
