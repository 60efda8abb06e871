//! Finds evidence and factors by word prefixes, with filters.
use dreams::search::{build_index, query, SearchHit, SearchQuery};
use dreams::{EvidenceKind, ModelDocument, ModelKind, NodeKind, Polarity};

pub fn run() -> Result<Vec<SearchHit>, dreams::Error> {
    let mut m = ModelDocument::new(ModelKind::ReferenceModel, "Review meetings")?;
    let a = m.add_node(NodeKind::InfluencingFactor, "Review frequency")?;
    let b = m.add_node(NodeKind::SuccessFactor, "Defects found late")?;
    let l = m.add_link(&a, &b, Polarity::Negative)?;
    m.attach_evidence(&l, EvidenceKind::Reference, "Review protocol analysis, automotive case", Some("ICED 2019"))?;
    m.attach_evidence(&l, EvidenceKind::Assumption, "Reviews catch interface defects early", None)?;

    let index = build_index(&m);
    let hits = query(&index, &m, &SearchQuery::text("review"))?;
    let only_assumptions = SearchQuery {
        evidence_filter: Some(EvidenceKind::Assumption),
        ..SearchQuery::text("defect")
    };
    let filtered = query(&index, &m, &only_assumptions)?;
    assert_eq!(filtered.len(), 1);
    Ok(hits)
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    for hit in run()? {
        println!("{:.1}  {:<13} {}", hit.score, hit.matched_field.as_str(), hit.snippet.text);
    }
    Ok(())
}
