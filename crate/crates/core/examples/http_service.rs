//! Runs the HTTP API on an ephemeral port and drives it with a client:
//! create a model, add factors and a link, attach an assumption, search.
use std::path::Path;
use std::sync::Arc;

use dreams::layout::LayoutConfig;
use dreams::service::{router, ChangeResponse, SearchResponse, Store};
use serde_json::{json, Value};

pub async fn run(dir: &Path) -> Result<SearchResponse, Box<dyn std::error::Error>> {
    let store = Arc::new(Store::open(dir, LayoutConfig::default())?);
    let app = router(store, None)?;
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(async move { axum::serve(listener, app).await });

    let client = reqwest::Client::new();
    let doc: Value = client
        .post(format!("{base}/models"))
        .json(&json!({"kind": "reference_model", "title": "Handover"}))
        .send()
        .await?
        .error_for_status()?
        .json()
        .await?;
    let id = doc["model"]["id"].as_str().unwrap().to_owned();

    let mut revision = 0;
    let mut post = async |path: &str, body: Value| -> Result<String, Box<dyn std::error::Error>> {
        let resp: ChangeResponse = client
            .post(format!("{base}/models/{id}{path}"))
            .header("If-Match", revision.to_string())
            .json(&body)
            .send()
            .await?
            .error_for_status()?
            .json()
            .await?;
        revision += 1;
        Ok(resp.id.unwrap_or_default())
    };
    let a = post("/nodes", json!({"kind": "influencing_factor", "label": "Handover notes"})).await?;
    let b = post("/nodes", json!({"kind": "success_factor", "label": "Onboarding time"})).await?;
    let l = post("/links", json!({"source": a, "target": b, "polarity": "-"})).await?;
    post(&format!("/links/{l}/evidence"), json!({"kind": "assumption", "text": "Written notes replace shadowing"})).await?;

    let found: SearchResponse = client
        .get(format!("{base}/models/{id}/search"))
        .query(&[("q", "shadow")])
        .send()
        .await?
        .error_for_status()?
        .json()
        .await?;
    Ok(found)
}

#[allow(dead_code)]
#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let found = run(dir.path()).await?;
    for hit in found.hits {
        println!("{}  {}  {}", hit.target.id(), hit.matched_field.as_str(), hit.snippet.text);
    }
    Ok(())
}
