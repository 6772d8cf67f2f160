//! Starts the HTTP service in-process, opens a session over a generated
//! collection, steers the weights and drills into the full layout.
use std::fs;

use dgrid::datasets::random_collection;
use dgrid::io;
use dgrid_cli::service::{self, AppState};
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let collection = random_collection(5000, 3, 4, 1);
    let mut sets = Vec::new();
    for b in &collection.bundles {
        io::write_dataset(dir.path().join(format!("{}.csv", b.name)), &b.dataset, None)?;
        sets.push(json!({"name": b.name, "csv_path": format!("{}.csv", b.name)}));
    }
    let manifest = json!({"v": 1, "feature_sets": sets, "per_set": 100});
    fs::write(dir.path().join("manifest.json"), manifest.to_string())?;

    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = tokio::spawn(service::serve(listener, AppState::new(Some(dir.path().into())), async {
        let _ = stopped.await;
    }));

    let client = reqwest::Client::new();
    let info: Value = client
        .post(format!("{base}/session"))
        .json(&json!({"manifest_path": "manifest.json"}))
        .send()
        .await?
        .json()
        .await?;
    let id = info["session"].as_str().unwrap_or_default().to_string();
    println!("session {id}: {} of {} instances sampled", info["sample_size"], info["n"]);

    for alphas in [[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.2, 0.3, 0.5]] {
        let grid: Value = client
            .put(format!("{base}/session/{id}/weights"))
            .json(&json!({"alphas": alphas}))
            .send()
            .await?
            .json()
            .await?;
        println!(
            "weights {alphas:?}: revision {} laid out in {:.1} ms",
            grid["revision"], grid["server_ms"].as_f64().unwrap_or_default()
        );
    }

    let full: Value = client
        .post(format!("{base}/session/{id}/full-grid"))
        .json(&json!({"delta": 1.0}))
        .send()
        .await?
        .json()
        .await?;
    println!("full grid {}x{} in {:.1} ms", full["rows"], full["cols"], full["server_ms"].as_f64().unwrap_or_default());
    let coarse: Value = client.get(format!("{base}/session/{id}/compressed?R=8&S=8")).send().await?.json().await?;
    println!("compressed to {}x{} blocks", coarse["rows"], coarse["cols"]);
    let members: Value = client.get(format!("{base}/session/{id}/cell/0/0/members?R=8&S=8")).send().await?.json().await?;
    println!("block (0, 0) holds {} instances", members["members"].as_array().map_or(0, Vec::len));

    stop.send(()).ok();
    server.await??;
    Ok(())
}
