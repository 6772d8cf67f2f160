use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use dgrid::datasets::{random_collection, sample_standin, Collection};
use dgrid::projection::{build_sample, classical_scaling_euclidean};
use dgrid::{dgrid, grid_dims, io, normalize_columns, Dataset};
use dgrid_cli::service::{self, AppState, CellJson};
use serde_json::{json, Value};
use tokio::sync::oneshot;

struct Server {
    base: String,
    client: reqwest::Client,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<anyhow::Result<()>>,
}

impl Server {
    async fn start(data_dir: &Path) -> Server {
        let state = AppState::new(Some(data_dir.to_path_buf()));
        state.restore().await.unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(service::serve(listener, state, async {
            let _ = rx.await;
        }));
        Server {
            base,
            client: reqwest::Client::new(),
            stop: Some(tx),
            task,
        }
    }

    async fn stop(mut self) {
        self.stop.take().unwrap().send(()).unwrap();
        self.task.await.unwrap().unwrap();
    }

    async fn get(&self, path: &str) -> (u16, Value) {
        let r = self.client.get(format!("{}{path}", self.base)).send().await.unwrap();
        (r.status().as_u16(), r.json().await.unwrap_or(Value::Null))
    }

    async fn send(&self, method: reqwest::Method, path: &str, body: Value) -> (u16, Value) {
        let r = self
            .client
            .request(method, format!("{}{path}", self.base))
            .json(&body)
            .send()
            .await
            .unwrap();
        (r.status().as_u16(), r.json().await.unwrap_or(Value::Null))
    }

    async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(reqwest::Method::POST, path, body).await
    }

    async fn put(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(reqwest::Method::PUT, path, body).await
    }
}

/// Writes each bundle as CSV plus a labels file and a manifest.
fn write_collection(dir: &Path, c: &Collection, extra: Value) {
    let mut sets = Vec::new();
    for b in &c.bundles {
        io::write_dataset(dir.join(format!("{}.csv", b.name)), &b.dataset, None).unwrap();
        sets.push(json!({"name": b.name, "csv_path": format!("{}.csv", b.name)}));
    }
    let mut labels = String::from("id,label\n");
    for id in c.bundles[0].dataset.ids() {
        if let Some(l) = c.labels.get(id) {
            labels += &format!("{id},{l}\n");
        }
    }
    fs::write(dir.join("class_labels.csv"), labels).unwrap();
    let mut m = json!({"v": 1, "feature_sets": sets, "labels_path": "class_labels.csv"});
    for (k, v) in extra.as_object().unwrap() {
        m[k] = v.clone();
    }
    fs::write(dir.join("manifest.json"), serde_json::to_string(&m).unwrap()).unwrap();
}

fn cells(v: &Value) -> Vec<CellJson> {
    serde_json::from_value(v["cells"].clone()).unwrap()
}

async fn standin_session(dir: &Path) -> (Server, String) {
    write_collection(dir, &sample_standin(), json!({"per_set": 200, "floor": 5, "seed": 42}));
    let server = Server::start(dir).await;
    let (status, body) = server.post("/session", json!({"v": 1, "manifest_path": "manifest.json"})).await;
    assert_eq!(status, 201, "{body}");
    let id = body["session"].as_str().unwrap().to_string();
    (server, id)
}

#[tokio::test(flavor = "multi_thread")]
async fn health_and_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("ui")).unwrap();
    fs::write(dir.path().join("ui/index.html"), "<h1>explorer</h1>").unwrap();
    let server = Server::start(dir.path()).await;
    assert_eq!(server.get("/health").await, (200, json!({"v": 1, "status": "ok"})));
    let page = reqwest::get(format!("{}/ui/index.html", server.base)).await.unwrap();
    assert_eq!(page.status(), 200);
    assert_eq!(page.text().await.unwrap(), "<h1>explorer</h1>");
    assert_eq!(server.get("/session/nope").await.0, 404);
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn one_hot_weights_reproduce_single_feature_grids() {
    let dir = tempfile::tempdir().unwrap();
    let (server, id) = standin_session(dir.path()).await;
    let (_, info) = server.get(&format!("/session/{id}")).await;
    assert_eq!(info["sample_size"], 800);
    assert_eq!(info["revision"], 0);
    let names: Vec<String> = serde_json::from_value(info["feature_sets"].clone()).unwrap();
    assert_eq!(names.len(), 5);

    // independent recomputation of the first feature set's sample grid
    let c = sample_standin();
    let bundles: Vec<_> = c
        .bundles
        .iter()
        .map(|b| dgrid::projection::FeatureSetBundle {
            name: b.name.clone(),
            dataset: normalize_columns(&io::read_dataset(dir.path().join(format!("{}.csv", b.name))).unwrap()).unwrap(),
        })
        .collect();
    let sample = build_sample(&bundles, 200, Some(&c.labels), 5, 42).unwrap();
    let first: Dataset = bundles[0].dataset.subset(&sample).unwrap();
    let expected = dgrid(
        &classical_scaling_euclidean(&first).unwrap().standardized(),
        grid_dims(800, 1.0).unwrap(),
    )
    .unwrap();
    let expected: HashMap<String, (usize, usize)> = expected.iter().map(|(id, c)| (id.to_string(), (c.row, c.col))).collect();

    for (i, name) in names.iter().enumerate() {
        let mut alphas = vec![0.0; names.len()];
        alphas[i] = 1.0;
        let (status, grid) = server.put(&format!("/session/{id}/weights"), json!({"v": 1, "alphas": alphas})).await;
        assert_eq!(status, 200, "{grid}");
        assert_eq!(grid["revision"], i as u64 + 1);
        let (_, single) = server.get(&format!("/session/{id}/features/{name}/grid")).await;
        assert_eq!(cells(&grid), cells(&single), "feature set {name}");
        if i == 0 {
            let got: HashMap<String, (usize, usize)> = cells(&grid).into_iter().map(|c| (c.id, (c.row, c.col))).collect();
            assert_eq!(got, expected);
        }
    }
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn weight_updates_are_fast_and_revisioned() {
    let dir = tempfile::tempdir().unwrap();
    let (server, id) = standin_session(dir.path()).await;
    let (_, before) = server.get(&format!("/session/{id}")).await;
    let w = json!({"alphas": [0.1, 0.2, 0.3, 0.25, 0.15]});
    let t = Instant::now();
    let (status, a) = server.put(&format!("/session/{id}/weights"), w.clone()).await;
    let end_to_end = t.elapsed().as_secs_f64();
    assert_eq!(status, 200);
    assert!(a["server_ms"].as_f64().unwrap() < 250.0, "server side {} ms", a["server_ms"]);
    assert!(end_to_end < 1.0, "end to end {end_to_end} s");
    let (_, b) = server.put(&format!("/session/{id}/weights"), w).await;
    assert_eq!(cells(&a), cells(&b));
    assert_eq!(b["revision"], 2);
    assert_eq!(a["v"], 1);
    assert!(a["rows"].as_u64().unwrap() * a["cols"].as_u64().unwrap() >= 800);

    // reads of one revision are byte-identical
    let r1 = reqwest::get(format!("{}/session/{id}/grid", server.base)).await.unwrap().bytes().await.unwrap();
    let r2 = reqwest::get(format!("{}/session/{id}/grid", server.base)).await.unwrap().bytes().await.unwrap();
    assert_eq!(r1, r2);

    for bad in [json!({"alphas": [0.5, 0.2, 0.1, 0.1, 0.0]}), json!({"alphas": [1.5, -0.5, 0.0, 0.0, 0.0]}), json!({"alphas": [0.5, 0.5]}), json!({"v": 2, "alphas": [1, 0, 0, 0, 0]})] {
        let (status, body) = server.put(&format!("/session/{id}/weights"), bad.clone()).await;
        assert_eq!(status, 400, "{bad} -> {body}");
        assert!(body["error"].is_string());
    }
    let (_, after) = server.get(&format!("/session/{id}")).await;
    assert_eq!(before["projection_checksum"], after["projection_checksum"]);
    assert_eq!(after["revision"], 2);
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn session_creation_errors_and_distinct_ids() {
    let dir = tempfile::tempdir().unwrap();
    let c = random_collection(60, 3, 3, 1);
    write_collection(dir.path(), &c, json!({"per_set": 5}));
    // a bundle whose ids disagree with the others
    let mut odd = c.bundles[1].dataset.clone();
    odd = Dataset::new(
        odd.ids().iter().map(|i| format!("other-{i}")).collect(),
        odd.rows().map(|r| r.to_vec()).collect(),
    )
    .unwrap();
    io::write_dataset(dir.path().join("odd.csv"), &odd, None).unwrap();
    let server = Server::start(dir.path()).await;

    let (s1, a) = server.post("/session", json!({"manifest_path": "manifest.json"})).await;
    let (s2, b) = server.post("/session", json!({"manifest_path": "manifest.json"})).await;
    assert_eq!((s1, s2), (201, 201));
    assert_ne!(a["session"], b["session"]);

    let bad = json!({"manifest": {"feature_sets": [
        {"name": "a", "csv_path": format!("{}.csv", c.bundles[0].name)},
        {"name": "odd", "csv_path": "odd.csv"}
    ]}});
    assert_eq!(server.post("/session", bad).await.0, 400);
    assert_eq!(server.post("/session", json!({"manifest_path": "missing.json"})).await.0, 400);
    assert_eq!(server.post("/session", json!({})).await.0, 400);
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn full_grid_compression_and_expansion() {
    let dir = tempfile::tempdir().unwrap();
    write_collection(dir.path(), &random_collection(100, 2, 3, 9), json!({"per_set": 6}));
    let server = Server::start(dir.path()).await;
    let (_, s) = server.post("/session", json!({"manifest_path": "manifest.json", "assets": "thumbs/{id}.png"})).await;
    let id = s["session"].as_str().unwrap();

    assert_eq!(server.get(&format!("/session/{id}/compressed?R=2&S=2")).await.0, 409);
    let (_, full) = server.post(&format!("/session/{id}/full-grid"), json!({"v": 1, "delta": 1.0})).await;
    assert_eq!((full["rows"].as_u64(), full["cols"].as_u64()), (Some(10), Some(10)));
    assert_eq!(full["cached"], false);
    let (_, again) = server.post(&format!("/session/{id}/full-grid"), json!({"delta": 1.0})).await;
    assert_eq!(again["cached"], true);

    let (_, unit) = server.get(&format!("/session/{id}/compressed?R=1&S=1")).await;
    assert_eq!((unit["rows"].as_u64(), unit["cols"].as_u64()), (Some(10), Some(10)));
    assert!(unit["cells"].as_array().unwrap().iter().all(|c| c["members"].as_array().unwrap().len() == 1));

    let (_, comp) = server.get(&format!("/session/{id}/compressed?R=3&S=4")).await;
    assert_eq!((comp["rows"].as_u64(), comp["cols"].as_u64()), (Some(4), Some(3)));
    let total: usize = comp["cells"].as_array().unwrap().iter().map(|c| c["members"].as_array().unwrap().len()).sum();
    assert_eq!(total, 100);

    // expansion of (1, 2) reconciles with the member endpoint
    let (status, plan) = server.get(&format!("/session/{id}/expand?I=1&J=2&R=3&S=4")).await;
    assert_eq!(status, 200);
    let mut expected = 0;
    for i in 0..4 {
        for j in 0..3 {
            let (_, m) = server.get(&format!("/session/{id}/cell/{i}/{j}/members?R=3&S=4")).await;
            if i == 1 || j == 2 {
                expected += m["members"].as_array().unwrap().len();
            }
        }
    }
    let expanded: usize = plan["cells"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["kind"] == "expanded")
        .map(|c| c["cells"].as_array().unwrap().iter().filter(|x| !x.is_null()).count())
        .sum();
    assert_eq!(expanded, expected);

    assert_eq!(server.get(&format!("/session/{id}/cell/4/0/members?R=3&S=4")).await.0, 404);
    assert_eq!(server.get(&format!("/session/{id}/expand?I=0&J=3&R=3&S=4")).await.0, 404);

    let (_, grid) = server.get(&format!("/session/{id}/grid")).await;
    let first = &cells(&grid)[0];
    assert_eq!(first.asset.as_deref(), Some(format!("/thumbs/{}.png", first.id).as_str()));

    // a weight change invalidates the full grid
    server.put(&format!("/session/{id}/weights"), json!({"alphas": [1.0, 0.0]})).await;
    assert_eq!(server.get(&format!("/session/{id}/compressed")).await.0, 409);
    let (_, rebuilt) = server.post(&format!("/session/{id}/full-grid"), json!({"delta": 1.0})).await;
    assert_eq!(rebuilt["cached"], false);
    assert_eq!(rebuilt["revision"], 1);
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn photographer_sized_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    write_collection(dir.path(), &random_collection(180_193, 2, 2, 3), json!({"per_set": 8}));
    let server = Server::start(dir.path()).await;
    let (status, s) = server.post("/session", json!({"manifest_path": "manifest.json"})).await;
    assert_eq!(status, 201, "{s}");
    let id = s["session"].as_str().unwrap();
    let (_, full) = server.post(&format!("/session/{id}/full-grid"), json!({"delta": 11.0 / 8.5})).await;
    assert_eq!((full["rows"].as_u64(), full["cols"].as_u64()), (Some(482), Some(374)));
    assert_eq!(full["n"], 180_193);
    let (_, comp) = server.get(&format!("/session/{id}/compressed?R=5&S=5")).await;
    assert_eq!((comp["rows"].as_u64(), comp["cols"].as_u64()), (Some(97), Some(75)));
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    write_collection(dir.path(), &random_collection(80, 2, 3, 4), json!({"per_set": 5}));
    let server = Server::start(dir.path()).await;
    let (_, s) = server.post("/session", json!({"manifest_path": "manifest.json"})).await;
    let id = s["session"].as_str().unwrap().to_string();
    server.put(&format!("/session/{id}/weights"), json!({"alphas": [0.3, 0.7]})).await;
    let (_, before) = server.put(&format!("/session/{id}/weights"), json!({"alphas": [0.6, 0.4]})).await;
    server.post(&format!("/session/{id}/full-grid"), json!({"delta": 2.0})).await;
    server.stop().await;
    assert!(dir.path().join("sessions.json").exists());

    let server = Server::start(dir.path()).await;
    let (status, after) = server.get(&format!("/session/{id}/grid")).await;
    assert_eq!(status, 200);
    assert_eq!(after["revision"], 2);
    assert_eq!(cells(&before), cells(&after));
    let (_, info) = server.get(&format!("/session/{id}")).await;
    assert_eq!(info["full_grid"]["delta"], 2.0);
    server.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn reads_during_updates_see_whole_revisions() {
    let dir = tempfile::tempdir().unwrap();
    let (server, id) = standin_session(dir.path()).await;
    let weights = [
        json!({"alphas": [1.0, 0.0, 0.0, 0.0, 0.0]}),
        json!({"alphas": [0.0, 1.0, 0.0, 0.0, 0.0]}),
        json!({"alphas": [0.0, 0.0, 1.0, 0.0, 0.0]}),
    ];
    let mut by_revision: HashMap<u64, Vec<CellJson>> = HashMap::new();
    let (_, g0) = server.get(&format!("/session/{id}/grid")).await;
    by_revision.insert(0, cells(&g0));
    let writer = {
        let (client, base, id) = (server.client.clone(), server.base.clone(), id.clone());
        let weights = weights.clone();
        tokio::spawn(async move {
            let mut out = Vec::new();
            for w in weights {
                let r: Value = client.put(format!("{base}/session/{id}/weights")).json(&w).send().await.unwrap().json().await.unwrap();
                out.push((r["revision"].as_u64().unwrap(), cells(&r)));
            }
            out
        })
    };
    let mut seen = Vec::new();
    for _ in 0..30 {
        let (_, g) = server.get(&format!("/session/{id}/grid")).await;
        seen.push((g["revision"].as_u64().unwrap(), cells(&g)));
    }
    by_revision.extend(writer.await.unwrap());
    for (rev, c) in seen {
        assert_eq!(by_revision[&rev], c, "revision {rev}");
    }
    server.stop().await;
}
