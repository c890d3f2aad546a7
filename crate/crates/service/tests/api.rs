use std::path::PathBuf;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use geneweave_service::{router, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/trio").join(name);
    std::fs::read_to_string(path).unwrap()
}

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let request = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, bytes) = call(app, "GET", uri, Body::empty()).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn get_raw(app: &Router, uri: &str) -> Vec<u8> {
    let (status, bytes) = call(app, "GET", uri, Body::empty()).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&bytes));
    bytes
}

async fn post(app: &Router, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, "POST", uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap())
}

async fn session(app: &Router, seed: u64) -> String {
    let (status, v) = post(app, &format!("/sessions?seed={seed}"), Body::empty()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["seed"], seed);
    v["session_id"].as_str().unwrap().to_string()
}

async fn loaded(app: &Router, seed: u64) -> String {
    let id = session(app, seed).await;
    for (kind, file) in [("cluster", "clusters.tsv"), ("interaction", "interactions.csv"), ("disease", "diseases.csv")] {
        let (status, v) = post(app, &format!("/sessions/{id}/datasets/{kind}"), fixture(file)).await;
        assert_eq!(status, StatusCode::OK, "{v}");
    }
    id
}

fn app() -> Router {
    router(ServiceConfig::default())
}

#[tokio::test]
async fn fresh_session_reports_not_loaded() {
    let app = app();
    let (_, a) = post(&app, "/sessions", Body::empty()).await;
    let (_, b) = post(&app, "/sessions", Body::empty()).await;
    assert_ne!(a["session_id"], b["session_id"]);
    let id = a["session_id"].as_str().unwrap();
    let (status, v) = get(&app, &format!("/sessions/{id}/cluster-view")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error_code"], "NOT_LOADED");
    let (_, v) = get(&app, &format!("/sessions/{id}/diseases")).await;
    assert_eq!(v["error_code"], "NOT_LOADED");
    let (status, v) = get(&app, "/sessions/ffff/cluster-view").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error_code"], "UNKNOWN_SESSION");
}

#[tokio::test]
async fn upload_reports_and_errors() {
    let app = app();
    let id = session(&app, 1).await;
    let table = "geneEntrezId,geneName,GLYCOLYSIS,CITRATE_CYCLE,PENTOSE\n\
                 873, CBR1, 0.2, 0.4, 0.9\n2026, ENO2, 0.6, 0.6, 0.2\n2665, GDI2, 0.1, 0.2, 0.1\n";
    let (status, v) = post(&app, &format!("/sessions/{id}/datasets/cluster"), table).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["rows"], 3);
    assert_eq!(v["kind"], "soft");

    let (status, v) = post(&app, &format!("/sessions/{id}/datasets/interaction"), "SourceGeneId,TargetGeneId,score\n216,216,0.75\n873,2026,0.5\n").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["rows"], 2);
    let warnings = v["warnings"].to_string();
    assert!(warnings.contains("1 self-loop"), "{warnings}");
    assert!(warnings.contains("1 interacting genes"), "{warnings}");

    let (status, v) = post(&app, &format!("/sessions/{id}/datasets/cluster"), "geneEntrezId,name,A\n1,X,1\n").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error_code"], "MISSING_HEADER");
    assert!(v["message"].as_str().unwrap().contains("geneName"));

    let (_, v) = post(&app, &format!("/sessions/{id}/datasets/interaction"), "SourceGeneId,TargetGeneId,score\n1,2,0.5\n3,4,1.4\n").await;
    assert_eq!(v["error_code"], "BAD_NUMBER");
    assert_eq!(v["location"]["line"], 3);
    assert_eq!(v["location"]["column"], 3);

    let (status, v) = post(&app, &format!("/sessions/{id}/datasets/pathway"), "x").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error_code"], "UNKNOWN_DATASET_KIND");

    let (_, v) = post(&app, &format!("/sessions/{id}/datasets/disease"), vec![0xffu8, 0xfe]).await;
    assert_eq!(v["error_code"], "BAD_ENCODING");

    // failed uploads leave the previous data in place
    let (_, v) = get(&app, &format!("/sessions/{id}/cluster-view")).await;
    assert_eq!(v["nodes"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn oversized_upload_rejected() {
    let app = router(ServiceConfig {
        body_limit: 1024,
        ..ServiceConfig::default()
    });
    let id = session(&app, 1).await;
    let body = format!("geneEntrezId,geneName,A\n{}", "1,X,1\n".repeat(400));
    let (status, v) = post(&app, &format!("/sessions/{id}/datasets/cluster"), body).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(v["error_code"], "PAYLOAD_TOO_LARGE");
}

#[tokio::test]
async fn cluster_view_is_cached_and_seeded() {
    let app = app();
    let id = loaded(&app, 42).await;
    let a = get_raw(&app, &format!("/sessions/{id}/cluster-view")).await;
    let b = get_raw(&app, &format!("/sessions/{id}/cluster-view?seed=42")).await;
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(v["layout"]["seed"], 42);
    for key in ["id", "name", "gene_count", "mean_association", "x", "y", "minor_radius", "major_radius", "color"] {
        assert!(v["nodes"][0].get(key).is_some(), "{key}");
    }

    let c: Value = serde_json::from_slice(&get_raw(&app, &format!("/sessions/{id}/cluster-view?seed=43")).await).unwrap();
    assert_eq!(c["edges"], v["edges"]);
    assert_ne!(c["nodes"][0]["x"], v["nodes"][0]["x"]);
    for (p, q) in v["nodes"].as_array().unwrap().iter().zip(c["nodes"].as_array().unwrap()) {
        assert_eq!(p["major_radius"], q["major_radius"]);
        assert_eq!(p["color"], q["color"]);
    }

    let (status, v) = get(&app, &format!("/sessions/{id}/cluster-view?min_overlap=0")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error_code"], "BAD_PARAMETER");
    let (_, v) = get(&app, &format!("/sessions/{id}/cluster-view?min_overlap=two")).await;
    assert_eq!(v["error_code"], "BAD_PARAMETER");
}

#[tokio::test]
async fn gene_view_and_invalidation() {
    let app = app();
    let id = loaded(&app, 9).await;
    let before: Value = serde_json::from_slice(&get_raw(&app, &format!("/sessions/{id}/clusters/0/gene-view")).await).unwrap();
    let by_name = get_raw(&app, &format!("/sessions/{id}/clusters/GLYCOLYSIS/gene-view")).await;
    assert_eq!(serde_json::from_slice::<Value>(&by_name).unwrap(), before);
    assert_eq!(before["cluster_name"], "GLYCOLYSIS");
    assert_eq!(before["nodes"].as_array().unwrap().len(), 6);

    let (status, v) = get(&app, &format!("/sessions/{id}/clusters/NOPE/gene-view")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error_code"], "UNKNOWN_CLUSTER");

    let (_, _) = post(&app, &format!("/sessions/{id}/datasets/interaction"), "SourceGeneId,TargetGeneId,score\n105,106,0.5\n").await;
    let after: Value = serde_json::from_slice(&get_raw(&app, &format!("/sessions/{id}/clusters/0/gene-view")).await).unwrap();
    assert_eq!(after["nodes"].as_array().unwrap().len(), 6);
    assert!(after["edges"].as_array().unwrap().is_empty());
    assert_ne!(after, before);
}

#[tokio::test]
async fn disease_listing_and_overlay() {
    let app = app();
    let id = loaded(&app, 5).await;
    let (_, v) = get(&app, &format!("/sessions/{id}/diseases")).await;
    assert_eq!(
        v,
        serde_json::json!([
            {"disease": "Type 2 diabetes", "record_count": 5},
            {"disease": "Hemolytic anemia", "record_count": 2},
            {"disease": "Vitiligo", "record_count": 1},
        ])
    );

    let (status, v) = get(&app, &format!("/sessions/{id}/overlay?disease=type%202%20diabetes")).await;
    assert_eq!(status, StatusCode::OK);
    let clusters = v["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 3);
    for c in clusters {
        let k = c["k"].as_u64().unwrap();
        let opacity = c["opacity"].as_f64().unwrap();
        assert_eq!(opacity == 1.0, k > 0, "{c}");
    }

    // no disease gene is in the cluster dataset
    let (_, v) = get(&app, &format!("/sessions/{id}/overlay?disease=Vitiligo")).await;
    for c in v["clusters"].as_array().unwrap() {
        assert_eq!(c["ease_p"], 1.0);
        assert_eq!(c["color_class"], "white");
        assert!(c["opacity"].as_f64().unwrap() < 1.0);
    }
    for e in v["edges"].as_array().unwrap() {
        assert!(e["opacity"].as_f64().unwrap() < 1.0);
    }

    let (_, v) = get(&app, &format!("/sessions/{id}/overlay?disease=Hemolytic%20anemia&cluster_id=0")).await;
    let genes = v["genes"].as_array().unwrap();
    let taldo = genes.iter().find(|g| g["gene"] == 111).unwrap();
    assert_eq!(taldo["p"], 0.01);
    let hk1 = genes.iter().find(|g| g["gene"] == 101).unwrap();
    assert!(hk1.get("p").is_none());

    let (status, v) = get(&app, &format!("/sessions/{id}/overlay?disease=Gout")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error_code"], "UNKNOWN_DISEASE");
    let (_, v) = get(&app, &format!("/sessions/{id}/overlay")).await;
    assert_eq!(v["error_code"], "BAD_PARAMETER");
}

#[tokio::test]
async fn highlight_modes() {
    let app = app();
    let id = loaded(&app, 5).await;
    let (status, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=103&mode=levels&param=2")).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let levels: Vec<(u64, u64)> = v["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| (n["gene"].as_u64().unwrap(), n["level"].as_u64().unwrap()))
        .collect();
    assert_eq!(levels, vec![(103, 0), (102, 1), (104, 1), (101, 2)]);

    let (_, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=101&mode=top_n&param=2")).await;
    assert_eq!(v["edges"], serde_json::json!([{"a": 101, "b": 102, "score": 0.9}, {"a": 102, "b": 103, "score": 0.7}]));

    let (_, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=101&mode=threshold&param=0.6")).await;
    assert_eq!(v["nodes"].as_array().unwrap().len(), 4);

    let (status, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=101&mode=threshold&param=2")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error_code"], "BAD_PARAMETER");
    let (status, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=105&mode=levels&param=1")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error_code"], "UNKNOWN_GENE");
    let (_, v) = get(&app, &format!("/sessions/{id}/highlight?cluster_id=0&gene=101&mode=spiral&param=1")).await;
    assert_eq!(v["error_code"], "BAD_PARAMETER");
}

#[tokio::test]
async fn snapshot_round_trip_and_failures() {
    let app = app();
    let id = loaded(&app, 77).await;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let uris = |id: &str| {
        vec![
            format!("/sessions/{id}/cluster-view"),
            format!("/sessions/{id}/cluster-view?seed=3&min_overlap=2"),
            format!("/sessions/{id}/clusters/1/gene-view"),
            format!("/sessions/{id}/diseases"),
            format!("/sessions/{id}/overlay?disease=Type%202%20diabetes"),
            format!("/sessions/{id}/overlay?disease=Type%202%20diabetes&cluster_id=2"),
            format!("/sessions/{id}/highlight?cluster_id=1&gene=105&mode=levels&param=2"),
        ]
    };
    let mut before = Vec::new();
    for uri in uris(&id) {
        before.push(get_raw(&app, &uri).await);
    }
    let (status, v) = post(&app, &format!("/sessions/{id}/snapshot"), serde_json::json!({"path": path}).to_string()).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let (status, v) = post(&app, "/snapshots:load", serde_json::json!({"path": path}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    assert_eq!(v["seed"], 77);
    let restored = v["session_id"].as_str().unwrap().to_string();
    assert_ne!(restored, id);
    for (uri, expected) in uris(&restored).into_iter().zip(before) {
        assert_eq!(get_raw(&app, &uri).await, expected, "{uri}");
    }

    std::fs::write(&path, "{\"format_version\": 1, \"seed\": ").unwrap();
    let (_, v) = post(&app, "/snapshots:load", serde_json::json!({"path": path}).to_string()).await;
    assert_eq!(v["error_code"], "CORRUPT_SNAPSHOT");
    std::fs::write(&path, "{\"format_version\": 99, \"seed\": 1, \"datasets\": {}}").unwrap();
    let (_, v) = post(&app, "/snapshots:load", serde_json::json!({"path": path}).to_string()).await;
    assert_eq!(v["error_code"], "VERSION_MISMATCH");
    let missing = dir.path().join("missing.json");
    let (_, v) = post(&app, "/snapshots:load", serde_json::json!({"path": missing}).to_string()).await;
    assert_eq!(v["error_code"], "IO_ERROR");
    let (_, v) = post(&app, "/snapshots:load", "not json").await;
    assert_eq!(v["error_code"], "BAD_PARAMETER");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_reads_see_whole_generations() {
    let app = app();
    let id = loaded(&app, 11).await;
    let uri = format!("/sessions/{id}/clusters/0/gene-view");
    let old = get_raw(&app, &uri).await;

    let replacement = "SourceGeneId,TargetGeneId,score\n101,103,0.5\n";
    let mut readers = Vec::new();
    for _ in 0..16 {
        let (app, uri) = (app.clone(), uri.clone());
        readers.push(tokio::spawn(async move { get_raw(&app, &uri).await }));
    }
    let (status, _) = post(&app, &format!("/sessions/{id}/datasets/interaction"), replacement).await;
    assert_eq!(status, StatusCode::OK);
    let new = get_raw(&app, &uri).await;
    assert_ne!(old, new);
    for r in readers {
        let got = r.await.unwrap();
        assert!(got == old || got == new);
    }
}

#[tokio::test]
async fn static_files_and_cors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ok</html>").unwrap();
    let app = router(ServiceConfig {
        static_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    });
    let (status, bytes) = call(&app, "GET", "/index.html", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"<html>ok</html>");

    let request = Request::builder()
        .method("POST")
        .uri("/sessions")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert!(response.headers().contains_key("access-control-allow-origin"));
}
