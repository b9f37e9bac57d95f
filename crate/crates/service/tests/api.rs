use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use serde_json::{json, Value};
use tactmap_core::pipeline::zip::read_zip;
use tactmap_core::{run_job, ArchiveManifest, JobRequest, Selection, SheetId};
use tactmap_service::{router, App, Config};
use tower::ServiceExt;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn config(spool: &std::path::Path) -> Config {
    let mut c = Config::new(fixtures().join("block.osm"), spool);
    c.gazetteer = Some(fixtures().join("gazetteer.tsv"));
    c.workers = 2;
    c
}

struct Resp {
    status: StatusCode,
    content_type: Option<String>,
    body: Vec<u8>,
}

impl Resp {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.body)))
    }
}

async fn call(app: &Arc<App>, req: Request<Body>) -> Resp {
    let res = router(app.clone()).oneshot(req).await.unwrap();
    let status = res.status();
    let content_type = res
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned());
    let body = to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec();
    Resp {
        status,
        content_type,
        body,
    }
}

async fn get(app: &Arc<App>, uri: &str) -> Resp {
    call(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn post_job(app: &Arc<App>, body: &str) -> Resp {
    call(
        app,
        Request::post("/api/jobs")
            .header("content-type", "application/json")
            .body(Body::from(body.to_owned()))
            .unwrap(),
    )
    .await
}

async fn wait_done(app: &Arc<App>, id: &str) -> Value {
    for _ in 0..600 {
        let rec = get(app, &format!("/api/jobs/{id}")).await.json();
        match rec["state"].as_str().unwrap() {
            "done" | "failed" => return rec,
            _ => tokio::time::sleep(Duration::from_millis(50)).await,
        }
    }
    panic!("job {id} did not finish");
}

fn png_size(png: &[u8]) -> (u32, u32) {
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    assert_eq!(&png[12..16], b"IHDR");
    let w = u32::from_be_bytes(png[16..20].try_into().unwrap());
    let h = u32::from_be_bytes(png[20..24].try_into().unwrap());
    (w, h)
}

#[tokio::test]
async fn geocode() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();

    let r = get(&app, "/api/geocode?q=nowhere").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.json(), json!([]));

    let r = get(&app, "/api/geocode?q=Dlouh%C3%A1").await;
    assert_eq!(r.status, StatusCode::OK);
    let hits = r.json();
    assert_eq!(hits[0]["name"], "Dlouhá");
    assert_eq!(hits[0]["kind"], "street");
    assert_eq!(hits[1]["name"], "Dlouhá 12");
    assert_eq!(hits.as_array().unwrap().len(), 2);

    let r = get(&app, "/api/geocode?q=MOST").await;
    assert_eq!(r.json()[0]["name"], "Dlouhý most");

    assert_eq!(get(&app, "/api/geocode?q=").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/geocode").await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sheet_lookup() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();

    let r = get(&app, "/api/sheet?lat=49.75&lon=15.5").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["designation"], "C0R0");
    assert_eq!(v["neighbors"], json!(["C-1R0", "C1R0", "C0R-1", "C0R1"]));
    assert_eq!(v["bounds"], json!({"min_x": 0.0, "min_y": 0.0, "max_x": 300.0, "max_y": 425.0}));

    let v = get(&app, "/api/sheet?lat=49.7540&lon=15.5050").await.json();
    assert_eq!(v["designation"], "C1R1");

    for q in ["lat=99&lon=15", "lat=abc&lon=15", "lon=15", "lat=49&lon=NaN"] {
        let r = get(&app, &format!("/api/sheet?{q}")).await;
        assert_eq!(r.status, StatusCode::BAD_REQUEST, "{q}");
    }
}

#[tokio::test]
async fn job_validation() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();

    let r = post_job(&app, r#"{"sheets":["C0R0","C2R0"]}"#).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"], "NonAdjacentSelection");

    let r = post_job(&app, r#"{"sheets":[]}"#).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(r.json()["error"], "EmptySelection");

    for body in [
        "not json",
        r#"{"sheets":["X0"]}"#,
        r#"{"sheets":"C0R0"}"#,
        r#"{"sheets":["C0R0"],"dpi":50}"#,
        r#"{"sheets":["C0R0"],"colour":true}"#,
    ] {
        assert_eq!(post_job(&app, body).await.status, StatusCode::BAD_REQUEST, "{body}");
    }

    let many: Vec<String> = (0..26).map(|c| format!("C{c}R0")).collect();
    let r = post_job(&app, &json!({ "sheets": many }).to_string()).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["error"], "TooManySheets");

    // Nothing above created a job.
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[tokio::test]
async fn unknown_and_unfinished_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();
    let nil = uuid::Uuid::nil();
    assert_eq!(get(&app, &format!("/api/jobs/{nil}")).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/jobs/garbage").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, &format!("/api/jobs/{nil}/archive")).await.status, StatusCode::NOT_FOUND);

    // A record no worker has picked up yet.
    let rec = app
        .jobs
        .create(JobRequest::new("x.osm", Selection::Sheets(vec![SheetId::new(0, 0)])));
    let r = get(&app, &format!("/api/jobs/{}", rec.job_id)).await;
    assert_eq!(r.json()["state"], "pending");
    let r = get(&app, &format!("/api/jobs/{}/archive", rec.job_id)).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn single_sheet_job() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();
    let r = post_job(&app, r#"{"sheets":["C0R0"],"dpi":100}"#).await;
    assert_eq!(r.status, StatusCode::ACCEPTED);
    let id = r.json()["job_id"].as_str().unwrap().to_owned();

    let rec = wait_done(&app, &id).await;
    assert_eq!(rec["state"], "done", "{rec}");
    let manifest: ArchiveManifest = serde_json::from_value(rec["manifest"].clone()).unwrap();
    assert_eq!(manifest.names(), ["sheet_C0R0.png", "abbreviations.txt"]);

    let r = get(&app, &format!("/api/jobs/{id}/archive")).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type.as_deref(), Some("application/zip"));
    let entries = read_zip(&r.body).unwrap();
    assert_eq!(ArchiveManifest::from_files(&entries), manifest);
}

#[tokio::test]
async fn block_job_matches_direct_run_and_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();
    let r = post_job(&app, r#"{"sheets":["C1R1","C0R0","C1R0","C0R1"],"legend":true}"#).await;
    assert_eq!(r.status, StatusCode::ACCEPTED);
    let id = r.json()["job_id"].as_str().unwrap().to_owned();
    assert_eq!(wait_done(&app, &id).await["state"], "done");
    let archive = get(&app, &format!("/api/jobs/{id}/archive")).await.body;

    let mut req = JobRequest::new(
        fixtures().join("block.osm"),
        Selection::Sheets(vec![SheetId::new(0, 0), SheetId::new(0, 1), SheetId::new(1, 0), SheetId::new(1, 1)]),
    );
    req.include_legend = true;
    assert_eq!(run_job(&req).unwrap().archive, archive);

    drop(app);
    let app = App::new(config(dir.path())).unwrap();
    let r = get(&app, &format!("/api/jobs/{id}/archive")).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, archive);
}

#[tokio::test]
async fn expired_jobs_are_gone() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(dir.path());
    c.expiry_secs = 0;
    let app = App::new(c).unwrap();
    let r = post_job(&app, r#"{"sheets":["C0R0"]}"#).await;
    let id = r.json()["job_id"].as_str().unwrap().to_owned();
    assert_eq!(get(&app, &format!("/api/jobs/{id}")).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn previews() {
    let dir = tempfile::tempdir().unwrap();
    let app = App::new(config(dir.path())).unwrap();

    let r = get(&app, "/api/preview/C50R50").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type.as_deref(), Some("image/png"));
    assert_eq!(png_size(&r.body), (620, 877));

    let r = get(&app, "/api/preview/C0R0?scale=8").await;
    assert_eq!(png_size(&r.body), (310, 438));
    // Served from the cache the second time, identical bytes.
    assert_eq!(get(&app, "/api/preview/C0R0?scale=8").await.body, r.body);

    assert_eq!(get(&app, "/api/preview/R0C0").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/preview/C0R0?scale=0").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/preview/C0R0?scale=x").await.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn static_files() {
    let dir = tempfile::tempdir().unwrap();
    let web = tempfile::tempdir().unwrap();
    std::fs::write(web.path().join("index.html"), "<h1>map</h1>").unwrap();
    std::fs::write(web.path().join("app.js"), "1").unwrap();
    let mut c = config(dir.path());
    c.static_dir = Some(web.path().to_owned());
    let app = App::new(c).unwrap();

    let r = get(&app, "/").await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.body, b"<h1>map</h1>");
    assert!(r.content_type.unwrap().starts_with("text/html"));
    assert_eq!(get(&app, "/app.js").await.status, StatusCode::OK);
    assert_eq!(get(&app, "/missing.css").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/../Cargo.toml").await.status, StatusCode::NOT_FOUND);
    // API routes still win.
    assert_eq!(get(&app, "/api/geocode?q=x").await.status, StatusCode::OK);
}

#[test]
fn startup_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(App::new(Config::new(dir.path().join("none.osm"), dir.path())).is_err());
    let mut c = config(dir.path());
    c.gazetteer = Some(fixtures().join("block.osm"));
    assert!(App::new(c).is_err());
}
