//! HTTP job service: place search, sheet lookup, previews and archive
//! generation over the configured OSM extract.

pub mod geocode;
pub mod jobs;

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tactmap_core::geodata::project;
use tactmap_core::pipeline::DPI_RANGE;
use tactmap_core::render::DEFAULT_DPI;
use tactmap_core::sheetgrid::sheet_for_point;
use tactmap_core::{render_sheet, JobError, JobRequest, LonLat, Pipeline, ProjectionConfig, Selection, SheetId};
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;
use uuid::Uuid;

use crate::geocode::{Gazetteer, Geocoder};
use crate::jobs::{ArchiveError, JobStore};

/// Service settings; every flag can also come from the environment.
#[derive(Debug, Clone, clap::Parser)]
#[command(name = "tactmap-service", version, about = "HTTP service for tactile map sheets")]
pub struct Config {
    /// OSM XML extract all jobs render from.
    #[arg(long, env = "TACTMAP_SOURCE")]
    pub source: PathBuf,
    /// TSV gazetteer: name, lon, lat, kind.
    #[arg(long, env = "TACTMAP_GAZETTEER")]
    pub gazetteer: Option<PathBuf>,
    #[arg(long, env = "TACTMAP_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "TACTMAP_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Concurrent jobs; 0 means one per CPU.
    #[arg(long, env = "TACTMAP_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[arg(long, env = "TACTMAP_SPOOL", default_value_os_t = std::env::temp_dir().join("tactmap-spool"))]
    pub spool: PathBuf,
    /// Directory served at `/`.
    #[arg(long, env = "TACTMAP_STATIC")]
    pub static_dir: Option<PathBuf>,
    #[arg(long, env = "TACTMAP_MAX_SHEETS", default_value_t = 25)]
    pub max_sheets: usize,
    /// Seconds a job is kept after creation.
    #[arg(long, env = "TACTMAP_EXPIRY", default_value_t = 3600)]
    pub expiry_secs: u64,
    #[arg(long, env = "TACTMAP_RULES")]
    pub rules: Option<PathBuf>,
    #[arg(long, env = "TACTMAP_STYLE")]
    pub style: Option<PathBuf>,
    #[arg(long, env = "TACTMAP_ALPHABET")]
    pub alphabet: Option<PathBuf>,
    #[arg(long, env = "TACTMAP_DENSITY_THRESHOLD")]
    pub density_threshold: Option<f64>,
    #[arg(long, env = "TACTMAP_ORIGIN_LAT", default_value_t = ProjectionConfig::default().origin.lat, allow_negative_numbers = true)]
    pub origin_lat: f64,
    #[arg(long, env = "TACTMAP_ORIGIN_LON", default_value_t = ProjectionConfig::default().origin.lon, allow_negative_numbers = true)]
    pub origin_lon: f64,
}

impl Config {
    pub fn new(source: impl Into<PathBuf>, spool: impl Into<PathBuf>) -> Self {
        Self {
            source: source.into(),
            gazetteer: None,
            host: "127.0.0.1".into(),
            port: 8080,
            workers: 0,
            spool: spool.into(),
            static_dir: None,
            max_sheets: 25,
            expiry_secs: 3600,
            rules: None,
            style: None,
            alphabet: None,
            density_threshold: None,
            origin_lat: ProjectionConfig::default().origin.lat,
            origin_lon: ProjectionConfig::default().origin.lon,
        }
    }

    pub fn projection(&self) -> ProjectionConfig {
        ProjectionConfig::with_origin(self.origin_lon, self.origin_lat)
    }

    /// The request a job over `sheets` corresponds to; the CLI produces the
    /// same archive for it.
    pub fn job_request(&self, sheets: Vec<SheetId>, dpi: u32, include_legend: bool) -> JobRequest {
        JobRequest {
            dpi,
            include_legend,
            rules: self.rules.clone(),
            style: self.style.clone(),
            alphabet: self.alphabet.clone(),
            density_threshold: self.density_threshold,
            projection: self.projection(),
            ..JobRequest::new(self.source.clone(), Selection::Sheets(sheets))
        }
    }
}

const PREVIEW_CACHE: usize = 256;
const MAX_PREVIEW_SCALE: usize = 16;

pub struct App {
    pub config: Config,
    pub pipeline: Arc<Pipeline>,
    pub geocoder: Arc<dyn Geocoder>,
    pub jobs: Arc<JobStore>,
    workers: Arc<Semaphore>,
    previews: Mutex<HashMap<(SheetId, usize), Bytes>>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Job(#[from] JobError),
    #[error("gazetteer: {0}")]
    Gazetteer(Box<dyn std::error::Error + Send + Sync>),
    #[error("spool {path}: {source}")]
    Spool { path: PathBuf, source: std::io::Error },
}

impl App {
    /// Loads the source data, gazetteer and spool.
    pub fn new(config: Config) -> Result<Arc<Self>, StartupError> {
        let pipeline = Pipeline::from_request(&config.job_request(Vec::new(), DEFAULT_DPI, false))?;
        let geocoder = match &config.gazetteer {
            Some(path) => Gazetteer::load(path).map_err(StartupError::Gazetteer)?,
            None => Gazetteer::default(),
        };
        let jobs = JobStore::open(&config.spool, Duration::from_secs(config.expiry_secs)).map_err(|source| {
            StartupError::Spool {
                path: config.spool.clone(),
                source,
            }
        })?;
        let workers = match config.workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        };
        Ok(Arc::new(Self {
            config,
            pipeline: Arc::new(pipeline),
            geocoder: Arc::new(geocoder),
            jobs: Arc::new(jobs),
            workers: Arc::new(Semaphore::new(workers)),
            previews: Mutex::new(HashMap::new()),
        }))
    }
}

pub fn router(app: Arc<App>) -> Router {
    let api = Router::new()
        .route("/api/geocode", get(geocode))
        .route("/api/sheet", get(sheet))
        .route("/api/jobs", post(create_job))
        .route("/api/jobs/{id}", get(job_status))
        .route("/api/jobs/{id}/archive", get(job_archive))
        .route("/api/preview/{designation}", get(preview))
        .with_state(app.clone());
    match &app.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds, serves, and purges expired jobs once a minute.
pub async fn serve(config: Config) -> Result<(), Box<dyn std::error::Error>> {
    let addr: SocketAddr = format!("{}:{}", config.host, config.port).parse()?;
    let app = App::new(config)?;
    let jobs = app.jobs.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = jobs.purge_expired();
            if n > 0 {
                tracing::info!(purged = n, "expired jobs removed");
            }
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(app)).await?;
    Ok(())
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    fn bad_request(kind: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, kind, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NotFound", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"error": self.kind, "message": self.message}))).into_response()
    }
}

type Params = Query<HashMap<String, String>>;

async fn geocode(State(app): State<Arc<App>>, Query(q): Params) -> Result<Response, ApiError> {
    let text = q.get("q").map(|s| s.trim()).unwrap_or_default();
    if text.is_empty() {
        return Err(ApiError::bad_request("EmptyQuery", "query parameter q is required"));
    }
    Ok(Json(app.geocoder.search(text)).into_response())
}

fn coordinate(q: &HashMap<String, String>, key: &str) -> Result<f64, ApiError> {
    q.get(key)
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| ApiError::bad_request("InvalidCoordinates", format!("{key} must be a number")))
}

async fn sheet(State(app): State<Arc<App>>, Query(q): Params) -> Result<Response, ApiError> {
    let ll = LonLat::new(coordinate(&q, "lon")?, coordinate(&q, "lat")?);
    let p = project(ll, &app.config.projection()).map_err(|e| ApiError::bad_request("InvalidCoordinates", e.to_string()))?;
    let id = sheet_for_point(p);
    let b = id.bounds();
    Ok(Json(json!({
        "designation": id.designation(),
        "bounds": {"min_x": b.min_x, "min_y": b.min_y, "max_x": b.max_x, "max_y": b.max_y},
        "neighbors": id.neighbors().iter().map(SheetId::designation).collect::<Vec<_>>(),
    }))
    .into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobBody {
    sheets: Vec<String>,
    #[serde(default)]
    legend: bool,
    dpi: Option<u32>,
}

async fn create_job(State(app): State<Arc<App>>, body: Bytes) -> Result<Response, ApiError> {
    let body: JobBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request("InvalidRequest", e.to_string()))?;
    if body.sheets.is_empty() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "EmptySelection",
            "no sheets selected",
        ));
    }
    let sheets = body
        .sheets
        .iter()
        .map(|s| s.parse::<SheetId>())
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(|e| ApiError::bad_request("InvalidDesignation", e.to_string()))?;
    if sheets.len() > app.config.max_sheets {
        return Err(ApiError::bad_request(
            "TooManySheets",
            format!("{} sheets requested, at most {} allowed", sheets.len(), app.config.max_sheets),
        ));
    }
    let dpi = body.dpi.unwrap_or(DEFAULT_DPI);
    if !DPI_RANGE.contains(&dpi) {
        return Err(ApiError::bad_request("InvalidRequest", format!("dpi {dpi} outside 100..=1200")));
    }
    let request = app.config.job_request(sheets.into_iter().collect(), dpi, body.legend);
    let sheets = Pipeline::resolve_selection(&request.selection, &request.projection).map_err(|e| match e {
        JobError::NonAdjacentSelection(_) => ApiError::bad_request("NonAdjacentSelection", e.to_string()),
        e => ApiError::bad_request("InvalidRequest", e.to_string()),
    })?;

    let rec = app.jobs.create(request);
    let id = rec.job_id;
    tracing::info!(%id, sheets = sheets.len(), "job queued");
    let worker = app.clone();
    tokio::spawn(async move {
        let Ok(_permit) = worker.workers.clone().acquire_owned().await else { return };
        if !worker.jobs.start(id) {
            return;
        }
        let pipeline = worker.pipeline.clone();
        let legend = body.legend;
        let result = tokio::task::spawn_blocking(move || pipeline.run(&sheets, dpi, legend))
            .await
            .map_err(|e| format!("worker crashed: {e}"))
            .and_then(|r| r.map(|out| (out.manifest, out.archive)).map_err(|e| e.to_string()));
        match &result {
            Ok(_) => tracing::info!(%id, "job done"),
            Err(reason) => tracing::warn!(%id, %reason, "job failed"),
        }
        worker.jobs.finish(id, result);
    });
    Ok((StatusCode::ACCEPTED, Json(json!({"job_id": id}))).into_response())
}

fn job_id(raw: &str) -> Result<Uuid, ApiError> {
    raw.parse().map_err(|_| ApiError::not_found(format!("unknown job {raw}")))
}

async fn job_status(State(app): State<Arc<App>>, Path(raw): Path<String>) -> Result<Response, ApiError> {
    let id = job_id(&raw)?;
    let rec = app.jobs.get(id).ok_or_else(|| ApiError::not_found(format!("unknown job {id}")))?;
    Ok(Json(rec).into_response())
}

async fn job_archive(State(app): State<Arc<App>>, Path(raw): Path<String>) -> Result<Response, ApiError> {
    let id = job_id(&raw)?;
    match app.jobs.archive(id) {
        Ok(bytes) => Ok((
            [
                (header::CONTENT_TYPE, "application/zip".to_owned()),
                (header::CONTENT_DISPOSITION, format!("attachment; filename=\"tactmap-{id}.zip\"")),
            ],
            bytes,
        )
            .into_response()),
        Err(ArchiveError::Unknown) => Err(ApiError::not_found(format!("unknown job {id}"))),
        Err(ArchiveError::NotReady) => Err(ApiError::new(
            StatusCode::CONFLICT,
            "NotReady",
            format!("job {id} has not finished"),
        )),
    }
}

async fn preview(
    State(app): State<Arc<App>>,
    Path(designation): Path<String>,
    Query(q): Params,
) -> Result<Response, ApiError> {
    let id: SheetId = designation
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown sheet {designation}")))?;
    let scale = match q.get("scale") {
        None => 4,
        Some(s) => s
            .parse::<usize>()
            .ok()
            .filter(|s| (1..=MAX_PREVIEW_SCALE).contains(s))
            .ok_or_else(|| ApiError::bad_request("InvalidRequest", format!("scale must be 1..={MAX_PREVIEW_SCALE}")))?,
    };
    let cached = app.previews.lock().unwrap().get(&(id, scale)).cloned();
    let png = match cached {
        Some(png) => png,
        None => {
            let worker = app.clone();
            let png = tokio::task::spawn_blocking(move || -> Result<Bytes, JobError> {
                let plan = worker.pipeline.plan(&BTreeSet::from([id]))?;
                let sheet = render_sheet(&plan.sheets[0], &worker.pipeline.style, DEFAULT_DPI);
                Ok(Bytes::from(sheet.preview(scale).to_png()))
            })
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
            let mut cache = app.previews.lock().unwrap();
            if cache.len() >= PREVIEW_CACHE {
                cache.clear();
            }
            cache.insert((id, scale), png.clone());
            png
        }
    };
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}
