//! Annotation-capture HTTP service.
//!
//! Serves the taxonomy and proposal list, stores descriptor annotations
//! submitted by the browser UI and computes a live agreement report over
//! what has been stored. Routes live under `/api/`; anything else falls
//! through to the static UI bundle when one is configured.

pub mod api;
pub mod store;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::RwLock;
use tower_http::services::ServeDir;

pub use api::SharedStore;
pub use store::{Aggregation, Store, StoreError, SubmitError, Submission};

pub fn shared(store: Store) -> SharedStore {
    Arc::new(RwLock::new(store))
}

pub fn router(store: SharedStore, ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/taxonomy", get(api::get_taxonomy))
        .route("/api/referents", get(api::list_referents))
        .route("/api/proposals", get(api::list_proposals))
        .route(
            "/api/proposals/{id}/annotation",
            get(api::get_annotation).put(api::put_annotation),
        )
        .route("/api/report", get(api::get_report))
        .route("/api/export", get(api::get_export))
        .route("/api/compact", post(api::post_compact))
        .route(
            "/api/{*rest}",
            get(|| async { api::error_response(StatusCode::NOT_FOUND, "no such endpoint") }),
        )
        .with_state(store);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}

async fn compact_if_dirty(store: &SharedStore) {
    let mut guard = store.write().await;
    if guard.is_dirty() {
        if let Err(e) = guard.compact() {
            tracing::error!(error = %e, "compaction failed");
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServeOptions {
    pub ui_dir: Option<PathBuf>,
    /// Compact the journal into `study.json` this often when there are new
    /// submissions.
    pub compact_every: Option<Duration>,
}

/// Runs the service on `listener` until `shutdown` resolves, then compacts
/// any pending submissions before returning.
pub async fn serve<F>(
    listener: TcpListener,
    store: SharedStore,
    opts: ServeOptions,
    shutdown: F,
) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    let compactor = opts.compact_every.map(|every| {
        let store = store.clone();
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(every);
            tick.tick().await;
            loop {
                tick.tick().await;
                compact_if_dirty(&store).await;
            }
        })
    });

    let app = router(store.clone(), opts.ui_dir);
    let result = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;

    if let Some(task) = compactor {
        task.abort();
    }
    compact_if_dirty(&store).await;
    result
}

/// Installs SIGINT and SIGTERM handlers and returns a future that resolves
/// on the first of them. Must be called inside a tokio runtime.
#[cfg(unix)]
pub fn shutdown_signal() -> std::io::Result<impl Future<Output = ()> + Send + 'static> {
    use tokio::signal::unix::{signal, SignalKind};
    let mut interrupt = signal(SignalKind::interrupt())?;
    let mut terminate = signal(SignalKind::terminate())?;
    Ok(async move {
        tokio::select! {
            _ = interrupt.recv() => {},
            _ = terminate.recv() => {},
        }
    })
}

#[cfg(not(unix))]
pub fn shutdown_signal() -> std::io::Result<impl Future<Output = ()> + Send + 'static> {
    Ok(async {
        let _ = tokio::signal::ctrl_c().await;
    })
}
