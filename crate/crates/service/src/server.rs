//! Startup, binding and shutdown of the HTTP service.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use govsheet_core::{Engine, EngineError, PrincipalId, SharedEngine, SystemClock};
use thiserror::Error;
use tokio::net::TcpListener;

use crate::api::{self, AppState};
use crate::config::{Config, ADMIN_PRINCIPAL};

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("store is corrupt; first bad record is {first_bad_seq}")]
    StoreCorrupt { first_bad_seq: u64 },
    #[error("store: {0}")]
    Store(EngineError),
    #[error("cannot bind {addr}: {message}")]
    BindFailure { addr: SocketAddr, message: String },
    #[error("server: {0}")]
    Io(#[from] std::io::Error),
}

impl From<EngineError> for ServeError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::StoreCorrupt { first_bad_seq } => ServeError::StoreCorrupt { first_bad_seq },
            other => ServeError::Store(other),
        }
    }
}

/// Opens (or creates) the store and makes sure the bootstrap administrator
/// exists.
pub fn open_engine(cfg: &Config) -> Result<Engine, ServeError> {
    let mut engine = Engine::open(&cfg.store, cfg.sync, Arc::new(SystemClock))?;
    engine.bootstrap_admin(&PrincipalId::new(ADMIN_PRINCIPAL))?;
    Ok(engine)
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|e| ServeError::BindFailure {
        addr,
        message: e.to_string(),
    })
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve_on(
    listener: TcpListener,
    engine: SharedEngine,
    admin_token: Option<String>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let app = api::app(AppState::new(engine, admin_token));
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

pub async fn run(cfg: Config) -> Result<(), ServeError> {
    let engine = open_engine(&cfg)?;
    let records = engine.state().audit.len();
    let listener = bind(cfg.listen).await?;
    tracing::info!(addr = %listener.local_addr()?, store = %cfg.store.display(), records, "listening");
    serve_on(listener, SharedEngine::new(engine), cfg.admin_token_seed, shutdown_signal()).await?;
    tracing::info!("stopped");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}
