//! Experiment service: session lifecycle, trial delivery, trajectory
//! ingestion with replay validation, survey capture and durable
//! append-only storage. See [`http`] for the routes.

pub mod clock;
pub mod config;
pub mod error;
pub mod http;
pub mod service;
pub mod store;
pub mod wire;

use std::sync::Arc;

pub use clock::{Clock, IdSource, RandomIds, SeededIds, SteppingClock, SystemClock};
pub use config::ServerConfig;
pub use error::ServerError;
pub use service::Service;
pub use store::{Fault, Store};
pub use wire::*;

/// Opens the store under `config.data_dir` and serves until ctrl-c.
pub async fn serve(config: ServerConfig) -> Result<(), ServerError> {
    let store = Store::open(&config.data_dir)?;
    let addr = format!("{}:{}", config.host, config.port);
    let service = Arc::new(Service::open(
        config,
        store,
        Arc::new(SystemClock),
        Arc::new(RandomIds),
    )?);
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, http::router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
