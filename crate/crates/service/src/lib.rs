//! HTTP front end for `genrules`: upload baskets, taxonomies and rule sets,
//! mine and generalize them, query the results and download every artifact.
//!
//! Artifacts live in a content-addressed flat-file store ([`store`]); an
//! artifact's id is a hash of its kind and bytes, so uploads are idempotent.
//! The wire format is the same documents the library reads and writes.
//!
//! | method | path | |
//! |---|---|---|
//! | GET  | `/health` | liveness |
//! | POST | `/artifacts/{kind}?name=` | body is the document; 422 with line/column if it does not parse |
//! | GET  | `/artifacts/{id}` | metadata plus payload |
//! | GET  | `/artifacts/{id}/raw` | the stored bytes |
//! | POST | `/mine` | `{dataset_id, min_support?, min_confidence?, max_items?}` |
//! | POST | `/generalize` | `{ruleset_id, taxonomyset_id, dataset_id?, side?, options?, async?}` |
//! | GET  | `/runs/{id}` | run status and result id |
//! | GET  | `/results/{id}/rules?item=&lhs_item=&rhs_item=&measure=&where=&sort=&limit=&offset=&exact=` | rule views |
//! | GET  | `/results/{id}/export?…` | same query as tab-separated text |
//! | GET  | `/results/{id}/rules/{key}/expanded` | "E" drill-down |
//! | GET  | `/results/{id}/rules/{key}/sources` | "S" drill-down |
//! | GET  | `/results/{id}/rules/{key}/measures` | "M" drill-down |

pub mod api;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;

pub use api::{router, AppState};
pub use store::Store;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const DEFAULT_STORE: &str = "genrules-store";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub store_root: PathBuf,
}

impl ServiceConfig {
    /// `GENRULES_LISTEN` and `GENRULES_STORE`, falling back to the defaults.
    pub fn from_env() -> Result<ServiceConfig, String> {
        let listen = std::env::var("GENRULES_LISTEN").unwrap_or_else(|_| DEFAULT_LISTEN.into());
        Ok(ServiceConfig {
            listen: listen.parse().map_err(|e| format!("GENRULES_LISTEN={listen:?}: {e}"))?,
            store_root: std::env::var_os("GENRULES_STORE").map_or_else(|| DEFAULT_STORE.into(), PathBuf::from),
        })
    }
}

/// Binds, serves until Ctrl-C or SIGTERM, then drains open requests.
pub async fn serve(config: &ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(Store::open(&config.store_root)?);
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!(
        "listening on http://{}, store at {}",
        listener.local_addr()?,
        config.store_root.display()
    );
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown()).await
}

async fn shutdown() {
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
        _ = ctrl_c => {},
        _ = term => {},
    }
}
