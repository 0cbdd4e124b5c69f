use std::process::ExitCode;
use std::sync::Arc;

use logex_service::{router, ApiConfig, Tutor};

#[tokio::main]
async fn main() -> ExitCode {
    let config = match ApiConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("logex-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    let tutor = match Tutor::open(&config) {
        Ok(t) => Arc::new(t),
        Err(e) => {
            eprintln!("logex-server: {e}");
            return ExitCode::FAILURE;
        }
    };
    let listener = match tokio::net::TcpListener::bind(&config.addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("logex-server: cannot listen on {}: {e}", config.addr);
            return ExitCode::FAILURE;
        }
    };
    eprintln!("logex-server: listening on {}", config.addr);
    if let Err(e) = axum::serve(listener, router(tutor)).await {
        eprintln!("logex-server: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
