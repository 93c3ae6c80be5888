//! Command-line and HTTP front ends for `kfrisk-core`.

pub mod args;
pub mod commands;
pub mod http;

use anyhow::Result;

use args::{Cli, Command};

/// Runs one subcommand and returns its stdout.
pub fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Predict { input } => commands::predict(g, input),
        Command::Kfre { input, variant } => commands::kfre(g, input, variant),
        Command::Train {
            config,
            input,
            output,
            manifest,
        } => commands::train(g, config.as_deref(), input.as_deref(), output, manifest.as_deref()),
        Command::Evaluate { scores, cohort, horizon } => {
            commands::evaluate(g, scores.as_deref(), cohort.as_deref(), *horizon)
        }
        Command::Simulate { output, n, prevalence } => commands::simulate(g, output, *n, *prevalence),
        Command::Serve { addr } => {
            let state = match commands::read_weights(g) {
                Ok(w) => http::AppState::ready(w),
                Err(e) => {
                    eprintln!("warning: {e:#}; serving as unready");
                    http::AppState::unready(format!("{e:#}"))
                }
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, http::router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                Ok(String::new())
            })
        }
    }
}
