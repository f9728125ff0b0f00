//! Configuration, file formats and the command-line front end for
//! `tariffsearch-core`.
//!
//! Every command is also callable as a library function returning its
//! tables, which is how the integration tests drive it. Sweep points and
//! simulation replications run on the ambient rayon pool; results are
//! collected in grid or replication order, so output does not depend on the
//! thread count.

pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod output;

pub use commands::{run, Command, Outcome, RunOptions};
pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Config(format!("thread pool: {e}"))),
    }
}
