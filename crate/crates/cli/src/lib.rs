//! Command-line front end: scenario files, subcommands, run manifests and
//! the `accept` entry point of the acceptance suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use config::ScenarioConfig;
pub use error::CliError;

/// Worker count: `GG_THREADS`, then the config, then the machine.
pub fn thread_count(cfg: &ScenarioConfig) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var("GG_THREADS") {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!(
                "GG_THREADS must be a positive integer, got {v:?}"
            ))),
        };
    }
    Ok(cfg
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

/// Sizes the global rayon pool. Only the first call in a process takes
/// effect; the size actually in use is returned.
pub fn init_pool(threads: usize) -> usize {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    rayon::current_num_threads()
}
