//! Configuration, closed-loop runs and run artifacts.

pub mod config;
pub mod csv_log;
pub mod plot;
pub mod sim;

use std::path::{Path, PathBuf};

pub use config::SimConfig;
pub use csv_log::{read_csv, write_csv};
pub use plot::write_plots;
pub use sim::{run_simulation, LogRow, RunOutput, SimLog, Summary};

use crate::{Error, Result};

pub const LOG_FILE: &str = "log.csv";

/// Write `log.csv` and the four plots into `dir`.
pub fn write_artifacts(run: &RunOutput, config: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_path = dir.join(LOG_FILE);
    write_csv(&run.log, &csv_path)?;
    let mut paths = vec![csv_path];
    paths.extend(write_plots(&run.log, Some(&config.curve), dir)?);
    Ok(paths)
}
