//! Trace files, analysis reports, the batch pipeline and plot-data emission.

mod config;
mod pipeline;
mod plot;
mod report;
mod tracefile;
pub mod units;

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{DesignConfig, FilmSection, JunctionSection, PipelineConfig, QubitConfig, ResonatorSection};
pub use pipeline::run_pipeline;
pub use plot::{emit_plot_data, FigureId};
pub use report::{
    finite, AnalysisReport, AnnealRow, BudgetRow, CalibrationRow, ErrorRow, ExposureRow, FilmRow, IvRow, JunctionRow,
    QiPowerRow, QiTempRow, QubitRow, ReportStatus, ResonatorRow, SCHEMA_VERSION,
};
pub use tracefile::{ingest, parse_trace, TraceFile, TraceKind};

/// Hex SHA-256 of a byte string.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
