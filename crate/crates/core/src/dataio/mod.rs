//! File formats: LIBSVM classification data, asset-return tables, trace
//! CSVs with metadata sidecars, and cached saddle points.

mod gram;
mod libsvm;
mod returns;
mod saddle_cache;
mod trace_csv;

pub use gram::{median_bandwidth, rbf_gram, rbf_kernel};
pub use libsvm::{load_libsvm, parse_libsvm, LibsvmDataset, MAX_FEATURE_INDEX};
pub use returns::{estimate_moments, load_returns, parse_returns, synthetic_returns, ReturnsTable};
pub use saddle_cache::{read_saddle_csv, saddle_cache_path, write_saddle_csv};
pub use trace_csv::{meta_path, read_trace_csv, write_trace_csv};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
pub(crate) fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
