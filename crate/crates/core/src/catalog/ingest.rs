use std::path::Path;

use walkdir::WalkDir;

use super::{
    builtin_descriptors, AdapterDescriptor, AdapterError, AdapterOptions, Catalog, CatalogError,
    ChannelInfo,
};
use crate::matio::{parse_mat, read_text_signal, MatError};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Mat { path: String, source: MatError },
    #[error("{path}: line {line}: {reason}")]
    Text {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: {source}")]
    Adapter { path: String, source: AdapterError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("no .mat, .csv or .txt files under {0}")]
    NothingFound(String),
}

/// Builds a catalog from every signal file under `root`, naming sources
/// relative to `root`. Files are visited in sorted path order.
pub fn ingest(
    root: &Path,
    adapter: &AdapterDescriptor,
    opts: &AdapterOptions,
) -> Result<Catalog, IngestError> {
    let mut recordings = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| IngestError::Io {
            path: root.display().to_string(),
            source: e.into(),
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let shown = path.display().to_string();
        let bytes = match ext.as_deref() {
            Some("mat" | "csv" | "txt") => {
                std::fs::read(path).map_err(|source| IngestError::Io {
                    path: shown.clone(),
                    source,
                })?
            }
            _ => continue,
        };
        let channels = if ext.as_deref() == Some("mat") {
            let file = parse_mat(&bytes).map_err(|source| IngestError::Mat {
                path: shown.clone(),
                source,
            })?;
            file.variables
                .iter()
                .map(|v| ChannelInfo {
                    name: v.name.clone(),
                    len: v.data.len(),
                })
                .collect()
        } else {
            let samples = read_text_signal(&bytes).map_err(|(line, reason)| IngestError::Text {
                path: shown.clone(),
                line,
                reason,
            })?;
            vec![ChannelInfo {
                name: String::new(),
                len: samples.len(),
            }]
        };
        let relative = path.strip_prefix(root).unwrap_or(path);
        let source = relative
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        let rows = adapter
            .recordings_for(&source, &channels, opts)
            .map_err(|source| IngestError::Adapter {
                path: shown,
                source,
            })?;
        recordings.extend(rows);
    }
    if recordings.is_empty() {
        return Err(IngestError::NothingFound(root.display().to_string()));
    }
    let mut datasets = builtin_descriptors();
    datasets.retain(|id, _| id == adapter.dataset_id);
    if let Some(rate) = opts.sampling_rate {
        if let Some(d) = datasets.get_mut(adapter.dataset_id) {
            d.default_sampling_rates = vec![rate];
        }
    }
    Ok(Catalog::new(datasets, recordings)?)
}
