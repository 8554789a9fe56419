//! Dataset files, split files and atomic output writes.

use std::io::Write;
use std::path::Path;

use alsim_core::learner::{ExternalPredictions, Predictions};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Rows and labels of a `feature_0,...,feature_{d-1},label` CSV.
pub fn read_dataset(path: &Path) -> CliResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| dataset_err(path, e))?;
    let headers = reader.headers().map_err(|e| dataset_err(path, e))?.clone();
    let d = headers.len().saturating_sub(1);
    let expected: Vec<String> = (0..d).map(|j| format!("feature_{j}")).chain(["label".into()]).collect();
    if headers.len() < 2 || headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::Dataset(format!(
            "{}: header must be feature_0..feature_{{d-1}},label",
            path.display()
        )));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| dataset_err(path, e))?;
        let line = row + 2;
        let mut x = Vec::with_capacity(d);
        for field in record.iter().take(d) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::Dataset(format!("{}:{line}: bad feature {field:?}", path.display())))?;
            if !v.is_finite() {
                return Err(CliError::Dataset(format!("{}:{line}: non-finite feature", path.display())));
            }
            x.push(v);
        }
        let label = record[d]
            .trim()
            .parse()
            .map_err(|_| CliError::Dataset(format!("{}:{line}: bad label {:?}", path.display(), &record[d])))?;
        features.push(x);
        labels.push(label);
    }
    if features.is_empty() {
        return Err(CliError::Dataset(format!("{}: no rows", path.display())));
    }
    Ok((features, labels))
}

fn dataset_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Dataset(format!("{}: {e}", path.display()))
}

pub fn dataset_csv(features: &[Vec<f64>], labels: &[usize]) -> Vec<u8> {
    let d = features.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..d).map(|j| format!("feature_{j}")).chain(["label".into()]).collect();
    w.write_record(&header).expect("in-memory write");
    for (x, y) in features.iter().zip(labels) {
        let row: Vec<String> = x.iter().map(|v| v.to_string()).chain([y.to_string()]).collect();
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Test-row indices, one per line; blank lines and `#` comments ignored.
pub fn read_split(path: &Path) -> CliResult<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(n, l)| {
            l.parse()
                .map_err(|_| CliError::Dataset(format!("{}:{n}: bad row index {l:?}", path.display())))
        })
        .collect()
}

pub fn split_text(rows: &[usize]) -> String {
    rows.iter().map(|r| format!("{r}\n")).collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExternalFile {
    stages: Vec<ExternalStage>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExternalStage {
    labels: usize,
    pool: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
}

/// `{"stages": [{"labels": t, "pool": [[..]], "test": [[..]]}, ...]}`
pub fn read_external_predictions(path: &Path) -> CliResult<ExternalPredictions> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ExternalFile =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut out = ExternalPredictions::new();
    for s in file.stages {
        out.insert(
            s.labels,
            Predictions {
                pool: s.pool,
                test: s.test,
            },
        );
    }
    Ok(out)
}

/// Writes via a sibling temp file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}
