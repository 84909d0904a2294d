use super::FeatureError;
use std::path::{Path, PathBuf};

/// One dataset row: audio file, 0-based class index and fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub path: PathBuf,
    pub label: usize,
    pub fold: usize,
}

impl ManifestRow {
    /// File stem, used as the clip id and the feature file name.
    pub fn clip_id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

fn bad(msg: String) -> FeatureError {
    FeatureError::Manifest(msg)
}

/// Parses `path,label,fold` CSV. Relative paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestRow>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["path", "label", "fold"] {
        return Err(bad(format!(
            "header must be path,label,fold, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let row = i + 2;
        let field = |j: usize, name: &str| -> Result<usize, FeatureError> {
            record[j]
                .parse()
                .map_err(|_| bad(format!("row {row}: bad {name} '{}'", &record[j])))
        };
        let path = PathBuf::from(&record[0]);
        rows.push(ManifestRow {
            path: if path.is_absolute() { path } else { base.join(path) },
            label: field(1, "label")?,
            fold: field(2, "fold")?,
        });
    }
    Ok(rows)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, FeatureError> {
    let text = std::fs::read_to_string(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new("")))
}

/// Writes rows with paths as given.
pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| bad(e.to_string()))?;
    w.write_record(["path", "label", "fold"]).map_err(|e| bad(e.to_string()))?;
    for r in rows {
        w.write_record([r.path.to_string_lossy().as_ref(), &r.label.to_string(), &r.fold.to_string()])
            .map_err(|e| bad(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves() {
        let rows = parse_manifest("path,label,fold\na/x.wav,3,1\n/abs/y.wav, 0 ,9\n", Path::new("/data")).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].path, PathBuf::from("/data/a/x.wav"));
        assert_eq!(rows[0].clip_id(), "x");
        assert_eq!((rows[1].label, rows[1].fold), (0, 9));
        assert_eq!(rows[1].path, PathBuf::from("/abs/y.wav"));
    }

    #[test]
    fn empty_and_bad() {
        assert!(parse_manifest("path,label,fold\n", Path::new("")).unwrap().is_empty());
        assert!(parse_manifest("file,label\nx,1\n", Path::new("")).is_err());
        let err = parse_manifest("path,label,fold\nx.wav,one,0\n", Path::new("")).unwrap_err();
        assert!(err.to_string().contains("label"));
    }

    #[test]
    fn write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            ManifestRow { path: "c0.wav".into(), label: 0, fold: 2 },
            ManifestRow { path: "c1.wav".into(), label: 1, fold: 0 },
        ];
        let p = dir.path().join("m.csv");
        write_manifest(&p, &rows).unwrap();
        let back = read_manifest(&p).unwrap();
        assert_eq!(back[1].path, dir.path().join("c1.wav"));
        assert_eq!(back[0].fold, 2);
    }
}
