use std::fs;
use std::path::{Path, PathBuf};

use bmv_lab_core::{ComplexMat, LabError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Lab(#[from] LabError),

    #[error("{0}")]
    Integrity(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    /// 1 for bad invocations or input files, 2 for numerical or integrity failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lab(e) if e.is_numerical() => 2,
            CliError::Integrity(_) => 2,
            _ => 1,
        }
    }
}

/// Reads a matrix in the `{ "n", "re", "im" }` layout.
pub fn load_matrix(path: &Path) -> Result<ComplexMat, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn save_report<T: Serialize>(report: &T, path: &Path) -> Result<(), CliError> {
    write_text(&to_json(report)?, path)
}

pub fn write_text(text: &str, path: &Path) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bmv_lab_core::LabRng;

    #[test]
    fn matrix_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        let m = LabRng::new(17).ginibre(4).scale_re(1.0 / 3.0);
        save_report(&m, &path).unwrap();
        let back = load_matrix(&path).unwrap();
        for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn schema_violations_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, r#"{"n":2,"re":[1,0,0,1],"im":[0,0,0]}"#).unwrap();
        let err = load_matrix(&path).unwrap_err();
        assert!(err.to_string().contains("`im`"), "{err}");
        assert_eq!(err.exit_code(), 1);

        fs::write(&path, r#"{"n":0,"re":[],"im":[]}"#).unwrap();
        assert!(load_matrix(&path).unwrap_err().to_string().contains("`n`"));

        assert!(matches!(
            load_matrix(&dir.path().join("missing.json")),
            Err(CliError::Io { .. })
        ));
    }
}
