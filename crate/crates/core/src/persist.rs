//! `ROMB` dense matrix files: the magic bytes `ROMB`, then `u32` rows and
//! `u32` columns, then the entries column-major as little-endian `f64`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

pub const MAGIC: &[u8; 4] = b"ROMB";

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("{path}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub fn encode_matrix(m: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * m.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(m.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u32).to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<DMatrix<f64>, String> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err("missing ROMB header".into());
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != 8 * rows * cols {
        return Err(format!(
            "{rows}x{cols} matrix needs {} bytes of data, found {}",
            8 * rows * cols,
            body.len()
        ));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>();
    Ok(DMatrix::from_vec(rows, cols, values))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<(), PersistError> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&encode_matrix(m)).map_err(io_err(path))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>, PersistError> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    decode_matrix(&bytes).map_err(|msg| PersistError::Format {
        path: path.display().to_string(),
        msg,
    })
}

pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<(), PersistError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|source| PersistError::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, PersistError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| PersistError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_column_major_little_endian() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = encode_matrix(&m);
        assert_eq!(&b[..4], b"ROMB");
        assert_eq!(&b[4..12], &[2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(&b[12..20], &1.0f64.to_le_bytes());
        assert_eq!(&b[20..28], &3.0f64.to_le_bytes());
        assert_eq!(decode_matrix(&b).unwrap(), m);
    }

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let m = DMatrix::from_fn(5, 3, |i, j| (i as f64 + 0.1).powf(j as f64 + 0.3));
        let p = dir.path().join("m.romb");
        write_matrix(&p, &m).unwrap();
        assert_eq!(read_matrix(&p).unwrap(), m);
        assert!(decode_matrix(b"ROMX\0\0\0\0\0\0\0\0").is_err());
        let mut b = encode_matrix(&m);
        b.pop();
        assert!(decode_matrix(&b).is_err());
        assert!(read_matrix(dir.path().join("missing.romb")).is_err());
        let empty = DMatrix::<f64>::zeros(0, 4);
        assert_eq!(decode_matrix(&encode_matrix(&empty)).unwrap(), empty);
    }
}
