//! Matrix persistence.
//!
//! CSV: one matrix row per line, comma separated, no header. Vectors are
//! stored as a single column.
//!
//! Binary: little-endian `u64 n_rows`, `u64 n_cols`, then `n_rows * n_cols`
//! little-endian `f64` values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    #[default]
    Csv,
    Binary,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Binary => "bin",
        }
    }
}

pub fn write_matrix_csv<W: Write>(m: &DenseMatrix, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in m.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {}: {field:?} is not a number ({e})", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidMatrix("CSV input has no rows".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn write_matrix_binary<W: Write>(m: &DenseMatrix, mut out: W) -> std::io::Result<()> {
    out.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    out.write_all(&(m.n_cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> Result<DenseMatrix> {
    let mut word = [0u8; 8];
    let mut read_u64 = |input: &mut R| -> Result<u64> {
        input
            .read_exact(&mut word)
            .map_err(|e| Error::Parse(format!("truncated binary header: {e}")))?;
        Ok(u64::from_le_bytes(word))
    };
    let n_rows = read_u64(&mut input)? as usize;
    let n_cols = read_u64(&mut input)? as usize;
    let len = n_rows
        .checked_mul(n_cols)
        .ok_or_else(|| Error::Parse(format!("shape {n_rows}x{n_cols} overflows")))?;
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::Parse(format!("failed to read binary payload: {e}")))?;
    if bytes.len() != len * 8 {
        return Err(Error::Parse(format!(
            "binary payload has {} bytes, expected {}",
            bytes.len(),
            len * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseMatrix::new(n_rows, n_cols, data)
}

pub fn save_matrix(m: &DenseMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let w = BufWriter::new(file);
    match format {
        MatrixFormat::Csv => write_matrix_csv(m, w),
        MatrixFormat::Binary => write_matrix_binary(m, w).map_err(|e| Error::io(path, e)),
    }
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DenseMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(file);
    match format {
        MatrixFormat::Csv => read_matrix_csv(r),
        MatrixFormat::Binary => read_matrix_binary(r),
    }
}

pub fn save_vector(v: &[f64], path: &Path, format: MatrixFormat) -> Result<()> {
    let m = DenseMatrix::new(v.len(), 1, v.to_vec())?;
    save_matrix(&m, path, format)
}

pub fn load_vector(path: &Path, format: MatrixFormat) -> Result<Vec<f64>> {
    let m = load_matrix(path, format)?;
    if m.n_cols() != 1 {
        return Err(Error::InvalidMatrix(format!(
            "{} holds a {}x{} matrix, expected a single column",
            path.display(),
            m.n_rows(),
            m.n_cols()
        )));
    }
    Ok(m.into_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout_is_one_row_per_line() {
        let m = DenseMatrix::from_rows(&[[1.0, -2.5], [0.125, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,-2.5\n0.125,3\n");
    }

    #[test]
    fn binary_header_layout() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_matrix_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 24);
        assert_eq!(&buf[0..8], &1u64.to_le_bytes());
        assert_eq!(&buf[8..16], &3u64.to_le_bytes());
        assert_eq!(&buf[16..24], &1.0f64.to_le_bytes());
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let err = read_matrix_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv(_) | Error::InvalidMatrix(_)));
        assert!(read_matrix_csv("1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let m = DenseMatrix::identity(2);
        let mut buf = Vec::new();
        write_matrix_binary(&m, &mut buf).unwrap();
        buf.pop();
        assert!(read_matrix_binary(buf.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn both_formats_round_trip_exactly(
            (n, p, data) in (1usize..6, 1usize..6).prop_flat_map(|(n, p)| {
                (Just(n), Just(p), proptest::collection::vec(-1e6f64..1e6, n * p))
            })
        ) {
            let m = DenseMatrix::new(n, p, data).unwrap();
            let mut csv_buf = Vec::new();
            write_matrix_csv(&m, &mut csv_buf).unwrap();
            prop_assert_eq!(read_matrix_csv(csv_buf.as_slice()).unwrap(), m.clone());
            let mut bin_buf = Vec::new();
            write_matrix_binary(&m, &mut bin_buf).unwrap();
            prop_assert_eq!(read_matrix_binary(bin_buf.as_slice()).unwrap(), m);
        }
    }
}
