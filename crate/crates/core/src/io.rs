//! CSV and JSON file formats.
//!
//! All matrices are plain CSV. Floats are written with Rust's shortest
//! round-trip formatting, so a write followed by a read reproduces every bit
//! and identical inputs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::anomaly::DetectionResult;
use crate::error::{GspError, Result};
use crate::graph::Graph;
use crate::learning::Mask;

fn parse_f64(field: &str, row: usize, col: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        GspError::Parse(format!(
            "row {row}, column {col}: cannot parse {field:?} as a number"
        ))
    })
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ncols {
            return Err(GspError::Parse(format!(
                "row {i} has {} fields, expected {ncols}",
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn read_rows<R: Read>(reader: R, has_header: bool) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(reader);
    let header = if has_header {
        Some(
            rdr.headers()?
                .iter()
                .map(|s| s.trim().to_string())
                .collect(),
        )
    } else {
        None
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| parse_f64(f, i, j))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_matrix_rows<W: Write>(wtr: &mut csv::Writer<W>, m: &DMatrix<f64>) -> Result<()> {
    for row in m.row_iter() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Reads a headerless numeric CSV.
pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    rows_to_matrix(read_rows(reader, false)?.1)
}

pub fn write_matrix<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = writer(w);
    write_matrix_rows(&mut wtr, m)?;
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?)
}

pub fn write_matrix_file(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_matrix(create(path)?, m)
}

/// Reads an adjacency matrix; asymmetry beyond `1e-12` is rejected.
pub fn read_adjacency<R: Read>(reader: R) -> Result<Graph> {
    Graph::new(read_matrix(reader)?)
}

pub fn read_adjacency_file(path: &Path) -> Result<Graph> {
    read_adjacency(File::open(path)?)
}

pub fn write_adjacency_file(path: &Path, g: &Graph) -> Result<()> {
    write_matrix_file(path, g.weights())
}

/// Reads a node-by-time trajectory with header `t0,t1,…`.
pub fn read_trajectory<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let (header, rows) = read_rows(reader, true)?;
    let header = header.unwrap_or_default();
    for (j, h) in header.iter().enumerate() {
        if *h != format!("t{j}") {
            return Err(GspError::Parse(format!(
                "trajectory header field {j} is {h:?}, expected \"t{j}\""
            )));
        }
    }
    let m = rows_to_matrix(rows)?;
    if m.nrows() > 0 && m.ncols() != header.len() {
        return Err(GspError::Parse(format!(
            "trajectory has {} columns but header names {}",
            m.ncols(),
            header.len()
        )));
    }
    Ok(m)
}

pub fn write_trajectory<W: Write>(w: W, y: &DMatrix<f64>) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record((0..y.ncols()).map(|t| format!("t{t}")))?;
    write_matrix_rows(&mut wtr, y)?;
    wtr.flush()?;
    Ok(())
}

pub fn read_trajectory_file(path: &Path) -> Result<DMatrix<f64>> {
    read_trajectory(File::open(path)?)
}

pub fn write_trajectory_file(path: &Path, y: &DMatrix<f64>) -> Result<()> {
    write_trajectory(create(path)?, y)
}

/// Writes `index,lambda` rows.
pub fn write_spectrum<W: Write>(w: W, lambdas: &[f64]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["index", "lambda"])?;
    for (i, l) in lambdas.iter().enumerate() {
        wtr.write_record([i.to_string(), l.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_spectrum_file(path: &Path, lambdas: &[f64]) -> Result<()> {
    write_spectrum(create(path)?, lambdas)
}

/// Reads a 0/1 observation mask.
pub fn read_mask<R: Read>(reader: R) -> Result<Mask> {
    let m = read_matrix(reader)?;
    if let Some(v) = m.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(GspError::Parse(format!(
            "mask entries must be 0 or 1, found {v}"
        )));
    }
    Ok(m.map(|v| v == 1.0))
}

pub fn read_mask_file(path: &Path) -> Result<Mask> {
    read_mask(File::open(path)?)
}

pub fn write_mask_file(path: &Path, mask: &Mask) -> Result<()> {
    write_matrix_file(path, &mask.map(|b| if b { 1.0 } else { 0.0 }))
}

/// Writes `node,label` rows.
pub fn write_assignment<W: Write>(w: W, labels: &[usize]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["node", "label"])?;
    for (i, l) in labels.iter().enumerate() {
        wtr.write_record([i.to_string(), l.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_assignment_file(path: &Path, labels: &[usize]) -> Result<()> {
    write_assignment(create(path)?, labels)
}

/// Reads `node,label` rows; nodes must be listed as `0..n` in order.
pub fn read_assignment<R: Read>(reader: R) -> Result<Vec<usize>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| -> Result<usize> {
            let s = rec
                .get(j)
                .ok_or_else(|| GspError::Parse(format!("row {i} is missing column {j}")))?;
            s.trim()
                .parse::<usize>()
                .map_err(|_| GspError::Parse(format!("row {i}: cannot parse {s:?} as an index")))
        };
        if field(0)? != i {
            return Err(GspError::Parse(format!(
                "row {i}: nodes must be listed in order"
            )));
        }
        labels.push(field(1)?);
    }
    Ok(labels)
}

pub fn read_assignment_file(path: &Path) -> Result<Vec<usize>> {
    read_assignment(File::open(path)?)
}

/// Writes `column_index,statistic,threshold,decision` rows.
pub fn write_detections<W: Write>(w: W, results: &[DetectionResult]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["column_index", "statistic", "threshold", "decision"])?;
    for (i, r) in results.iter().enumerate() {
        wtr.write_record([
            i.to_string(),
            r.statistic.to_string(),
            r.threshold.to_string(),
            r.decision.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_detections_file(path: &Path, results: &[DetectionResult]) -> Result<()> {
    write_detections(create(path)?, results)
}

/// Writes flagged nodes in long format, one `column_index,node` row each.
pub fn write_localization<W: Write>(w: W, flagged: &[Vec<usize>]) -> Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["column_index", "node"])?;
    for (c, nodes) in flagged.iter().enumerate() {
        for n in nodes {
            wtr.write_record([c.to_string(), n.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_localization_file(path: &Path, flagged: &[Vec<usize>]) -> Result<()> {
    write_localization(create(path)?, flagged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::detect;

    #[test]
    fn matrix_roundtrip_is_exact() {
        let m = DMatrix::from_fn(3, 4, |i, j| {
            (i as f64 + 0.1) / (j as f64 + 3.0) - 1e-17 * j as f64
        });
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn adjacency_symmetry_check() {
        assert!(read_adjacency("0,1\n1,0\n".as_bytes()).is_ok());
        assert!(read_adjacency("0,1\n1.0000000000005,0\n".as_bytes()).is_ok());
        assert!(read_adjacency("0,1\n1.1,0\n".as_bytes()).is_err());
        assert!(read_adjacency("0,1\n1\n".as_bytes()).is_err());
        assert!(read_adjacency("0,x\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn trajectory_header() {
        let y = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.5]);
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &y).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t0,t1,t2\n"));
        assert_eq!(read_trajectory(buf.as_slice()).unwrap(), y);
        assert!(read_trajectory("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn small_formats() {
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &[0.0, 1.5]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,lambda\n0,0\n1,1.5\n"
        );

        let mut buf = Vec::new();
        write_assignment(&mut buf, &[0, 1, 1]).unwrap();
        assert_eq!(read_assignment(buf.as_slice()).unwrap(), vec![0, 1, 1]);

        let mut buf = Vec::new();
        write_detections(&mut buf, &[detect(0.5, 0.25).unwrap()]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "column_index,statistic,threshold,decision\n0,0.5,0.25,A1\n"
        );

        let mut buf = Vec::new();
        write_localization(&mut buf, &[vec![], vec![2, 5]]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "column_index,node\n1,2\n1,5\n"
        );

        assert_eq!(
            read_mask("1,0\n0,1\n".as_bytes()).unwrap(),
            DMatrix::from_row_slice(2, 2, &[true, false, false, true])
        );
        assert!(read_mask("1,0.5\n".as_bytes()).is_err());
    }
}
