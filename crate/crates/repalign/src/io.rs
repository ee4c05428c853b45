//! CSV file formats.
//!
//! Embedding file: header row, first column `id`, remaining columns numeric
//! coordinates. Similarity file: `n + 1` columns where the first row and
//! column carry the ids and the body is a symmetric numeric matrix. Labels
//! file: `id,label`. All files are UTF-8 with LF line endings.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::stimulus::{EmbeddingSet, StimulusSet};

fn open_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    let file = File::open(path)
        .map_err(|e| Error::Input(format!("cannot open `{}`: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(BufReader::new(file)))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_float(field: &str, line: u64, column: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::CsvParse {
        line,
        msg: format!("column {} is not a number: `{field}`", column + 1),
    })
}

/// Read an embedding CSV (`id` column followed by coordinate columns).
pub fn read_embedding_csv(path: &Path) -> Result<EmbeddingSet> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::CsvParse {
            line: 1,
            msg: "embedding file needs an id column plus at least one coordinate column".into(),
        });
    }
    if headers.get(0).map(str::trim) != Some("id") {
        return Err(Error::CsvParse {
            line: 1,
            msg: format!("first column must be `id`, found `{}`", headers.get(0).unwrap_or("")),
        });
    }
    let d = headers.len() - 1;
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record_line(&record);
        if record.len() != headers.len() {
            return Err(Error::CsvParse {
                line,
                msg: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        ids.push(record.get(0).unwrap_or("").trim().to_string());
        for c in 1..record.len() {
            values.push(parse_float(record.get(c).unwrap_or(""), line, c)?);
        }
    }
    if ids.is_empty() {
        return Err(Error::Input(format!("`{}` contains no data rows", path.display())));
    }
    let n = ids.len();
    let coords = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::Input(format!("bad embedding shape: {e}")))?;
    EmbeddingSet::new(StimulusSet::new(ids)?, coords)
}

/// Write an embedding CSV with generated coordinate column names `x0..`.
pub fn write_embedding_csv(path: &Path, embedding: &EmbeddingSet) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["id".to_string()];
    header.extend((0..embedding.d()).map(|c| format!("x{c}")));
    writer.write_record(&header).map_err(csv_write_error)?;
    for (id, row) in embedding.stimuli().ids().iter().zip(embedding.coords().rows()) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|v| format!("{v}")));
        writer.write_record(&record).map_err(csv_write_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::Input(format!("csv write failed: {e}"))
}

/// Read a similarity CSV: ids across the first row and first column, then a
/// symmetric numeric body.
pub fn read_similarity_csv(path: &Path) -> Result<(StimulusSet, Array2<f64>)> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.len() < 2 {
        return Err(Error::CsvParse {
            line: 1,
            msg: "similarity file needs an id column plus one column per stimulus".into(),
        });
    }
    let ids: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let n = ids.len();
    let mut values = vec![0.0; n * n];
    let mut row_count = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record_line(&record);
        if row_count >= n {
            return Err(Error::CsvParse {
                line,
                msg: format!("more rows than the {n} ids declared in the header"),
            });
        }
        if record.len() != n + 1 {
            return Err(Error::CsvParse {
                line,
                msg: format!("expected {} fields, found {}", n + 1, record.len()),
            });
        }
        let row_id = record.get(0).unwrap_or("").trim();
        if row_id != ids[row_count] {
            return Err(Error::CsvParse {
                line,
                msg: format!(
                    "row id `{row_id}` does not match header id `{}` at position {}",
                    ids[row_count],
                    row_count + 1
                ),
            });
        }
        for c in 0..n {
            values[row_count * n + c] = parse_float(record.get(c + 1).unwrap_or(""), line, c + 1)?;
        }
        row_count += 1;
    }
    if row_count != n {
        return Err(Error::Input(format!(
            "similarity body has {row_count} rows, expected {n}"
        )));
    }
    let sim = Array2::from_shape_vec((n, n), values)
        .map_err(|e| Error::Input(format!("bad similarity shape: {e}")))?;
    for i in 0..n {
        for j in 0..n {
            if sim[[i, j]] != sim[[j, i]] {
                return Err(Error::Input(format!(
                    "similarity matrix not symmetric between `{}` and `{}`",
                    ids[i], ids[j]
                )));
            }
        }
    }
    Ok((StimulusSet::new(ids)?, sim))
}

pub fn write_similarity_csv(
    path: &Path,
    stimuli: &StimulusSet,
    sim: &Array2<f64>,
) -> Result<()> {
    let n = stimuli.n();
    if sim.nrows() != n || sim.ncols() != n {
        return Err(Error::Input("similarity matrix does not match stimulus count".into()));
    }
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["id".to_string()];
    header.extend(stimuli.ids().iter().cloned());
    writer.write_record(&header).map_err(csv_write_error)?;
    for i in 0..n {
        let mut record = vec![stimuli.id(i).to_string()];
        record.extend((0..n).map(|j| format!("{}", sim[[i, j]])));
        writer.write_record(&record).map_err(csv_write_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read an `id,label` CSV.
pub fn read_labels_csv(path: &Path) -> Result<Vec<(String, usize)>> {
    let mut reader = open_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::CsvParse { line: 1, msg: e.to_string() })?
        .clone();
    if headers.len() != 2 || headers.get(0).map(str::trim) != Some("id") {
        return Err(Error::CsvParse {
            line: 1,
            msg: "labels file must have exactly the columns `id,label`".into(),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = record_line(&record);
        let id = record.get(0).unwrap_or("").trim().to_string();
        let label = record
            .get(1)
            .unwrap_or("")
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::CsvParse {
                line,
                msg: format!("label is not a nonnegative integer: `{}`", record.get(1).unwrap_or("")),
            })?;
        out.push((id, label));
    }
    Ok(out)
}

pub fn write_labels_csv(path: &Path, stimuli: &StimulusSet, labels: &[usize]) -> Result<()> {
    if stimuli.n() != labels.len() {
        return Err(Error::Input("label count does not match stimulus count".into()));
    }
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    writer.write_record(["id", "label"]).map_err(csv_write_error)?;
    for (id, label) in stimuli.ids().iter().zip(labels) {
        writer.write_record([id.as_str(), &label.to_string()]).map_err(csv_write_error)?;
    }
    writer.flush()?;
    Ok(())
}

/// Error naming the symmetric difference of two id sets.
fn id_mismatch(reference: &[String], other: &[String]) -> Error {
    let a: BTreeSet<&String> = reference.iter().collect();
    let b: BTreeSet<&String> = other.iter().collect();
    let only_a: Vec<&str> = a.difference(&b).map(|s| s.as_str()).collect();
    let only_b: Vec<&str> = b.difference(&a).map(|s| s.as_str()).collect();
    Error::Input(format!(
        "stimulus ids do not match; only in first: [{}]; only in second: [{}]",
        only_a.join(", "),
        only_b.join(", ")
    ))
}

fn position_map(reference: &[String], other: &[String]) -> Result<Vec<usize>> {
    if reference.len() != other.len() {
        return Err(id_mismatch(reference, other));
    }
    let mut map = Vec::with_capacity(reference.len());
    for id in reference {
        match other.iter().position(|o| o == id) {
            Some(pos) => map.push(pos),
            None => return Err(id_mismatch(reference, other)),
        }
    }
    Ok(map)
}

/// Reorder embedding rows to match a reference id order.
pub fn reorder_embedding(embedding: &EmbeddingSet, ids: &[String]) -> Result<EmbeddingSet> {
    let map = position_map(ids, embedding.stimuli().ids())?;
    let d = embedding.d();
    let mut coords = Array2::<f64>::zeros((ids.len(), d));
    for (row, &src) in map.iter().enumerate() {
        coords.row_mut(row).assign(&embedding.coords().row(src));
    }
    EmbeddingSet::new(StimulusSet::new(ids.to_vec())?, coords)
}

/// Reorder similarity rows and columns to match a reference id order.
pub fn reorder_similarity(
    stimuli: &StimulusSet,
    sim: &Array2<f64>,
    ids: &[String],
) -> Result<(StimulusSet, Array2<f64>)> {
    let map = position_map(ids, stimuli.ids())?;
    let n = ids.len();
    let mut out = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = sim[[map[i], map[j]]];
        }
    }
    Ok((StimulusSet::new(ids.to_vec())?, out))
}

/// Write arbitrary UTF-8 to a file, ensuring a trailing newline.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    file.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}
