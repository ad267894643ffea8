//! Long-format CSV files for paths, targets and signature features.
//!
//! Paths: header `sample_id,time,c1,...,cd`, one row per sample point, rows of
//! a sample contiguous and in increasing time. Targets: header `sample_id,y`.
//! Numbers are written with the shortest representation that reads back to
//! the same `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use sigreg_core::{SampledPath, SigShape};

use crate::error::{CliError, IngestError, Result};

/// Paths with their sample ids and, when available, aligned targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub ids: Vec<String>,
    pub paths: Vec<SampledPath>,
    pub targets: Vec<f64>,
}

/// Paths read from a file, with the line where each sample starts.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    pub ids: Vec<String>,
    pub paths: Vec<SampledPath>,
    pub lines: Vec<u64>,
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn malformed(file: &str, e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::Malformed {
        file: file.to_string(),
        line,
        detail: e.to_string(),
    }
}

fn number(
    file: &str,
    line: u64,
    column: &str,
    cell: &str,
) -> std::result::Result<f64, IngestError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IngestError::NonNumeric {
            file: file.to_string(),
            line,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

struct Group {
    id: String,
    line: u64,
    times: Vec<f64>,
    values: Vec<f64>,
}

fn close_group(
    file: &str,
    g: Group,
    d: usize,
    out: &mut PathTable,
) -> std::result::Result<(), IngestError> {
    if g.times.len() < 2 {
        return Err(IngestError::TooShort {
            file: file.to_string(),
            line: g.line,
            id: g.id,
            rows: g.times.len(),
        });
    }
    let path = SampledPath::new(g.times, g.values, d).map_err(|e| IngestError::Malformed {
        file: file.to_string(),
        line: g.line,
        detail: e.to_string(),
    })?;
    out.ids.push(g.id);
    out.paths.push(path);
    out.lines.push(g.line);
    Ok(())
}

/// Parses a long-format paths file. `file` labels error messages.
pub fn read_paths<R: Read>(input: R, file: &str) -> std::result::Result<PathTable, IngestError> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| malformed(file, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let d = names.len().saturating_sub(2);
    let expected: Vec<String> = ["sample_id".to_string(), "time".to_string()]
        .into_iter()
        .chain((1..=d).map(|k| format!("c{k}")))
        .collect();
    if d == 0 || names != expected {
        return Err(IngestError::MissingColumns {
            file: file.to_string(),
            line: 1,
            detail: format!(
                "expected header sample_id,time,c1..cd, found {:?}",
                names.join(",")
            ),
        });
    }
    let mut table = PathTable {
        ids: Vec::new(),
        paths: Vec::new(),
        lines: Vec::new(),
    };
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut current: Option<Group> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| malformed(file, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(IngestError::MissingColumns {
                file: file.to_string(),
                line,
                detail: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        let id = &record[0];
        let time = number(file, line, "time", &record[1])?;
        let mut row = Vec::with_capacity(d);
        for k in 0..d {
            row.push(number(file, line, &names[k + 2], &record[k + 2])?);
        }
        match current.as_mut() {
            Some(g) if g.id == id => {
                let last = *g.times.last().expect("groups start non-empty");
                if !(time > last) {
                    return Err(IngestError::Unsorted {
                        file: file.to_string(),
                        line,
                        detail: format!(
                            "time {time} of sample {id:?} does not increase (previous {last})"
                        ),
                    });
                }
                g.times.push(time);
                g.values.extend(row);
            }
            _ => {
                if let Some(first) = seen.get(id) {
                    return Err(IngestError::Unsorted {
                        file: file.to_string(),
                        line,
                        detail: format!(
                            "sample {id:?} reappears after other samples (first seen on line {first})"
                        ),
                    });
                }
                seen.insert(id.to_string(), line);
                if let Some(g) = current.take() {
                    close_group(file, g, d, &mut table)?;
                }
                current = Some(Group {
                    id: id.to_string(),
                    line,
                    times: vec![time],
                    values: row,
                });
            }
        }
    }
    match current {
        Some(g) => close_group(file, g, d, &mut table)?,
        None => {
            return Err(IngestError::NoData {
                file: file.to_string(),
            })
        }
    }
    Ok(table)
}

/// Parses a targets file into `(id, y, line)` triples.
pub fn read_targets<R: Read>(
    input: R,
    file: &str,
) -> std::result::Result<Vec<(String, f64, u64)>, IngestError> {
    let mut rdr = reader(input);
    let header = rdr.headers().map_err(|e| malformed(file, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["sample_id", "y"] {
        return Err(IngestError::MissingColumns {
            file: file.to_string(),
            line: 1,
            detail: format!(
                "expected header sample_id,y, found {:?}",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| malformed(file, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(IngestError::MissingColumns {
                file: file.to_string(),
                line,
                detail: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let id = record[0].to_string();
        if seen.insert(id.clone(), line).is_some() {
            return Err(IngestError::Duplicate {
                file: file.to_string(),
                line,
                id,
            });
        }
        let y = number(file, line, "y", &record[1])?;
        out.push((id, y, line));
    }
    if out.is_empty() {
        return Err(IngestError::NoData {
            file: file.to_string(),
        });
    }
    Ok(out)
}

/// Orders targets like the paths; every id must appear in both files.
pub fn align(
    table: PathTable,
    targets: Vec<(String, f64, u64)>,
    paths_file: &str,
    targets_file: &str,
) -> std::result::Result<Labeled, IngestError> {
    let lookup: HashMap<&str, (f64, u64)> = targets
        .iter()
        .map(|(id, y, line)| (id.as_str(), (*y, *line)))
        .collect();
    let mut ys = Vec::with_capacity(table.ids.len());
    for (id, line) in table.ids.iter().zip(&table.lines) {
        match lookup.get(id.as_str()) {
            Some((y, _)) => ys.push(*y),
            None => {
                return Err(IngestError::IdMismatch {
                    file: paths_file.to_string(),
                    line: *line,
                    detail: format!("sample {id:?} has no target in {targets_file}"),
                })
            }
        }
    }
    if targets.len() != table.ids.len() {
        let known: std::collections::HashSet<&str> = table.ids.iter().map(String::as_str).collect();
        if let Some((id, _, line)) = targets
            .iter()
            .find(|(id, _, _)| !known.contains(id.as_str()))
        {
            return Err(IngestError::IdMismatch {
                file: targets_file.to_string(),
                line: *line,
                detail: format!("sample {id:?} has no path in {paths_file}"),
            });
        }
    }
    Ok(Labeled {
        ids: table.ids,
        paths: table.paths,
        targets: ys,
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

/// Reads a paths file from disk.
pub fn load_paths(path: &Path) -> Result<PathTable> {
    Ok(read_paths(open(path)?, &path.display().to_string())?)
}

/// Reads and aligns a paths file and a targets file.
pub fn ingest_csv(paths_file: &Path, targets_file: &Path) -> Result<Labeled> {
    let pf = paths_file.display().to_string();
    let tf = targets_file.display().to_string();
    let table = read_paths(open(paths_file)?, &pf)?;
    let targets = read_targets(open(targets_file)?, &tf)?;
    Ok(align(table, targets, &pf, &tf)?)
}

/// Shortest round-trip text of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> std::io::Result<()> {
    w.flush()
}

pub fn write_paths<W: Write>(out: W, ids: &[String], paths: &[SampledPath]) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    let d = paths.first().map_or(0, SampledPath::dim);
    let mut header = vec!["sample_id".to_string(), "time".to_string()];
    header.extend((1..=d).map(|k| format!("c{k}")));
    w.write_record(&header)?;
    for (id, path) in ids.iter().zip(paths) {
        for (t, row) in path.times().iter().zip(path.rows()) {
            let mut rec = vec![id.clone(), fmt_f64(*t)];
            rec.extend(row.iter().map(|v| fmt_f64(*v)));
            w.write_record(&rec)?;
        }
    }
    flush(w)
}

pub fn write_targets<W: Write>(out: W, ids: &[String], targets: &[f64]) -> std::io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["sample_id", "y"])?;
    for (id, y) in ids.iter().zip(targets) {
        w.write_record([id.as_str(), &fmt_f64(*y)])?;
    }
    flush(w)
}

/// Column label of a signature coefficient: `S()`, `S(2)`, `S(1-3)`.
pub fn word_label(word: &[usize]) -> String {
    let digits: Vec<String> = word.iter().map(usize::to_string).collect();
    format!("S({})", digits.join("-"))
}

pub fn write_signatures<W: Write>(
    out: W,
    ids: &[String],
    shape: &SigShape,
    features: &DMatrix<f64>,
) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["sample_id".to_string()];
    for offset in 0..shape.len() {
        header.push(word_label(&shape.word_of(offset)?));
    }
    let io = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(&header).map_err(io)?;
    for (i, id) in ids.iter().enumerate() {
        let mut rec = vec![id.clone()];
        rec.extend(features.row(i).iter().map(|v| fmt_f64(*v)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Data(e.to_string()))
}
