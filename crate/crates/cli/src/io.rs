//! CSV and JSON files.

use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use aq_core::Sample;
use serde::Serialize;

/// A numeric table with a header row.
#[derive(Debug, Clone)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if names.is_empty() {
            bail!("{} has no header", path.display());
        }
        let mut columns = vec![Vec::new(); names.len()];
        for (row, record) in reader.records().enumerate() {
            let record = record.with_context(|| format!("{}: bad row {}", path.display(), row + 2))?;
            for (k, field) in record.iter().enumerate() {
                let value = match field.to_ascii_lowercase().as_str() {
                    "true" => 1.0,
                    "false" => 0.0,
                    _ => field.parse::<f64>().with_context(|| {
                        format!("{}: row {}, column {:?}: not a number: {field:?}", path.display(), row + 2, names[k])
                    })?,
                };
                columns[k].push(value);
            }
        }
        if columns[0].is_empty() {
            bail!("{} has no data rows", path.display());
        }
        Ok(Self { names, columns })
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        match self.names.iter().position(|n| n == name) {
            Some(k) => Ok(&self.columns[k]),
            None => bail!("no column named {name:?}"),
        }
    }

    /// Every column not in `excluded`, in table order, as a sample.
    pub fn sample_without(&self, excluded: &[&str]) -> Result<Sample> {
        let keep: Vec<usize> = (0..self.names.len())
            .filter(|&k| !excluded.contains(&self.names[k].as_str()))
            .collect();
        if keep.is_empty() {
            bail!("no input columns left");
        }
        let data = (0..self.rows())
            .flat_map(|i| keep.iter().map(move |&k| self.columns[k][i]))
            .collect();
        let names = keep.iter().map(|&k| self.names[k].clone()).collect();
        Ok(Sample::from_rows(keep.len(), data)?.with_names(names)?)
    }
}

pub fn write_sample(path: &Path, sample: &Sample, labels: Option<&[usize]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut header: Vec<String> = sample.names().to_vec();
    if labels.is_some() {
        header.push("component".into());
    }
    w.write_record(&header)?;
    for (i, p) in sample.points().enumerate() {
        let mut row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if let Some(l) = labels {
            row.push(l[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
