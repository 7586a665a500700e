use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::settings::Format;

/// Writes `rows` to `dir/stem.csv` or `dir/stem.json` and returns the path.
pub fn write_rows<T: Serialize>(dir: &Path, stem: &str, format: Format, rows: &[T]) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = match format {
        Format::Csv => dir.join(format!("{stem}.csv")),
        Format::Json => dir.join(format!("{stem}.json")),
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(path)
}

/// Whitespace-separated table for gnuplot, `#`-prefixed header.
pub fn write_dat(path: &Path, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    writeln!(f, "# {}", header.join(" "))?;
    for row in rows {
        writeln!(f, "{}", row.join(" "))?;
    }
    Ok(())
}
