use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes the files of one run into `dir/stem.*`. Every file opens with the
/// artifact version and the resolved configuration.
pub struct Output {
    dir: PathBuf,
    stem: String,
    header: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, stem: &str, command: &str, config: &impl Serialize) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let config = serde_json::to_string(config)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            header: vec![format!("dbo-lab {VERSION} {command}"), format!("config {config}")],
        })
    }

    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }

    pub fn file_name(&self, ext: &str) -> String {
        format!("{}.{ext}", self.stem)
    }

    /// `#` metadata lines, `extra` lines, a header row, then one record per row.
    pub fn csv<T: Serialize>(&self, ext: &str, extra: &[String], rows: &[T]) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        for line in self.header.iter().chain(extra) {
            writeln!(buf, "# {line}")?;
        }
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut buf);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        let path = self.path(ext);
        fs::write(&path, buf)?;
        Ok(path)
    }

    /// `{"version": …, "config": …, <body fields>}`.
    pub fn json(&self, ext: &str, body: &impl Serialize) -> Result<PathBuf, CliError> {
        let mut map = serde_json::Map::new();
        map.insert("version".into(), serde_json::Value::String(VERSION.into()));
        let config: serde_json::Value = serde_json::from_str(self.header[1].trim_start_matches("config "))?;
        map.insert("config".into(), config);
        match serde_json::to_value(body)? {
            serde_json::Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(map))?;
        text.push('\n');
        let path = self.path(ext);
        fs::write(&path, text)?;
        Ok(path)
    }

    /// A gnuplot script, prefixed with the metadata as comments.
    pub fn gnuplot(&self, body: &str) -> Result<PathBuf, CliError> {
        let mut text = String::new();
        for line in &self.header {
            text.push_str(&format!("# {line}\n"));
        }
        text.push_str(body);
        let path = self.path("gp");
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Log-log plot of column `y` against column `x` with a guide line of
/// slope `predicted` through the first point.
pub fn loglog_script(data: &str, x: usize, y: usize, xlabel: &str, ylabel: &str, anchor: (f64, f64), predicted: f64) -> String {
    let (x0, y0) = anchor;
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel '{xlabel}'\n\
         set ylabel '{ylabel}'\n\
         set key top left\n\
         guide(x) = {y0:e} * (x / {x0:e})**({predicted})\n\
         plot '{data}' using {x}:{y} skip 1 with linespoints title 'measured', \\\n     \
         guide(x) with lines dashtype 2 title 'predicted slope {predicted}'\n"
    )
}
