//! Run reports: `key = value` sections plus CSV field dumps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::constructions::Verdict;
use crate::error::Result;
use crate::field::{fmt17, FieldFunction};
use crate::geometry::Grid;

/// Renders a scalar for the report.
pub trait ReportValue {
    fn render(&self) -> String;
}

impl ReportValue for f64 {
    fn render(&self) -> String {
        fmt17(*self)
    }
}

impl ReportValue for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ReportValue for bool {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ReportValue for &str {
    fn render(&self) -> String {
        (*self).to_string()
    }
}

impl ReportValue for String {
    fn render(&self) -> String {
        self.clone()
    }
}

impl ReportValue for Verdict {
    fn render(&self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub name: String,
    pub grid: Grid,
    sections: Vec<(String, Vec<(String, String)>)>,
    pub fields: Vec<(String, FieldFunction)>,
    /// Extra CSV tables: `(file stem, contents)`.
    pub tables: Vec<(String, String)>,
    /// Headline values used by sweep tables, in insertion order.
    pub summary: Vec<(String, String)>,
    pub existence_certified: Option<bool>,
    pub nonexistence: Option<Verdict>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn new(name: &str, grid: Grid) -> Self {
        RunReport {
            name: name.to_string(),
            grid,
            sections: Vec::new(),
            fields: Vec::new(),
            tables: Vec::new(),
            summary: Vec::new(),
            existence_certified: None,
            nonexistence: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn put(&mut self, section: &str, key: &str, value: impl ReportValue) {
        let v = value.render();
        match self.sections.iter_mut().find(|(s, _)| s == section) {
            Some((_, entries)) => entries.push((key.to_string(), v)),
            None => self.sections.push((section.to_string(), vec![(key.to_string(), v)])),
        }
    }

    /// Also records the value in the sweep summary under `key`.
    pub fn headline(&mut self, section: &str, key: &str, value: impl ReportValue) {
        let v = value.render();
        self.summary.push((key.to_string(), v.clone()));
        self.put(section, key, v);
    }

    pub fn field(&mut self, name: &str, field: FieldFunction) {
        self.fields.push((name.to_string(), field));
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)?
            .1
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, section: &str, key: &str) -> Option<f64> {
        self.get(section, key)?.parse().ok()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, (section, entries)) in self.sections.iter().enumerate() {
            if k > 0 {
                out.push('\n');
            }
            out.push_str(&format!("[{section}]\n"));
            for (key, value) in entries {
                out.push_str(&format!("{key} = {value}\n"));
            }
        }
        if !self.fields.is_empty() || !self.tables.is_empty() {
            out.push_str("\n[fields]\n");
            for (name, _) in &self.fields {
                out.push_str(&format!("{name} = fields/{name}.csv\n"));
            }
            for (name, _) in &self.tables {
                out.push_str(&format!("{name} = fields/{name}.csv\n"));
            }
        }
        out
    }

    /// Writes `report.txt`, `fields/*.csv` and `timing.txt` under
    /// `<out_dir>/<name>/` and returns that directory.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let dir = out_dir.join(&self.name);
        let fields = dir.join("fields");
        fs::create_dir_all(&fields)?;
        fs::write(dir.join("report.txt"), self.render())?;
        for (name, f) in &self.fields {
            f.write_csv(&self.grid, &fields.join(format!("{name}.csv")))?;
        }
        for (name, body) in &self.tables {
            fs::write(fields.join(format!("{name}.csv")), body)?;
        }
        fs::write(dir.join("timing.txt"), format!("wall_time_seconds = {:.6}\n", self.wall_time.as_secs_f64()))?;
        Ok(dir)
    }
}
