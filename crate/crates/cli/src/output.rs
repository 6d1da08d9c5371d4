use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

/// File name of the per-run log. Its first line carries the wall-clock time;
/// every other line depends only on the inputs and flags.
pub const RUN_LOG: &str = "run.log";

/// Output directory plus the notes that end up in `run.log`.
pub struct RunDir {
    pub dir: PathBuf,
    notes: Vec<String>,
}

impl RunDir {
    pub fn create(dir: &Path, command: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        Ok(RunDir { dir: dir.to_path_buf(), notes: vec![format!("command: {command}")] })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn info(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::info!("{msg}");
        self.notes.push(msg);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.notes.push(format!("warning: {msg}"));
    }

    /// Writes `name` through a buffered writer handed to `f`.
    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).map_err(CliError::io(&path))?);
        f(&mut w)?;
        w.flush().map_err(CliError::io(&path))?;
        self.notes.push(format!("wrote {name}"));
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| w.write_all(text.as_bytes()).map_err(CliError::io(name)))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("summaries serialize");
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn finish(self) -> Result<(), CliError> {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut text = format!("timestamp: {secs}\n");
        for n in &self.notes {
            text.push_str(n);
            text.push('\n');
        }
        let path = self.path(RUN_LOG);
        std::fs::write(&path, text).map_err(CliError::io(&path))
    }
}
