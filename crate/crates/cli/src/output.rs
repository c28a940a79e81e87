use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] subreg_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0} already exists with different contents (pass --force to overwrite)")]
    OutputExists(PathBuf),

    #[error("{0}")]
    Failed(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Files a command intends to write. Nothing is written until every target has been
/// checked: an existing file with identical contents is left alone, a different one
/// needs `--force`.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<String>) {
        self.files.push((path.into(), contents.into()));
    }

    pub fn commit(self, force: bool) -> CliResult<()> {
        let mut pending = Vec::new();
        for (path, contents) in self.files {
            match fs::read_to_string(&path) {
                Ok(existing) if existing == contents => continue,
                Ok(_) if !force => return Err(CliError::OutputExists(path)),
                _ => pending.push((path, contents)),
            }
        }
        for (path, contents) in pending {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            fs::write(&path, contents).map_err(io_err(&path))?;
        }
        Ok(())
    }
}

/// The single `key=value` line every command ends with.
pub struct Summary {
    line: String,
}

impl Summary {
    pub fn new(command: &str) -> Self {
        Self {
            line: command.to_string(),
        }
    }

    pub fn kv(mut self, key: &str, value: impl fmt::Display) -> Self {
        let v = value.to_string();
        let v = if v.is_empty() || v.contains(char::is_whitespace) { format!("{v:?}") } else { v };
        self.line.push_str(&format!(" {key}={v}"));
        self
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line)
    }
}
