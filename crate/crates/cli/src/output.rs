//! Output sinks. Files are written to a temporary sibling and renamed into
//! place, so a failed run never leaves a half-written artifact behind.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Self { dir })
    }

    pub fn to_directory(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` inside the output directory, or to stdout without one.
    pub fn emit<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        match &self.dir {
            Some(dir) => write_atomic(&dir.join(name), body),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                body(&mut lock).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
                lock.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))
            }
        }
    }

    /// Like [`Sink::emit`] but skipped entirely when writing to stdout.
    pub fn sidecar<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        match &self.dir {
            Some(dir) => write_atomic(&dir.join(name), body),
            None => Ok(()),
        }
    }
}

pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut buf).map_err(|e| CliError::io(path, e))?;
        buf.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn json<T: serde::Serialize>(value: &T) -> impl FnOnce(&mut dyn Write) -> std::io::Result<()> + '_ {
    move |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    }
}

/// Adapts a csv-writing closure to the sink's `io::Result`.
pub fn csv_body<'a, F>(f: F) -> impl FnOnce(&mut dyn Write) -> std::io::Result<()> + 'a
where
    F: FnOnce(&mut dyn Write) -> csv::Result<()> + 'a,
{
    move |w| f(w).map_err(std::io::Error::other)
}
