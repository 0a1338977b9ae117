use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Files written into a temporary sibling and renamed into place on commit,
/// so an interrupted command never leaves a partial output set behind.
pub struct Staged {
    pending: Vec<(PathBuf, PathBuf)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            pending: Vec::new(),
        })
    }

    pub fn write<F>(&mut self, path: PathBuf, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let tmp = tmp_path(&path);
        write_file(&tmp, fill)?;
        self.pending.push((tmp, path));
        Ok(())
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>, CliError> {
        let mut done = Vec::with_capacity(self.pending.len());
        while !self.pending.is_empty() {
            let (tmp, dest) = &self.pending[0];
            fs::rename(tmp, dest).map_err(|e| CliError::io(dest, e))?;
            done.push(self.pending.remove(0).1);
        }
        Ok(done)
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (tmp, _) in &self.pending {
            let _ = fs::remove_file(tmp);
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

fn write_file<F>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    fill(&mut out)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Writes a single file atomically, or to stdout when `path` is `None`.
pub fn emit<F>(path: Option<&Path>, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            let mut staged = Staged {
                pending: Vec::new(),
            };
            staged.write(path.to_path_buf(), fill)?;
            staged.commit().map(drop)
        }
        None => {
            let stdout = io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            fill(&mut out)
                .and_then(|()| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
