use std::io::Write;
use std::path::{Path, PathBuf};

use lssvr_core::{Error, Result};
use tempfile::NamedTempFile;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file. `None` means stdout.
pub fn write_output(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(path) => write_atomic(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Summary lines go to stdout when the main output went to a file, and to
/// stderr otherwise so they don't corrupt it.
pub struct Report {
    to_stdout: bool,
}

impl Report {
    pub fn new(out: Option<&Path>) -> Self {
        Report {
            to_stdout: out.is_some(),
        }
    }

    pub fn line(&self, text: impl AsRef<str>) {
        if self.to_stdout {
            println!("{}", text.as_ref());
        } else {
            eprintln!("{}", text.as_ref());
        }
    }
}
