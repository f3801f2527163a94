//! Output-directory handling: creation, a `.lock` guard against two
//! processes writing the same directory, and error-mapped file writes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::errors::CliError;

pub const LOCK_NAME: &str = ".lock";

/// An output directory with an exclusive advisory lock. The lock file is
/// removed on drop; a directory still holding one means another process is
/// writing there (or a previous run died and the file must be cleared by
/// hand).
pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn create(path: &Path) -> Result<OutDir, CliError> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::runtime(format!("create {}: {e}", path.display())))?;
        let lock = path.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => Ok(OutDir { path: path.to_path_buf() }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::runtime(
                format!("{} is locked by another run (remove {} if stale)", path.display(), lock.display()),
            )),
            Err(e) => Err(CliError::runtime(format!("lock {}: {e}", lock.display()))),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        write_file(&self.join(name), contents)
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK_NAME));
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::runtime(format!("write {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("read {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lock_on_same_directory_fails() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        let first = OutDir::create(&dir).unwrap();
        let second = OutDir::create(&dir);
        assert!(second.is_err());
        assert_eq!(second.err().unwrap().exit_code(), 4);
        drop(first);
        // Lock released: a new writer may claim the directory.
        assert!(OutDir::create(&dir).is_ok());
    }

    #[test]
    fn writes_land_inside_the_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = OutDir::create(&tmp.path().join("o")).unwrap();
        dir.write("a.csv", "x\n1\n").unwrap();
        assert_eq!(fs::read_to_string(dir.join("a.csv")).unwrap(), "x\n1\n");
    }
}
