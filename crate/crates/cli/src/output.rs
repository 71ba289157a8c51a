//! Output directory where every file is first written as `<stem>_partial.<ext>`
//! and renamed only when the whole command succeeds.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct Output {
    dir: PathBuf,
    pending: Vec<(PathBuf, PathBuf)>,
}

fn partial_name(name: &str) -> String {
    match name.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_partial.{ext}"),
        None => format!("{name}_partial"),
    }
}

impl Output {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            pending: Vec::new(),
        })
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> io::Result<()>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let tmp = self.dir.join(partial_name(name));
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        self.pending.push((tmp, self.dir.join(name)));
        Ok(())
    }

    /// Rename everything to its final name.
    pub fn commit(self) -> io::Result<Vec<PathBuf>> {
        let mut done = Vec::with_capacity(self.pending.len());
        for (tmp, fin) in self.pending {
            fs::rename(&tmp, &fin)?;
            done.push(fin);
        }
        Ok(done)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_names() {
        assert_eq!(partial_name("a.csv"), "a_partial.csv");
        assert_eq!(partial_name("spectrum_eps0.1.csv"), "spectrum_eps0.1_partial.csv");
        assert_eq!(partial_name("log"), "log_partial");
    }
}
