//! Append-only checkpoint of finished map cells.
//!
//! Format: a header line `# yblaser-checkpoint <grid hash>` followed by one
//! `ix,iy,value` line per finished cell. A trailing line without a newline is
//! what an interrupted write leaves behind; it is dropped on resume.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::SweepError;

const MAGIC: &str = "# yblaser-checkpoint";

/// (ix, iy, value) of a finished cell.
pub type Cell = (usize, usize, f64);

pub struct Checkpoint {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Checkpoint {
    /// Opens or creates the checkpoint and returns the cells already done.
    pub fn open(path: &Path, hash: &str, nx: usize, ny: usize) -> Result<(Self, Vec<Cell>), SweepError> {
        let shown = path.display().to_string();
        let io = |source| SweepError::Io {
            path: shown.clone(),
            source,
        };
        let mut finished = Vec::new();
        let mut keep = 0usize;
        if path.exists() {
            let mut text = String::new();
            File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(io)?;
            // Only complete lines count.
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            if !complete.is_empty() {
                let mut lines = complete.lines();
                let header = lines.next().unwrap_or_default();
                let found = header.strip_prefix(MAGIC).map(str::trim).ok_or_else(|| {
                    SweepError::CheckpointFormat {
                        path: shown.clone(),
                        line: 1,
                    }
                })?;
                if found != hash {
                    return Err(SweepError::CheckpointMismatch {
                        path: shown.clone(),
                        found: found.to_string(),
                        expected: hash.to_string(),
                    });
                }
                for (i, line) in lines.enumerate() {
                    let cell = parse_line(line, nx, ny).ok_or(SweepError::CheckpointFormat {
                        path: shown.clone(),
                        line: i + 2,
                    })?;
                    finished.push(cell);
                }
                keep = complete.len();
            }
        }

        let file = OpenOptions::new().create(true).truncate(false).write(true).open(path).map_err(io)?;
        // Drop a partial trailing line before appending.
        file.set_len(keep as u64).map_err(io)?;
        let mut out = BufWriter::new(file);
        out.seek(SeekFrom::End(0)).map_err(io)?;
        if keep == 0 {
            writeln!(out, "{MAGIC} {hash}").and_then(|_| out.flush()).map_err(io)?;
        }
        Ok((
            Checkpoint {
                path: path.to_path_buf(),
                out,
            },
            finished,
        ))
    }

    pub fn append(&mut self, ix: usize, iy: usize, value: f64) -> Result<(), SweepError> {
        writeln!(self.out, "{ix},{iy},{value}")
            .and_then(|_| self.out.flush())
            .map_err(|source| SweepError::Io {
                path: self.path.display().to_string(),
                source,
            })
    }
}

fn parse_line(line: &str, nx: usize, ny: usize) -> Option<Cell> {
    let mut parts = line.split(',');
    let ix: usize = parts.next()?.trim().parse().ok()?;
    let iy: usize = parts.next()?.trim().parse().ok()?;
    let v: f64 = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() || ix >= nx || iy >= ny {
        return None;
    }
    Some((ix, iy, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_partial_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.txt");
        {
            let (mut ck, done) = Checkpoint::open(&path, "abc", 3, 3).unwrap();
            assert!(done.is_empty());
            ck.append(0, 0, 1.5).unwrap();
            ck.append(2, 1, f64::NAN).unwrap();
        }
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "1,2,0.2").unwrap();
        drop(f);

        let (mut ck, done) = Checkpoint::open(&path, "abc", 3, 3).unwrap();
        assert_eq!(done.len(), 2);
        assert_eq!(done[0], (0, 0, 1.5));
        assert!(done[1].2.is_nan());
        ck.append(1, 2, 0.25).unwrap();
        drop(ck);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.ends_with("2,1,NaN\n1,2,0.25\n"), "{text}");
    }

    #[test]
    fn refuses_other_grid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.txt");
        drop(Checkpoint::open(&path, "abc", 2, 2).unwrap());
        assert!(matches!(
            Checkpoint::open(&path, "def", 2, 2),
            Err(SweepError::CheckpointMismatch { .. })
        ));
    }

    #[test]
    fn out_of_range_cell_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.txt");
        std::fs::write(&path, "# yblaser-checkpoint abc\n5,0,1\n").unwrap();
        assert!(matches!(
            Checkpoint::open(&path, "abc", 2, 2),
            Err(SweepError::CheckpointFormat { line: 2, .. })
        ));
    }
}
