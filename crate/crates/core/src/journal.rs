//! Single-file write-ahead journal.
//!
//! The store is a sequence of frames, one per committed transaction:
//!
//! ```text
//! magic "GSJ1" | commit u64 LE | len u32 LE | header digest (8 bytes)
//! payload (len bytes)          | payload SHA-256 (32 bytes)
//! ```
//!
//! A frame that runs past end of file is a torn write from an interrupted
//! commit and is discarded. A complete frame that fails any check is
//! corruption, reported by its position.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 4] = b"GSJ1";
pub const HEADER_LEN: usize = 24;
pub const DIGEST_LEN: usize = 32;

fn header_digest(commit: u64, len: u32) -> [u8; 8] {
    let mut h = Sha256::new();
    h.update(MAGIC);
    h.update(commit.to_le_bytes());
    h.update(len.to_le_bytes());
    let full: [u8; 32] = h.finalize().into();
    full[..8].try_into().unwrap()
}

pub fn encode_frame(commit: u64, payload: &[u8]) -> Vec<u8> {
    let len = u32::try_from(payload.len()).expect("frame payload under 4 GiB");
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&commit.to_le_bytes());
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&header_digest(commit, len));
    out.extend_from_slice(payload);
    out.extend_from_slice(&Sha256::digest(payload));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub commit: u64,
    pub offset: usize,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scan {
    pub frames: Vec<Frame>,
    /// Length of the committed prefix; anything after it is a torn tail.
    pub committed_len: usize,
}

/// A complete frame failed verification. `commit` is the commit number
/// the frame should have carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corruption {
    pub commit: u64,
    pub offset: usize,
}

pub fn scan(bytes: &[u8]) -> Result<Scan, Corruption> {
    let mut frames = Vec::new();
    let mut pos = 0usize;
    loop {
        let expected = frames.len() as u64 + 1;
        let rest = &bytes[pos..];
        if rest.len() < HEADER_LEN {
            break;
        }
        let corrupt = Corruption {
            commit: expected,
            offset: pos,
        };
        let commit = u64::from_le_bytes(rest[4..12].try_into().unwrap());
        let len = u32::from_le_bytes(rest[12..16].try_into().unwrap());
        if &rest[..4] != MAGIC || rest[16..24] != header_digest(commit, len) || commit != expected {
            return Err(corrupt);
        }
        let end = HEADER_LEN + len as usize + DIGEST_LEN;
        if rest.len() < end {
            break;
        }
        let payload = &rest[HEADER_LEN..HEADER_LEN + len as usize];
        if rest[HEADER_LEN + len as usize..end] != Sha256::digest(payload)[..] {
            return Err(corrupt);
        }
        frames.push(Frame {
            commit,
            offset: pos,
            payload: payload.to_vec(),
        });
        pos += end;
    }
    Ok(Scan {
        frames,
        committed_len: pos,
    })
}

/// Where committed frames go.
#[derive(Debug)]
pub enum Journal {
    File(FileJournal),
    Memory(Vec<u8>),
}

impl Journal {
    pub fn append(&mut self, frame: &[u8]) -> io::Result<()> {
        match self {
            Journal::File(f) => f.append(frame),
            Journal::Memory(buf) => {
                buf.extend_from_slice(frame);
                Ok(())
            }
        }
    }

    /// Full journal contents.
    pub fn contents(&self) -> io::Result<Vec<u8>> {
        match self {
            Journal::File(f) => std::fs::read(&f.path),
            Journal::Memory(buf) => Ok(buf.clone()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Journal::File(f) => Some(&f.path),
            Journal::Memory(_) => None,
        }
    }
}

#[derive(Debug)]
pub struct FileJournal {
    path: PathBuf,
    file: File,
    len: u64,
    sync: bool,
}

impl FileJournal {
    /// Opens or creates the store file, returning it with its full
    /// contents. Call [`FileJournal::truncate_to`] after scanning.
    pub fn open(path: &Path, sync: bool) -> io::Result<(Self, Vec<u8>)> {
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let len = bytes.len() as u64;
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                len,
                sync,
            },
            bytes,
        ))
    }

    /// Drops a torn tail.
    pub fn truncate_to(&mut self, len: u64) -> io::Result<()> {
        if len < self.len {
            self.file.set_len(len)?;
            self.file.sync_all()?;
            self.len = len;
        }
        Ok(())
    }

    fn append(&mut self, frame: &[u8]) -> io::Result<()> {
        self.file.seek(SeekFrom::Start(self.len))?;
        let written = self.file.write_all(frame).and_then(|_| {
            if self.sync {
                self.file.sync_data()
            } else {
                Ok(())
            }
        });
        match written {
            Ok(()) => {
                self.len += frame.len() as u64;
                Ok(())
            }
            Err(e) => {
                // Roll the file back so the next append starts on a frame boundary.
                let _ = self.file.set_len(self.len);
                Err(e)
            }
        }
    }
}
