use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Recommended block size: 4 KiB.
pub const DEFAULT_BLOCK_BITS: usize = 4096 * 8;

enum Backend {
    Memory(Bits),
    File { file: Mutex<File>, len: u64 },
}

/// The private data viewed as `ℓ` blocks of `n` bits, the last one
/// zero-padded. Every block fetch is counted.
pub struct BlockSource {
    n: usize,
    ell: usize,
    backend: Backend,
    reads: AtomicU64,
}

impl std::fmt::Debug for BlockSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockSource")
            .field("n", &self.n)
            .field("ell", &self.ell)
            .field("reads", &self.read_count())
            .finish()
    }
}

fn block_count(data_bits: u64, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    if data_bits == 0 {
        return Err(Error::invalid("empty input"));
    }
    let ell = data_bits.div_ceil(n as u64);
    if ell > super::super::disperser::MAX_VERTICES as u64 {
        return Err(Error::invalid(format!("{ell} blocks exceed the 2^31 limit")));
    }
    Ok(ell as usize)
}

/// In-memory source over `data`; any `n ≥ 1`.
pub fn split_blocks(data: &[u8], n: usize) -> Result<BlockSource> {
    let ell = block_count(data.len() as u64 * 8, n)?;
    Ok(BlockSource {
        n,
        ell,
        backend: Backend::Memory(Bits::from_vec(data.to_vec())),
        reads: AtomicU64::new(0),
    })
}

impl BlockSource {
    /// In-memory source over an explicit list of `n`-bit blocks.
    pub fn from_blocks(blocks: &[Bits]) -> Result<Self> {
        let n = blocks
            .first()
            .map(Bits::len)
            .ok_or_else(|| Error::invalid("empty input"))?;
        if blocks.iter().any(|b| b.len() != n) {
            return Err(Error::DimensionMismatch("blocks of unequal length".into()));
        }
        let ell = block_count((n * blocks.len()) as u64, n)?;
        Ok(BlockSource {
            n,
            ell,
            backend: Backend::Memory(Bits::concat(blocks)),
            reads: AtomicU64::new(0),
        })
    }

    /// File-backed source; blocks are fetched with positioned reads on
    /// demand. `n` must be a multiple of 8.
    pub fn open(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        if !n.is_multiple_of(8) {
            return Err(Error::invalid(format!(
                "file-backed sources need n divisible by 8, got {n}"
            )));
        }
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        let ell = block_count(len * 8, n)?;
        Ok(BlockSource {
            n,
            ell,
            backend: Backend::File {
                file: Mutex::new(file),
                len,
            },
            reads: AtomicU64::new(0),
        })
    }

    pub fn block_bits(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.ell
    }

    /// Total block fetches since construction.
    pub fn read_count(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    /// Fetches block `i`.
    pub fn read_block(&self, i: usize) -> Result<Bits> {
        if i >= self.ell {
            return Err(Error::OutOfRange {
                index: i,
                bound: self.ell,
            });
        }
        self.reads.fetch_add(1, Ordering::Relaxed);
        match &self.backend {
            Backend::Memory(bits) => Ok(bits.slice(i * self.n, self.n)),
            Backend::File { file, len } => {
                let bytes = self.n / 8;
                let start = i as u64 * bytes as u64;
                let avail = (len - start).min(bytes as u64) as usize;
                let mut buf = vec![0u8; bytes];
                let mut f = file.lock().unwrap_or_else(|e| e.into_inner());
                f.seek(SeekFrom::Start(start))?;
                f.read_exact(&mut buf[..avail])?;
                Ok(Bits::from_vec(buf))
            }
        }
    }
}
