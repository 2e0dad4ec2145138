//! On-disk prime tables: `primes-<limit>.bin` holding a 16-byte header
//! (`b"PRMT"`, u32 version, u64 limit; little-endian) followed by every
//! prime as a little-endian u64.

use super::PrimeTable;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: [u8; 4] = *b"PRMT";
const VERSION: u32 = 1;

pub(crate) fn path_for(dir: &Path, limit: u64) -> PathBuf {
    dir.join(format!("primes-{limit}.bin"))
}

/// Returns `None` for a missing, truncated or mismatched file.
pub(crate) fn load(dir: &Path, limit: u64) -> Option<PrimeTable> {
    let file = File::open(path_for(dir, limit)).ok()?;
    let mut r = BufReader::new(file);
    let mut header = [0u8; 16];
    r.read_exact(&mut header).ok()?;
    if header[..4] != MAGIC
        || u32::from_le_bytes(header[4..8].try_into().ok()?) != VERSION
        || u64::from_le_bytes(header[8..16].try_into().ok()?) != limit
    {
        return None;
    }
    let mut builder = PrimeTable::builder(limit);
    let mut last = 0u64;
    let mut word = [0u8; 8];
    loop {
        match r.read_exact(&mut word) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(_) => return None,
        }
        let p = u64::from_le_bytes(word);
        if p <= last || p > limit || p - last > u64::from(u16::MAX) {
            return None;
        }
        builder.push(p);
        last = p;
    }
    Some(builder.finish())
}

pub(crate) fn store(dir: &Path, table: &PrimeTable) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let path = path_for(dir, table.limit());
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&table.limit().to_le_bytes())?;
        for p in table.iter() {
            w.write_all(&p.to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(tmp, path)
}
