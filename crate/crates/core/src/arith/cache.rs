//! On-disk spf cache: 16-byte header (`SPF1`, 4 zero bytes, limit as u64 LE)
//! followed by `limit + 1` little-endian u32 entries.

use super::FactorSieve;
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "TSL_CACHE_DIR";
const MAGIC: &[u8; 4] = b"SPF1";

pub fn cache_path(limit: u64) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    if dir.is_empty() {
        return None;
    }
    Some(Path::new(&dir).join(format!("spf_{limit}.bin")))
}

pub fn save_cache(s: &FactorSieve, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
    w.write_all(MAGIC)?;
    w.write_all(&[0u8; 4])?;
    w.write_all(&s.limit().to_le_bytes())?;
    for &v in s.raw() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    drop(w);
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_cache(path: &Path, limit: u64) -> Result<FactorSieve> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut head = [0u8; 16];
    f.read_exact(&mut head).map_err(|_| Error::Cache("truncated header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let stored = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes"));
    if stored != limit {
        return Err(Error::Cache(format!("cache limit {stored} != requested {limit}")));
    }
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    if bytes.len() as u64 != (limit + 1) * 4 {
        return Err(Error::Cache("payload length mismatch".into()));
    }
    let spf: Vec<u32> = bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    if spf[0] != 0 || spf[1] != 1 {
        return Err(Error::Cache("corrupt prefix".into()));
    }
    Ok(FactorSieve::from_parts(limit, spf))
}
