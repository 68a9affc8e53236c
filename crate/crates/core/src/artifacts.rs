//! Content-addressed storage for trained state (context statistics, BPE
//! vocabularies). Specs refer to artifacts by the hex SHA-256 of their bytes.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug)]
pub struct ArtifactStore {
    dir: PathBuf,
}

impl ArtifactStore {
    /// Opens (creating if needed) the store rooted at `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(ArtifactStore {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, hash: &str) -> PathBuf {
        self.dir.join(format!("{hash}.bin"))
    }

    /// Writes `bytes` under their hash and returns it. Existing identical
    /// artifacts are left alone.
    pub fn store(&self, bytes: &[u8]) -> Result<String> {
        let hash = content_hash(bytes);
        let path = self.path(&hash);
        if !path.exists() {
            let tmp = self.dir.join(format!(".{hash}.tmp"));
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, &path)?;
        }
        Ok(hash)
    }

    /// Reads an artifact back, verifying its hash.
    pub fn load(&self, hash: &str) -> Result<Vec<u8>> {
        if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::InvalidSpec(format!("`{hash}` is not a SHA-256 hex digest")));
        }
        let path = self.path(hash);
        let bytes = fs::read(&path)
            .map_err(|e| Error::unavailable(format!("artifact {}: {e}", path.display())))?;
        if content_hash(&bytes) != hash {
            return Err(Error::PredictorMismatch(format!("artifact {hash} fails its hash check")));
        }
        Ok(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = ArtifactStore::open(dir.path()).unwrap();
        let hash = store.store(b"abc").unwrap();
        assert_eq!(hash, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(store.load(&hash).unwrap(), b"abc");
        fs::write(store.path(&hash), b"abd").unwrap();
        assert!(matches!(store.load(&hash), Err(Error::PredictorMismatch(_))));
        assert!(matches!(store.load(&"0".repeat(64)), Err(Error::PredictorUnavailable(_))));
    }
}
