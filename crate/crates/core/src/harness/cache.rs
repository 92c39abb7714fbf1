//! Content-addressed on-disk cache of oracle diagrams.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::diagram::PersistenceDiagram;
use crate::error::Result;
use crate::signals::SignalSpec;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "CUBEPERSIST_CACHE_DIR";

/// Cache location: `$CUBEPERSIST_CACHE_DIR`, else a directory under the
/// system temp dir.
pub fn cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => std::env::temp_dir().join("cubepersist-cache"),
    }
}

/// Hex digest identifying the oracle diagram of `spec` at `oracle_n`.
pub fn oracle_key(spec: &SignalSpec, oracle_n: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"oracle-v1\0");
    hasher.update(serde_json::to_vec(spec).expect("spec serialises"));
    hasher.update(oracle_n.to_le_bytes());
    hex::encode(hasher.finalize())
}

/// Oracle diagram, read from `dir` when present and computed and stored
/// otherwise. A corrupt cache entry is recomputed.
pub fn cached_oracle_in(dir: &Path, spec: &SignalSpec, oracle_n: usize) -> Result<PersistenceDiagram> {
    let path = dir.join(format!("{}.csv", oracle_key(spec, oracle_n)));
    if let Ok(d) = PersistenceDiagram::read_csv_file(&path) {
        return Ok(d);
    }
    let dgm = spec.true_diagram_oracle(oracle_n)?;
    std::fs::create_dir_all(dir)?;
    // write then rename so readers never see a partial file
    let tmp = dir.join(format!(".{}.{}.tmp", oracle_key(spec, oracle_n), std::process::id()));
    dgm.write_csv_file(&tmp)?;
    std::fs::rename(&tmp, &path)?;
    Ok(dgm)
}

pub fn cached_oracle(spec: &SignalSpec, oracle_n: usize) -> Result<PersistenceDiagram> {
    cached_oracle_in(&cache_dir(), spec, oracle_n)
}

/// True diagram: closed form when one exists, else the cached oracle.
pub fn truth_diagram(spec: &SignalSpec, oracle_n: usize) -> Result<PersistenceDiagram> {
    match spec.true_diagram_closed_form() {
        Ok(d) => Ok(d),
        Err(crate::error::Error::Unsupported(_)) => cached_oracle(spec, oracle_n),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_specs_and_resolutions() {
        let a = oracle_key(&SignalSpec::OneDimCos, 800);
        assert_eq!(a, oracle_key(&SignalSpec::OneDimCos, 800));
        assert_ne!(a, oracle_key(&SignalSpec::OneDimCos, 801));
        assert_ne!(a, oracle_key(&SignalSpec::CosSineDisc, 800));
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn cache_round_trips_and_recovers() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SignalSpec::OneDimCos;
        let first = cached_oracle_in(dir.path(), &spec, 900).unwrap();
        let path = dir.path().join(format!("{}.csv", oracle_key(&spec, 900)));
        assert!(path.exists());
        assert_eq!(cached_oracle_in(dir.path(), &spec, 900).unwrap(), first);
        std::fs::write(&path, "garbage").unwrap();
        assert_eq!(cached_oracle_in(dir.path(), &spec, 900).unwrap(), first);
    }
}
