//! On-disk cache of cell tables.
//!
//! Each (sample seed, mesh size, temperature index) entry is one file: an
//! ASCII header terminated by a line `end`, followed by little-endian `f64`
//! values (the effective coefficients, then every non-empty function slot).
//! The header records the slot lengths and a SHA-256 of the payload. A
//! `manifest.json` at the cache root lists all completed entries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::functions::{CellFunctionSet, SLOT_COUNT};
use crate::effective::{EffectiveSample, FLAT_LEN};
use crate::error::{Error, Result};

const MAGIC: &str = "thermoscale cell table v1";

/// Hex SHA-256 digest of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub n: usize,
    pub temperature_index: usize,
    pub temperature: f64,
    pub file: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Clone, Debug)]
pub struct CellCache {
    root: PathBuf,
}

impl CellCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CellCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Directory for one sample; `context` hashes everything else the tables
    /// depend on (laws, grid, options, geometry).
    pub fn sample_dir(&self, seed: u64, n: usize, context: &str) -> PathBuf {
        self.root.join(format!("seed{seed}-n{n}-{}", &context[..16.min(context.len())]))
    }

    pub fn entry_path(&self, seed: u64, n: usize, context: &str, index: usize) -> PathBuf {
        self.sample_dir(seed, n, context).join(format!("t{index:03}.cell"))
    }

    pub fn store(
        &self,
        seed: u64,
        n: usize,
        context: &str,
        index: usize,
        set: &CellFunctionSet,
        eff: &EffectiveSample,
    ) -> Result<PathBuf> {
        let path = self.entry_path(seed, n, context, index);
        fs::create_dir_all(path.parent().expect("entry has a parent"))?;
        let mut payload = Vec::new();
        for v in eff.to_flat().iter().chain(set.slots.iter().flatten()) {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        let lengths: Vec<String> = set.slots.iter().map(|s| s.len().to_string()).collect();
        let header = format!(
            "{MAGIC}\nseed {seed}\nn {n}\nnodes {}\ntemperature_index {index}\ntemperature {:e}\nslots {}\nsha256 {}\nend\n",
            set.nodes,
            eff.temperature,
            lengths.join(","),
            sha256_hex(&payload)
        );
        // write then rename so readers never see a partial entry
        let tmp = path.with_extension("tmp");
        let mut f = fs::File::create(&tmp)?;
        f.write_all(header.as_bytes())?;
        f.write_all(&payload)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads an entry; `Ok(None)` if it does not exist.
    pub fn load(
        &self,
        seed: u64,
        n: usize,
        context: &str,
        index: usize,
    ) -> Result<Option<(CellFunctionSet, EffectiveSample)>> {
        let path = self.entry_path(seed, n, context, index);
        match fs::read(&path) {
            Ok(bytes) => decode(&path, &bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn read_manifest(&self) -> Result<Manifest> {
        match fs::read_to_string(self.manifest_path()) {
            Ok(s) => serde_json::from_str(&s).map_err(|e| Error::CacheCorrupt {
                path: self.manifest_path(),
                reason: e.to_string(),
            }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Manifest::default()),
            Err(e) => Err(e.into()),
        }
    }

    /// Adds entries to the manifest, keeping it sorted and free of duplicates.
    pub fn record(&self, new: Vec<ManifestEntry>) -> Result<()> {
        let mut m = self.read_manifest()?;
        m.entries.extend(new);
        m.entries.sort_by(|a, b| {
            (a.seed, a.n, &a.file, a.temperature_index).cmp(&(b.seed, b.n, &b.file, b.temperature_index))
        });
        m.entries.dedup_by(|a, b| a.file == b.file);
        fs::create_dir_all(&self.root)?;
        let text = serde_json::to_string_pretty(&m).map_err(|e| Error::InvalidInput(e.to_string()))?;
        fs::write(self.manifest_path(), text)?;
        Ok(())
    }
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CacheCorrupt { path: path.to_path_buf(), reason: reason.into() }
}

fn decode(path: &Path, bytes: &[u8]) -> Result<(CellFunctionSet, EffectiveSample)> {
    const END: &[u8] = b"\nend\n";
    let split = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| corrupt(path, "header terminator missing"))?;
    let header = std::str::from_utf8(&bytes[..split]).map_err(|_| corrupt(path, "header is not text"))?;
    let payload = &bytes[split + END.len()..];
    let mut lines = header.lines();
    if lines.next() != Some(MAGIC) {
        return Err(corrupt(path, "unknown format"));
    }
    let mut nodes = None;
    let mut temperature = None;
    let mut lengths = None;
    let mut checksum = None;
    for line in lines {
        let (key, value) = line.split_once(' ').ok_or_else(|| corrupt(path, format!("bad header line `{line}`")))?;
        match key {
            "nodes" => nodes = value.parse::<usize>().ok(),
            "temperature" => temperature = value.parse::<f64>().ok(),
            "slots" => {
                lengths = value.split(',').map(|s| s.parse::<usize>().ok()).collect::<Option<Vec<_>>>();
            }
            "sha256" => checksum = Some(value.to_string()),
            _ => {}
        }
    }
    let (nodes, temperature, lengths, checksum) = match (nodes, temperature, lengths, checksum) {
        (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
        _ => return Err(corrupt(path, "incomplete header")),
    };
    if sha256_hex(payload) != checksum {
        return Err(corrupt(path, "checksum mismatch"));
    }
    if lengths.len() != SLOT_COUNT || payload.len() != 8 * (FLAT_LEN + lengths.iter().sum::<usize>()) {
        return Err(corrupt(path, "payload size does not match header"));
    }
    let values: Vec<f64> = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let eff = EffectiveSample::from_flat(temperature, &values[..FLAT_LEN]);
    let mut set = CellFunctionSet::empty(nodes);
    let mut off = FLAT_LEN;
    for (slot, len) in lengths.into_iter().enumerate() {
        set.slots[slot] = values[off..off + len].to_vec();
        off += len;
    }
    Ok((set, eff))
}
