//! On-disk model format.
//!
//! ```text
//! magic    8 bytes  "DTNETMOD"
//! version  u32 LE
//! length   u64 LE   payload bytes
//! digest   32 bytes SHA-256 of the payload
//! payload  JSON
//! ```
//!
//! JSON floats are written in shortest round-trip form, so a loaded model
//! predicts bit-for-bit like the one that was saved.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::network::NetworkModel;

const MAGIC: &[u8; 8] = b"DTNETMOD";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 32;

/// A trained network with the label names its output rows stand for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SavedModel {
    pub class_names: Vec<String>,
    pub model: NetworkModel,
}

pub fn encode(saved: &SavedModel) -> Result<Vec<u8>> {
    let payload = serde_json::to_vec(saved)?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    Ok(out)
}

/// Parses a container. `path` is only used in error messages.
pub fn decode(bytes: &[u8], path: &Path) -> Result<SavedModel> {
    let format = |msg: &str| Error::Format {
        path: path.to_path_buf(),
        msg: msg.to_string(),
    };
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(format("not a model container"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(format(&format!(
            "container version {version}, this build reads {FORMAT_VERSION}"
        )));
    }
    let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != len {
        return Err(Error::Checksum);
    }
    if Sha256::digest(payload).as_slice() != &bytes[20..HEADER_LEN] {
        return Err(Error::Checksum);
    }
    Ok(serde_json::from_slice(payload)?)
}

pub fn save(path: impl AsRef<Path>, saved: &SavedModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(saved)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
