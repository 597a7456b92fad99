//! Ball cache files.
//!
//! Layout (little endian):
//!
//! ```text
//! "CAYB" | version: u32 | descriptor_len: u32 | descriptor bytes | radius: u32
//! | layer counts: (radius + 1) × u64 | concatenated canonical encodings
//! | checksum: u64 (first 8 bytes of SHA-256 over everything before it)
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Ball, BallError};
use crate::group::Group;

pub const CACHE_MAGIC: &[u8; 4] = b"CAYB";
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("i/o error on ball cache: {0}")]
    Io(#[from] io::Error),
    #[error("not a ball cache (bad magic)")]
    BadMagic,
    #[error("cache format version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("cache holds group {found:?}, expected {expected:?}")]
    DescriptorMismatch { found: String, expected: String },
    #[error("checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("corrupt ball cache: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Ball(#[from] BallError),
}

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Header fields of a cache file, read without rebuilding the ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub version: u32,
    pub descriptor: String,
    pub radius: u32,
    pub layer_counts: Vec<u64>,
}

struct Parsed<'a> {
    header: CacheHeader,
    body: &'a [u8],
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], CacheError> {
    if bytes.len() < n {
        return Err(CacheError::Corrupt("truncated file".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn take_u32(bytes: &mut &[u8]) -> Result<u32, CacheError> {
    Ok(u32::from_le_bytes(take(bytes, 4)?.try_into().unwrap()))
}

fn take_u64(bytes: &mut &[u8]) -> Result<u64, CacheError> {
    Ok(u64::from_le_bytes(take(bytes, 8)?.try_into().unwrap()))
}

/// Validate magic, version and checksum, then split off the header.
fn parse(bytes: &[u8]) -> Result<Parsed<'_>, CacheError> {
    if bytes.len() < 4 || &bytes[..4] != CACHE_MAGIC {
        return Err(CacheError::BadMagic);
    }
    if bytes.len() < 8 + 8 {
        return Err(CacheError::Corrupt("truncated file".into()));
    }
    let (content, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let mut rest = &content[4..];
    let version = take_u32(&mut rest)?;
    if version != CACHE_FORMAT_VERSION {
        return Err(CacheError::VersionMismatch {
            found: version,
            expected: CACHE_FORMAT_VERSION,
        });
    }
    let computed = checksum(content);
    if stored != computed {
        return Err(CacheError::ChecksumMismatch { stored, computed });
    }
    let len = take_u32(&mut rest)? as usize;
    let descriptor = String::from_utf8(take(&mut rest, len)?.to_vec())
        .map_err(|_| CacheError::Corrupt("descriptor is not utf-8".into()))?;
    let radius = take_u32(&mut rest)?;
    let layer_counts = (0..=radius)
        .map(|_| take_u64(&mut rest))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Parsed {
        header: CacheHeader {
            version,
            descriptor,
            radius,
            layer_counts,
        },
        body: rest,
    })
}

/// Read and validate a cache header (including its checksum).
pub fn read_header(path: &Path) -> Result<CacheHeader, CacheError> {
    let bytes = fs::read(path)?;
    Ok(parse(&bytes)?.header)
}

impl Ball {
    /// Serialize the ball in cache format.
    pub fn to_cache_bytes(&self) -> Vec<u8> {
        let descriptor = self.group.name().as_bytes();
        let mut out = Vec::new();
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
        out.extend_from_slice(descriptor);
        out.extend_from_slice(&self.radius.to_le_bytes());
        for count in self.layer_sizes() {
            out.extend_from_slice(&count.to_le_bytes());
        }
        for enc in &self.encodings {
            out.extend_from_slice(enc);
        }
        let sum = checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    /// Write the cache file atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<(), CacheError> {
        let bytes = self.to_cache_bytes();
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(group: &Arc<Group>, path: &Path) -> Result<Ball, CacheError> {
        Self::from_cache_bytes(group, &fs::read(path)?)
    }

    pub fn from_cache_bytes(group: &Arc<Group>, bytes: &[u8]) -> Result<Ball, CacheError> {
        let Parsed { header, body } = parse(bytes)?;
        if header.descriptor != group.name() {
            return Err(CacheError::DescriptorMismatch {
                found: header.descriptor,
                expected: group.name().to_string(),
            });
        }
        let mut reader = crate::group::codec::Reader::new(body);
        let mut layers = Vec::with_capacity(header.layer_counts.len());
        for &count in &header.layer_counts {
            let mut layer = Vec::with_capacity(count.min(1 << 24) as usize);
            for _ in 0..count {
                let start = reader.position();
                group
                    .decode_from(&mut reader)
                    .map_err(|e| CacheError::Corrupt(e.to_string()))?;
                layer.push(body[start..reader.position()].into());
            }
            layers.push(layer);
        }
        if !reader.is_empty() {
            return Err(CacheError::Corrupt("trailing bytes after last element".into()));
        }
        let ball = Ball::from_layers(group, header.radius, layers)?;
        if ball.len() as u64 != header.layer_counts.iter().sum::<u64>() {
            return Err(CacheError::Corrupt("duplicate elements in cache".into()));
        }
        Ok(ball)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_layers() {
        let g = Group::parse("Z^2").unwrap();
        let ball = Ball::enumerate(&g, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z2.cayb");
        ball.save(&path).unwrap();
        let loaded = Ball::load(&g, &path).unwrap();
        assert_eq!(loaded.layer_sizes(), ball.layer_sizes());
        assert_eq!(loaded.to_cache_bytes(), ball.to_cache_bytes());
        for id in ball.ids() {
            assert!(ball.neighbors(id).eq(loaded.neighbors(id)));
        }
    }

    #[test]
    fn wrong_descriptor_rejected() {
        let g = Group::parse("Z^2").unwrap();
        let bytes = Ball::enumerate(&g, 2).unwrap().to_cache_bytes();
        let other = Group::parse("F2").unwrap();
        assert!(matches!(
            Ball::from_cache_bytes(&other, &bytes),
            Err(CacheError::DescriptorMismatch { .. })
        ));
    }

    #[test]
    fn corruption_detected() {
        let g = Group::parse("F2").unwrap();
        let mut bytes = Ball::enumerate(&g, 3).unwrap().to_cache_bytes();
        let n = bytes.len();
        bytes[n - 20] ^= 0x40;
        assert!(matches!(
            Ball::from_cache_bytes(&g, &bytes),
            Err(CacheError::ChecksumMismatch { .. })
        ));
        bytes[4] = 9;
        assert!(matches!(
            Ball::from_cache_bytes(&g, &bytes),
            Err(CacheError::VersionMismatch { found: 9, .. })
        ));
        assert!(matches!(Ball::from_cache_bytes(&g, b"NOPE1234"), Err(CacheError::BadMagic)));
    }
}
