use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::XlabError;
use crate::cayley::{read_header, Ball, BallOptions, CacheError, CacheHeader};
use crate::group::Group;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "FIRELAB_CACHE_DIR";

/// A directory of ball cache files, one per `(group, radius)`. Builds hold an
/// exclusive lock on a sidecar `.lock` file; loads hold a shared one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheStore {
    dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Built { path: PathBuf, volume: u64 },
    AlreadyPresent { path: PathBuf, volume: u64 },
    Verified { path: PathBuf, volume: u64 },
}

/// One file found by [`CacheStore::list`].
#[derive(Debug)]
pub struct CacheEntry {
    pub path: PathBuf,
    pub header: Result<CacheHeader, CacheError>,
}

/// File-name-safe form of a group specifier: alphanumerics kept, anything else
/// written as `_xx` hex.
fn file_stem(group: &Group) -> String {
    let mut s = String::new();
    for b in group.name().bytes() {
        if b.is_ascii_alphanumeric() {
            s.push(b as char);
        } else {
            s += &format!("_{b:02x}");
        }
    }
    s
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> XlabError + '_ {
    move |source| XlabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl CacheStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CacheStore { dir: dir.into() }
    }

    /// The directory named by `FIRELAB_CACHE_DIR`, else `.firelab-cache`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(CACHE_DIR_ENV).map_or_else(|| PathBuf::from(".firelab-cache"), PathBuf::from))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, group: &Group, radius: u32) -> PathBuf {
        self.dir.join(format!("{}-R{radius}.cayb", file_stem(group)))
    }

    fn lock_file(&self, path: &Path) -> Result<File, XlabError> {
        std::fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let lock = path.with_extension("cayb.lock");
        OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock)
            .map_err(io(&lock))
    }

    /// Enumerate and store `B_R` unless a valid cache file already exists.
    pub fn build(&self, group: &Arc<Group>, radius: u32, options: BallOptions) -> Result<CacheStatus, XlabError> {
        let path = self.path_for(group, radius);
        let lock = self.lock_file(&path)?;
        lock.lock().map_err(io(&path))?;
        if path.exists() {
            if let Ok(ball) = Ball::load(group, &path) {
                return Ok(CacheStatus::AlreadyPresent {
                    path,
                    volume: ball.len() as u64,
                });
            }
        }
        let ball = Ball::enumerate_with(group, radius, options)?;
        ball.save(&path)?;
        Ok(CacheStatus::Built {
            path,
            volume: ball.len() as u64,
        })
    }

    /// Load the cached `B_R`, checking magic, version, descriptor and checksum.
    pub fn load(&self, group: &Arc<Group>, radius: u32) -> Result<Ball, XlabError> {
        let path = self.path_for(group, radius);
        if !path.exists() {
            return Err(XlabError::CacheMissing(path));
        }
        let lock = self.lock_file(&path)?;
        lock.lock_shared().map_err(io(&path))?;
        let ball = Ball::load(group, &path)?;
        if ball.radius() != radius {
            return Err(CacheError::Corrupt(format!("file holds radius {}, expected {radius}", ball.radius())).into());
        }
        Ok(ball)
    }

    pub fn verify(&self, group: &Arc<Group>, radius: u32) -> Result<CacheStatus, XlabError> {
        let ball = self.load(group, radius)?;
        Ok(CacheStatus::Verified {
            path: self.path_for(group, radius),
            volume: ball.len() as u64,
        })
    }

    /// Load from the cache, building and storing first if absent.
    pub fn load_or_build(&self, group: &Arc<Group>, radius: u32, options: BallOptions) -> Result<Ball, XlabError> {
        match self.load(group, radius) {
            Err(XlabError::CacheMissing(_)) => {
                self.build(group, radius, options)?;
                self.load(group, radius)
            }
            other => other,
        }
    }

    /// Headers of all cache files, sorted by file name. A missing directory lists empty.
    pub fn list(&self) -> Result<Vec<CacheEntry>, XlabError> {
        let entries = match std::fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io(&self.dir)(e)),
        };
        let mut paths = Vec::new();
        for entry in entries {
            let p = entry.map_err(io(&self.dir))?.path();
            if p.extension().is_some_and(|x| x == "cayb") {
                paths.push(p);
            }
        }
        paths.sort();
        Ok(paths
            .into_iter()
            .map(|path| CacheEntry {
                header: read_header(&path),
                path,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_verify_list_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let store = CacheStore::new(dir.path().join("cache"));
        assert!(store.list().unwrap().is_empty());
        let g = Group::parse("Z^2").unwrap();
        let opts = BallOptions::default();
        assert!(matches!(store.build(&g, 6, opts).unwrap(), CacheStatus::Built { volume: 85, .. }));
        assert!(matches!(store.build(&g, 6, opts).unwrap(), CacheStatus::AlreadyPresent { .. }));
        assert!(matches!(store.verify(&g, 6).unwrap(), CacheStatus::Verified { volume: 85, .. }));
        let listed = store.list().unwrap();
        assert_eq!(listed.len(), 1);
        assert_eq!(listed[0].header.as_ref().unwrap().descriptor, "Z^2");

        let path = store.path_for(&g, 6);
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            store.verify(&g, 6),
            Err(XlabError::Cache(CacheError::ChecksumMismatch { .. }))
        ));
        assert!(matches!(store.verify(&g, 7), Err(XlabError::CacheMissing(_))));
        let f2 = Group::parse("F2").unwrap();
        assert_eq!(store.load_or_build(&f2, 3, opts).unwrap().len(), 53);
    }

    #[test]
    fn distinct_groups_get_distinct_files() {
        let store = CacheStore::new("x");
        let a = store.path_for(&Group::parse("Z^2").unwrap(), 3);
        let b = store.path_for(&Group::parse("Z2").unwrap(), 3);
        assert_ne!(a, b);
    }
}
