//! Run directories and their manifests.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";
/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "THINFLOW_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunState {
    Running,
    Halted,
    Finished,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub status: RunState,
    pub started: String,
    pub finished: Option<String>,
    pub config_hash: String,
    pub scenario: serde_json::Value,
    pub config: serde_json::Value,
    pub grid: GridEcho,
    pub filter: String,
    pub blowup_factor: f64,
    /// `tau* log log N / log N` for the configured `N`.
    pub horizon: f64,
    pub threads: usize,
    pub jobs: usize,
    /// False when more than one worker thread was used inside a run.
    pub bit_deterministic: bool,
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

pub fn now() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let k = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if k == 0 {
            break;
        }
        total += k as u64;
        h.update(&buf[..k]);
    }
    Ok((total, hex::encode(h.finalize())))
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(dir, e))?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        let name = e.file_name();
        let name = name.to_string_lossy();
        if name.ends_with(".tmp") {
            continue;
        }
        if p.is_dir() {
            walk(root, &p, out)?;
        } else if p.strip_prefix(root).map(|r| r != Path::new(MANIFEST)).unwrap_or(true) {
            out.push(p);
        }
    }
    Ok(())
}

fn rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Writes `bytes` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    pub manifest: Manifest,
}

impl RunDir {
    /// Creates `<root>/<mode>-<timestamp>-<hash>`, adding a numeric suffix
    /// rather than reusing an existing directory.
    pub fn create(root: &Path, manifest: Manifest) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
        let base = format!("{}-{}-{}", manifest.mode, stamp, manifest.config_hash);
        for k in 0..1000 {
            let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
            let path = root.join(name);
            match fs::create_dir(&path) {
                Ok(()) => {
                    let dir = Self { path, manifest };
                    dir.write_manifest()?;
                    return Ok(dir);
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(Error::io(&path, e)),
            }
        }
        Err(Error::io(root, std::io::Error::other("no free run directory name")))
    }

    pub fn open(path: &Path) -> Result<Self> {
        let mpath = path.join(MANIFEST);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: mpath.clone(),
            reason: e.to_string(),
        })?;
        Ok(Self {
            path: path.to_path_buf(),
            manifest,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, rel: &str) -> PathBuf {
        self.path.join(rel)
    }

    pub fn write_manifest(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        write_atomic(&self.join(MANIFEST), text.as_bytes())
    }

    /// Rescans the directory and records sizes and checksums of every file.
    pub fn refresh_inventory(&mut self) -> Result<()> {
        let mut files = Vec::new();
        walk(&self.path, &self.path, &mut files)?;
        self.manifest.files = files
            .iter()
            .map(|p| {
                let (bytes, sha256) = sha256_file(p)?;
                Ok(FileEntry {
                    path: rel(&self.path, p),
                    bytes,
                    sha256,
                })
            })
            .collect::<Result<_>>()?;
        Ok(())
    }

    /// Checks every listed file against its recorded checksum.
    pub fn verify(&self) -> Result<()> {
        for f in &self.manifest.files {
            let p = self.join(&f.path);
            if !p.is_file() {
                return Err(Error::Checksum(p));
            }
            let (bytes, sha) = sha256_file(&p)?;
            if bytes != f.bytes || sha != f.sha256 {
                return Err(Error::Checksum(p));
            }
        }
        Ok(())
    }

    /// Updates status and inventory and rewrites the manifest.
    pub fn record(&mut self, status: RunState, error: Option<String>) -> Result<()> {
        self.manifest.status = status;
        self.manifest.error = error;
        if matches!(status, RunState::Finished | RunState::Failed) {
            self.manifest.finished = Some(now());
        }
        self.refresh_inventory()?;
        self.write_manifest()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> Manifest {
        Manifest {
            tool: "thinflow".into(),
            version: "0".into(),
            mode: "simulate".into(),
            status: RunState::Running,
            started: now(),
            finished: None,
            config_hash: "deadbeef".into(),
            scenario: serde_json::Value::Null,
            config: serde_json::Value::Null,
            grid: GridEcho { n: 16, half_width: 1.0 },
            filter: "off".into(),
            blowup_factor: 10.0,
            horizon: 0.0,
            threads: 1,
            jobs: 1,
            bit_deterministic: true,
            error: None,
            files: vec![],
        }
    }

    #[test]
    fn never_reuses_a_directory() {
        let root = tempfile::tempdir().unwrap();
        let a = RunDir::create(root.path(), manifest()).unwrap();
        let b = RunDir::create(root.path(), manifest()).unwrap();
        assert_ne!(a.path(), b.path());
        assert!(a.path().file_name().unwrap().to_string_lossy().starts_with("simulate-"));
        assert!(a.path().to_string_lossy().ends_with("deadbeef") || b.path().to_string_lossy().ends_with("deadbeef"));
    }

    #[test]
    fn inventory_lists_every_file_and_detects_tampering() {
        let root = tempfile::tempdir().unwrap();
        let mut d = RunDir::create(root.path(), manifest()).unwrap();
        fs::create_dir(d.join("sub")).unwrap();
        fs::write(d.join("a.csv"), "x\n1\n").unwrap();
        fs::write(d.join("sub/b.bin"), [1u8, 2, 3]).unwrap();
        d.record(RunState::Finished, None).unwrap();
        let names: Vec<_> = d.manifest.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["a.csv", "sub/b.bin"]);
        let reopened = RunDir::open(d.path()).unwrap();
        assert_eq!(reopened.manifest, d.manifest);
        reopened.verify().unwrap();
        fs::write(d.join("sub/b.bin"), [1u8, 2, 4]).unwrap();
        assert!(matches!(reopened.verify(), Err(Error::Checksum(_))));
    }
}
