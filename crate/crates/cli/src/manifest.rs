//! `MANIFEST.txt`: one `<sha256-hex>  <relative path>` line per artifact,
//! sorted by path.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "MANIFEST.txt";

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Every regular file below `root` except the manifest itself, as sorted
/// `/`-separated relative paths.
pub fn list_files(root: &Path) -> io::Result<Vec<String>> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<String>) -> io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let p = entry?.path();
            if p.is_dir() {
                walk(&p, root, out)?;
            } else {
                out.push(relative(&p, root));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    if root.is_dir() {
        walk(root, root, &mut out)?;
    }
    out.retain(|p| p != MANIFEST_NAME);
    out.sort();
    Ok(out)
}

pub fn relative(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Hashes `files` (paths below `root`) and writes the manifest.
pub fn write_manifest(root: &Path, files: &[PathBuf]) -> io::Result<PathBuf> {
    let mut rel: Vec<(String, &PathBuf)> = files.iter().map(|p| (relative(p, root), p)).collect();
    rel.sort();
    rel.dedup_by(|a, b| a.0 == b.0);
    let mut text = String::new();
    for (name, p) in rel {
        text.push_str(&format!("{}  {name}\n", sha256_file(p)?));
    }
    let path = root.join(MANIFEST_NAME);
    fs::write(&path, text)?;
    Ok(path)
}

/// `(hash, path)` entries of a manifest file.
pub fn read_manifest(path: &Path) -> io::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once("  ").map(|(h, p)| (h.to_string(), p.to_string())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        fs::create_dir(dir.path().join("sub")).unwrap();
        let q = dir.path().join("sub").join("x.csv");
        fs::write(&q, "").unwrap();
        let m = write_manifest(dir.path(), &[q.clone(), p.clone()]).unwrap();
        let entries = read_manifest(&m).unwrap();
        assert_eq!(
            entries.iter().map(|e| e.1.as_str()).collect::<Vec<_>>(),
            ["abc.txt", "sub/x.csv"]
        );
        assert_eq!(list_files(dir.path()).unwrap(), ["abc.txt", "sub/x.csv"]);
    }
}
