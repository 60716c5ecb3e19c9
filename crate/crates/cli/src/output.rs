use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Floats in CSV files: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON text with object keys sorted and a trailing newline.
pub fn json_text<T: Serialize>(value: &T) -> Result<String> {
    // `Value` objects are ordered maps, so the round trip sorts every key
    let v: Value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

pub fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Collects the files of one run and writes them atomically.
pub struct Writer {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Writer {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Writer { dir: dir.to_path_buf(), hashes: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        drop(f);
        fs::rename(&tmp, &path).with_context(|| format!("renaming onto {}", path.display()))?;
        self.hashes.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = json_text(value)?;
        self.write(name, &text)
    }

    /// `manifest.json`: the command, the config echo with its hash and the
    /// hashes of every file written so far.
    pub fn finish<C: Serialize>(mut self, command: &str, config: &C) -> Result<()> {
        let config_text = json_text(config)?;
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            command: &'a str,
            version: &'a str,
            config: &'a C,
            config_sha256: String,
            files: BTreeMap<String, String>,
        }
        let m = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config,
            config_sha256: sha256_hex(config_text.as_bytes()),
            files: std::mem::take(&mut self.hashes),
        };
        self.write_json("manifest.json", &m)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_come_out_sorted() {
        #[derive(Serialize)]
        struct S {
            zeta: u8,
            alpha: u8,
        }
        let t = json_text(&S { zeta: 1, alpha: 2 }).unwrap();
        assert!(t.find("alpha").unwrap() < t.find("zeta").unwrap());
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = Writer::new(dir.path()).unwrap();
        w.write("a.csv", "x\n").unwrap();
        w.finish("test", &serde_json::json!({"k": 1})).unwrap();
        let names: Vec<String> =
            fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        assert_eq!(names.len(), 2);
        assert!(names.iter().all(|n| !n.ends_with(".tmp")));
    }
}
