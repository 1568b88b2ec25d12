//! Append-only JSON-lines result cache.
//!
//! The first line is a header `{"version":1,"hash":"sha256"}`; every other
//! line is `{"key":{"poly":..,"group":..,"op":..},"value":..}`. Lines that do
//! not parse, such as a torn trailing write, are skipped.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: u64 = 1;
pub const HASH: &str = "sha256";
pub const FILE_NAME: &str = "cache.jsonl";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub poly: String,
    pub group: String,
    pub op: String,
}

impl CacheKey {
    /// `poly_text` must already be canonical.
    pub fn new(poly_text: &str, group: &str, op: &str) -> Self {
        CacheKey {
            poly: hex::encode(Sha256::digest(poly_text.as_bytes())),
            group: group.to_string(),
            op: op.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        json!({"poly": self.poly, "group": self.group, "op": self.op})
    }

    fn from_json(v: &Value) -> Option<Self> {
        Some(CacheKey {
            poly: v.get("poly")?.as_str()?.to_string(),
            group: v.get("group")?.as_str()?.to_string(),
            op: v.get("op")?.as_str()?.to_string(),
        })
    }
}

pub struct Cache {
    path: PathBuf,
    index: HashMap<CacheKey, String>,
}

fn header() -> String {
    json!({"version": VERSION, "hash": HASH}).to_string()
}

impl Cache {
    /// Opens `dir/cache.jsonl`, creating it with a header when missing or
    /// when the header does not match this schema.
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(FILE_NAME);
        let mut index = HashMap::new();
        let mut valid = false;
        if path.exists() {
            let mut lines = BufReader::new(File::open(&path)?).lines();
            if let Some(Ok(first)) = lines.next() {
                valid = serde_json::from_str::<Value>(&first).ok()
                    == Some(json!({"version": VERSION, "hash": HASH}));
            }
            if valid {
                for line in lines.map_while(|l| l.ok()) {
                    let Ok(v) = serde_json::from_str::<Value>(&line) else {
                        continue;
                    };
                    if let (Some(k), Some(val)) = (v.get("key").and_then(CacheKey::from_json), v.get("value")) {
                        if let Some(s) = val.as_str() {
                            index.insert(k, s.to_string());
                        }
                    }
                }
            }
        }
        if !valid {
            fs::write(&path, header() + "\n")?;
        }
        Ok(Cache { path, index })
    }

    pub fn get(&self, key: &CacheKey) -> Option<&str> {
        self.index.get(key).map(String::as_str)
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.index.len()
    }

    #[cfg(test)]
    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn put(&mut self, key: CacheKey, value: &str) -> io::Result<()> {
        let mut file = OpenOptions::new().append(true).open(&self.path)?;
        // a torn previous write must not swallow this line
        let len = file.metadata()?.len();
        let needs_newline = len > 0 && {
            let bytes = fs::read(&self.path)?;
            bytes.last() != Some(&b'\n')
        };
        let line = json!({"key": key.to_json(), "value": value}).to_string();
        if needs_newline {
            writeln!(file)?;
        }
        writeln!(file, "{line}")?;
        self.index.insert(key, value.to_string());
        Ok(())
    }
}
