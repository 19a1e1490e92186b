//! Flat `key = value` documents with dotted section prefixes.
//!
//! Lines starting with `#` and blank lines are ignored. Every lookup marks
//! its key as used so that [`KvDoc::reject_unused`] can report typos.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct KvDoc {
    entries: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got `{s}`"),
                });
            };
            let key = k.trim();
            let valid = !key.is_empty()
                && key.split('.').all(|p| {
                    !p.is_empty()
                        && p.chars()
                            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
                });
            if !valid {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            let value = v.split_once(" #").map_or(v, |(a, _)| a).trim().to_string();
            if entries.insert(key.to_string(), (value, line)).is_some() {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(KvDoc {
            entries,
            used: RefCell::new(BTreeSet::new()),
        })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Raw string value.
    pub fn raw(&self, key: &str) -> Option<&str> {
        let e = self.entries.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(e.0.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.1)
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        s.parse::<V>().map(Some).map_err(|_| Error::Parse {
            line: self.line(key),
            message: format!("`{key}`: cannot parse `{s}`"),
        })
    }

    pub fn get_or<V: FromStr>(&self, key: &str, default: V) -> Result<V> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<V: FromStr>(&self, key: &str) -> Result<V> {
        self.get(key)?.ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("`{key}`: required key missing"),
        })
    }

    /// Comma-separated list.
    pub fn list<V: FromStr>(&self, key: &str) -> Result<Option<Vec<V>>> {
        let Some(s) = self.raw(key) else {
            return Ok(None);
        };
        let line = self.line(key);
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<V>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{key}`: cannot parse list item `{p}`"),
                })
            })
            .collect::<Result<Vec<V>>>()
            .map(Some)
    }

    /// Errors on the first key never looked up.
    pub fn reject_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, (_, line))) => Err(Error::Parse {
                line: *line,
                message: format!("`{k}`: unknown key"),
            }),
            None => Ok(()),
        }
    }
}
