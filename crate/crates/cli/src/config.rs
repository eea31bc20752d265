//! Parameter resolution: built-in defaults, then `key=value` lines from `--config`,
//! then flags given on the command line.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    known: Vec<&'static str>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Params {
    pub fn new(defaults: &[(&'static str, &str)]) -> Self {
        let mut p = Params::default();
        for &(k, v) in defaults {
            p.known.push(k);
            p.values.insert(k.to_string(), v.to_string());
        }
        p
    }

    /// Parse `key=value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected key=value", i + 1)))?;
            self.set(k, v.trim())
                .map_err(|e| CliError::Usage(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let k = normalize(key);
        if !self.known.iter().any(|n| *n == k) {
            return Err(CliError::Usage(format!("unknown key {k:?}; known keys: {}", self.known.join(", "))));
        }
        self.values.insert(k, value.to_string());
        Ok(())
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: &Option<T>) -> Result<(), CliError> {
        match value {
            Some(v) => self.set(key, &v.to_string()),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e| CliError::Usage(format!("bad value {v:?} for {key}: {e}")))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag() {
        let mut p = Params::new(&[("nmax", "20"), ("seed", "1")]);
        p.apply_file("# comment\nnmax = 12\n\nseed=5 # trailing\n", "cfg").unwrap();
        assert_eq!(p.get::<usize>("nmax").unwrap(), 12);
        p.set_opt("nmax", &Some(30)).unwrap();
        assert_eq!(p.get::<usize>("nmax").unwrap(), 30);
        assert_eq!(p.get::<u64>("seed").unwrap(), 5);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut p = Params::new(&[("nmax", "20")]);
        assert!(p.apply_file("bogus=1", "cfg").is_err());
        assert!(p.apply_file("nmax", "cfg").is_err());
        p.set("nmax", "x").unwrap();
        assert!(p.get::<usize>("nmax").is_err());
    }
}
