//! Flat `section.key` configuration with flag overrides.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use toml::Value;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration, exit code 2.
    Config(String),
    /// Numerical failure or failed check, exit code 3.
    Convergence(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Convergence(_) => "convergence",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Convergence(m) => m,
        }
    }
}

impl From<kkbubble::Error> for CliError {
    fn from(e: kkbubble::Error) -> Self {
        use kkbubble::Error as E;
        match e {
            E::Domain(_) | E::Invalid(_) => CliError::Config(e.to_string()),
            _ => CliError::Convergence(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Raw key/value pairs plus the values actually resolved during a run.
#[derive(Debug, Default)]
pub struct Config {
    raw: BTreeMap<String, Value>,
    used: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            _ => {
                out.insert(key, v.clone());
            }
        }
    }
}

/// Parses a `key=value` override; the value is read as a TOML literal and falls back to a string.
pub fn parse_assignment(s: &str) -> CliResult<(String, Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::Config(format!("override `{s}` has an empty key")));
    }
    let v = v.trim();
    let value = format!("x = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

impl Config {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("config file: {e}")))?;
        let mut raw = BTreeMap::new();
        flatten("", &table, &mut raw);
        Ok(Config { raw, used: BTreeMap::new() })
    }

    pub fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.raw.insert(key.to_string(), value);
    }

    fn lookup(&mut self, key: &str, default: Value) -> Value {
        let v = self.raw.get(key).cloned().unwrap_or(default);
        self.used.insert(key.to_string(), v.clone());
        v
    }

    fn bad(key: &str, want: &str, v: &Value) -> CliError {
        CliError::Config(format!("{key}: expected {want}, got {v}"))
    }

    pub fn f64(&mut self, key: &str, default: f64) -> CliResult<f64> {
        let v = self.lookup(key, Value::Float(default));
        let x = match v {
            Value::Float(x) => x,
            Value::Integer(i) => i as f64,
            _ => return Err(Self::bad(key, "a number", &v)),
        };
        if !x.is_finite() {
            return Err(CliError::Config(format!("{key}: must be finite")));
        }
        self.used.insert(key.to_string(), Value::Float(x));
        Ok(x)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> CliResult<usize> {
        let v = self.lookup(key, Value::Integer(default as i64));
        match v {
            Value::Integer(i) if i >= 0 => Ok(i as usize),
            _ => Err(Self::bad(key, "a nonnegative integer", &v)),
        }
    }

    pub fn i64(&mut self, key: &str, default: i64) -> CliResult<i64> {
        let v = self.lookup(key, Value::Integer(default));
        match v {
            Value::Integer(i) => Ok(i),
            _ => Err(Self::bad(key, "an integer", &v)),
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> CliResult<String> {
        let v = self.lookup(key, Value::String(default.into()));
        match v {
            Value::String(s) => Ok(s),
            _ => Err(Self::bad(key, "a string", &v)),
        }
    }

    pub fn opt_string(&mut self, key: &str) -> CliResult<Option<String>> {
        match self.raw.get(key).cloned() {
            None => Ok(None),
            Some(Value::String(s)) => {
                self.used.insert(key.to_string(), Value::String(s.clone()));
                Ok(Some(s))
            }
            Some(v) => Err(Self::bad(key, "a string", &v)),
        }
    }

    /// Number list; a bare number is a one-element list and a string is split on commas.
    pub fn f64_list(&mut self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        let dv = Value::Array(default.iter().map(|&x| Value::Float(x)).collect());
        let v = self.lookup(key, dv);
        let items: Vec<Value> = match &v {
            Value::Array(a) => a.clone(),
            Value::Float(_) | Value::Integer(_) => vec![v.clone()],
            Value::String(s) => {
                let mut out = Vec::new();
                for p in s.split(',') {
                    let x: f64 = p.trim().parse().map_err(|_| Self::bad(key, "a list of numbers", &v))?;
                    out.push(Value::Float(x));
                }
                out
            }
            _ => return Err(Self::bad(key, "a list of numbers", &v)),
        };
        let mut out = Vec::with_capacity(items.len());
        for it in items {
            match it {
                Value::Float(x) if x.is_finite() => out.push(x),
                Value::Integer(i) => out.push(i as f64),
                _ => return Err(Self::bad(key, "a list of numbers", &v)),
            }
        }
        // normalize so the effective config is canonical
        self.used.insert(key.to_string(), Value::Array(out.iter().map(|&x| Value::Float(x)).collect()));
        Ok(out)
    }

    pub fn int_list(&mut self, key: &str, default: &[i64]) -> CliResult<Vec<i64>> {
        let xs = self.f64_list(key, &default.iter().map(|&i| i as f64).collect::<Vec<_>>())?;
        let mut out = Vec::with_capacity(xs.len());
        for x in xs {
            if x.fract() != 0.0 {
                return Err(CliError::Config(format!("{key}: expected integers, got {x}")));
            }
            out.push(x as i64);
        }
        self.used.insert(key.to_string(), Value::Array(out.iter().map(|&i| Value::Integer(i)).collect()));
        Ok(out)
    }

    /// Rejects keys in `section` that the command did not read.
    pub fn check_unknown(&self, section: &str) -> CliResult<()> {
        let prefix = format!("{section}.");
        for k in self.raw.keys() {
            if !k.starts_with(&prefix) && !k.contains('.') {
                return Err(CliError::Config(format!("{k}: keys must be of the form section.key")));
            }
            if k.starts_with(&prefix) && !self.used.contains_key(k) {
                return Err(CliError::Config(format!("{k}: unknown key")));
            }
        }
        Ok(())
    }

    /// Effective configuration as TOML with quoted flat keys; re-running it reproduces the run.
    pub fn effective(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.used {
            out.push_str(&format!("\"{k}\" = {v}\n"));
        }
        out
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.effective().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_and_flat_keys_agree() {
        let mut a = Config::from_toml("[spectrum]\ncount = 3\nmass = 1\n").unwrap();
        let mut b = Config::from_toml("\"spectrum.count\" = 3\n\"spectrum.mass\" = 1.0\n").unwrap();
        for c in [&mut a, &mut b] {
            assert_eq!(c.usize("spectrum.count", 5).unwrap(), 3);
            assert_eq!(c.f64("spectrum.mass", 0.0).unwrap(), 1.0);
        }
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn effective_config_round_trips() {
        let mut a = Config::default();
        a.set("geodesic.span", parse_assignment("x=0,6").unwrap().1);
        a.f64_list("geodesic.span", &[0.0, 1.0]).unwrap();
        a.string("geodesic.preset", "custom").unwrap();
        let mut b = Config::from_toml(&a.effective()).unwrap();
        b.f64_list("geodesic.span", &[0.0, 1.0]).unwrap();
        b.string("geodesic.preset", "other").unwrap();
        assert_eq!(a.effective(), b.effective());
    }

    #[test]
    fn bad_values_name_the_field() {
        let mut c = Config::from_toml("[spectrum]\ncount = -1\nbogus = 2\n").unwrap();
        let e = c.usize("spectrum.count", 5).unwrap_err();
        assert!(e.message().contains("spectrum.count"));
        assert!(c.check_unknown("spectrum").unwrap_err().message().contains("spectrum.bogus"));
        assert_eq!(parse_assignment("a.b=witten").unwrap().1, Value::String("witten".into()));
        assert_eq!(parse_assignment("a.b=2").unwrap().1, Value::Integer(2));
    }
}
