//! INI-style configuration: `[section]` headers, `key = value` lines and
//! `#` or `;` comments. Values may be wrapped in double quotes.
//!
//! Keys are checked against a fixed vocabulary per section when the file is
//! loaded, and every value that names an expression is parsed right away so
//! that errors point at the offending line.

use std::collections::BTreeMap;
use std::path::Path;

use crate::compat::Interval;
use crate::error::{Error, Result};
use crate::expr::{Expr, Parser};

/// Accepted keys per section. `None` accepts any key (parameter tables).
fn vocabulary(section: &str) -> Option<Option<&'static [&'static str]>> {
    const PROBLEM: &[&str] = &["a", "f"];
    const REDUCTION: &[&str] = &["branch", "g", "g_scale"];
    const INITIAL: &[&str] = &["u0", "interval", "t_start"];
    const FAMILY: &[&str] = &["id"];
    const LINEAR: &[&str] = &[
        "spec", "a", "coef_ux", "coef_u", "source", "coef_ut", "c", "q1", "q2", "coef", "h0", "k0", "tau",
        "alpha0", "h", "c0", "f1", "f2", "particular", "phi", "psi", "interval", "left", "x", "t",
    ];
    const GRID: &[&str] = &[
        "x", "t", "u", "ux", "n", "nx", "nt", "n_sigma", "h_t", "t_end", "points", "h", "dx", "dt",
    ];
    const OUTPUT: &[&str] = &["path"];
    const TOLERANCE: &[&str] = &["con1", "det", "structural", "fd", "compare"];
    const VERIFY: &[&str] = &["phi", "psi"];
    Some(match section {
        "problem" => Some(PROBLEM),
        "reduction" => Some(REDUCTION),
        "initial" => Some(INITIAL),
        "family" => Some(FAMILY),
        "params" | "functions" => None,
        "linear" => Some(LINEAR),
        "grid" => Some(GRID),
        "output" => Some(OUTPUT),
        "tolerance" => Some(TOLERANCE),
        "verify" => Some(VERIFY),
        _ => return None,
    })
}

/// Keys whose values are expressions, parsed at load time.
fn is_expr_key(section: &str, key: &str) -> bool {
    match section {
        "problem" => true,
        "reduction" => key == "g",
        "initial" => key == "u0",
        "functions" => true,
        "verify" => true,
        "linear" => matches!(
            key,
            "a" | "coef_ux" | "coef_u" | "source" | "coef_ut" | "coef" | "h0" | "tau" | "h" | "f1" | "f2" | "phi" | "psi"
        ),
        _ => false,
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Section {
    entries: BTreeMap<String, Entry>,
}

/// A validated configuration document.
#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, Section>,
}

fn strip_quotes(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut current: Option<String> = None;
        let parser = Parser::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                    line,
                    message: format!("unterminated section header `{s}`"),
                })?;
                let name = name.trim().to_string();
                if vocabulary(&name).is_none() {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if cfg.sections.contains_key(&name) {
                    return Err(Error::Config {
                        line,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                cfg.sections.insert(name.clone(), Section::default());
                current = Some(name);
                continue;
            }
            let Some((key, value)) = s.split_once('=') else {
                return Err(Error::Config {
                    line,
                    message: format!("expected `key = value`, found `{s}`"),
                });
            };
            let section = current.clone().ok_or_else(|| Error::Config {
                line,
                message: "key outside of any section".into(),
            })?;
            let key = key.trim().to_string();
            let value = strip_quotes(value).to_string();
            if let Some(Some(keys)) = vocabulary(&section) {
                if !keys.contains(&key.as_str()) {
                    return Err(Error::UnknownKey { section, key });
                }
            }
            let is_expr = is_expr_key(&section, &key)
                || (section == "params" && value.parse::<f64>().is_err());
            if is_expr {
                parser.parse(&value).map_err(|e| Error::Config {
                    line,
                    message: format!("[{section}] {key}: {e}"),
                })?;
            }
            let sec = cfg.sections.get_mut(&section).expect("section exists");
            if sec.entries.insert(key.clone(), Entry { value, line }).is_some() {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}` in [{section}]"),
                });
            }
        }
        Ok(cfg)
    }

    pub fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key).ok_or_else(|| Error::MissingKey {
            section: section.into(),
            key: key.into(),
        })
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.sections
            .get(section)
            .and_then(|s| s.entries.get(key))
            .map_or(0, |e| e.line)
    }

    fn bad(&self, section: &str, key: &str, message: String) -> Error {
        Error::Config {
            line: self.line(section, key),
            message: format!("[{section}] {key}: {message}"),
        }
    }

    pub fn expr(&self, section: &str, key: &str) -> Result<Option<Expr>> {
        self.get(section, key)
            .map(|v| Parser::new().parse(v).map_err(|e| self.bad(section, key, e.to_string())))
            .transpose()
    }

    pub fn require_expr(&self, section: &str, key: &str) -> Result<Expr> {
        self.require(section, key)?;
        Ok(self.expr(section, key)?.expect("present"))
    }

    pub fn float(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| self.bad(section, key, format!("`{v}` is not a number")))
            })
            .transpose()
    }

    pub fn float_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(section, key)?.unwrap_or(default))
    }

    pub fn require_float(&self, section: &str, key: &str) -> Result<f64> {
        self.require(section, key)?;
        Ok(self.float(section, key)?.expect("present"))
    }

    pub fn count_or(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| self.bad(section, key, format!("`{v}` is not a count"))),
        }
    }

    pub fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(self.bad(section, key, format!("`{v}` is not a boolean"))),
        }
    }

    /// `lo, hi` pair.
    pub fn interval(&self, section: &str, key: &str) -> Result<Option<Interval>> {
        let Some(v) = self.get(section, key) else {
            return Ok(None);
        };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let nums: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
        if parts.len() != 2 || nums.len() != 2 {
            return Err(self.bad(section, key, format!("expected `lo, hi`, found `{v}`")));
        }
        Interval::new(nums[0], nums[1])
            .map(Some)
            .map_err(|e| self.bad(section, key, e.to_string()))
    }

    pub fn require_interval(&self, section: &str, key: &str) -> Result<Interval> {
        self.require(section, key)?;
        Ok(self.interval(section, key)?.expect("present"))
    }

    /// Keys of a section in sorted order.
    pub fn keys(&self, section: &str) -> Vec<&str> {
        self.sections
            .get(section)
            .map(|s| s.entries.keys().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_problem_and_reduction() {
        let c = Config::parse("[problem]\na = 1\nf = u*ux^2\n\n[reduction]\nbranch = plus\ng = u\n").unwrap();
        assert_eq!(c.get("reduction", "branch"), Some("plus"));
        assert!(c.expr("problem", "f").unwrap().is_some());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("[reduction]\nbrnach = plus\n").unwrap_err();
        assert!(matches!(&err, Error::UnknownKey { key, .. } if key == "brnach"), "{err}");
        assert!(err.to_string().contains("brnach"));
    }

    #[test]
    fn expression_errors_carry_offset_and_line() {
        let err = Config::parse("[reduction]\nbranch = plus\ng = \"2*sqrt(u\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{msg}");
        assert!(msg.contains("byte"), "{msg}");
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(Config::parse("a = 1\n"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(Config::parse("[nope]\n"), Err(Error::Config { .. })));
        assert!(matches!(Config::parse("[grid]\nx 1\n"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(Config::parse("[grid]\nn = 1\nn = 2\n"), Err(Error::Config { line: 3, .. })));
    }

    #[test]
    fn typed_accessors() {
        let c = Config::parse("[grid]\nx = 0, 2\nnx = 5\n# comment\nh = 1e-3\n[linear]\nparticular = no\n").unwrap();
        assert_eq!(c.interval("grid", "x").unwrap(), Some(Interval { lo: 0.0, hi: 2.0 }));
        assert_eq!(c.count_or("grid", "nx", 1).unwrap(), 5);
        assert_eq!(c.float_or("grid", "h", 0.0).unwrap(), 1e-3);
        assert!(!c.bool_or("linear", "particular", true).unwrap());
        assert!(matches!(c.require("grid", "t"), Err(Error::MissingKey { .. })));
    }
}
