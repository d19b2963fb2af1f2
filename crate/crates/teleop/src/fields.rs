//! Typed access to INI sections with errors that point at a line and a field.

use std::collections::HashSet;
use std::io;
use std::path::PathBuf;

use nalgebra::Vector3;

use crate::ini::{Section, SyntaxError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: [{section}] {key}: {message}")]
    Field {
        line: usize,
        section: String,
        key: String,
        message: String,
    },
    #[error("line {line}: [{section}]: {message}")]
    Section {
        line: usize,
        section: String,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<ConfigError>,
    },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    pub fn section(section: &Section, message: impl Into<String>) -> Self {
        ConfigError::Section {
            line: section.line,
            section: section.name.clone(),
            message: message.into(),
        }
    }

    /// Line the error points at, if any.
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Syntax(e) => Some(e.line),
            ConfigError::Field { line, .. } | ConfigError::Section { line, .. } => Some(*line),
            ConfigError::InFile { source, .. } => source.line(),
            ConfigError::Io { .. } | ConfigError::Invalid(_) => None,
        }
    }
}

impl From<teleop_core::Error> for ConfigError {
    fn from(e: teleop_core::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ConfigError>;

/// Reads keys out of one section and complains about any left unread.
pub struct Fields<'a> {
    section: &'a Section,
    used: HashSet<&'a str>,
}

pub fn floats(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split_whitespace()
        .map(|tok| match tok.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(format!("`{tok}` is not finite")),
            Err(_) => Err(format!("`{tok}` is not a number")),
        })
        .collect()
}

fn exactly(text: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let v = floats(text)?;
    if v.len() == n {
        Ok(v)
    } else {
        Err(format!("expected {n} numbers, found {}", v.len()))
    }
}

impl<'a> Fields<'a> {
    pub fn new(section: &'a Section) -> Self {
        Self {
            section,
            used: HashSet::new(),
        }
    }

    pub fn section(&self) -> &'a Section {
        self.section
    }

    pub fn field_error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.section.get(key).map_or(self.section.line, |e| e.line);
        ConfigError::Field {
            line,
            section: self.section.name.clone(),
            key: key.into(),
            message: message.into(),
        }
    }

    /// Parses `key` with `parse` if present.
    pub fn get<T>(
        &mut self,
        key: &'a str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        let Some(entry) = self.section.get(key) else {
            return Ok(None);
        };
        self.used.insert(key);
        parse(&entry.value)
            .map(Some)
            .map_err(|m| self.field_error(key, m))
    }

    pub fn require<T>(
        &mut self,
        key: &'a str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        self.get(key, parse)?
            .ok_or_else(|| self.field_error(key, "missing required key"))
    }

    pub fn f64(&mut self, key: &'a str) -> Result<Option<f64>> {
        self.get(key, |s| exactly(s, 1).map(|v| v[0]))
    }

    pub fn req_f64(&mut self, key: &'a str) -> Result<f64> {
        self.require(key, |s| exactly(s, 1).map(|v| v[0]))
    }

    pub fn set_f64(&mut self, key: &'a str, target: &mut f64) -> Result<()> {
        if let Some(v) = self.f64(key)? {
            *target = v;
        }
        Ok(())
    }

    pub fn vec3(&mut self, key: &'a str) -> Result<Option<Vector3<f64>>> {
        self.get(key, |s| exactly(s, 3).map(|v| Vector3::from_column_slice(&v)))
    }

    pub fn req_vec3(&mut self, key: &'a str) -> Result<Vector3<f64>> {
        self.require(key, |s| exactly(s, 3).map(|v| Vector3::from_column_slice(&v)))
    }

    pub fn floats(&mut self, key: &'a str) -> Result<Option<Vec<f64>>> {
        self.get(key, floats)
    }

    pub fn floats_n(&mut self, key: &'a str, n: usize) -> Result<Option<Vec<f64>>> {
        self.get(key, |s| exactly(s, n))
    }

    pub fn u64(&mut self, key: &'a str) -> Result<Option<u64>> {
        self.get(key, |s| s.parse::<u64>().map_err(|_| format!("`{s}` is not a non-negative integer")))
    }

    pub fn string(&mut self, key: &'a str) -> Result<Option<String>> {
        self.get(key, |s| {
            if s.is_empty() {
                Err("empty value".into())
            } else {
                Ok(s.to_string())
            }
        })
    }

    /// Fails on the first key that was never read.
    pub fn finish(self) -> Result<()> {
        match self
            .section
            .entries
            .iter()
            .find(|e| !self.used.contains(e.key.as_str()))
        {
            Some(e) => Err(ConfigError::Field {
                line: e.line,
                section: self.section.name.clone(),
                key: e.key.clone(),
                message: "unknown key".into(),
            }),
            None => Ok(()),
        }
    }
}
