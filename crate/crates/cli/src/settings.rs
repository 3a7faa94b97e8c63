//! `key = value` settings merged from a config file and command-line flags.
//!
//! Config files hold one `key = value` pair per line; `#` starts a comment.
//! Keys use underscores (`freq_scale`) and match the long flag names with
//! dashes replaced. Flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
enum Origin {
    File { path: PathBuf, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Default)]
pub struct Settings {
    entries: BTreeMap<String, (String, Origin)>,
}

impl Settings {
    pub fn load(config: Option<&Path>) -> CliResult<Self> {
        let mut s = Settings::default();
        if let Some(path) = config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
            s.parse(&text, path)?;
        }
        Ok(s)
    }

    fn parse(&mut self, text: &str, path: &Path) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::File { path: path.to_path_buf(), line: i + 1 };
            let (key, value) =
                line.split_once('=').ok_or_else(|| CliError::usage(format!("{origin}: expected `key = value`")))?;
            let key = normalise(key);
            if key.is_empty() {
                return Err(CliError::usage(format!("{origin}: empty key")));
            }
            if self.entries.contains_key(&key) {
                return Err(CliError::usage(format!("{origin}: duplicate key `{key}`")));
            }
            self.entries.insert(key, (value.trim().to_string(), origin));
        }
        Ok(())
    }

    /// Records a command-line flag, overriding any config value.
    pub fn flag(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.entries.insert(key.to_string(), (v.to_string(), Origin::Flag));
        }
    }

    /// Removes and parses `key`.
    pub fn take<T>(&mut self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, origin)) => {
                v.parse().map(Some).map_err(|e| CliError::usage(format!("{origin}: bad value `{v}` for `{key}`: {e}")))
            }
        }
    }

    pub fn take_bool(&mut self, key: &str) -> CliResult<Option<bool>> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((v, origin)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(Some(true)),
                "false" | "no" | "off" | "0" => Ok(Some(false)),
                _ => Err(CliError::usage(format!("{origin}: `{key}` expects true or false, got `{v}`"))),
            },
        }
    }

    /// Fails on any key the command did not consume.
    pub fn finish(self) -> CliResult<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, (_, origin))) => Err(CliError::usage(format!("{origin}: unknown setting `{key}`"))),
        }
    }
}

fn normalise(key: &str) -> String {
    key.trim().replace('-', "_")
}
