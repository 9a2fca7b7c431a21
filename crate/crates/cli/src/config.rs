//! Configuration documents: `key=value` lines with bracketed sections.
//!
//! Every key has a dotted path (`N`, `eval.field`, `output.format`, ...).
//! Values from a file are overridden by command-line flags; `FRACLAB_SEED`
//! supplies the seed when neither does.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use fraclab_core::FracOrder;
use ini::Ini;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Constants,
    Eval,
    Kernel,
    VerifyPoly,
    VerifyIdentity,
    Converge,
    Wos,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Constants => "constants",
            Task::Eval => "eval",
            Task::Kernel => "kernel",
            Task::VerifyPoly => "verify-poly",
            Task::VerifyIdentity => "verify-identity",
            Task::Converge => "converge",
            Task::Wos => "wos",
        }
    }

    /// Section holding the task's own parameters.
    pub fn section(self) -> &'static str {
        match self {
            Task::Constants => "constants",
            Task::Eval => "eval",
            Task::Kernel => "kernel",
            Task::VerifyPoly => "verify_poly",
            Task::VerifyIdentity => "identity",
            Task::Converge => "converge",
            Task::Wos => "wos",
        }
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "constants" => Task::Constants,
            "eval" => Task::Eval,
            "kernel" => Task::Kernel,
            "verify-poly" | "verify_poly" => Task::VerifyPoly,
            "verify-identity" | "verify_identity" => Task::VerifyIdentity,
            "converge" => Task::Converge,
            "wos" => Task::Wos,
            _ => return Err(format!("unknown task '{s}'")),
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Keys accepted in each section; the empty name is the top level.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["task", "N", "s", "seed", "jobs"]),
    ("output", &["path", "format"]),
    ("constants", &[]),
    ("eval", &["field", "x", "mode", "eps", "R", "tol"]),
    ("kernel", &["kind", "x", "y", "R", "norm_mode", "green_norm"]),
    ("verify_poly", &["m", "eps", "x", "random"]),
    ("identity", &["which", "cs_mode", "ks_mode", "bump", "radius", "tol"]),
    ("converge", &["study", "grid", "box", "expect_rate", "rate_tol"]),
    ("wos", &["x", "data", "walks", "max_steps", "norm_mode"]),
];

fn known(path: &str) -> bool {
    let (section, key) = path.rsplit_once('.').unwrap_or(("", path));
    SCHEMA.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

/// Merged `path -> value` map with the origin of each value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, (String, Source)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    Env,
    File,
    Flag,
}

impl RawConfig {
    pub fn parse_document(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Syntax(e.to_string()))?;
        let mut raw = RawConfig::default();
        for (section, props) in ini.iter() {
            for (k, v) in props.iter() {
                let path = match section {
                    Some(sec) => format!("{sec}.{k}"),
                    None => k.to_string(),
                };
                raw.set(&path, v, Source::File)?;
            }
        }
        Ok(raw)
    }

    /// Comma- or newline-separated `key=value` pairs, as in `task=constants, N=2, s=0.5`.
    pub fn parse_inline(text: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for item in text.split([',', '\n']).map(str::trim).filter(|t| !t.is_empty()) {
            let Some((k, v)) = item.split_once('=') else {
                return Err(CliError::Syntax(format!("expected key=value, found '{item}'")));
            };
            raw.set(k.trim(), v.trim(), Source::File)?;
        }
        Ok(raw)
    }

    pub fn set(&mut self, path: &str, value: &str, source: Source) -> Result<(), CliError> {
        if !known(path) {
            return Err(CliError::UnknownKey(path.to_string()));
        }
        match self.values.get(path) {
            Some((_, existing)) if *existing > source => {}
            _ => {
                self.values.insert(path.to_string(), (value.to_string(), source));
            }
        }
        Ok(())
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.values.get(path).map(|(v, _)| v.as_str())
    }

    pub fn source(&self, path: &str) -> Option<Source> {
        self.values.get(path).map(|(_, s)| *s)
    }

    /// Lays `other` over `self`, respecting source precedence.
    pub fn merge(&mut self, other: &RawConfig) -> Result<(), CliError> {
        for (k, (v, src)) in &other.values {
            self.set(k, v, *src)?;
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }

    pub fn typed<T: FromStr>(&self, path: &str, expected: &'static str) -> Result<Option<T>, CliError> {
        match self.get(path) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| CliError::Type { path: path.to_string(), expected, found: v.to_string() }),
        }
    }

    pub fn required<T: FromStr>(&self, path: &str, expected: &'static str) -> Result<T, CliError> {
        self.typed(path, expected)?.ok_or_else(|| CliError::Missing(path.to_string()))
    }

    pub fn list(&self, path: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(path) {
            None => Ok(None),
            Some(v) => v
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| CliError::Type {
                        path: path.to_string(),
                        expected: "comma-separated reals",
                        found: v.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(()),
        }
    }
}

/// Validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub task: Task,
    pub order: FracOrder,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<String>,
    pub format: Format,
    pub raw: RawConfig,
}

impl RunConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, CliError> {
        let task: Task = raw
            .get("task")
            .ok_or_else(|| CliError::Missing("task".into()))?
            .parse()
            .map_err(|m: String| CliError::Precondition { path: "task".into(), msg: m })?;
        let n: usize = raw.required("N", "positive integer")?;
        let s: f64 = raw.required("s", "real in (0, 1)")?;
        let order = FracOrder::new(n, s).map_err(|e| CliError::Precondition { path: "N, s (FracOrder)".into(), msg: e.to_string() })?;
        let seed = raw.typed::<u64>("seed", "unsigned 64-bit integer")?;
        let jobs = raw.typed::<usize>("jobs", "positive integer")?;
        if jobs == Some(0) {
            return Err(CliError::Precondition { path: "jobs".into(), msg: "must be at least 1".into() });
        }
        let format = raw.typed::<Format>("output.format", "csv or json")?.unwrap_or(Format::Json);
        let out = raw.get("output.path").map(str::to_string);
        for (k, _) in raw.entries() {
            let section = k.rsplit_once('.').map(|p| p.0).unwrap_or("");
            if !section.is_empty() && section != "output" && section != task.section() {
                return Err(CliError::Precondition { path: k.to_string(), msg: format!("key belongs to another task than '{task}'") });
            }
        }
        Ok(RunConfig { task, order, seed, jobs, out, format, raw })
    }

    /// Parameter of the current task's section.
    pub fn key(&self, key: &str) -> String {
        format!("{}.{key}", self.task.section())
    }

    pub fn param<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>, CliError> {
        self.raw.typed(&self.key(key), expected)
    }

    pub fn param_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.raw.list(&self.key(key))
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        self.raw.get(&self.key(key))
    }

    pub fn precondition(&self, key: &str, msg: impl Into<String>) -> CliError {
        CliError::Precondition { path: self.key(key), msg: msg.into() }
    }

    pub fn inputs(&self) -> BTreeMap<String, String> {
        self.raw.entries().filter(|(k, _)| !k.starts_with("output.") && *k != "jobs").map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }
}

/// Parses a configuration document (sections or inline pairs) into a [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw = if text.contains('[') || text.contains('\n') { RawConfig::parse_document(text)? } else { RawConfig::parse_inline(text)? };
    RunConfig::from_raw(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_document_forms() {
        let c = parse_config("task=constants, N=2, s=0.5").unwrap();
        assert_eq!(c.task, Task::Constants);
        assert_eq!(c.order.dim(), 2);
        let doc = "task = converge\nN = 2\ns = 0.25\n[converge]\nstudy = green\n[output]\nformat = csv\n";
        let c = parse_config(doc).unwrap();
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.param_str("study"), Some("green"));
    }

    #[test]
    fn strictness() {
        assert!(
            matches!(parse_config("task=constants, N=2, s=1.5"), Err(CliError::Precondition { ref path, .. }) if path.contains("FracOrder"))
        );
        assert!(matches!(parse_config("task=constants, N=2, s=0.5, colour=red"), Err(CliError::UnknownKey(k)) if k == "colour"));
        assert!(matches!(parse_config("task=constants, N=two, s=0.5"), Err(CliError::Type { ref path, .. }) if path == "N"));
        assert!(matches!(parse_config("task=constants, N=2, s=0.5, wos.walks=10"), Err(CliError::Precondition { .. })));
    }

    #[test]
    fn flags_override_file_and_env_is_lowest() {
        let mut raw = RawConfig::parse_inline("task=eval, N=1, s=0.5, seed=3").unwrap();
        raw.set("s", "0.25", Source::Flag).unwrap();
        raw.set("seed", "9", Source::Env).unwrap();
        let c = RunConfig::from_raw(raw).unwrap();
        assert_eq!(c.order.s(), 0.25);
        assert_eq!(c.seed, Some(3));
    }
}
