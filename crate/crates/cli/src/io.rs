use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use morinode::{FourierAnsatz, Grid, PeriodicFn};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input file.
    Input { path: PathBuf, message: String },
    /// Precondition violations, including library errors.
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 65,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { path, message } => write!(f, "malformed input file {}: {message}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<morinode::Error> for CliError {
    fn from(e: morinode::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Raw JSON of an input file, kept for the config hash.
pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn parse_value<T: DeserializeOwned>(path: &Path, value: &Value) -> CliResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        CliError::Input {
            path: path.to_path_buf(),
            message: format!("field `{field}`: {}", e.into_inner()),
        }
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<(T, Value)> {
    let raw = read_json(path)?;
    Ok((parse_value(path, &raw)?, raw))
}

/// A function on the circle given either as Fourier coefficients (sampled on
/// `grid`) or as samples `{"grid": {"n": ...}, "values": [...]}`.
pub fn load_function(path: &Path, grid: Grid) -> CliResult<(PeriodicFn, Value)> {
    let raw = read_json(path)?;
    let u = if raw.get("values").is_some() {
        let u: PeriodicFn = parse_value(path, &raw)?;
        PeriodicFn::from_values(u.grid(), u.values().to_vec()).map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
    } else {
        parse_value::<FourierAnsatz>(path, &raw)?.sample(grid)
    };
    Ok((u, raw))
}

pub fn grid(n: usize) -> CliResult<Grid> {
    Ok(Grid::new(n)?)
}

pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(serde_json::to_vec(config).expect("config serializes"));
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn schema(command: &str) -> String {
    format!("morinode/{command}/v{SCHEMA_VERSION}")
}

/// `{"schema", "command", "config_hash", "config", ...result fields}`.
pub fn envelope(command: &str, config: &Value, result: impl Serialize) -> CliResult<Value> {
    let mut out = Map::new();
    out.insert("schema".into(), Value::String(schema(command)));
    out.insert("command".into(), Value::String(command.into()));
    out.insert("config_hash".into(), Value::String(config_hash(config)));
    out.insert("config".into(), config.clone());
    match serde_json::to_value(result).map_err(|e| usage(e.to_string()))? {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("result".into(), other);
        }
    }
    Ok(Value::Object(out))
}

/// Checks the schema field of a result document against `command`.
pub fn validate(doc: &Value, command: &str) -> bool {
    doc.get("schema").and_then(Value::as_str) == Some(schema(command).as_str())
}

pub fn result_path(out: &Path, command: &str, config: &Value, ext: &str) -> PathBuf {
    out.join(command).join(format!("{}.{ext}", config_hash(config)))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

pub fn csv_curve(command: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = format!("# {}\nx,rho_minus_x\n", schema(command));
    for (x, g) in rows {
        s.push_str(&format!("{x:e},{g:e}\n"));
    }
    s
}
