//! `key = value` configuration files and the merged run configuration.
//!
//! Precedence, highest first: command-line flags, the `WATERMELON_CACHE_DIR`
//! environment variable (cache directory only), the configuration file,
//! built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use watermelon_core::dgop::{Precision, DEFAULT_TAIL_TOL};

use crate::table::Format;
use crate::Failure;

pub const CONFIG_FILE: &str = "watermelon.conf";
pub const CACHE_ENV: &str = "WATERMELON_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".cache";
pub const MAX_TAIL_TOL: f64 = 1e-10;
const KEYS: [&str; 5] = ["precision", "tail_tol", "cache_dir", "output", "format"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub precision: Precision,
    pub tail_tol: f64,
    pub cache_dir: PathBuf,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: Precision::Standard,
            tail_tol: DEFAULT_TAIL_TOL,
            cache_dir: PathBuf::from(DEFAULT_CACHE_DIR),
            output: None,
            format: Format::Csv,
        }
    }
}

/// Values given explicitly on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub precision: Option<Precision>,
    pub tail_tol: Option<f64>,
    pub cache_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn parse_precision(s: &str) -> Result<Precision, String> {
    match s {
        "standard" => Ok(Precision::Standard),
        "extended" => Ok(Precision::Extended),
        _ => Err(format!("unknown precision '{s}' (standard|extended)")),
    }
}

pub fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("unknown format '{s}' (csv|json)")),
    }
}

pub fn parse_tail_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("tail_tol '{s}' is not a number"))?;
    if v > 0.0 && v <= MAX_TAIL_TOL {
        Ok(v)
    } else {
        Err(format!("tail_tol {v} outside (0, {MAX_TAIL_TOL:e}]"))
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>, Failure> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |why: String| Failure::Value(format!("{origin}:{}: {why}", no + 1));
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Failure::Usage(format!("{origin}:{}: unknown key '{k}'", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Failure::Conflict(format!("{origin}:{}: key '{k}' given twice", no + 1)));
        }
    }
    Ok(out)
}

/// Merges defaults, the configuration file (explicit path, or
/// `watermelon.conf` in the working directory when present), the
/// environment and the command-line overrides.
pub fn resolve(config_path: Option<&Path>, env_cache: Option<String>, flags: Overrides) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    let path = match config_path {
        Some(p) => Some(p.to_path_buf()),
        None => Some(PathBuf::from(CONFIG_FILE)).filter(|p| p.is_file()),
    };
    if let Some(path) = path {
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let origin = path.display().to_string();
        fn value<T>(r: Result<T, String>, origin: &str) -> Result<T, Failure> {
            r.map_err(|e| Failure::Value(format!("{origin}: {e}")))
        }
        for (k, v) in parse_config(&text, &origin)? {
            match k.as_str() {
                "precision" => cfg.precision = value(parse_precision(&v), &origin)?,
                "tail_tol" => cfg.tail_tol = value(parse_tail_tol(&v), &origin)?,
                "cache_dir" => cfg.cache_dir = PathBuf::from(v),
                "output" => cfg.output = Some(PathBuf::from(v)).filter(|p| p.as_os_str() != "-"),
                "format" => cfg.format = value(parse_format(&v), &origin)?,
                _ => unreachable!("keys validated by parse_config"),
            }
        }
    }
    if let Some(dir) = env_cache.filter(|d| !d.is_empty()) {
        cfg.cache_dir = PathBuf::from(dir);
    }
    if let Some(p) = flags.precision {
        cfg.precision = p;
    }
    if let Some(t) = flags.tail_tol {
        cfg.tail_tol = t;
    }
    if let Some(d) = flags.cache_dir {
        cfg.cache_dir = d;
    }
    if let Some(o) = flags.output {
        cfg.output = Some(o).filter(|p| p.as_os_str() != "-");
    }
    if let Some(f) = flags.format {
        cfg.format = f;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let m = parse_config("# top\n\nprecision = extended  # trailing\nformat=json\n", "t").unwrap();
        assert_eq!(m["precision"], "extended");
        assert_eq!(m["format"], "json");
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(parse_config("colour = red\n", "t"), Err(Failure::Usage(_))));
        assert!(matches!(parse_config("format = csv\nformat = json\n", "t"), Err(Failure::Conflict(_))));
        assert!(matches!(parse_config("format\n", "t"), Err(Failure::Value(_))));
    }

    #[test]
    fn tail_tol_bounds() {
        assert!(parse_tail_tol("1e-12").is_ok());
        assert!(parse_tail_tol("1e-10").is_ok());
        assert!(parse_tail_tol("1e-9").is_err());
        assert!(parse_tail_tol("0").is_err());
        assert!(parse_tail_tol("abc").is_err());
    }

    #[test]
    fn precedence() {
        let dir = std::env::temp_dir().join(format!("wm-conf-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("w.conf");
        std::fs::write(&file, "format = json\ncache_dir = from-file\ntail_tol = 1e-20\n").unwrap();
        let cfg = resolve(Some(&file), None, Overrides::default()).unwrap();
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.cache_dir, PathBuf::from("from-file"));
        assert_eq!(cfg.tail_tol, 1e-20);
        let cfg = resolve(Some(&file), Some("from-env".into()), Overrides::default()).unwrap();
        assert_eq!(cfg.cache_dir, PathBuf::from("from-env"));
        let flags = Overrides { format: Some(Format::Csv), cache_dir: Some("from-flag".into()), ..Default::default() };
        let cfg = resolve(Some(&file), Some("from-env".into()), flags).unwrap();
        assert_eq!(cfg.format, Format::Csv);
        assert_eq!(cfg.cache_dir, PathBuf::from("from-flag"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
