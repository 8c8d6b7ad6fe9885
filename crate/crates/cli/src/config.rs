//! `key = value` config files, merged into argv before parsing.
//!
//! Each key names a long flag of the subcommand. Entries are inserted right
//! after the subcommand name unless the same flag already appears on the
//! command line, so explicit flags always win. `key = true` turns on a switch
//! and `key = false` leaves it off.

use std::ffi::OsString;
use std::path::Path;

#[derive(Debug, PartialEq)]
pub struct ConfigError(pub String);

pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if k.is_empty() || k == "config" {
            return Err(ConfigError(format!("line {}: invalid key `{}`", n + 1, k)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Value of `--config` in argv, if any.
fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn mentions(argv: &[OsString], flag: &str) -> bool {
    let long = format!("--{flag}");
    let with_value = format!("{long}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&with_value) || (flag == "verbose" && s.starts_with("-v"))
    })
}

pub fn merge(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
    let entries = parse(&text)?;
    // first positional after the binary name is the subcommand
    let Some(sub) = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(argv);
    };
    let at = sub + 2;
    let mut injected = Vec::new();
    for (k, v) in entries {
        if mentions(&argv, &k) {
            continue;
        }
        match v.as_str() {
            "true" => injected.push(OsString::from(format!("--{k}"))),
            "false" => {}
            _ => injected.push(OsString::from(format!("--{k}={v}"))),
        }
    }
    let mut out = argv[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse("# run\nt_max = 0.5\n\nformat=csv # inline\n").unwrap();
        assert_eq!(e, vec![("t-max".into(), "0.5".into()), ("format".into(), "csv".into())]);
        assert!(parse("nonsense").is_err());
        assert!(parse("config = x").is_err());
    }

    #[test]
    fn explicit_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        std::fs::write(&p, "seed = 7\nprobes = 4\nnormalize = true\nverbose = false\n").unwrap();
        let argv = os(&["isocurv", "catalog", "--seed", "9", "--config", p.to_str().unwrap()]);
        let merged = merge(argv).unwrap();
        let s: Vec<String> = merged.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[..4], &["isocurv", "catalog", "--probes=4", "--normalize"]);
        assert!(s.contains(&"9".to_string()) && !s.iter().any(|a| a.starts_with("--seed=")));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(merge(os(&["isocurv", "flow", "--config", "/nonexistent/cfg"])).is_err());
        let plain = os(&["isocurv", "flow"]);
        assert_eq!(merge(plain.clone()).unwrap(), plain);
    }
}
