//! `key = value` config files, spliced into the argument list.

use std::fs;

const SWITCHES: &[&str] = &["brute", "bounds", "planar"];

fn config_path(args: &[String]) -> Option<(usize, usize, String)> {
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            return args.get(i + 1).map(|p| (i, 2, p.clone()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some((i, 1, p.to_string()));
        }
    }
    None
}

/// Turns the lines of a config file into flags. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", k + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(format!("config line {}: empty key", k + 1));
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => out.push(format!("--{key}")),
                "false" => {}
                _ => return Err(format!("config line {}: {key} takes true or false", k + 1)),
            }
        } else {
            out.push(format!("--{key}"));
            out.push(value.to_string());
        }
    }
    Ok(out)
}

/// Removes `--config <file>` from `args` and inserts the file's flags right
/// after the subcommand, so flags given on the command line win.
pub fn expand(mut args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, String> {
    let Some((at, width, path)) = config_path(&args) else {
        return Ok(args);
    };
    args.drain(at..at + width);
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let flags = parse(&text)?;
    let pos = args
        .iter()
        .position(|a| subcommands.contains(&a.as_str()))
        .map_or(args.len(), |p| p + 1);
    args.splice(pos..pos, flags);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_become_flags() {
        let f = parse("# run\nbeta = golden\nn=5\n\nbrute = true\nbounds = false\n").unwrap();
        assert_eq!(f, ["--beta", "golden", "--n", "5", "--brute"]);
        assert!(parse("oops").is_err());
    }

    #[test]
    fn n_max_spelling() {
        assert_eq!(parse("n_max = 7").unwrap(), ["--n-max", "7"]);
    }
}
