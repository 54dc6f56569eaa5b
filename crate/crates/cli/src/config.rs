//! Flat `key=value` configuration files.
//!
//! Keys are long flag names (`left_rank` and `left-rank` both work). The
//! file's entries are spliced into the argument list right after the
//! subcommand, skipping any key the command line already sets.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use projectnet::{Error, Result};

use crate::args::HyperArgs;

pub fn parse_config(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                location: format!("{source}:{}", lineno + 1),
                message: "expected key=value".into(),
            });
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Parse {
                location: format!("{source}:{}", lineno + 1),
                message: format!("invalid key {key:?}"),
            });
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = iter.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// Returns `args` with the referenced configuration file's entries inserted
/// after the subcommand name, minus keys that `args` already has.
pub fn splice_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let entries = parse_config(&text, &path.display().to_string())?;
    let given: Vec<String> = args.iter().skip(2).filter_map(|a| flag_name(&a.to_string_lossy())).collect();
    let mut out = Vec::with_capacity(args.len() + entries.len());
    let mut iter = args.into_iter();
    out.extend(iter.next());
    out.extend(iter.next());
    for (key, value) in entries {
        if given.contains(&key) {
            continue;
        }
        out.push(format!("--{key}={value}").into());
    }
    out.extend(iter);
    Ok(out)
}

fn flag_name(arg: &str) -> Option<String> {
    if arg == "-o" {
        return Some("output".into());
    }
    let name = arg.strip_prefix("--")?;
    let name = name.split_once('=').map_or(name, |(k, _)| k);
    Some(name.replace('_', "-"))
}

/// Renders effective hyperparameters in the format [`parse_config`] reads.
pub fn render_config(data: &crate::args::DataArgs, hyper: &HyperArgs) -> String {
    let mut lines: Vec<(String, String)> = Vec::new();
    let path = |p: &Path| p.display().to_string();
    lines.push(("corpus".into(), path(&data.corpus)));
    if let Some(p) = &data.lexicon {
        lines.push(("lexicon".into(), path(p)));
    }
    if let Some(p) = &data.vocab {
        lines.push(("vocab".into(), path(p)));
    }
    lines.push(("min_count".into(), data.min_count.to_string()));
    if let Some(p) = &data.triples {
        lines.push(("triples".into(), path(p)));
    }
    let variant = clap::ValueEnum::to_possible_value(&hyper.variant)
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    lines.push(("variant".into(), variant));
    lines.push(("dim".into(), hyper.dim.to_string()));
    lines.push(("left_rank".into(), hyper.left_rank.to_string()));
    lines.push(("right_rank".into(), hyper.right_rank.to_string()));
    lines.push(("margin".into(), hyper.margin.to_string()));
    lines.push(("alpha".into(), hyper.alpha.to_string()));
    lines.push(("lr".into(), hyper.lr.to_string()));
    lines.push(("epochs".into(), hyper.epochs.to_string()));
    lines.push(("window".into(), hyper.window.to_string()));
    lines.push(("negatives".into(), hyper.negatives.to_string()));
    lines.push(("seed".into(), hyper.seed.to_string()));
    lines.push(("workers".into(), hyper.workers.to_string()));
    lines.push(("deterministic".into(), hyper.deterministic.to_string()));
    if let Some(s) = hyper.subsample {
        lines.push(("subsample".into(), s.to_string()));
    }
    lines.push(("negative_power".into(), hyper.negative_power.to_string()));
    lines.push(("negative_table_size".into(), hyper.negative_table_size.to_string()));
    lines.push(("corrupt_relations".into(), hyper.corrupt_relations.to_string()));
    if let Some(s) = hyper.steps_per_epoch {
        lines.push(("steps_per_epoch".into(), s.to_string()));
    }
    lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}
