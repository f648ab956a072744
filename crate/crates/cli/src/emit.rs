//! Output emission: every report embeds the resolved run configuration so
//! a run can be reproduced byte-for-byte from its own output.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// The invocation that produced an output. `argv` holds the command-line
/// arguments with any `--out` pair stripped, so re-running `compsplit
/// <argv> --out <dir>` regenerates identical files.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub argv: Vec<String>,
}

impl RunConfig {
    pub fn capture() -> Self {
        let raw: Vec<String> = std::env::args().skip(1).collect();
        let mut argv = Vec::with_capacity(raw.len());
        let mut skip_next = false;
        for arg in raw {
            if skip_next {
                skip_next = false;
                continue;
            }
            if arg == "--out" {
                skip_next = true;
                continue;
            }
            if arg.starts_with("--out=") {
                continue;
            }
            argv.push(arg);
        }
        Self { argv }
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory `{}`", dir.display()))?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing `{}`", path.display()))?;
    Ok(())
}

pub fn write_csv(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory `{}`", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing `{}`", path.display()))?;
    Ok(())
}
