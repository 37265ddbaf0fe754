//! Command-line front end: argument parsing, command execution and the
//! CSV/JSON output documents.

pub mod args;
pub mod output;
pub mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use args::Format;
use output::Document;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "AEPP_OUTPUT_DIR";

/// Where a command's output goes; `None` means stdout.
pub fn output_path(explicit: Option<&Path>, command: &str, format: Format, dir: Option<&Path>) -> Option<PathBuf> {
    match (explicit, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(format!("{command}.{}", format.extension()))),
        (None, None) => None,
    }
}

pub fn emit(doc: &Document, format: Format, path: Option<&Path>) -> Result<()> {
    let write = |w: &mut dyn Write| -> Result<()> {
        match format {
            Format::Csv => doc.write_csv(w),
            Format::Json => doc.write_json(w),
        }
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
            }
            let file = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush().with_context(|| format!("cannot write {}", p.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}
