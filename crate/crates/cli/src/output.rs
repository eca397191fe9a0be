//! Output headers and file helpers shared by the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hompss::Branch;
use serde::Serialize;

use crate::{CliError, RunConfig};

/// Sign convention of one fixed branch, as derived by the library.
#[derive(Debug, Clone, Serialize)]
pub struct BranchSigns {
    pub code: &'static str,
    pub s1: i32,
    pub s2: i32,
    /// `+1` when `X_theta` is the squeezed quadrature.
    pub squeeze_sign: i32,
    /// Sign of the cubic phase `Im b`.
    pub mixing_sign: i32,
}

pub fn branch_mapping() -> Vec<BranchSigns> {
    Branch::FIXED
        .iter()
        .map(|&b| {
            let (s1, s2) = b.signs().expect("fixed branch");
            BranchSigns {
                code: b.code(),
                s1: s1.value::<f64>() as i32,
                s2: s2.value::<f64>() as i32,
                squeeze_sign: b.squeeze_sign().expect("fixed branch"),
                mixing_sign: b.mixing_sign().expect("fixed branch"),
            }
        })
        .collect()
}

/// `#`-prefixed provenance block: tool version, full config, branch signs
/// and any command-specific lines.
pub fn header(config: &RunConfig, extra: &[String]) -> String {
    let mut h = String::new();
    let _ = writeln!(
        h,
        "# hompss {} {}",
        env!("CARGO_PKG_VERSION"),
        config.command
    );
    let json = serde_json::to_string(config).expect("config serializes");
    let _ = writeln!(h, "# config: {json}");
    let _ = writeln!(
        h,
        "# branches: delta = theta + s1 pi/2, phi = delta + theta - s2 pi/2"
    );
    for b in branch_mapping() {
        let _ =
            writeln!(
            h,
            "# branch {}: s1={:+} s2={:+} X_theta {} (var X_theta = e^{{{}2r}}/2), sign(Im b)={:+}",
            b.code,
            b.s1,
            b.s2,
            if b.squeeze_sign > 0 { "squeezed" } else { "antisqueezed" },
            if b.squeeze_sign > 0 { "-" } else { "+" },
            b.mixing_sign
        );
    }
    for line in extra {
        let _ = writeln!(h, "# {line}");
    }
    h
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `base` with `suffix` appended to its file name.
pub fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    base.with_file_name(name)
}

/// Round-trip exact, locale independent.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
