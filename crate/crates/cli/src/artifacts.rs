//! Artifact persistence: atomic writes and provenance headers.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use kuramoto_rc::error::{invalid, Result};

pub const VERSION_LINE: &str = concat!("krc ", env!("CARGO_PKG_VERSION"));

/// Provenance lines embedded at the top of every output file.
pub fn metadata(seed: u64, config_hash: u64) -> String {
    format!("# {VERSION_LINE}\n# seed = {seed}\n# config_hash = {config_hash:016x}\n")
}

/// Writes `content` to `path` via a temp file + rename so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| invalid(format!("{} has no parent directory", path.display())))?;
    fs::create_dir_all(dir)
        .map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| invalid(format!("bad output path {}", path.display())))?;
    tmp.set_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)
            .map_err(|e| invalid(format!("cannot create {}: {e}", tmp.display())))?;
        f.write_all(content)
            .and_then(|_| f.sync_all())
            .map_err(|e| invalid(format!("cannot write {}: {e}", tmp.display())))?;
    }
    fs::rename(&tmp, path)
        .map_err(|e| invalid(format!("cannot rename into {}: {e}", path.display())))?;
    Ok(())
}

/// Writes metadata + body atomically.
pub fn write_artifact(path: &Path, seed: u64, config_hash: u64, body: &str) -> Result<()> {
    let mut content = metadata(seed, config_hash);
    content.push_str(body);
    write_atomic(path, content.as_bytes())
}

/// Strips leading `#` comment lines (the provenance header) from file text.
pub fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_round_trips_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("out.csv");
        write_artifact(&path, 7, 0xabcd, "a,b\n1,2\n").unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("# {VERSION_LINE}\n# seed = 7\n")));
        assert!(text.contains("config_hash = 000000000000abcd"));
        assert_eq!(strip_comments(&text), "a,b\n1,2\n");
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name() != "out.csv")
            .collect();
        assert!(leftovers.is_empty());
    }
}
