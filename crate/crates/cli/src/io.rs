use std::fs;
use std::path::{Path, PathBuf};

use oscsync::harness::Csv;
use oscsync::{Error, PhaseState, Result};

pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// A JSON array read from the file `arg`, or `arg` itself as a
/// comma-separated list.
pub fn read_vector(arg: &str) -> Result<Vec<f64>> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return serde_json::from_str(&text).map_err(|e| invalid(format!("{arg}: expected a JSON array of numbers ({e})")));
    }
    arg.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("cannot read {arg:?} as a file or number list"))))
        .collect()
}

pub fn read_phases(arg: &str) -> Result<PhaseState> {
    PhaseState::new(read_vector(arg)?)
}

/// Writes `text` to `dir/name`, creating `dir`.
pub fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

/// Primary table: into `dir/name`, or stdout without a directory.
pub fn emit_table(out: Option<&Path>, name: &str, csv: &Csv) -> Result<()> {
    match out {
        Some(dir) => {
            write(dir, name, csv.as_str())?;
        }
        None => print!("{}", csv.as_str()),
    }
    Ok(())
}

pub fn json<T: serde::Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

/// Output directory for files that have no stdout form.
pub fn require_out<'a>(out: Option<&'a Path>, what: &str) -> Result<&'a Path> {
    out.ok_or_else(|| invalid(format!("{what} needs --out")))
}
