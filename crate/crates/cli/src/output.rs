//! Atomic output files with the fully-resolved config embedded.
//!
//! CSV files carry the config as a leading `# config {...}` comment line;
//! JSON files wrap it as `{"config": ..., "result": ...}`. Numeric fields
//! use the shortest round-trip decimal representation, so reruns with the
//! same config are byte-identical.

use std::io::Write;
use std::path::Path;

/// Writes via a temp file in the destination directory plus a rename.
pub fn write_atomic(path: &str, contents: &str) -> std::io::Result<()> {
    let path = Path::new(path);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            tempfile::NamedTempFile::new_in(d)?
        }
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Emits to the path when given, otherwise to stdout.
pub fn emit(path: &Option<String>, contents: &str) -> std::io::Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            std::io::stdout().flush()
        }
    }
}

pub fn json_document(
    config: &impl serde::Serialize,
    result: serde_json::Value,
) -> serde_json::Value {
    serde_json::json!({
        "config": serde_json::to_value(config).expect("config serializes"),
        "result": result,
    })
}

pub fn csv_header(config: &impl serde::Serialize, columns: &str) -> String {
    let cfg = serde_json::to_string(config).expect("config serializes");
    format!("# config {cfg}\n{columns}\n")
}

/// Shortest round-trip decimal for f64, with `NaN`-safe formatting.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::from("nan")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => num(v),
        None => String::new(),
    }
}
