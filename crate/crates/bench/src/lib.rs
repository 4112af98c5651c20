//! Benchmark inputs shared by the criterion targets.

use std::path::PathBuf;

/// The bundled EasyList snapshot.
pub fn easylist_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/easylist-2017.txt")
}

pub fn easylist_text() -> String {
    std::fs::read_to_string(easylist_path()).expect("bundled list is readable")
}
