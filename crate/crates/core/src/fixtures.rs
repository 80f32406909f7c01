//! Bundled protocol scripts: the predicate library, the correct
//! request/response protocol, and three flawed variants, each a minimal
//! documented edit of the correct script.

use crate::syntax::{load_script, CheckedScript, LoadError};
use thiserror::Error;

pub const LIBRARY: &str = include_str!("../../../fixtures/library.tf");
pub const CORRECT: &str = include_str!("../../../fixtures/correct.tf");
pub const VARIANT_A: &str = include_str!("../../../fixtures/variantA.tf");
pub const VARIANT_B: &str = include_str!("../../../fixtures/variantB.tf");
pub const VARIANT_C: &str = include_str!("../../../fixtures/variantC.tf");

pub const FIXTURE_NAMES: &[&str] =
    &["correct", "variantA", "variantB", "variantC", "library-only"];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("unknown fixture `{0}` (expected one of correct, variantA, variantB, variantC, library-only)")]
    UnknownFixture(String),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Source text of a named fixture. Honors the `TULAVERIF_FIXTURES`
/// environment variable as an override directory holding `<name>.tf`.
pub fn fixture_source(name: &str) -> Result<String, FixtureError> {
    if let Ok(dir) = std::env::var("TULAVERIF_FIXTURES") {
        let file = match name {
            "library-only" => "library.tf".to_string(),
            other => format!("{other}.tf"),
        };
        let path = std::path::Path::new(&dir).join(file);
        return std::fs::read_to_string(&path)
            .map_err(|source| FixtureError::Io { path: path.display().to_string(), source });
    }
    match name {
        "correct" => Ok(CORRECT.to_string()),
        "variantA" => Ok(VARIANT_A.to_string()),
        "variantB" => Ok(VARIANT_B.to_string()),
        "variantC" => Ok(VARIANT_C.to_string()),
        "library-only" => Ok(LIBRARY.to_string()),
        other => Err(FixtureError::UnknownFixture(other.to_string())),
    }
}

/// Loads a checked script by symbolic fixture name.
pub fn load_fixture(name: &str) -> Result<CheckedScript, FixtureError> {
    Ok(load_script(&fixture_source(name)?)?)
}

/// Loads a checked script from a file path or, failing that, a fixture name.
pub fn load_path_or_fixture(spec: &str) -> Result<CheckedScript, FixtureError> {
    if FIXTURE_NAMES.contains(&spec) {
        return load_fixture(spec);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|source| FixtureError::Io { path: spec.to_string(), source })?;
    Ok(load_script(&text)?)
}
