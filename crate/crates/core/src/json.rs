//! Path-reporting JSON decoding shared by the module schemas.

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Decode `text`, reporting the path of the first offending value.
pub fn from_str<T: DeserializeOwned>(op: &'static str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| schema_error(op, "", e))
}

/// Decode an already-parsed value found at `prefix` within its document.
pub fn from_value<T: DeserializeOwned>(
    op: &'static str,
    prefix: &str,
    value: serde_json::Value,
) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| schema_error(op, prefix, e))
}

fn schema_error<E: std::fmt::Display>(
    op: &'static str,
    prefix: &str,
    e: serde_path_to_error::Error<E>,
) -> Error {
    let inner = e.path().to_string();
    let path = match (prefix.is_empty(), inner == ".") {
        (true, _) => inner,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{inner}"),
    };
    Error::Schema {
        op,
        path,
        reason: e.into_inner().to_string(),
    }
}

pub(crate) fn schema(
    op: &'static str,
    path: impl Into<String>,
    reason: impl Into<String>,
) -> Error {
    Error::Schema {
        op,
        path: path.into(),
        reason: reason.into(),
    }
}
