//! Serialization of reals that may be infinite.
//!
//! JSON has no infinities, so non-finite values are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use serde::Serializer;

/// Text form of a non-finite value, `None` for finite ones.
pub fn non_finite_name(x: f64) -> Option<&'static str> {
    if x.is_nan() {
        Some("nan")
    } else if x == f64::INFINITY {
        Some("inf")
    } else if x == f64::NEG_INFINITY {
        Some("-inf")
    } else {
        None
    }
}

/// For `#[serde(serialize_with = "...")]` on `f64` fields.
pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    match non_finite_name(*x) {
        Some(name) => s.serialize_str(name),
        None => s.serialize_f64(*x),
    }
}
