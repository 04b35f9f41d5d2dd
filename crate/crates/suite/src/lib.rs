//! Holder crate for the `acceptance` test target. The checks live in
//! `tests/acceptance.rs` and share generators with the core crate's tests.
