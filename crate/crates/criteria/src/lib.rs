//! Acceptance criteria live in `tests/acceptance.rs`; this crate has no code.
//! It is a separate package so that `cargo test --workspace` runs the long,
//! partly failing criteria after every other suite.
