//! Library side of the `ifttpin` binary, split out so the integration tests
//! can drive the server in-process.

pub mod commands;
pub mod server;
