//! Command implementations behind the `grr` binary and the websocket
//! teleoperation service.

pub mod commands;
pub mod service;
