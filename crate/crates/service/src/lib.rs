//! HTTP service and operator CLI for the govsheet budgeting engine.

pub mod api;
pub mod cli;
pub mod client;
pub mod config;
pub mod demo;
pub mod server;
