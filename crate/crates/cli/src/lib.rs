//! File-level tooling on top of `msrcode`: shard format, manifests and the
//! `msr` subcommands.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod pack;
pub mod shard;

pub use error::CliError;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book {}
