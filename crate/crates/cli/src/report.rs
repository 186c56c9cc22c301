//! Output envelope shared by every command.

use serde::Serialize;

use crate::config::RunConfig;

/// `{command, seed, config_hash, result}`. Nothing time-dependent goes in
/// here, so equal configurations give byte-identical files.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub seed: u64,
    pub config_hash: String,
    pub result: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(cfg: &'a RunConfig, result: &'a T) -> Self {
        Envelope {
            command: &cfg.command,
            seed: cfg.seed,
            config_hash: cfg.hash(),
            result,
        }
    }
}
