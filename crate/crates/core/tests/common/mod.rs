#![allow(dead_code)]

pub mod gen;
pub mod memcell;
pub mod naive;
pub mod perturb;

use std::path::PathBuf;

use caa_core::dsl::{parse_protocol, ProtocolDoc};

pub fn protocols_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../protocols")
}

pub fn protocol_path(name: &str) -> PathBuf {
    protocols_dir().join(name)
}

pub fn load(name: &str) -> ProtocolDoc {
    let text = std::fs::read_to_string(protocol_path(name)).expect("protocol file");
    parse_protocol(&text).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

pub fn shipped() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(protocols_dir())
        .expect("protocols directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".caa"))
        .collect();
    names.sort();
    names
}
