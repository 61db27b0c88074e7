#![allow(dead_code)]

use std::path::PathBuf;

use qsl_cli::ScenarioConfig;

pub const SCENARIOS: [&str; 7] = [
    "plus",
    "plus_plus",
    "phi_plus",
    "p",
    "pp",
    "p_noise",
    "pp_noise",
];

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario_path(name: &str) -> PathBuf {
    workspace_root()
        .join("scenarios")
        .join(format!("{name}.conf"))
}

pub fn scenario(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_file(&scenario_path(name)).unwrap()
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}
