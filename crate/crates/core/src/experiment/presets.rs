//! Built-in property presets for the bundled drivetrain model, plus the
//! observation layout a tabular agent should use on it.
//!
//! Preset sources live in the repository's `presets/` directory and are
//! embedded at compile time, so the binary resolves names like `phi7`
//! without touching the filesystem.  Each file documents its threshold
//! constants and how they were chosen.

use crate::agents::ObsSpec;
use crate::stl::{parse_spec_file, ParseError, SpecFile};

macro_rules! preset_file {
    ($name:literal) => {
        ($name, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../presets/", $name, ".stl")))
    };
}

/// Name → source text for every bundled preset.
pub const PRESETS: &[(&str, &str)] = &[
    preset_file!("phi1"),
    preset_file!("phi2"),
    preset_file!("phi3"),
    preset_file!("phi4"),
    preset_file!("phi5"),
    preset_file!("phi6"),
    preset_file!("phi7"),
    preset_file!("phi8"),
    preset_file!("phi9"),
    preset_file!("steering"),
    preset_file!("phi1-unreachable"),
    preset_file!("phi7-unreachable"),
    preset_file!("unsat"),
    preset_file!("safe"),
];

/// Source text of a preset; accepts `phi7`, `phi7.stl`, or a path ending
/// in one of those (so `--spec presets/phi7.stl` also resolves).
pub fn preset_source(name: &str) -> Option<&'static str> {
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    let base = base.strip_suffix(".stl").unwrap_or(base);
    PRESETS.iter().find(|(n, _)| *n == base).map(|(_, text)| *text)
}

/// Parses a preset by name.
pub fn preset(name: &str) -> Option<Result<SpecFile, ParseError>> {
    preset_source(name).map(parse_spec_file)
}

/// All preset names, in registry order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Observation layout for tabular agents on the drivetrain model: vehicle
/// speed and engine speed binned over their operating envelopes, the gear
/// number at one bin per gear, and the per-gear flags left to the boolean
/// default of two bins.
///
/// The speed range [0, 160] puts common thresholds (30, 50, 120) on or
/// near bin edges; engine speed [800, 6000] spans idle to past the usual
/// red-line settings.
pub fn at_observation_spec() -> Vec<ObsSpec> {
    vec![
        ObsSpec { signal: "v".into(), lo: 0.0, hi: 160.0, bins: 8 },
        ObsSpec { signal: "omega".into(), lo: 800.0, hi: 6000.0, bins: 8 },
        ObsSpec { signal: "g".into(), lo: 1.0, hi: 4.0, bins: 4 },
    ]
}
