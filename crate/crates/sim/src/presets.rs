//! Scenario presets bundled into the binary.

const CONFIGS: &[(&str, &str)] = &[
    ("paper-default", include_str!("../presets/paper-default.conf")),
    (
        "paper-large-requests",
        include_str!("../presets/paper-large-requests.conf"),
    ),
    ("fig1", include_str!("../presets/fig1.conf")),
];

const TRACES: &[(&str, &str)] = &[("fig1", include_str!("../presets/fig1.trace"))];

pub fn names() -> Vec<&'static str> {
    CONFIGS.iter().map(|(n, _)| *n).collect()
}

/// Config text of the preset `name`.
pub fn config(name: &str) -> Option<&'static str> {
    CONFIGS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Bundled trace `name`, referenced from configs as `builtin:<name>`.
pub fn trace(name: &str) -> Option<&'static str> {
    TRACES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
