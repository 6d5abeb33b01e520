//! Figure-reproduction presets shipped with the crate.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../../presets/fig2.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6a", include_str!("../../presets/fig6a.toml")),
    ("fig7", include_str!("../../presets/fig7.toml")),
    ("fig8a", include_str!("../../presets/fig8a.toml")),
    ("fig13", include_str!("../../presets/fig13.toml")),
    ("fig14", include_str!("../../presets/fig14.toml")),
    ("fig15", include_str!("../../presets/fig15.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
