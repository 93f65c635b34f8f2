use super::config::RunConfig;
use crate::error::{Error, Result};

/// Bundled figure recipes, `(name, document)`.
pub const PRESETS: [(&str, &str); 6] = [
    ("fig1", include_str!("../../presets/fig1.toml")),
    ("fig2", include_str!("../../presets/fig2.toml")),
    ("fig3", include_str!("../../presets/fig3.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6", include_str!("../../presets/fig6.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            Error::config(
                "preset",
                format!(
                    "unknown preset {name:?}; known: {}",
                    preset_names().join(", ")
                ),
            )
        })
}

pub fn preset(name: &str) -> Result<RunConfig> {
    RunConfig::from_toml_str(preset_source(name)?, &format!("preset {name}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in preset_names() {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("fig7").is_err());
    }
}
