//! Experiment presets shipped with the binary.

const PRESETS: &[(&str, &str)] = &[
    ("fig3-single-minority", include_str!("../../presets/fig3-single-minority.cfg")),
    ("fig3-equal-total", include_str!("../../presets/fig3-equal-total.cfg")),
    ("fig4-multi-minority", include_str!("../../presets/fig4-multi-minority.cfg")),
    ("fig4-iid", include_str!("../../presets/fig4-iid.cfg")),
    ("fig3-single-minority-mnist", include_str!("../../presets/fig3-single-minority-mnist.cfg")),
    ("fig3-equal-total-mnist", include_str!("../../presets/fig3-equal-total-mnist.cfg")),
    ("fig4-multi-minority-mnist", include_str!("../../presets/fig4-multi-minority-mnist.cfg")),
    ("fig4-iid-mnist", include_str!("../../presets/fig4-iid-mnist.cfg")),
];

/// Config text of a preset.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;
    use crate::cli::config::ExperimentConfig;

    #[test]
    fn every_preset_parses() {
        for name in names() {
            let cfg = ExperimentConfig::parse(preset(name).unwrap(), Path::new(name))
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(cfg.federation.clients, 5, "{name}");
            assert_eq!(cfg.federation.rounds, 3, "{name}");
            assert_eq!(cfg.train.epochs, 100, "{name}");
            assert_eq!(cfg.train.gen_learning_rate, 1e-4, "{name}");
            assert_eq!(cfg.federation.samples_per_client, 10_000, "{name}");
            assert_eq!(cfg.output, Path::new("runs").join(name), "{name}");
        }
        assert_eq!(names().len(), 8);
    }
}
