//! Runs every preset and prints its verdict frequencies.

use signed_consensus::presets::validate_preset;
use signed_consensus::{preset_config, run_experiment, Model, PresetName, VerdictKind};

fn main() {
    let trials: Option<usize> = std::env::args().nth(1).map(|a| a.parse().expect("trials"));
    for p in PresetName::ALL {
        let mut cfg = preset_config(p).expect("preset");
        if let Some(t) = trials {
            cfg.trials = t;
        }
        let ok = validate_preset(p, &cfg).expect("validation").ok();
        let models: &[Model] = if cfg.source.contrast_models { &[Model::Relative, Model::Flip] } else { &[cfg.params.model] };
        for &m in models {
            let s = run_experiment(&cfg.with_model(m));
            let freqs: Vec<String> =
                VerdictKind::ALL.iter().map(|&k| format!("{}={:.3}", k.name(), s.frequency(k))).collect();
            println!("{p:<13} {m:<8} hypotheses={ok} {}", freqs.join(" "));
        }
    }
}
