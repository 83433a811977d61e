use std::path::PathBuf;

use flatsmc_core::scenario::presets;
use flatsmc_core::Scenario;

fn shipped(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    Scenario::load(&path).unwrap()
}

#[test]
fn shipped_files_match_the_presets() {
    assert_eq!(shipped("nominal.toml"), presets::nominal());
    assert_eq!(shipped("offset.toml"), presets::offset_start());
    assert_eq!(shipped("gust.toml"), presets::wind_gust(2.0));
    assert_eq!(shipped("gust_bounded.toml"), presets::wind_gust(0.5));
}

#[test]
fn every_shipped_scenario_validates() {
    for name in ["nominal.toml", "offset.toml", "gust.toml", "gust_bounded.toml", "noisy.toml"] {
        shipped(name).validate().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn presets_survive_a_toml_round_trip() {
    for sc in [presets::nominal(), presets::offset_start(), presets::wind_gust(2.0)] {
        assert_eq!(Scenario::from_toml_str(&sc.to_toml_string()).unwrap(), sc);
    }
}
