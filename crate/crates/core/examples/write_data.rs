//! Regenerates the JSON fixtures under `data/`.

use std::fs;
use std::path::Path;

use fcmac::presets::{self, ChannelCode, Preset};
use fcmac::schemes::ExperimentConfig;

fn write<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let mut text = serde_json::to_string_pretty(value).unwrap();
    text.push('\n');
    fs::write(dir.join(name), text).unwrap();
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    fs::create_dir_all(&dir).unwrap();
    write(&dir, "ternary_joint_code.json", &presets::system(Preset::Ternary, ChannelCode::Joint).unwrap());
    write(&dir, "ternary_independent_code.json", &presets::system(Preset::Ternary, ChannelCode::Independent).unwrap());
    write(&dir, "off_diagonal.json", &presets::off_diagonal_pair());
    write(&dir, "greater_than.json", &presets::greater_than());
    let (g, _) = Preset::Ternary.graphs(&presets::off_diagonal_pair()).unwrap();
    write(&dir, "off_diagonal_graph.json", &g);
    write(&dir, "adder_mac.json", &fcmac::channels::adder_mac());
    write(&dir, "gauss_diff_rho075.json", &{
        let mut c = ExperimentConfig::named("gauss-diff").unwrap();
        if let ExperimentConfig::GaussDiff(d) = &mut c {
            d.rho = 0.75;
            d.samples = 1_000_000;
        }
        c
    });
}
