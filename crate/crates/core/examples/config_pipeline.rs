// The same pipeline the command line runs: a TOML config, explanation
// records and a metric table.

use spectral_xai::experiment::{cmd_evaluate, cmd_explain, ExperimentConfig};

const CONFIG: &str = r#"
seed = 1
[oracle]
kind = "polynomial"
n = 6
terms = [
  { s = [0], c = 0.8 },
  { s = [1, 2], c = -0.5 },
  { s = [3, 4, 5], c = 0.25 },
]

[[methods]]
name = "harmonica"
degree = 2
samples = 128
lambda = 0.01

[[methods]]
name = "harmonica-local"
degree = 2
samples = 64
lambda = 0.01
radius = 2

[[methods]]
name = "shapley"

[metrics]
norms = ["2", "0-thresholded"]
radii = [1, 2]
truthful_gap = [2]
"#;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    for (name, text) in cmd_explain(&cfg)? {
        println!("--- {name} ({} lines)", text.lines().count());
    }
    print!("{}", cmd_evaluate(&cfg)?.csv);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
