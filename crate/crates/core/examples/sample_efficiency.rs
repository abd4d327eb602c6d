// Harmonica against the plain correlation estimator at equal sample sizes.

use spectral_xai::experiment::{cmd_bench_samples, ExperimentConfig};

const CONFIG: &str = r#"
seed = 42
[bench]
n = 16
degree = 2
sparsity = 8
samples = [50, 100, 200, 400]
repetitions = 5
"#;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let out = cmd_bench_samples(&cfg)?;
    for r in &out.rows {
        println!("{:<10} T={:<4} distance {:.4} ± {:.4}", r.method, r.samples, r.mean_distance, r.stderr);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
