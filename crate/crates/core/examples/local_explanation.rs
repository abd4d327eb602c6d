// Explain a 12-feature function around one input, using only removals of
// at most three features.

use spectral_xai::explain::harmonica_local_on;
use spectral_xai::oracle::{sample_neighborhood, SampleBatch};
use spectral_xai::solver::LassoConfig;
use spectral_xai::metrics::{interpretation_error, MeasureSpec, Norm};
use spectral_xai::synthetic::random_sparse;
use spectral_xai::{BasisFamily, NeighborhoodSpec, Oracle, SignedPoint};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 12;
    let f = random_sparse(n, 3, 12, 0.1, 1.0, 7)?;
    let oracle = Oracle::polynomial(f.clone());

    let mut signs = vec![1i8; n];
    signs[3] = -1;
    signs[8] = -1;
    let base = SignedPoint::new(&signs)?;
    let spec = NeighborhoodSpec::new(base, 3)?;
    println!("neighborhood of {base}: {} inputs", spec.size());

    let batch = SampleBatch::evaluate(&oracle, sample_neighborhood(&spec, 600, 11)?, Some(11))?;
    // near the base every character is almost constant, so the columns are
    // strongly correlated and descent needs a larger sweep budget
    let cfg = LassoConfig {
        max_sweeps: 200_000,
        ..LassoConfig::new(0.05)
    };
    for degree in 1..=2 {
        let basis = BasisFamily::up_to_degree(n, degree)?;
        let e = harmonica_local_on(&batch, &spec, &basis, &cfg)?;
        let local = interpretation_error(&f, &e, &MeasureSpec::ball_exact(spec), Norm::Lp(2.0))?;
        let global = interpretation_error(&f, &e, &MeasureSpec::cube_exact(), Norm::Lp(2.0))?;
        println!(
            "degree {degree}: {} terms, error on the neighborhood {:.4}, on the whole cube {:.4}",
            e.spectrum().len(),
            local.value,
            global.value
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
