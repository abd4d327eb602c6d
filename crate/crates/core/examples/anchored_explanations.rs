// Several local models, one per anchor, with and without the consensus
// penalty that keeps them alike.

use spectral_xai::explain::{harmonica_anchor, harmonica_anchor_constrained, inconsistency, Explanation};
use spectral_xai::metrics::{interpretation_error, spectrum_distance, MeasureSpec, Norm};
use spectral_xai::solver::JointConfig;
use spectral_xai::synthetic::random_sparse;
use spectral_xai::{BasisFamily, Oracle};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 8;
    let f = random_sparse(n, 3, 10, 0.1, 1.0, 3)?;
    let oracle = Oracle::polynomial(f.clone());
    let basis = BasisFamily::up_to_degree(n, 2)?;
    let k = 4;

    let free = harmonica_anchor(&oracle, k, &basis, 512, 0.05, 5)?;
    let spread = |e: &Explanation| {
        let mut worst: f64 = 0.0;
        for a in 0..e.k() {
            for b in a + 1..e.k() {
                worst = worst.max(spectrum_distance(&e.spectra[a], &e.spectra[b], 2.0).unwrap());
            }
        }
        worst
    };
    let err = |e: &Explanation| interpretation_error(&f, e, &MeasureSpec::cube_exact(), Norm::Lp(2.0)).map(|r| r.value);
    println!(
        "independent anchors: inconsistency {:.2} bits, widest pair {:.3}, error {:.4}",
        inconsistency(&free),
        spread(&free),
        err(&free)?
    );

    for lambda2 in [0.0, 0.5, 5.0] {
        let cfg = JointConfig {
            lambda1: 1e-4,
            lambda2,
            eta: 0.05,
            epochs: 2000,
        };
        let e = harmonica_anchor_constrained(&oracle, k, &basis, 512, &cfg, 5)?;
        let last = e.meta.trajectory.last().unwrap();
        println!(
            "consensus weight {lambda2}: widest pair {:.3}, error {:.4}, final loss {:.5}",
            spread(&e),
            err(&e)?,
            last.total
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
