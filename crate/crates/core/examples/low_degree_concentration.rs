// How fast the plain correlation estimates settle on the true coefficients.

use spectral_xai::explain::low_degree;
use spectral_xai::metrics::spectrum_distance;
use spectral_xai::synthetic::random_sparse;
use spectral_xai::{BasisFamily, Oracle, TruthTable};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 10;
    let f = random_sparse(n, 2, 8, 0.1, 0.5, 1)?;
    let bound = TruthTable::from_spectrum(&f)?
        .values()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let basis = BasisFamily::up_to_degree(n, 2)?;
    let oracle = Oracle::polynomial(f.clone());

    let (eps, delta) = (0.05, 0.05);
    let t_needed = 2.0 * bound * bound / (eps * eps) * (2.0 * basis.len() as f64 / delta).ln();
    println!("|f| <= {bound:.3}, {} coefficients, samples for ±{eps} at 95%: {}", basis.len(), t_needed.ceil());

    for t in [100, 1_000, 10_000, 100_000] {
        let e = low_degree(&oracle, &basis, t, 9)?;
        let worst = spectrum_distance(e.spectrum(), &f.restricted_to(&basis), f64::INFINITY)?;
        println!("T={t:>6}: largest coefficient error {worst:.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
