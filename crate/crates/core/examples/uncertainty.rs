// A function and its spectrum cannot both be concentrated.

use spectral_xai::metrics::{mismatch_product, uncertainty_report};
use spectral_xai::reference;
use spectral_xai::{SparseSpectrum, Subset, TruthTable};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4;
    let parity = SparseSpectrum::from_terms(n, [(Subset::from_mask(0b1111), 1.0)])?;
    let mut spike = vec![0.0; 1 << n];
    spike[5] = 1.0;
    let cases = [
        ("parity", TruthTable::from_spectrum(&parity)?),
        ("point mass", TruthTable::new(n, spike)?),
        ("f2", TruthTable::from_spectrum(&reference::f2())?),
    ];
    for (name, t) in &cases {
        let r = uncertainty_report(t)?;
        println!("{name:<10} {r:?}");
    }

    let f2 = TruthTable::from_spectrum(&reference::f2())?;
    let truncated = TruthTable::from_spectrum(&reference::f2().restricted_to(&spectral_xai::BasisFamily::up_to_degree(3, 1)?))?;
    let (i0, d0) = mismatch_product(&f2, &truncated)?;
    println!("linear part of f2 is wrong on {:.0}% of inputs and misses {d0} coefficients", i0 * 100.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
