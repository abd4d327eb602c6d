// On the full cube every column is orthogonal, so each LASSO coefficient is
// the true one pulled toward zero by λ/2^(n+1).

use spectral_xai::oracle::sample_uniform;
use spectral_xai::reference;
use spectral_xai::solver::{solve_lasso, DesignProblem, LassoConfig};
use spectral_xai::{BasisFamily, BooleanFunction, SignedPoint};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let f = reference::f2();
    let basis = BasisFamily::up_to_degree(3, 2)?;
    let cube: Vec<SignedPoint> = (0..8).map(|m| SignedPoint::from_mask(3, m)).collect::<Result<_, _>>()?;
    let y = cube.iter().map(|x| f.value(x)).collect::<Result<Vec<_>, _>>()?;
    let problem = DesignProblem::new(basis.clone(), &cube, y)?;

    for lambda in [0.0, 0.8, 2.0, 5.0] {
        let r = solve_lasso(&problem, &LassoConfig::new(lambda))?;
        let coeffs: Vec<String> = r.coefficients.iter().map(|c| format!("{c:+.4}")).collect();
        println!("λ={lambda:<4} sweeps {:<3} {}", r.sweeps, coeffs.join(" "));
    }

    // with random rows the columns correlate and more sweeps are needed
    let points = sample_uniform(3, 20, 4)?;
    let y = points.iter().map(|x| f.value(x)).collect::<Result<Vec<_>, _>>()?;
    let r = solve_lasso(&DesignProblem::new(basis, &points, y)?, &LassoConfig::new(0.1))?;
    println!(
        "20 random rows: converged={} after {} sweeps, objective {:.6}",
        r.converged,
        r.sweeps,
        r.objective_trace.last().unwrap()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
