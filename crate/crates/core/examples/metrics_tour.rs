// Interpretation error under several norms and measures, truthfulness gap
// and spectral distance for a truncated explanation.

use spectral_xai::metrics::{
    interpretation_error, is_truthful, spectrum_distance, truthful_gap, Evaluation, GapMode, MeasureSpec, Norm,
    Support,
};
use spectral_xai::reference;
use spectral_xai::{BasisFamily, NeighborhoodSpec};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let f = reference::f2();
    let linear = BasisFamily::up_to_degree(3, 1)?;
    let g = f.restricted_to(&linear);

    for norm in [Norm::Lp(1.0), Norm::Lp(2.0), Norm::Lp(4.0), Norm::L0Thresholded, Norm::L0Exact] {
        let r = interpretation_error(&f, &g, &MeasureSpec::cube_exact(), norm)?;
        println!("{:<14} {:.4}", norm.label(), r.value);
    }
    for radius in 0..=3 {
        let mu = MeasureSpec::ball_exact(NeighborhoodSpec::around_full_input(3, radius)?);
        println!("radius {radius}: {:.4}", interpretation_error(&f, &g, &mu, Norm::Lp(2.0))?.value);
    }
    let mc = MeasureSpec {
        support: Support::UniformCube,
        evaluation: Evaluation::MonteCarlo { samples: 4000, seed: 1 },
    };
    let r = interpretation_error(&f, &g, &mc, Norm::Lp(2.0))?;
    println!("monte carlo: {:.4} ± {:.4}", r.value, r.stderr.unwrap_or(0.0));

    for basis in [linear, BasisFamily::up_to_degree(3, 2)?] {
        let gap = truthful_gap(&f, &g, &basis, GapMode::Exact)?;
        println!("gap on {} characters: {gap:.4} truthful={}", basis.len(), is_truthful(gap));
    }
    println!("spectral distance (p=2) {:.4}, (p=0) {}", spectrum_distance(&f, &g, 2.0)?, spectrum_distance(&f, &g, 0.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
