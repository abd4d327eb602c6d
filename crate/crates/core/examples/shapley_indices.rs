// Exact Shapley values and the two interaction indices of one game, and how
// well their global extensions reproduce it.

use spectral_xai::baselines::{shapley_exact, shapley_interaction, shapley_taylor, CoalitionGame, GlobalExtension};
use spectral_xai::metrics::{interpretation_error, MeasureSpec, Norm};
use spectral_xai::reference;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let f = reference::f3();
    let game = CoalitionGame::of(&f)?;
    let phi = shapley_exact(&game)?;
    println!("shapley values {phi:.4?}, sum {:.4}", phi.iter().sum::<f64>());

    for k in 1..=3 {
        let st = shapley_taylor(&game, k)?;
        let sii = shapley_interaction(&game, k)?;
        let err = |idx| {
            let g = GlobalExtension::of_game(idx, &game);
            interpretation_error(&f, &g, &MeasureSpec::cube_exact(), Norm::Lp(2.0)).map(|r| r.value)
        };
        println!(
            "order {k}: taylor total {:.4} error {:.4}; interaction total {:.4} error {:.4}",
            st.total(),
            err(st.clone())?,
            sii.total(),
            err(sii.clone())?
        );
    }
    print!("{}", shapley_taylor(&game, 2)?.to_text());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
