// Recompute the three worked tables: every method evaluated at the eight
// inputs of {-1,+1}^3, next to the polynomial itself.

use spectral_xai::baselines::{shapley_taylor, CoalitionGame, GlobalExtension};
use spectral_xai::explain::{full_cube_batch, harmonica, low_degree_on};
use spectral_xai::reference;
use spectral_xai::{BasisFamily, BooleanFunction, Oracle};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let points = reference::column_points();
    for (order, table) in reference::TABLES.iter().enumerate() {
        let order = order + 1;
        let f = table.spectrum();
        let oracle = Oracle::polynomial(f.clone());
        let basis = BasisFamily::up_to_degree(3, order)?;

        let h = harmonica(&oracle, &basis, 64, 1e-6, 2023)?;
        let l = low_degree_on(&full_cube_batch(&oracle)?, &basis)?;
        let game = CoalitionGame::of(&f)?;
        let st = GlobalExtension::of_game(shapley_taylor(&game, order)?, &game);

        println!("{} (order {order})", table.name);
        let rows: [(&str, &dyn BooleanFunction); 4] =
            [("f", &f), ("harmonica", &h), ("low-degree", &l), ("shapley-taylor", &st)];
        for (name, g) in rows {
            let cells: Vec<String> = points.iter().map(|x| format!("{:+.3}", g.value(x).unwrap())).collect();
            println!("  {name:<15} {}", cells.join(" "));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
