// Treat a separate process as the black box. The model here is a shell
// loop speaking the line protocol: a majority vote over three features plus
// a pairwise interaction.

use std::time::Duration;

use spectral_xai::explain::harmonica;
use spectral_xai::{BasisFamily, Oracle};

const MODEL: &str = r#"
read hello; echo "$hello"
while read x0 x1 x2 x3 x4 x5; do
  [ "$x0" = BYE ] && exit 0
  if [ $((x0 + x1 + x2)) -gt 0 ]; then m=1; else m=-1; fi
  case "$m$((x3 * x4))" in
    11) echo 0.75 ;; 1-1) echo 0.25 ;; -11) echo -0.25 ;; *) echo -0.75 ;;
  esac
done
"#;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 6;
    let command = vec!["sh".to_string(), "-c".to_string(), MODEL.to_string()];
    let oracle = Oracle::external(&command, n, Duration::from_secs(10))?;
    let basis = BasisFamily::up_to_degree(n, 3)?;
    let e = harmonica(&oracle, &basis, 200, 0.1, 17)?;
    println!("{} queries", oracle.query_count());
    // majority of three is (x0 + x1 + x2)/4 - x0 x1 x2 / 4, halved here
    for (s, c) in e.spectrum().iter() {
        println!("  S={s:<8} {c:+.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
