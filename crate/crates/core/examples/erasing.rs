// Erasing a commuting diagonal factor: sl3 with τ = flip and a = (1, 1).

use std::sync::Arc;

use loopalg::autos::AutWord;
use loopalg::erasing::{erasing_data, erasing_iso, gd_polynomial, verify_conj};
use loopalg::liealg::LieAlgebra;
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("g_3(x) = {:?}", gd_polynomial(3));
    let data = erasing_data(&vec![vec![0, 1], vec![1, 0]], &[1, 0], 2)?;
    println!("swap, a = (1,0): b = {:?}, c = {:?}", data.b, data.c);

    let l = Arc::new(LieAlgebra::build_finite(&Gcm::from_label("A2")?)?);
    let flip = AutWord::diagram(vec![1, 0]);
    let er = erasing_iso(&l, &flip, &[1, 1], 2, Some(4))?;
    println!("{}", er.map.name());
    println!("conjugation identity holds: {}", verify_conj(&er.map, &flip, &[1, 1], 2, 4)?);
    let report = er.map.verify(1)?;
    println!("bracket checks: {}", report.pairs_checked);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("erasing example");
}
