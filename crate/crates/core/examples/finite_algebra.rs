// Chevalley basis of sl3: brackets, the invariant form and the Serre relations.

use loopalg::liealg::LieAlgebra;
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let l = LieAlgebra::build_finite(&Gcm::from_label("A2")?)?;
    println!("dim sl3 = {}", l.dim());
    let (e1, e2, f1) = (l.e(0), l.e(1), l.f(0));
    let e12 = l.bracket(&e1, &e2)?;
    println!("[e1, e2] = {}", l.format_element(&e12));
    println!("[e1, f1] = {}", l.format_element(&l.bracket(&e1, &f1)?));
    // (ad e1)^2 e2 = 0
    assert!(l.bracket(&e1, &e12)?.is_zero());
    let form = l.invariant_form();
    println!("(e1 | f1) = {}", form.pair(&e1, &f1));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("finite algebra example");
}
