// Words in Diagram, ω and Ad(r): evaluation, normal forms and Out(A).

use loopalg::autos::{eval_word, normal_form, period, AutWord, OutGroup};
use loopalg::liealg::LieAlgebra;
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g = Gcm::from_label("D4")?;
    let l = LieAlgebra::build_finite(&g)?;
    let tri = AutWord::diagram(vec![2, 1, 3, 0]);
    let w = tri.then(&AutWord::adr(vec![1, 0, 2, 1], 3)).then(&AutWord::omega());
    println!("word {w}");
    println!("normal form {:?}", normal_form(&w, g.n())?);
    println!("period {}", period(&eval_word(&w, &l)?, &l, 24)?);
    let out = OutGroup::new(&g)?;
    println!("|Out(A)| = {}, p(w) = {}", out.order(), out.project_word(&w));
    for class in out.tilde_classes() {
        println!("  class of {} (order {}, {} members)", class[0], class[0].order(), class.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("automorphisms example");
}
