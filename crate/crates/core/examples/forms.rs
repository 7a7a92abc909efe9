// The cocycle of a loop algebra, its fixed points, and H¹ of the twisted
// module over A1^(1).

use std::sync::Arc;

use loopalg::autos::AutWord;
use loopalg::forms::{check_cocycle, fixed_form, h1_vanishing_check, loop_cocycle, same_graded_subspaces, twist_action};
use loopalg::liealg::LieAlgebra;
use loopalg::loops::build_loop;
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let l = Arc::new(LieAlgebra::build_finite(&Gcm::from_label("A2")?)?);
    let flip = AutWord::diagram(vec![1, 0]);
    let u = loop_cocycle(&l, &flip, 2)?;
    println!("cocycle {}", u.to_json());
    assert!(check_cocycle(&u, &l, 1)?);
    let ff = fixed_form(&u, &l, 3)?;
    let la = build_loop(&l, &flip, 2, Some(3))?;
    println!("fixed points agree with the loop algebra: {}", same_graded_subspaces(&ff, &la));

    let aff = LieAlgebra::build_affine(&Gcm::from_label("A1^(1)")?, 3)?;
    for w in [AutWord::identity(), AutWord::diagram(vec![1, 0])] {
        let t = twist_action(&loop_cocycle(&aff, &w, 2)?, &aff)?;
        let r = h1_vanishing_check(&t)?;
        println!("{w}: dim M = {}, Z1 = {}, B1 = {}, defect {}", r.module_dim, r.cocycles, r.coboundaries, r.defect);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("forms example");
}
