// L_2(sl3, flip): graded pieces, brackets, the elementary isomorphisms and
// the centroid.

use std::sync::Arc;

use loopalg::autos::AutWord;
use loopalg::liealg::LieAlgebra;
use loopalg::loops::{build_loop, induced_base_aut, inverse_iso, loop_centroid, period_change_iso};
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let l = Arc::new(LieAlgebra::build_finite(&Gcm::from_label("A2")?)?);
    let flip = AutWord::diagram(vec![1, 0]);
    let la = Arc::new(build_loop(&l, &flip, 2, Some(4))?);
    println!("period dims {:?}", la.period_dims());
    let x = &la.basis_at(1)[0];
    for y in la.basis_at(-1) {
        let b = la.bracket(x, &y)?;
        if !b.is_zero() {
            assert!(la.contains(&b));
            println!("nonzero bracket in degrees {:?}", b.degrees().collect::<Vec<_>>());
            break;
        }
    }

    let inv = inverse_iso(&la)?;
    inv.verify(1)?;
    println!("inverse map induces {}", induced_base_aut(&inv)?);
    let pc = period_change_iso(&l, &flip, 2, 4, Some(2))?;
    println!("period change checked on {} basis vectors", pc.verify(1)?.basis_checked);

    let c = loop_centroid(&build_loop(&l, &flip, 2, Some(4))?, 4)?;
    println!("centroid ranks by shift {:?}", c.ranks);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("loop algebra example");
}
