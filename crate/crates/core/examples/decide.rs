// Isomorphism decisions with witness chains and certificates.

use loopalg::autos::AutWord;
use loopalg::decide::{decide_iso, WitnessStatus};
use loopalg::Gcm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a3 = Gcm::from_label("A3")?;
    let flip = AutWord::diagram(vec![2, 1, 0]);
    let twisted = flip.then(&AutWord::adr(vec![1, 0, 1], 2));
    let v = decide_iso(&a3, &twisted, &flip, 4)?;
    println!("{twisted} vs {flip}: isomorphic = {}", v.isomorphic);
    if let Some(WitnessStatus::Built(w)) = &v.witness {
        for link in &w.links {
            println!("  {}", link.map.name());
        }
        println!("  composite is {}", w.semilinearity);
    }
    let v = decide_iso(&a3, &flip, &AutWord::identity(), 2)?;
    let cert = v.certificate.expect("negative verdict carries a certificate");
    println!("flip vs id: isomorphic = {}, {} conjugators tried", v.isomorphic, cert.transcript.len());
    for inv in &cert.invariants {
        println!("  {}: {} vs {}", inv.name, inv.left, inv.right);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("decide example");
}
