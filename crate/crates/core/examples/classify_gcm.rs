// Classify a few generalized Cartan matrices and show their realizations.

use loopalg::{CartanType, Gcm};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let samples = [
        vec![vec![2, -1], vec![-1, 2]],
        vec![vec![2, -2], vec![-2, 2]],
        vec![vec![2, -1, 0], vec![-1, 2, -2], vec![0, -1, 2]],
        vec![vec![2, -3], vec![-3, 2]],
    ];
    for a in samples {
        let g = Gcm::new(a)?;
        let label = match g.classify() {
            CartanType::Finite(l) => format!("finite {l}"),
            CartanType::Affine(l) => format!("affine {l}"),
            CartanType::Indefinite => "indefinite".to_string(),
        };
        let r = g.realization();
        println!("{g}\n  {label}, symmetrizer {:?}, dim h = {}", g.symmetrizer(), r.h_dim);
    }
    let d4 = Gcm::from_label("D4^(1)")?;
    assert!(matches!(d4.classify(), CartanType::Affine(_)));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("classify example");
}
