// Loop algebras of finite-type algebras by diagram class, with their
// affine labels.

use loopalg::decide::affine_table;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let t = affine_table(4)?;
    print!("{}", t.to_tsv());
    println!("{} same-base pairs checked, all distinct: {}", t.distinct_pairs, t.all_distinct);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("table example");
}
