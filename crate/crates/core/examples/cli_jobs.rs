// Running command-line jobs in process.

use loopalg::cli::main_with_args;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let jobs: [&[&str]; 3] = [
        &["classify", "--gcm", "G2"],
        &["decide", "--gcm", "A2", "--sigma1", r#"[{"kind":"diagram","perm":[2,1]}]"#, "--sigma2", "[]", "--m", "2", "--format", "tsv"],
        &["erase", "--gcm", "A1", "--tau", "[]", "--a", "1", "--m", "2", "--window", "2", "--format", "tsv"],
    ];
    for args in jobs {
        let r = main_with_args(std::iter::once("loopalg").chain(args.iter().copied()).map(String::from));
        println!("$ loopalg {} -> exit {}", args.join(" "), r.exit);
        print!("{}", r.body.lines().take(6).map(|l| format!("{l}\n")).collect::<String>());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli example");
}
