fn main() {
    let report = loopalg::cli::main_with_args(std::env::args());
    print!("{}", report.body);
    std::process::exit(report.exit);
}
