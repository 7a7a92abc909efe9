mod classify_gcm {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/classify_gcm.rs"));
}
mod finite_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/finite_algebra.rs"));
}
mod automorphisms {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/automorphisms.rs"));
}
mod loop_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/loop_algebra.rs"));
}
mod forms {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/forms.rs"));
}
mod erasing {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/erasing.rs"));
}
mod decide {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/decide.rs"));
}
mod affine_table {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/affine_table.rs"));
}
mod cli_jobs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_jobs.rs"));
}

#[test]
fn classify_gcm_runs() {
    classify_gcm::run_example().expect("classify example should run");
}

#[test]
fn finite_algebra_runs() {
    finite_algebra::run_example().expect("finite algebra example should run");
}

#[test]
fn automorphisms_runs() {
    automorphisms::run_example().expect("automorphisms example should run");
}

#[test]
fn loop_algebra_runs() {
    loop_algebra::run_example().expect("loop algebra example should run");
}

#[test]
fn forms_runs() {
    forms::run_example().expect("forms example should run");
}

#[test]
fn erasing_runs() {
    erasing::run_example().expect("erasing example should run");
}

#[test]
fn decide_runs() {
    decide::run_example().expect("decide example should run");
}

#[test]
fn affine_table_runs() {
    affine_table::run_example().expect("table example should run");
}

#[test]
fn cli_jobs_runs() {
    cli_jobs::run_example().expect("cli example should run");
}
