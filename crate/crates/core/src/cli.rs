//! Command-line jobs: argument parsing, JSON inputs, deterministic reports.

use std::path::Path;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::autos::{AutWord, OutGroup};
use crate::decide::{affine_table, decide_with, degree_zero_fingerprint, random_word_pair, DecideOptions};
use crate::erasing::{erasing_iso, verify_conj};
use crate::error::{Error, Result};
use crate::forms::{fixed_form, h1_vanishing_check, loop_cocycle, same_graded_subspaces, twist_action};
use crate::gcm::{CartanType, Gcm};
use crate::liealg::LieAlgebra;
use crate::loops::{build_loop, loop_centroid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "loopalg", version, about = "Twisted loop algebras of Kac-Moody algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
}

#[derive(Clone, Debug, Default, clap::Args)]
pub struct Inputs {
    /// GCM as a JSON file ({"matrix": [[..]]}) or a catalog label such as A2 or A1^(1)
    #[arg(long)]
    pub gcm: Option<String>,
    /// Word for σ1: a JSON file or inline JSON
    #[arg(long)]
    pub sigma1: Option<String>,
    /// Word for σ2: a JSON file or inline JSON
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub window: Option<i64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Classify a GCM
    Classify(Inputs),
    /// Diagram automorphisms, Out(A) and its ∼-classes
    Autgroup(Inputs),
    /// Build L_m(g, σ1)
    Loop(Inputs),
    /// Decide L(g, σ1) ≅ L(g, σ2)
    Decide {
        #[command(flatten)]
        inputs: Inputs,
        /// Also compare centroid ranks in the certificate
        #[arg(long)]
        centroid: bool,
    },
    /// Erasing automorphism for τ and Ad(a; m)
    Erase {
        #[command(flatten)]
        inputs: Inputs,
        /// Word for τ: a JSON file or inline JSON
        #[arg(long)]
        tau: String,
        /// Integer vector, comma separated
        #[arg(long, allow_hyphen_values = true)]
        a: String,
    },
    /// Graded centroid ranks of L_m(g, σ1)
    Centroid(Inputs),
    /// First cohomology of the twisted Hom(h″, c) module
    H1check(Inputs),
    /// Loop algebras of finite-type GCMs by diagram class
    Table {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
}

/// Rendered output and process exit code: 0 success, 2 verified negative, 1 input error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub body: String,
    pub exit: i32,
}

struct Outcome {
    value: Value,
    tsv: Option<String>,
    negative: bool,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { value, tsv: None, negative: false }
    }
}

pub fn parse_gcm_value(v: &Value) -> Result<Gcm> {
    let rows = match v {
        Value::Object(o) => o.get("matrix").ok_or_else(|| Error::schema("/matrix", "missing"))?,
        other => other,
    };
    let prefix = if v.is_object() { "/matrix" } else { "" };
    let rows = rows.as_array().ok_or_else(|| Error::schema(prefix, "expected an array of rows"))?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_array().ok_or_else(|| Error::schema(format!("{prefix}/{i}"), "expected an array"))?;
        let mut row = Vec::with_capacity(r.len());
        for (j, x) in r.iter().enumerate() {
            row.push(x.as_i64().ok_or_else(|| Error::schema(format!("{prefix}/{i}/{j}"), "expected an integer"))?);
        }
        out.push(row);
    }
    Gcm::new(out)
}

fn read_json(src: &str, flag: &str) -> Result<Value> {
    let text = if Path::new(src).is_file() {
        std::fs::read_to_string(src).map_err(|e| Error::schema(flag, e.to_string()))?
    } else {
        src.to_string()
    };
    serde_json::from_str(&text).map_err(|e| Error::schema(flag, format!("invalid JSON: {e}")))
}

pub fn load_gcm(src: &str) -> Result<Gcm> {
    if Path::new(src).is_file() || src.trim_start().starts_with(['[', '{']) {
        parse_gcm_value(&read_json(src, "--gcm")?)
    } else {
        Gcm::from_label(src)
    }
}

pub fn load_word(src: &str, flag: &str) -> Result<AutWord> {
    AutWord::from_json(&read_json(src, flag)?)
}

pub fn parse_int_vector(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .enumerate()
        .map(|(i, x)| x.trim().parse::<i64>().map_err(|_| Error::schema(format!("/{i}"), format!("not an integer: {x:?}"))))
        .collect()
}

fn need<'a, T>(x: &'a Option<T>, flag: &str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::schema(flag, "required"))
}

fn gcm_of(inp: &Inputs) -> Result<Gcm> {
    load_gcm(need(&inp.gcm, "--gcm")?)
}

fn finite_base(g: &Gcm) -> Result<Arc<LieAlgebra>> {
    if !g.classify().is_finite() {
        return Err(Error::Unsupported("loop algebras over an affine base; use h1check or decide".into()));
    }
    Ok(Arc::new(LieAlgebra::build_finite(g)?))
}

fn type_json(g: &Gcm) -> Value {
    match g.classify() {
        CartanType::Finite(l) => json!({"type": "finite", "label": l}),
        CartanType::Affine(l) => json!({"type": "affine", "label": l}),
        CartanType::Indefinite => json!({"type": "indefinite"}),
    }
}

fn classify(inp: &Inputs) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let mut v = type_json(&g);
    let r = g.realization();
    v["matrix"] = json!(g.entries());
    v["symmetrizer"] = json!(g.symmetrizer());
    v["rank"] = json!(g.rank());
    v["corank"] = json!(g.corank());
    v["realization"] = json!({
        "h_dim": r.h_dim,
        "simple_roots": r.simple_roots,
        "simple_coroots": r.simple_coroots,
        "center": r.center_basis,
    });
    Ok(Outcome::ok(v))
}

fn perm_json(p: &[usize]) -> Value {
    json!(p.iter().map(|x| x + 1).collect::<Vec<_>>())
}

fn autgroup(inp: &Inputs) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let out = OutGroup::new(&g)?;
    let classes: Vec<Value> = out
        .tilde_classes()
        .iter()
        .map(|c| json!({"representative": c[0].to_json(), "order": c[0].order(), "size": c.len(),
                        "members": c.iter().map(|x| x.to_json()).collect::<Vec<_>>()}))
        .collect();
    let mut v = type_json(&g);
    v["diagram_automorphisms"] = json!(g.automorphisms().iter().map(|p| perm_json(p)).collect::<Vec<_>>());
    v["orbits"] = json!(g.orbits().iter().map(|o| perm_json(o)).collect::<Vec<_>>());
    v["out_order"] = json!(out.order());
    v["omega_image"] = out.omega_image().to_json();
    v["classes"] = json!(classes);
    Ok(Outcome::ok(v))
}

fn loop_cmd(inp: &Inputs) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let w = load_word(need(&inp.sigma1, "--sigma1")?, "--sigma1")?;
    let m = *need(&inp.m, "--m")?;
    let l = finite_base(&g)?;
    let la = build_loop(&l, &w, m, inp.window)?;
    let u = loop_cocycle(&l, &w, m)?;
    let ff = fixed_form(&u, &l, la.window())?;
    let fp = degree_zero_fingerprint(&la)?;
    let mut v = la.descriptor();
    v["graded_dims"] = json!(la.graded_dims());
    v["period_dims_sum"] = json!(la.period_dims().iter().sum::<usize>());
    v["base_dim"] = json!(l.dim());
    v["fixed_form_agrees"] = json!(same_graded_subspaces(&ff, &la));
    v["degree_zero"] = json!({"dim": fp.dim, "killing_rank": fp.killing_rank, "center_dim": fp.center_dim});
    v["cocycle"] = u.to_json();
    Ok(Outcome::ok(v))
}

fn decide_cmd(inp: &Inputs, centroid: bool) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let (w1, w2, m) = match (&inp.sigma1, &inp.sigma2, inp.seed) {
        (Some(a), Some(b), _) => (load_word(a, "--sigma1")?, load_word(b, "--sigma2")?, *need(&inp.m, "--m")?),
        (None, None, Some(seed)) => random_word_pair(&g, seed, inp.m.unwrap_or(6))?,
        _ => return Err(Error::schema("--sigma1", "give --sigma1 and --sigma2, or --seed")),
    };
    let opts = DecideOptions { witness: true, invariants: true, centroid, window: inp.window };
    let verdict = decide_with(&g, &w1, &w2, m, &opts)?;
    let mut v = verdict.to_json();
    v["sigma1"] = w1.to_json();
    v["sigma2"] = w2.to_json();
    let tsv = format!(
        "result\t{}\nbase\t{}\nm\t{}\np1\t{}\np2\t{}\n",
        if verdict.isomorphic { "isomorphic" } else { "not_isomorphic" },
        verdict.base,
        m,
        verdict.p1,
        verdict.p2
    );
    Ok(Outcome { value: v, tsv: Some(tsv), negative: !verdict.isomorphic })
}

fn erase_cmd(inp: &Inputs, tau: &str, a: &str) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let tau = load_word(tau, "--tau")?;
    let a = parse_int_vector(a)?;
    let m = *need(&inp.m, "--m")?;
    let l = finite_base(&g)?;
    let er = erasing_iso(&l, &tau, &a, m, inp.window)?;
    let w = er.map.source.window();
    let conj = verify_conj(&er.map, &tau, &a, m, w)?;
    let report = er.map.verify(1)?;
    let mut v = er.to_json();
    v["verify_conj"] = json!(conj);
    v["verified"] = json!({"basis": report.basis_checked, "pairs": report.pairs_checked});
    Ok(Outcome { value: v, tsv: None, negative: !conj })
}

fn centroid_cmd(inp: &Inputs) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let w = load_word(need(&inp.sigma1, "--sigma1")?, "--sigma1")?;
    let m = *need(&inp.m, "--m")?;
    let l = finite_base(&g)?;
    let window = inp.window.unwrap_or(8);
    let la = build_loop(&l, &w, m, Some(window))?;
    let c = loop_centroid(&la, window)?;
    let expected = c.ranks.iter().all(|(s, d)| *d == usize::from(s.rem_euclid(m as i64) == 0));
    let tsv: String = c.ranks.iter().map(|(s, d)| format!("{s}\t{d}\n")).collect();
    let v = json!({
        "loop": la.descriptor(),
        "window": c.window,
        "ranks": c.ranks.iter().map(|(s, d)| json!({"shift": s, "rank": d})).collect::<Vec<_>>(),
        "scalars_only": expected,
    });
    Ok(Outcome { value: v, tsv: Some(tsv), negative: false })
}

fn h1_cmd(inp: &Inputs) -> Result<Outcome> {
    let g = gcm_of(inp)?;
    let w = load_word(need(&inp.sigma1, "--sigma1")?, "--sigma1")?;
    let m = *need(&inp.m, "--m")?;
    let l = LieAlgebra::build(&g, inp.window.unwrap_or(3))?;
    let u = loop_cocycle(&l, &w, m)?;
    let t = twist_action(&u, &l)?;
    let r = h1_vanishing_check(&t)?;
    let v = json!({
        "base": type_json(&g),
        "sigma": w.to_json(),
        "m": m,
        "window": t.window,
        "module_dim": r.module_dim,
        "cocycles": r.cocycles,
        "coboundaries": r.coboundaries,
        "defect": r.defect,
    });
    Ok(Outcome { value: v, tsv: None, negative: r.defect != 0 })
}

fn table_cmd(max_rank: usize) -> Result<Outcome> {
    let t = affine_table(max_rank)?;
    Ok(Outcome { value: t.to_json(), tsv: Some(t.to_tsv()), negative: !t.all_distinct })
}

fn flat_tsv(v: &Value) -> String {
    match v {
        Value::Object(o) => o.iter().map(|(k, x)| format!("{k}\t{x}\n")).collect(),
        other => format!("{other}\n"),
    }
}

fn error_json(e: &Error) -> Value {
    match e {
        Error::Schema { path, msg } => json!({"error": "schema", "path": path, "message": msg}),
        other => json!({"error": format!("{other:?}").split(['(', ' ', '{']).next().unwrap_or("error"), "message": other.to_string()}),
    }
}

pub fn run(cli: &Cli) -> Report {
    let res = match &cli.command {
        Command::Classify(i) => classify(i),
        Command::Autgroup(i) => autgroup(i),
        Command::Loop(i) => loop_cmd(i),
        Command::Decide { inputs, centroid } => decide_cmd(inputs, *centroid),
        Command::Erase { inputs, tau, a } => erase_cmd(inputs, tau, a),
        Command::Centroid(i) => centroid_cmd(i),
        Command::H1check(i) => h1_cmd(i),
        Command::Table { max_rank } => table_cmd(*max_rank),
    };
    match res {
        Ok(o) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&o.value).expect("serializable") + "\n",
                Format::Tsv => o.tsv.unwrap_or_else(|| flat_tsv(&o.value)),
            };
            Report { body, exit: if o.negative { 2 } else { 0 } }
        }
        Err(e) => Report { body: serde_json::to_string_pretty(&error_json(&e)).expect("serializable") + "\n", exit: 1 },
    }
}

/// Parse arguments and run; clap usage errors exit with 1.
pub fn main_with_args<I: IntoIterator<Item = String>>(args: I) -> Report {
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let exit = if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) { 0 } else { 1 };
            Report { body: e.to_string(), exit }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Report {
        main_with_args(std::iter::once("loopalg".to_string()).chain(args.iter().map(|s| s.to_string())))
    }

    #[test]
    fn classify_label_and_matrix() {
        let r = run_args(&["classify", "--gcm", "A2"]);
        assert_eq!(r.exit, 0);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["type"], "finite");
        assert_eq!(v["label"], "A2");
        let r = run_args(&["classify", "--gcm", r#"{"matrix": [[2, -1], [-1, 2]]}"#]);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["label"], "A2");
    }

    #[test]
    fn schema_paths() {
        let r = run_args(&["classify", "--gcm", r#"{"matrix": [[2, -1], [-1, "x"]]}"#]);
        assert_eq!(r.exit, 1);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["path"], "/matrix/1/1");
        let r = run_args(&["loop", "--gcm", "A2", "--sigma1", r#"[{"kind":"diagram","perm":[1,1]}]"#, "--m", "2"]);
        assert_eq!(r.exit, 1);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert!(v["path"].as_str().unwrap().starts_with("/0/perm"));
        assert_eq!(run_args(&["decide", "--gcm", "A2"]).exit, 1);
        assert_eq!(run_args(&["bogus"]).exit, 1);
    }

    #[test]
    fn decide_exit_codes() {
        let flip = r#"[{"kind":"diagram","perm":[2,1]}]"#;
        let r = run_args(&["decide", "--gcm", "A2", "--sigma1", flip, "--sigma2", "[]", "--m", "2"]);
        assert_eq!(r.exit, 2);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["result"], "not_isomorphic");
        let adr = r#"[{"kind":"adr","exps":[1,0],"m":2}]"#;
        let r = run_args(&["decide", "--gcm", "A2", "--sigma1", adr, "--sigma2", "[]", "--m", "2"]);
        assert_eq!(r.exit, 0);
        let r2 = run_args(&["decide", "--gcm", "A2", "--sigma1", adr, "--sigma2", "[]", "--m", "2"]);
        assert_eq!(r.body, r2.body);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, again);
    }

    #[test]
    fn other_commands() {
        let r = run_args(&["erase", "--gcm", "A1", "--tau", "[]", "--a", "1", "--m", "2", "--window", "3"]);
        assert_eq!(r.exit, 0, "{}", r.body);
        let r = run_args(&["table", "--max-rank", "2", "--format", "tsv"]);
        assert_eq!(r.exit, 0);
        assert_eq!(r.body.lines().count(), 6);
        let r = run_args(&["h1check", "--gcm", "A1^(1)", "--sigma1", "[]", "--m", "2", "--window", "2"]);
        assert_eq!(r.exit, 0, "{}", r.body);
        let r = run_args(&["autgroup", "--gcm", "D4"]);
        let v: Value = serde_json::from_str(&r.body).unwrap();
        assert_eq!(v["classes"].as_array().unwrap().len(), 3);
        let r = run_args(&["centroid", "--gcm", "A1", "--sigma1", "[]", "--m", "1", "--window", "3"]);
        assert_eq!(r.exit, 0, "{}", r.body);
        let r = run_args(&["erase", "--gcm", "A2", "--tau", r#"[{"kind":"diagram","perm":[2,1]}]"#, "--a", "1,0", "--m", "2"]);
        assert_eq!(r.exit, 1);
    }
}
