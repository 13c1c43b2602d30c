use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use proptest::sample::{select, Index};

use rtcalc::parse::{parse_expr, Bases};
use rtcalc::{run, Outcome};
use rtcalc_core::lincomb::frac;
use rtcalc_core::{Forest, Label, LinComb, Planted, Tree};

fn rt(args: &[&str]) -> Outcome {
    run(std::iter::once("rtcalc").chain(args.iter().copied()))
}

fn spec_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rtcalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn labels() -> (Vec<Label>, Vec<Label>) {
    let edges = vec![Label::sym("a"), Label::sym("a2"), Label::mi(&[1, 0]), Label::Xi];
    let vertices = vec![Label::sym("b"), Label::mi(&[0, 2]), Label::Star, Label::pair(Label::sym("b"), Label::mi(&[3]))];
    (edges, vertices)
}

fn arb_tree(max: usize) -> impl Strategy<Value = Tree> {
    let (es, vs) = labels();
    (1..=max).prop_flat_map(move |n| {
        (
            prop::collection::vec(any::<Index>(), n - 1),
            prop::collection::vec(select(vs.clone()), n),
            prop::collection::vec(select(es.clone()), n - 1),
        )
            .prop_map(|(ps, vs, es)| {
                let parent: Vec<usize> = ps.iter().enumerate().map(|(i, ix)| ix.index(i + 1)).collect();
                fn build(v: usize, parent: &[usize], vs: &[Label], es: &[Label]) -> Tree {
                    let kids = (1..vs.len())
                        .filter(|&w| parent[w - 1] == v)
                        .map(|w| (es[w - 1].clone(), build(w, parent, vs, es)))
                        .collect();
                    Tree::new(vs[v].clone(), kids)
                }
                build(0, &parent, &vs, &es)
            })
    })
}

fn arb_coeff() -> impl Strategy<Value = rtcalc_core::Scalar> {
    (-5i64..=5, 1i64..=3).prop_map(|(p, q)| frac(p, q))
}

proptest! {
    #[test]
    fn tree_combinations_round_trip(terms in prop::collection::vec((arb_coeff(), arb_tree(6)), 1..4)) {
        let x = LinComb::from_terms(terms);
        prop_assume!(!x.is_zero());
        let back = parse_expr(&x.to_string(), Bases::default()).unwrap().into_trees().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn forest_combinations_round_trip(
        terms in prop::collection::vec((arb_coeff(), prop::collection::vec((select(labels().0), arb_tree(3)), 0..3)), 1..4),
    ) {
        let x: LinComb<Forest> = LinComb::from_terms(
            terms.into_iter().map(|(c, ts)| (c, Forest::new(ts.into_iter().map(|(a, t)| Planted::new(a, t)).collect()))),
        );
        prop_assume!(!x.is_zero());
        let back = parse_expr(&x.to_string(), Bases::default()).unwrap().into_forests().unwrap();
        prop_assert_eq!(back, x);
    }
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_expr("(b1 [a1](b2)", Bases::default()).unwrap_err();
    assert_eq!((e.line, e.col), (1, 13));
    let out = rt(&["graft-free", "--a", "a", "(b1 [a1](b2)", "(b3)"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("1:13"), "{}", out.stderr);
    let out = rt(&["graft-free", "--a", "a", "(*)", "(b [*](c))"]);
    assert_eq!(out.code, 2);
}

#[test]
fn bounded_check_of_the_spde_map() {
    let path = spec_file("phi_lambda.json", r#"{"builder": "phi_lambda", "d": 1}"#);
    let out = rt(&["check-compat", "--phi", path.to_str().unwrap(), "--bound", "3"]);
    assert_eq!(out, Outcome { code: 0, stdout: "VerifiedUpToBound(3)\n".into(), stderr: String::new() });
    let out = rt(&["check-compat", "--phi", path.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("--bound"));
}

#[test]
fn identity_deformation_matches_free_grafting() {
    let id = spec_file(
        "id.json",
        r#"{"builder": "identity", "edgeBasis": ["a", "a1", "a2"], "vertexBasis": ["b1", "b2", "b3", "b4"]}"#,
    );
    let x = spec_file("x.tree", "(b1 [a1](b2))\n");
    let y = spec_file("y.tree", "(b3 [a2](b4) [a1](b1))\n");
    let (x, y) = (x.to_str().unwrap(), y.to_str().unwrap());
    let deformed = rt(&["graft", "--phi", id.to_str().unwrap(), "--a", "a", x, y]);
    let free = rt(&["graft-free", "--a", "a", x, y]);
    assert_eq!(deformed.code, 0, "{}", deformed.stderr);
    assert_eq!(deformed, free);
    assert_eq!(free.stdout.matches(" + ").count(), 2);
}

#[test]
fn refutations_exit_with_one() {
    let table = r#"{"edgeBasis": ["a"], "vertexBasis": ["b", "c"],
        "table": [{"in": ["a", "b"], "out": [{"c": "1", "e": "a", "v": "c"}]},
                  {"in": ["a", "c"], "out": [{"c": "1", "e": "a", "v": "b"}, {"c": "1", "e": "a", "v": "c"}]}]}"#;
    let out = rt(&["check-compat", "--phi", table]);
    assert_eq!(out.code, 0, "one edge label always commutes: {}", out.stdout);
    let table = r#"{"builder": "blocks", "blocks": [[[[0, 1], [0, 0]], [[0, 0], [1, 0]]], [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]]}"#;
    let out = rt(&["check-compat", "--phi", table]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("Refuted(a="), "{}", out.stdout);
    let out = rt(&["theta", "--phi", table, "(v1 [e1](v2))"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("witness"), "{}", out.stdout);
}

#[test]
fn structured_output_is_json() {
    let out = rt(&["--format", "structured", "apply-phi", "--d", "0", "<1>", "<1>"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["out"].as_array().unwrap().len(), 2);
    let out = rt(&["graft-free", "--format", "structured", "--a", "a", "(b)", "(c)"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["terms"][0]["term"], "(c [a](b))");
    let out = rt(&["check-compat", "--format", "structured", "--d", "0", "--bound", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "VerifiedUpToBound");
}

#[test]
fn output_is_deterministic() {
    let args = ["star", "--d", "0", "[<1>](<1>) [<0>](<2>)", "[<1>](<1> [<1>](<0>))"];
    let first = rt(&args);
    assert_eq!(first.code, 0, "{}", first.stderr);
    for _ in 0..3 {
        assert_eq!(rt(&args), first);
    }
    let coprod = rt(&["coprod", "--d", "0", "[<1>](<2> [<1>](<1>))"]);
    assert_eq!(coprod.code, 0, "{}", coprod.stderr);
    assert!(coprod.stdout.contains(" ⊗ "));
}

#[test]
fn spde_actions_pass_the_compatibility_check() {
    let psi = r#"{"builder": "spde_psi", "d": 1}"#;
    let out = rt(&["psi-check", "--d", "1", "--psi", psi, "--bound", "2"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.lines().all(|l| l.contains(": 0 (")), "{}", out.stdout);
    let out = rt(&["postlie-check", "--d", "0", "--psi", r#"{"builder": "spde_psi", "d": 0}"#, "--bound", "1"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let out = rt(&["psi-check", "--d", "1", "--psi", psi]);
    assert_eq!(out.code, 2);
}

#[test]
fn broken_actions_are_reported() {
    let postlie = r#"{"generators": ["p"]}"#;
    let psi = r#"{"vertex": {"p": {"<1>": {"<2>": "1"}}}}"#;
    let out = rt(&["psi-check", "--d", "0", "--psi", psi, "--postlie", postlie, "--bound", "2"]);
    assert_eq!(out.code, 1, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("map intertwining: "), "{}", out.stdout);
}

#[test]
fn classification_and_demo() {
    let out = rt(&["classify-m2", "--phi", r#"{"builder": "blocks", "blocks": [[[[2, 1], [0, 2]]]]}"#]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("J(A, B)"), "{}", out.stdout);
    let out = rt(&["spde-demo", "--d", "0", "--bound", "1"]);
    assert_eq!(out.stdout.lines().last(), Some("VerifiedUpToBound(1)"));
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_rtcalc");
    let ok = Command::new(bin).args(["graft-free", "--a", "a", "(b)", "(c)"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap(), "(c [a](b))\n");
    let bad = Command::new(bin).args(["graft-free", "(b)"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let suite = Command::new(bin).args(["verify-suite", "--level", "small"]).output().unwrap();
    assert_eq!(suite.status.code(), Some(0), "{}", String::from_utf8_lossy(&suite.stdout));
}

#[test]
fn pairing_checks_adjointness_when_both_maps_are_given() {
    let phi = r#"{"edgeBasis": ["a"], "vertexBasis": ["b", "c"], "table": [{"in": ["a", "b"], "out": [{"c": "1", "e": "a", "v": "c"}]}]}"#;
    let transposed = format!(r#"{{"builder": "transpose", "base": {phi}}}"#);
    let out = rt(&["pair", "--phi", phi, "--phi2", &transposed, "2*[a](b) + [a](c)", "[a](c) - [a](b)"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "-1\n"));
    let out = rt(&["pair", "--phi", phi, "--phi2", phi, "[a](c)", "[a](b)"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("not adjoint"), "{}", out.stdout);
    assert_eq!(rt(&["pair", "--phi", phi, "[a](b)", "[a](b)"]).code, 2);
}
