use std::fs;
use std::path::PathBuf;

use serde_json::Value;
use weakrank::instances::eight_items;
use weakrank::{brute_force_solve, solve, SolveConfig, VariantSpec};
use weakrank_cli::{main_with, Builtin, InputArgs, Method, SolveReport};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("weakrank").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

/// Drops the fields that depend on timing and scheduling.
fn stable(mut v: Value) -> Value {
    let m = v.as_object_mut().unwrap();
    m.remove("elapsed");
    m.remove("nodes");
    v
}

#[test]
fn solve_report_matches_the_library() {
    let (code, out, _) = run(&["solve", "--builtin", "eight-items", "--variant", "fixed-p", "--p", "5"]);
    assert_eq!(code, 0);
    let input =
        InputArgs { matrix: None, profile: None, random: None, builtin: Some(Builtin::EightItems), voters: None };
    let inst = input.load(0).unwrap();
    let v = VariantSpec::FixedBuckets { p: 5 };
    let r = solve(&inst.matrix, &v, &SolveConfig::default()).unwrap();
    let want = serde_json::to_value(SolveReport::new(&inst, &v, Method::Search, &r)).unwrap();
    assert_eq!(stable(json(&out)), stable(want));
}

#[test]
fn matrix_file_and_builtin_agree() {
    let (_, a, _) = run(&["solve", "--builtin", "eight-items"]);
    let (code, b, _) = run(&["solve", "--matrix", &fixture("eight_items.csv")]);
    assert_eq!(code, 0);
    let (a, b) = (json(&a), json(&b));
    assert_eq!(a["objective"], "539/50");
    assert_eq!(b["instance"], "eight_items");
    for key in ["objective", "optima", "utopian_bound", "bucket_counts"] {
        assert_eq!(a[key], b[key], "{key}");
    }
    assert_eq!(a["optima"][0], "1 3 | 2 4 7 | 8 | 5 6");
}

#[test]
fn oracle_agrees_with_search() {
    let (code, out, _) = run(&["oracle", "--builtin", "eight-items", "--variant", "tcu", "--k", "4"]);
    assert_eq!(code, 0);
    let got = json(&out);
    let want = brute_force_solve(&eight_items(), &VariantSpec::Tcu { k: 4, tail_bounds: vec![] }).unwrap();
    assert_eq!(got["method"], "brute-force");
    assert_eq!(got["objective"], want.objective.unwrap().to_string());
    assert_eq!(got["objective_2dp"], "12.66");
    let (_, searched, _) = run(&["solve", "--builtin", "eight-items", "--variant", "tcu", "--k", "4"]);
    assert_eq!(json(&searched)["optima"], got["optima"]);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--builtin", "eight-items"]).0, 0);
    let (code, _, err) = run(&["solve"]);
    assert_eq!(code, 1);
    assert!(err.contains("required"), "{err}");
    let (code, _, err) = run(&["solve", "--builtin", "eight-items", "--voters", "3"]);
    assert_eq!(code, 1);
    assert!(err.contains("--voters"), "{err}");
    let (code, _, err) = run(&["solve", "--builtin", "eight-items", "--p", "3"]);
    assert_eq!(code, 1);
    assert!(err.contains("--p"), "{err}");
    let (code, out, _) = run(&[
        "solve",
        "--builtin",
        "eight-items",
        "--variant",
        "fair",
        "--groups",
        "1,2|3,4,5,6,7,8",
        "--lambda",
        "1|1",
    ]);
    assert_eq!(code, 3);
    assert_eq!(json(&out)["status"], "infeasible");
    let (code, out, _) = run(&["solve", "--random", "40", "--node-limit", "1"]);
    assert_eq!(code, 2);
    let r = json(&out);
    assert_eq!(r["status"], "limit");
    assert!(r["objective"].is_string() && r["bound"].is_string());
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
}

#[test]
fn random_instances_follow_the_seed() {
    let (_, a, _) = run(&["--seed", "3", "solve", "--random", "7", "--voters", "5"]);
    let (_, b, _) = run(&["--seed", "3", "solve", "--random", "7", "--voters", "5"]);
    let (_, c, _) = run(&["--seed", "4", "solve", "--random", "7", "--voters", "5"]);
    let (a, b, c) = (json(&a), json(&b), json(&c));
    assert_eq!(a["instance"], "random-n7-m5-seed3");
    assert_eq!(a["voters"], 5);
    assert_eq!(stable(a.clone()), stable(b));
    assert_ne!(a["utopian_bound"], c["utopian_bound"]);
}

#[test]
fn p_sweep_marks_the_interior_peak() {
    let (code, out, err) = run(&["sweep", "--builtin", "four-items-non-unimodal", "--sweep", "p"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5, "{out}");
    assert_eq!(lines[0], "param,objective_exact,objective_2dp,status,is_min,is_peak");
    assert_eq!(lines[3], "3,14/5,2.80,optimal,false,true");
    assert!(lines[2].ends_with(",true,false") && lines[4].ends_with(",true,false"), "{out}");
    assert!(err.contains("minima: p = 2, 4"), "{err}");
    assert!(err.contains("not unimodal; interior peaks: p = 3"), "{err}");
}

#[test]
fn k_sweep_reaches_the_free_optimum() {
    let (code, out, _) = run(&["sweep", "--builtin", "eight-items", "--sweep", "k", "--format", "json"]);
    assert_eq!(code, 0);
    let s = json(&out);
    assert_eq!(s["schema"], "weakrank.sweep/1");
    let six = s["points"].as_array().unwrap().iter().find(|p| p["param"] == 6).unwrap();
    assert_eq!(six["objective"], "539/50");
    assert_eq!(s["tail_matching"], serde_json::json!([6]));
}

#[test]
fn single_item_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    fs::write(&path, "0.5\n").unwrap();
    let (code, out, _) = run(&["sweep", "--matrix", path.to_str().unwrap(), "--sweep", "p"]);
    assert_eq!(code, 0);
    assert_eq!(
        out.lines().collect::<Vec<_>>(),
        ["param,objective_exact,objective_2dp,status,is_min,is_peak", "1,0,0.00,optimal,true,false"]
    );
}

#[test]
fn fairness_trajectory_of_the_fair_optimum() {
    let args =
        ["fairness", "--builtin", "eight-items", "--groups", "1,3,4,8|2,5,6,7", "--proportional", "--format", "json"];
    let (code, out, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let t = json(&out);
    assert_eq!(t["schema"], "weakrank.fairness/1");
    assert_eq!(t["order"], "3 | 1 2 4 7 | 5 8 | 6");
    assert_eq!(t["objective_2dp"], "11.86");
    assert_eq!(t["within_bounds"], true);
    let (code, out, _) = run(&[
        "fairness",
        "--builtin",
        "eight-items",
        "--groups",
        "1,3,4,8|2,5,6,7",
        "--proportional",
        "--order",
        "1 3 | 2 4 7 | 8 | 5 6",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["within_bounds"], false);
}

#[test]
fn export_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("model.lp");
    let lp_arg = lp.to_str().unwrap();
    let (code, out, _) = run(&["export", "--builtin", "eight-items", "-o", lp_arg, "--check", "1 3 | 2 4 7 | 8 | 5 6"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "feasible 10.78 (539/50)");
    assert!(fs::read_to_string(&lp).unwrap().starts_with("\\"));
    let (code, out, _) = run(&[
        "export",
        "--builtin",
        "eight-items",
        "--variant",
        "fixed-p",
        "--p",
        "3",
        "-o",
        lp_arg,
        "--check",
        "1 3 | 2 4 7 | 8 | 5 6",
    ]);
    assert_eq!(code, 3);
    assert!(out.starts_with("infeasible"), "{out}");
}

#[test]
fn representative_tie_inequality_rows() {
    let base =
        ["export", "--builtin", "eight-items", "--variant", "fixed-p", "--p", "3", "--formulation", "representative"];
    let with = |mode: &str| {
        let mut args = base.to_vec();
        args.extend(["--tie-inequality", mode]);
        let (code, out, _) = run(&args);
        assert_eq!(code, 0);
        out
    };
    let (add, omit) = (with("add"), with("omit"));
    assert!(add.lines().any(|l| l.trim_start().starts_with("ineq")), "no tie inequality rows");
    assert!(!omit.lines().any(|l| l.trim_start().starts_with("ineq")));
    let (code, _, err) = run(&[&base[..], &["--no-comp"]].concat());
    assert_eq!(code, 1);
    assert!(err.contains("assignment"), "{err}");
}

#[test]
fn bench_rows_follow_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.manifest");
    let text = format!(
        "# instances\nfirst {} obop - -\nmissing {} obop - -\ntoo-many {} fixed-p p=5 -\nlast {} nonsense - -\n",
        fixture("eight_items.csv"),
        dir.path().join("absent.csv").display(),
        fixture("four_items_non_unimodal.csv"),
        fixture("four_items_non_unimodal.csv"),
    );
    fs::write(&manifest, text).unwrap();
    let (code, out, _) = run(&["bench", manifest.to_str().unwrap()]);
    assert_eq!(code, 0);
    let mut r = csv::Reader::from_reader(out.as_bytes());
    let header = r.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let names: Vec<&str> = rows.iter().map(|r| &r[col("instance")]).collect();
    assert_eq!(names, ["first", "missing", "too-many", "last"]);
    assert_eq!(&rows[0][col("objective_2dp")], "10.78");
    assert!(rows[1..].iter().all(|r| &r[col("status")] == "error"));
    assert!(rows[1][col("error")].starts_with("line 3: ") && rows[1][col("error")].contains("absent.csv"));
    assert!(rows[2][col("error")].contains("line 4: "), "{:?}", rows[2]);
    assert!(rows[3][col("error")].contains("unknown variant `nonsense`"));
}

#[test]
fn example_manifest_runs() {
    let (code, out, _) = run(&["bench", &fixture("examples.manifest")]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 7, "{out}");
    assert!(lines[3].starts_with("eight-fair,8,,") && lines[3].contains(",11.86,593/50,"), "{}", lines[3]);
    assert!(lines[4].contains(",28.90,289/10,"), "{}", lines[4]);
    assert!(lines[6].starts_with("small,3,4,obop,0.33,1/3,"), "{}", lines[6]);
}

#[test]
fn empty_manifest_gives_a_header() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("empty.manifest");
    fs::write(&manifest, "# nothing yet\n").unwrap();
    let (code, out, _) = run(&["bench", manifest.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("instance,n,m,variant,"));
}

#[test]
fn ingest_incomplete_profile() {
    let (code, out, _) = run(&["ingest", "--profile", &fixture("small.soi")]);
    assert_eq!(code, 0);
    // Ballots 2×(1,2,3), 1×(2,1), 1×(1,3): a_12 = 2, a_21 = 1, a_13 = 3, a_23 = 2.
    assert_eq!(out, "Ana,Ben,Cruz\n0.5,2/3,1\n1/3,0.5,1\n0,0,0.5\n");
    let (_, out, _) = run(&["solve", "--profile", &fixture("small.soi")]);
    let r = json(&out);
    assert_eq!(r["voters"], 4);
    assert_eq!(r["objective"], "1/3");
    assert_eq!(r["optima"][0], "1 2 | 3");
}

#[test]
fn errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.soi");
    fs::write(&bad, "# DATA TYPE: soi\n# NUMBER ALTERNATIVES: 3\n3: 1,2,3\n2: 2,x\n").unwrap();
    let (code, _, err) = run(&["ingest", "--profile", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("bad.soi") && err.contains("line 4") && err.contains("`x`"), "{err}");
    let manifest = dir.path().join("bad.manifest");
    fs::write(&manifest, "ok a.csv obop - -\nbroken a.csv obop -\n").unwrap();
    let (code, _, err) = run(&["bench", manifest.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("bad.manifest") && err.contains("line 2"), "{err}");
}
