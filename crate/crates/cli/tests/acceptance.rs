use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_buymany");

fn report(id: &str, ok: bool, detail: &str) {
    println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("BUYMANY_THREADS");
    if let Some(t) = threads {
        cmd.env("BUYMANY_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

struct Inputs {
    _dir: TempDir,
    item: PathBuf,
    nonmonotone: PathBuf,
    options: PathBuf,
    instance: PathBuf,
    corrupted: PathBuf,
    menu: PathBuf,
    superadditive: PathBuf,
    thin_demand: PathBuf,
    lowerbound_config: PathBuf,
}

fn inputs() -> Inputs {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    Inputs {
        item: write(d, "item.json", r#"{"n":3,"pricing":{"kind":"item","prices":[1.0,2.5,0.75]}}"#),
        nonmonotone: write(d, "nm.json", r#"{"n":2,"pricing":{"kind":"explicit","table":[0,6,7,5]}}"#),
        options: write(
            d,
            "options.json",
            r#"{"n":3,"options":[{"set":[0],"price":2},{"set":[1,2],"price":3},{"set":[0,1,2],"price":4.5}]}"#,
        ),
        instance: write(
            d,
            "instance.json",
            r#"{"n":3,"pricing":{"kind":"cover","options":[{"set":[0],"price":2},{"set":[1],"price":3},{"set":[2],"price":1},{"set":[0,1],"price":4}]},
               "distribution":[{"weight":0.25,"valuation":{"kind":"additive","values":[3,3,1]}},
                               {"weight":0.25,"valuation":{"kind":"single_minded","set":[1,2],"value":5}},
                               {"weight":0.5,"valuation":{"kind":"unit_demand","values":[2,4,1.5]}}]}"#,
        ),
        corrupted: write(
            d,
            "corrupted.json",
            r#"{"n":2,"pricing":{"kind":"explicit","table":[0,6,7,5]},
               "distribution":[{"weight":1.0,"valuation":{"kind":"single_minded","set":[0,1],"value":5}}]}"#,
        ),
        menu: write(
            d,
            "menu.json",
            r#"{"n":3,"options":[{"price":1,"outcomes":[{"p":0.5,"set":[0]},{"p":0.5,"set":[1]}]},
                                 {"price":3,"outcomes":[{"p":1,"set":[0,1]}]},
                                 {"price":2,"outcomes":[{"p":0.25,"set":[2]},{"p":0.75,"set":[0,2]}]}]}"#,
        ),
        superadditive: write(d, "super.json", r#"{"n":2,"pricing":{"kind":"explicit","table":[0,1,1,100]}}"#),
        thin_demand: write(d, "thin.json", r#"{"n":2,"demand":{"kind":"product","marginals":[0.1,0.1]}}"#),
        lowerbound_config: write(d, "lb.json", r#"{"N":12,"samples":3,"seed":11,"levels":4}"#),
        _dir: dir,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn criterion_11_byte_identical_csv() {
    let inp = inputs();
    let commands: Vec<Vec<&str>> = vec![
        vec!["verify", s(&inp.nonmonotone)],
        vec!["closure", s(&inp.options)],
        vec!["revenue", s(&inp.instance), "--seed", "5"],
        vec!["scale", s(&inp.instance)],
        vec!["lottery", s(&inp.menu), "--target", "0,1,2", "--copies", "3"],
        vec!["lowerbound", "--n", "40", "--N", "16", "--samples", "6", "--seed", "9"],
        vec!["lowerbound", "--mode", "matroid", "--n", "10", "--N", "3", "--samples", "3"],
        vec!["coretail", "--n", "6", "--samples", "8", "--seed", "21"],
        vec!["hartnisan", "--n", "4"],
    ];
    let mut failures = Vec::new();
    for args in &commands {
        let reference = run(args, Some("1"));
        if !reference.status.success() || reference.stdout.is_empty() {
            failures.push(format!("{args:?} did not succeed: {}", String::from_utf8_lossy(&reference.stderr)));
            continue;
        }
        for threads in ["1", "2", "7"] {
            if run(args, Some(threads)).stdout != reference.stdout {
                failures.push(format!("{args:?} differs with {threads} threads"));
            }
        }
        let mut flagged = vec!["--threads", "3"];
        flagged.extend(args.iter().copied());
        if run(&flagged, None).stdout != reference.stdout {
            failures.push(format!("{args:?} differs under --threads"));
        }
    }
    report(
        "11",
        failures.is_empty(),
        &format!("{} subcommand runs, 1/2/3/7 threads and a repeat: {failures:?}", commands.len()),
    );
}

#[test]
fn headers_are_fixed_per_command() {
    let inp = inputs();
    let a = stdout(&run(&["coretail", "--n", "4", "--samples", "2"], None));
    let b = stdout(&run(&["coretail", "--n", "7", "--samples", "5", "--seed", "3"], None));
    assert_eq!(a.lines().next(), b.lines().next());
    assert_eq!(
        a.lines().next().unwrap(),
        "sample,n,seed,rev,e_tail,e_core,a,c,brev,tail_srev,ratio,regime,hit_probability,violations"
    );
    let lb = stdout(&run(&["lowerbound", "--samples", "2"], None));
    assert!(lb.starts_with("sample,seed,n,N,m,mode,rev_p,"));
    assert_eq!(lb.lines().count(), 3);
    let cl = stdout(&run(&["closure", s(&inp.options)], None));
    assert_eq!(cl.lines().next(), Some("set,price"));
    assert_eq!(cl.lines().count(), 9);
}

#[test]
fn out_flag_matches_stdout() {
    let inp = inputs();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hn.csv");
    let direct = run(&["hartnisan", "--n", "3"], None);
    let filed = run(&["hartnisan", "--n", "3", "--out", s(&path)], None);
    assert!(filed.status.success() && filed.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    drop(inp);
}

#[test]
fn verify_item_pricing() {
    let inp = inputs();
    let out = run(&["verify", s(&inp.item)], None);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0));
    assert!(err.contains("subadditive: true") && err.contains("monotone: true"), "{err}");
    assert_eq!(stdout(&out).lines().nth(1), Some("true,true,false,,,"));

    let out = run(&["verify", s(&inp.nonmonotone)], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("monotone: false"));
    assert!(stdout(&out).contains("false,true,false,monotone,{0},{0 1}"));
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn hartnisan_two_items_raw_revenue() {
    let out = stdout(&run(&["hartnisan", "--n", "2"], None));
    let family = column(&out, "family");
    let rev = column(&out, "rev");
    let raw = rev[family.iter().position(|f| f == "raw").unwrap()].parse::<f64>().unwrap();
    assert_eq!(format!("{raw:.6}"), "1.714286");
    assert!((raw - 12.0 / 7.0).abs() < 1e-8);
}

#[test]
fn hartnisan_three_items_one_third_share() {
    let out = stdout(&run(&["hartnisan", "--n", "3"], None));
    let share = column(&out, "share")[0].parse::<f64>().unwrap();
    assert_eq!(column(&out, "family")[0], "raw");
    assert!((share - 1.0 / 3.0).abs() < 1e-8, "{share}");
}

#[test]
fn lowerbound_same_seed_same_bytes() {
    let a = run(&["lowerbound", "--samples", "5", "--seed", "42"], None);
    let b = run(&["lowerbound", "--samples", "5", "--seed", "42"], None);
    let c = run(&["lowerbound", "--samples", "5", "--seed", "43"], None);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let omitted = run(&["lowerbound", "--samples", "5"], None);
    let zero = run(&["lowerbound", "--samples", "5", "--seed", "0"], None);
    assert_eq!(omitted.stdout, zero.stdout);
}

#[test]
fn config_file_and_flags_agree() {
    let inp = inputs();
    let from_file = run(&["lowerbound", "--config", s(&inp.lowerbound_config)], None);
    let from_flags = run(&["lowerbound", "--N", "12", "--samples", "3", "--seed", "11", "--levels", "4"], None);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);
    // flags override the file
    let overridden = run(&["lowerbound", "--config", s(&inp.lowerbound_config), "--samples", "2"], None);
    assert_eq!(stdout(&overridden).lines().count(), 3);
}

#[test]
fn validation_errors_exit_2() {
    let inp = inputs();
    let dir = tempfile::tempdir().unwrap();
    let garbage = write(dir.path(), "garbage.json", "{\"n\": 2, \"pricing\": ");
    let unknown = write(dir.path(), "unknown.json", r#"{"samples":2,"bogus":1}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["verify", s(&garbage)],
        vec!["verify", "/nonexistent/pricing.json"],
        vec!["hartnisan", "--n", "9"],
        vec!["lottery", s(&inp.menu), "--target", "0,7"],
        vec!["scale", s(&inp.corrupted)],
        vec!["lowerbound", "--mode", "additive", "--samples", "2"],
        vec!["lowerbound", "--config", s(&unknown)],
        vec!["coretail", "--n", "30"],
        vec!["lowerbound", "--no-such-flag"],
    ];
    for args in &cases {
        let out = run(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let bad_env = run(&["hartnisan"], Some("many"));
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn corrupted_inputs_exit_3() {
    let inp = inputs();
    // a non-monotone pricing breaks the combined bound
    let out = run(&["scale", s(&inp.corrupted), "--allow-non-sybil"], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("combined bound margin"));
    assert_eq!(column(&stdout(&out), "combined_margin"), vec!["-0.75"]);

    // a superadditive pricing breaks the tail step of the decomposition
    let out = run(
        &["coretail", "--pricing", s(&inp.superadditive), "--demand", s(&inp.thin_demand)],
        None,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(column(&stdout(&out), "violations")[0].contains("tail_chain"));
}

#[test]
fn sound_inputs_exit_0() {
    let inp = inputs();
    for args in [
        vec!["scale", s(&inp.instance)],
        vec!["scale", s(&inp.instance), "--lo", "0.25", "--hi", "2"],
        vec!["revenue", s(&inp.instance)],
        vec!["coretail", "--n", "5", "--samples", "10"],
        vec!["lowerbound", "--mode", "additive", "--n", "24", "--N", "4", "--d", "6", "--t", "1", "--m", "1", "--samples", "2"],
    ] {
        let out = run(&args, None);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn lottery_records() {
    let inp = inputs();
    let out = stdout(&run(&["lottery", s(&inp.menu), "--target", "{0 1}"], None));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "record,first,second,value");
    // floors: item 0 from option 0 at 1/0.5, item 1 likewise, item 2 from option 2 at 2/1
    assert_eq!(&lines[1..4], ["floor,0,0,2", "floor,1,0,2", "floor,2,2,2"]);
    assert_eq!(lines[4], "adaptive_cost,{0 1},,3");
    assert!(lines.contains(&"dominates,1,0,true"));
    assert_eq!(lines.iter().filter(|l| l.starts_with("dominates")).count(), 6);
}
