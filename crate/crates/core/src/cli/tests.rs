use std::path::PathBuf;

use serde_json::Value;

use super::*;
use crate::endokit::{classify, Multiplier};
use crate::exactnum::{int, rat};
use crate::groupkit::build::prime;

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "abg"))
        .collect();
    v.sort();
    v
}

fn corpus_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("inertial-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(o: &Outcome) -> Value {
    serde_json::from_str(o.report.as_deref().expect("report")).unwrap()
}

const QUASI: &str = "group A { block B = cyclic(p=5,k=1,mult=1) block C = torsionfree(pi={5},rank=1) }\n\
                     endo phi on A { tf[C.0->C.0] = 1/5 }\n";

#[test]
fn parse_quasi_example() {
    let doc = parse(QUASI).unwrap();
    let endos = doc.validated().unwrap();
    assert_eq!(endos.len(), 1);
    let q = classify(&endos[0].1).quasi.expect("quasi-multiplication");
    assert_eq!(q.r, int(0));
    assert_eq!(q.pi, [prime(5)].into());
    assert_eq!(q.mult, Multiplier::Rational(rat(1, 5)));
}

#[test]
fn parse_errors_are_positioned() {
    let e = parse("group A { }\n").unwrap_err();
    assert_eq!(e.line, 1);
    let e = parse("group A {\n  block B = cyclic(p=4,k=1,mult=1)\n}\n").unwrap_err();
    assert_eq!(e.line, 2);
    let e = parse(&format!("{QUASI}endo psi on A {{ tf[D.0->D.0] = 1 }}\n")).unwrap_err();
    assert_eq!(e.line, 3);
    assert!(parse("group A { block B = prufer(p=3, copies=omega) } # trailing comment\n").is_ok());
}

#[test]
fn corpus_round_trip() {
    let files = corpus();
    assert!(files.len() >= 12);
    let mut endos = 0;
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = parse(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let valid = doc.validated().unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        endos += valid.len();
        let canon = serialize(&doc);
        let again = parse(&canon).unwrap();
        assert_eq!(serialize(&again), canon, "{}", f.display());
        let revalid = again.validated().unwrap();
        assert_eq!(valid, revalid, "{}", f.display());
    }
    assert!(endos >= 30);
}

#[test]
fn reports_are_deterministic() {
    for cmd in [Command::Analyze, Command::Check, Command::Decompose, Command::Oracle] {
        let mut cfg = SessionConfig::new(cmd, vec![corpus_file("quasi_example.abg"), corpus_file("prufer_square.abg")]);
        cfg.samples = 10;
        cfg.seed = 7;
        let a = run(&cfg);
        cfg.exec = crate::exec::Exec::Sequential;
        let b = run(&cfg);
        assert_eq!(a.code, EXIT_OK, "{:?}", a.error);
        assert_eq!(a.report, b.report);
        let r = report(&a);
        assert_eq!(r["seed"], 7);
        assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(r["command"], cmd.name());
        let text = a.report.unwrap();
        assert!(!text.contains('\n'));
        assert!(text.starts_with("{\"command\":"));
    }
}

#[test]
fn check_identity() {
    let p = temp_file("id.abg", "group G { block P = prufer(p=3, copies=2) block Z = cyclic(p=2,k=1,mult=omega) }\nendo id on G { div[P.0->P.0] = 1; div[P.1->P.1] = 1; cyc[Z] = 1 }\n");
    let o = run(&SessionConfig::new(Command::Check, vec![p]));
    assert_eq!(o.code, EXIT_OK);
    let r = report(&o);
    let v = &r["results"][0]["result"][0];
    assert_eq!(v["endo"], "id");
    assert_eq!(v["verdict"], "inertial");
}

#[test]
fn prufer_diagonal_has_witness() {
    let mut cfg = SessionConfig::new(Command::Oracle, vec![corpus_file("prufer_square.abg")]);
    cfg.endo = Some("diag12".into());
    cfg.samples = 20;
    let o = run(&cfg);
    assert_eq!(o.code, EXIT_OK);
    let r = report(&o);
    let v = &r["results"][0]["result"][0];
    assert_eq!(v["verdict"], "not-inertial");
    assert!(v["witness"].is_object(), "{v}");
    assert_eq!(v["contradiction"], false);

    cfg.command = Command::Check;
    let r = report(&run(&cfg));
    assert_eq!(r["results"][0]["result"][0]["verdict"], "not-inertial");
}

#[test]
fn injected_verdict_is_a_contradiction() {
    let mut cfg = SessionConfig::new(Command::Oracle, vec![corpus_file("prufer_square.abg")]);
    cfg.endo = Some("scalar2".into());
    cfg.samples = 10;
    assert_eq!(run(&cfg).code, EXIT_OK);
    cfg.inject_wrong_verdict = true;
    assert_eq!(run(&cfg).code, EXIT_CONTRADICTION);
}

#[test]
fn usage_errors() {
    let cfg = SessionConfig::new(Command::Check, vec![PathBuf::from("/nonexistent/x.abg")]);
    assert_eq!(run(&cfg).code, EXIT_USAGE);
    let mut cfg = SessionConfig::new(Command::Check, vec![corpus_file("finite.abg")]);
    cfg.levels = vec![4, 2];
    assert_eq!(run(&cfg).code, EXIT_USAGE);
    let bad = temp_file("bad.abg", "group A { block B = cyclic(p=6,k=1,mult=1) }\n");
    assert_eq!(run(&SessionConfig::new(Command::Analyze, vec![bad])).code, EXIT_USAGE);
}

#[test]
fn defect_command() {
    let p = temp_file("m.txt", "0 1\n1 1\n");
    let mut cfg = SessionConfig::new(Command::Defect, vec![p]);
    cfg.field = Some("2".into());
    let o = run(&cfg);
    assert_eq!(o.code, EXIT_OK, "{:?}", o.error);
    let r = report(&o);
    let v = &r["results"][0]["result"];
    assert!(v.to_string().contains("\"defect\":2"), "{v}");
}
