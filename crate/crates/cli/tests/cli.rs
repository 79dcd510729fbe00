use std::fs;
use std::process::{Command, Output};

fn vbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbe"))
        .args(args)
        .env_remove("VBE_OUT_DIR")
        .output()
        .expect("spawn vbe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value_of(csv: &str, name: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .and_then(|rest| rest.split(',').next())
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn constants_at_three_halves() {
    let o = vbe(&["constants", "--p", "1.5"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("# tool: vbe "));
    assert!(s.contains("# config: p=1.5 format=csv"));
    assert!((value_of(&s, "tC") - 1.306_562_964_876_376_6).abs() < 1e-12);
    assert!((value_of(&s, "tkappa") - 1.146_980_886_8).abs() < 1e-9);
}

#[test]
fn constants_at_two_are_one() {
    let s = stdout(&vbe(&["constants", "--p", "2"]));
    for name in ["tC", "W", "C_vBE", "tkappa"] {
        assert_eq!(value_of(&s, name), 1.0, "{name}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(vbe(&["constants", "--p", "1.0"]).status.code(), Some(2));
    assert_eq!(vbe(&["figure", "fig9"]).status.code(), Some(2));
    assert_eq!(
        vbe(&["table", "--from", "2", "--to", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        vbe(&["verify", "delta", "--samples", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn table_is_decreasing_with_exact_endpoint() {
    let o = vbe(&["table"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let rows: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 100);
    let last: Vec<&str> = rows[99].split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 2.0);
    assert_eq!(last[1].parse::<f64>().unwrap(), 1.0);
    assert!(s.contains(",inf,"));
}

#[test]
fn fig4_last_row_is_all_ones() {
    let s = stdout(&vbe(&["figure", "fig4"]));
    let last = s.lines().last().unwrap();
    assert!(
        last.split(',')
            .all(|c| c.parse::<f64>().unwrap() == if c.starts_with("2.") { 2.0 } else { 1.0 }),
        "{last}"
    );
}

#[test]
fn fig2_ratios_in_unit_interval() {
    let s = stdout(&vbe(&[
        "figure", "fig2", "--from", "1.05", "--to", "1.95", "--step", "0.1",
    ]));
    for line in s.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        // tC, both lower bounds and the smaller upper bound sit below W
        for r in [v[1], v[2], v[3], v[4].min(v[5])] {
            assert!(r > 0.0 && r <= 1.0, "{line}");
        }
    }
}

#[test]
fn verify_smoke_and_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for p in [&a, &b] {
        let o = vbe(&[
            "verify",
            "all",
            "--samples",
            "10",
            "--seed",
            "3",
            "--format",
            "jsonl",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert!(text.lines().next().unwrap().contains("\"seed\":\"3\""));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_vbe"))
        .args([
            "figure", "fig3", "--from", "1.5", "--to", "2", "--step", "0.25",
        ])
        .env("VBE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let s = fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert!(s.contains("p,tkappa,one"));
}
