//! Command-line behaviour: output and exit codes (0 pass, 1 failed check,
//! 2 usage error).

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enriques-phi")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn denominator_check_exits_zero() {
    let o = run(&["verify", "denominator", "--order", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("denominator"));
}

#[test]
fn appendix_check_writes_json() {
    let path = std::env::temp_dir().join(format!("enriques-phi-appendix-{}.json", std::process::id()));
    let o = run(&["verify", "appendix", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v[0]["pass"], true);
}

#[test]
fn qexp_prints_leading_square() {
    let o = run(&["qexp", "phi", "--gamma", "0,0,1/2,1/2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("-256*P^2") && s.contains("512*P*Q") && s.contains("256*Q^2"), "{s}");
}

#[test]
fn j_at_i_prints_1728_rounded() {
    let o = run(&["eval", "j", "--at", "i"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_str().unwrap().starts_with("1.728e+3"), "{v}");
}

#[test]
fn lattice_info_reports_invariants() {
    let o = run(&["lattice", "info", "--name", "E8_2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["invariants"]["disc_rank"], 8);
}

#[test]
fn bad_gamma_is_a_usage_error() {
    assert_eq!(run(&["qexp", "phi", "--gamma", "0,0,0,0"]).status.code(), Some(2));
    assert_eq!(run(&["qexp", "phi", "--gamma", "1,2"]).status.code(), Some(2));
}

#[test]
fn unknown_lattice_is_a_usage_error() {
    assert_eq!(run(&["lattice", "info", "--name", "E7"]).status.code(), Some(2));
}

#[test]
fn unknown_subcommand_and_point_outside_half_plane_are_usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "j", "--at", "-i"]).status.code(), Some(2));
}

#[test]
fn only_one_of_tau_and_tau_prime_is_a_usage_error() {
    assert_eq!(run(&["verify", "main", "--tau", "2i"]).status.code(), Some(2));
}
