use std::process::{Command, Output};

fn dfint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn basis_command_prints_the_frames() {
    let out = dfint(&["basis", "x^3*D^2 + (3*x^2+2)*D"]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!(s.contains("status: ok"));
    assert!(s.contains("w1 = 1"));
    assert!(s.contains("w2 = x^3*D"));
    assert!(s.contains("e = x^3"));
    assert!(s.contains("lambda = 0"));
}

#[test]
fn decompose_reports_the_verdict_with_exit_zero() {
    let out = dfint(&["decompose", "x*D^2 - (3*x^3+2)*D", "4*x^3 + 1/x*D"]);
    assert!(out.status.success(), "a verdict is not a failure");
    let s = stdout(&out);
    assert!(s.contains("status: not-integrable"));
    assert!(s.contains("remainder = (x - 4/9)*w2"));
}

#[test]
fn integrate_returns_an_antiderivative() {
    let out = dfint(&["integrate", "x^3*D^2 + (3*x^2+2)*D", "1/x^3 + 1/2*D"]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!(s.contains("status: ok"));
    assert!(s.contains("antiderivative = "));
}

#[test]
fn integrate_zero_gives_zero() {
    let out = dfint(&["integrate", "x^3*D^2 + (3*x^2+2)*D", "0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("antiderivative = 0"));
}

#[test]
fn telescope_shift_matches_the_known_answer() {
    let out = dfint(&[
        "telescope",
        "x*D^2 + (1-2*n)*D + x",
        "2*n - x*D",
        "--partial",
        "sn",
    ]);
    assert!(out.status.success());
    let s = stdout(&out);
    assert!(s.contains("telescoper = Sn - 2*n - 1"));
    assert!(s.contains("certificate = -x"));
}

#[test]
fn telescope_derivation_matches_the_known_answer() {
    let out = dfint(&[
        "telescope",
        "D - (2*t^2*x - t^3 + 1)/(2*x - t)",
        "(8*t*x^2 - 4*t^2*x - 1)/(2*(2*x - t))",
        "--partial",
        "dt",
    ]);
    assert!(out.status.success());
    let s = stdout(&out);
    // 2t Dt - 3(t^3 - 2), printed monic
    assert!(s.contains("telescoper = Dt + (-3/2*t^3 + 3)/(t)"), "{}", s);
}

#[test]
fn telescope_with_max_order_zero_reports_the_bound() {
    let out = dfint(&[
        "telescope",
        "D - (2*t^2*x - t^3 + 1)/(2*x - t)",
        "(8*t*x^2 - 4*t^2*x - 1)/(2*(2*x - t))",
        "--partial",
        "dt",
        "--max-order",
        "0",
    ]);
    assert!(out.status.success(), "a verdict is not a failure");
    assert!(stdout(&out).contains("status: none-up-to-bound"));
}

#[test]
fn json_output_is_one_self_describing_document() {
    let out = dfint(&["--json", "decompose", "x*D^2 - (3*x^3+2)*D", "4*x^3 + 1/x*D"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["command"], "decompose");
    assert_eq!(doc["status"], "not-integrable");
    assert_eq!(doc["operator"], "x*D^2 + (-3*x^3 - 2)*D");
    assert_eq!(doc["result"]["remainder"], "(x - 4/9)*w2");
    assert_eq!(doc["result"]["integrable"], false);
    assert!(doc["time_ms"].is_u64());
}

#[test]
fn json_payload_round_trips_through_the_parser() {
    use dfint::expr::{parse_operator, OpVar};
    let out = dfint(&["--json", "basis", "x*D^2 - (3*x^3+2)*D"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    for key in ["w", "v"] {
        for el in doc["result"][key].as_array().expect("array") {
            let text = el.as_str().expect("string payload");
            parse_operator(text, OpVar::Dx).expect("payload re-parses");
        }
    }
    let echoed = doc["operator"].as_str().unwrap();
    let back = parse_operator(echoed, OpVar::Dx).unwrap().op;
    let orig = parse_operator("x*D^2 - (3*x^3+2)*D", OpVar::Dx).unwrap().op;
    assert_eq!(back, orig);
}

#[test]
fn errors_exit_nonzero_with_a_position() {
    let out = dfint(&["basis", "x + y"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("position 4"));
    assert!(err.contains("unknown symbol 'y'"));

    let out = dfint(&["--json", "basis", "x + y"]);
    assert!(!out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["status"], "error");
}
