use std::time::Duration;

use hosi::cli::external::ExternalEvaluator;
use hosi::exec::Executor;
use hosi::model::{BlackBox, VarSubset};
use hosi::moment::estimate_difference;
use hosi::sampling::PickFreezeDesign;

fn command(name: &str) -> String {
    format!("sh {}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn spawn(name: &str) -> ExternalEvaluator {
    ExternalEvaluator::spawn(&command(name), Duration::from_secs(10)).unwrap()
}

#[test]
fn echo_returns_first_coordinate() {
    let f = spawn("echo_first.sh");
    assert_eq!(f.dim(), 2);
    assert_eq!(f.eval(&[0.3, 0.4]).unwrap(), 0.3);
}

#[test]
fn echo_preserves_full_precision() {
    let f = spawn("echo_first.sh");
    let xs = [0.1, 1.0 / 3.0, 2.0f64.sqrt() - 1.0, 5e-17];
    let points: Vec<f64> = xs.iter().flat_map(|&x| [x, 0.5]).collect();
    let mut out = vec![0.0; xs.len()];
    f.eval_batch(&points, &mut out).unwrap();
    assert_eq!(out, xs);
}

#[test]
fn nan_is_reported_with_its_line() {
    let f = spawn("emit_nan.sh");
    let err = f.eval(&[0.1, 0.2]).unwrap_err().to_string();
    assert!(err.contains("line 2") && err.contains("non-finite"), "{err}");
}

#[test]
fn large_batch_comes_back_in_order() {
    let f = spawn("line_index.sh");
    let n = 10_000;
    let points: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let mut out = vec![0.0; n];
    f.eval_batch(&points, &mut out).unwrap();
    assert!(out.iter().enumerate().all(|(i, &v)| v == i as f64));
    // the counter restarts with each batch
    f.eval_batch(&points[..3], &mut out[..3]).unwrap();
    assert_eq!(&out[..3], &[0.0, 1.0, 2.0]);
}

#[test]
fn early_exit_is_an_error() {
    let f = spawn("exit_early.sh");
    let err = f.eval(&[0.1, 0.2]).unwrap_err().to_string();
    assert!(err.contains("exited"), "{err}");
}

#[test]
fn silence_times_out() {
    let f = ExternalEvaluator::spawn(&command("silent.sh"), Duration::from_millis(200)).unwrap();
    let err = f.eval(&[0.1, 0.2]).unwrap_err().to_string();
    assert!(err.contains("line 2") && err.contains("no answer"), "{err}");
}

#[test]
fn handshake_is_required() {
    let err = ExternalEvaluator::spawn(&command("bad_handshake.sh"), Duration::from_secs(5))
        .err()
        .unwrap()
        .to_string();
    assert!(err.contains("line 1") && err.contains("handshake"), "{err}");
}

#[test]
fn wrong_width_is_rejected_before_sending() {
    let f = spawn("echo_first.sh");
    assert!(f.eval(&[0.1, 0.2, 0.3]).is_err());
}

#[test]
fn parallel_sessions_match_serial_run() {
    let f = spawn("echo_first.sh");
    let u = VarSubset::from_indices(2, &[1]).unwrap();
    let design = PickFreezeDesign::build(3, 9000, 2, 3, u).unwrap();
    let serial = estimate_difference(&f, &design, &Executor::serial()).unwrap();
    let parallel = estimate_difference(&f, &design, &Executor::new(4)).unwrap();
    assert_eq!(serial.value.to_bits(), parallel.value.to_bits());
    // f = x_1 on [0,1): ul-tau_{1}^(3) = E[x^3] - 1/8
    assert!((serial.value - 0.125).abs() < 4.0 * serial.std_error);
}
