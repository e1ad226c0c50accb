//! Shared helpers for the integration suites: an independent closed-form
//! oracle for the beam-aligned angular average, and runners for the compiled
//! binary.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use nuphase::units::MEV_INV_TO_M;

/// Angular average of sin(a(1-cos theta)) with the (1+cos theta)/2 weight of
/// the coherent amplitude, for a beam aligned with the separation axis:
///
///   gp(a) = 1/a - sin(2a)/(2a^2)
///
/// The closed form cancels to O(a) out of terms of size 1/a, so below
/// a = 0.1 it is evaluated by series; four terms leave a relative
/// truncation error under 1e-12 at the switch point.
pub fn phase_angular_factor(a: f64) -> f64 {
    assert!(a >= 0.0);
    if a < 0.1 {
        let a2 = a * a;
        a * (2.0 / 3.0 - a2 * (2.0 / 15.0 - a2 * (4.0 / 315.0 - a2 * (2.0 / 2835.0))))
    } else {
        1.0 / a - (2.0 * a).sin() / (2.0 * a * a)
    }
}

/// Angular average of 1 - cos(a(1-cos theta)) with the same weight:
///
///   gd(a) = 1 - (1 - cos(2a))/(2a^2)
///
/// with the same series switch as the phase factor.
pub fn decay_angular_factor(a: f64) -> f64 {
    assert!(a >= 0.0);
    if a < 0.1 {
        let a2 = a * a;
        a2 * (1.0 / 3.0 - a2 * (2.0 / 45.0 - a2 * (1.0 / 315.0 - a2 * (2.0 / 14175.0))))
    } else {
        1.0 - (1.0 - (2.0 * a).cos()) / (2.0 * a * a)
    }
}

/// Branch separation expressed as a phase scale: a = E * dx in natural units.
pub fn phase_scale(e_mev: f64, dx_m: f64) -> f64 {
    e_mev * dx_m / MEV_INV_TO_M
}

/// Path of the compiled command-line binary.
pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nuphase")
}

/// Run the binary and return its raw output.
pub fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should spawn")
}

/// Run the binary, demand success, and return stdout as text.
pub fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed with {:?}\nstderr: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is UTF-8")
}

/// Run the binary and demand a specific failure exit code; returns stderr.
pub fn run_expect_exit(args: &[&str], code: i32) -> String {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "command {:?} exited with {:?}, expected {code}\nstderr: {}",
        args,
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stderr).expect("stderr is UTF-8")
}

/// Parse one CSV data line into floats (the `allowed` column is skipped by
/// callers that have one).
pub fn parse_row(line: &str) -> Vec<f64> {
    line.split(',')
        .map(|f| f.parse::<f64>().unwrap_or_else(|_| panic!("bad float field {f:?}")))
        .collect()
}

/// Relative deviation |x/y - 1|.
pub fn rel_dev(x: f64, y: f64) -> f64 {
    (x / y - 1.0).abs()
}

/// Read a file to text with a clear panic message.
pub fn read_text(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()))
}
