//! The generated header is valid C and C++ and declares the whole interface.

use std::path::{Path, PathBuf};
use std::process::Command;

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler(name: &str) -> Option<Command> {
    Command::new(name).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| Command::new(name))
}

#[test]
fn declares_every_export() {
    let header = std::fs::read_to_string(include_dir().join("qosc.h")).unwrap();
    for name in [
        "qosc_last_error",
        "qosc_version",
        "qosc_model_new",
        "qosc_model_gksl",
        "qosc_model_free",
        "qosc_model_frequency",
        "qosc_force_constant",
        "qosc_force_impulse",
        "qosc_force_heaviside",
        "qosc_force_harmonic",
        "qosc_force_sampled",
        "qosc_force_free",
        "qosc_first_moments",
        "qosc_second_moments",
        "qosc_stationary_moments",
        "typedef struct QoscModel QoscModel",
        "typedef struct QoscForce QoscForce",
        "QOSC_STATUS_NULL_POINTER",
        "QOSC_REGIME_CRITICAL",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Some(mut cmd) = compiler(cc) else {
            eprintln!("{cc} not found; skipping");
            continue;
        };
        let out = cmd
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(include_dir())
            .arg(&sample)
            .output()
            .unwrap();
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
