//! Compiles and runs a small C program against the generated header and the shared library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "wigner_entropy.h"

int main(void) {
    WeState *st = NULL;
    WeBath *bath = NULL;
    WeHamiltonian *ham = NULL;
    WeComplex mu = {1.0, 0.0};
    WeComplex zero = {0.0, 0.0};
    if (we_state_coherent(mu, &st) != WE_STATUS_OK) return 1;
    if (we_bath_thermal(1.0, 0.0, &bath) != WE_STATUS_OK) return 2;
    if (we_hamiltonian_new(1.0, false, zero, 0.0, &ham) != WE_STATUS_OK) return 3;
    WeRateReport r;
    if (we_rate_report(st, bath, ham, 0.0, WE_METHOD_CLOSED_FORM, &r) != WE_STATUS_OK) return 4;
    if (fabs(r.pi - 2.0) > 1e-12 || fabs(r.phi - 2.0) > 1e-12) return 5;
    if (we_state_new(zero, 0.1, zero, &st) != WE_STATUS_DOMAIN) return 6;
    printf("%s\n", we_last_error_message());
    we_state_free(st);
    we_bath_free(bath);
    we_hamiltonian_free(ham);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler on PATH; header check skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let lib_dir = target_dir();
    let exe = dir.path().join("main");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg(format!("-I{}", include.display()))
        .arg(format!("-L{}", lib_dir.display()))
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lwigner_entropy_ffi", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("domain"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
