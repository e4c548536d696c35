//! Compiles a C program against the generated header and links it with the
//! static library. Skipped (with a note) when no C compiler is on PATH.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "locc_bounds.h"

int main(void) {
    const double probs[4] = {0.9, 0.1, 0.0, 0.0};
    LbDensity *rho = NULL;
    if (lb_density_bell_diagonal(2, probs, 4, &rho) != LB_STATUS_OK) return 1;
    LbDistillationReport r;
    if (lb_density_distillation_report(rho, &r) != LB_STATUS_OK) return 2;
    lb_density_free(rho);
    if (fabs(r.dp_bound - 0.5310044064) > 1e-8) return 3;

    const double bad[4] = {1.0, 0.0, 0.0, 1.0};
    if (lb_density_new(bad, NULL, 2, 1, 1e-9, &rho) != LB_STATUS_INVALID_STATE) return 4;
    if (lb_last_error_message() == NULL) return 5;
    printf("%.10f\n", r.dpprime_bound);
    return 0;
}
"#;

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().filter(|o| o.status.success()).map(|_| cc)
}

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary> -> target/<profile>/liblocc_bounds_ffi.a
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("liblocc_bounds_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(include_dir().join("locc_bounds.h")).unwrap();
    for name in [
        "lb_density_new",
        "lb_density_free",
        "lb_ensemble_new",
        "lb_run_scenario_json",
        "lb_string_free",
        "LB_STATUS_OK",
        "typedef struct LbDensity LbDensity",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_compiles_and_runs() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let dir = std::env::temp_dir().join(format!("locc-bounds-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();

    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include_dir())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile");

    let Some(lib) = static_lib() else {
        eprintln!("static library not found next to the test binary; link step skipped");
        return;
    };
    let exe = dir.join("main");
    let out = Command::new(&cc)
        .arg("-I")
        .arg(include_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "link failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "0.6807372359");
    std::fs::remove_dir_all(&dir).ok();
}
