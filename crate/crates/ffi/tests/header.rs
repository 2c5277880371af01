use std::path::{Path, PathBuf};
use std::process::Command;

fn header_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("dynlend.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_path()).expect("header generated by build script");
    for name in [
        "dl_version",
        "dl_last_error",
        "dl_distribution_from_json",
        "dl_distribution_free",
        "dl_distribution_g_value",
        "dl_demand_from_json",
        "dl_solve_d_star",
        "dl_threshold_exo",
        "dl_threshold_endo",
        "dl_uniform_closed_form",
        "dl_ge_constant_elasticity",
        "dl_exo_model_solve",
        "dl_exo_model_copy",
        "dl_exo_model_simulate",
        "typedef struct DlDistribution DlDistribution",
        "DL_STATUS_BUFFER_TOO_SMALL = 11",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// Builds and runs a small C program against the static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libdynlend_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <math.h>
#include "dynlend.h"
int main(void) {
    DlDistribution *d = NULL;
    if (dl_distribution_uniform(&d) != DL_STATUS_OK) return 1;
    double x = 0.0;
    if (dl_threshold_exo(d, 0.95, 5.0 / 6.0, &x) != DL_STATUS_OK) return 2;
    if (dl_threshold_exo(d, 1.5, 0.5, &x) != DL_STATUS_INVALID_PARAMETER) return 3;
    char msg[128];
    if (dl_last_error(msg, sizeof msg) < 2) return 4;
    DlUniformClosedForm cf;
    if (dl_uniform_closed_form(0.95, 5.0 / 6.0, &cf) != DL_STATUS_OK) return 5;
    printf("%.12f %.7f\n", cf.x_bar, cf.m);
    dl_distribution_free(d);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("probe");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "probe exited with {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim(), "0.424242424242 0.5776107");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dynlend-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
