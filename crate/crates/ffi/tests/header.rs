use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bfn.h")
}

#[test]
fn header_declares_the_abi() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "bfn_last_error_message",
        "bfn_config_from_text",
        "bfn_config_free",
        "bfn_run",
        "bfn_report_free",
        "bfn_report_iterations",
        "bfn_report_norms",
        "bfn_report_profile_len",
        "bfn_report_profile",
        "bfn_report_oracle",
        "bfn_report_to_json",
        "bfn_string_free",
        "bfn_bn_max_growth",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing");
    }
    assert!(text.contains("BFN_STATUS_OK = 0"));
    assert!(text.contains("BFN_STATUS_UNSUPPORTED_REGIME = 2"));
    assert!(text.contains("typedef struct BfnConfigHandle BfnConfigHandle;"));
}

fn compiler() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok()?.status.success().then_some(cc)
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "bfn.h"

int main(void) {
    BfnConfigHandle *cfg = NULL;
    BfnReportHandle *rep = NULL;
    double w0, wt, wtilde0;
    if (bfn_config_from_text("equation = linear\nadvection = 1\nT = 0.5\ngrid_n = 32\nnt = 32\n", &cfg) != BFN_STATUS_OK)
        return 1;
    if (bfn_run(cfg, &rep) != BFN_STATUS_OK)
        return 2;
    if (bfn_report_norms(rep, 0, &w0, &wt, &wtilde0) != BFN_STATUS_OK)
        return 3;
    printf("%.12f\n", wtilde0 / w0);
    bfn_report_free(rep);
    bfn_config_free(cfg);
    if (bfn_config_from_text("bogus", &cfg) != BFN_STATUS_CONFIG)
        return 4;
    return bfn_last_error_message() == NULL ? 5 : 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let Some(cc) = compiler() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libbfn_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let ratio: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((ratio - (-1.0f64).exp()).abs() < 1e-9);
}
