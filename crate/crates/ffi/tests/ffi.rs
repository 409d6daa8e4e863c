use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use drisk_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = drisk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn distortion(spec: &str) -> *mut DriskDistortion {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { drisk_distortion_parse(c(spec).as_ptr(), &mut g) }, DriskStatus::Ok);
    g
}

fn distribution(desc: &str) -> *mut DriskDistribution {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { drisk_distribution_parse(c(desc).as_ptr(), &mut d) }, DriskStatus::Ok);
    d
}

#[test]
fn measures_through_handles() {
    let g = distortion("compose(tvar:0.95,tvar:0.95)");
    let x = distribution("example:3.1X");
    let (mut v, mut e) = (0.0, -1.0);
    unsafe {
        assert_eq!(drisk_choquet(g, x, &mut v, &mut e), DriskStatus::Ok);
        assert_eq!(v, 500.0);
        assert_eq!(e, 0.0);
        assert_eq!(drisk_var(x, 0.95, &mut v), DriskStatus::Ok);
        assert_eq!(v, 100.0);
        assert_eq!(drisk_tvar(x, 0.96, &mut v), DriskStatus::Ok);
        assert!((v - 350.0).abs() < 1e-10);
        assert_eq!(drisk_distribution_survival(x, 100.0, &mut v), DriskStatus::Ok);
        assert!((v - 0.025).abs() < 1e-15);
        assert_eq!(drisk_distortion_eval(g, 0.5, &mut v), DriskStatus::Ok);
        assert_eq!(v, 1.0);
        drisk_distortion_free(g);
        drisk_distribution_free(x);
    }
}

#[test]
fn status_codes() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { drisk_distortion_parse(c("tvar(0.9").as_ptr(), &mut g) }, DriskStatus::Parse);
    assert!(g.is_null());
    assert!(last_error().contains("column"));
    assert_eq!(unsafe { drisk_distortion_parse(ptr::null(), &mut g) }, DriskStatus::NullPointer);

    let t = distortion("tvar:0.95");
    let p = distribution("pareto:1,1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(drisk_choquet(t, p, &mut v, ptr::null_mut()), DriskStatus::Divergence);
        assert!(last_error().contains("diverg"));
        assert_eq!(drisk_var(p, 1.5, &mut v), DriskStatus::Domain);
        assert_eq!(drisk_var(ptr::null(), 0.5, &mut v), DriskStatus::NullPointer);
        assert_eq!(drisk_var(p, 0.5, ptr::null_mut()), DriskStatus::NullPointer);
        drisk_distortion_free(t);
        drisk_distribution_free(p);
        drisk_distortion_free(ptr::null_mut());
    }
    let mut d = ptr::null_mut();
    let status = unsafe { drisk_distribution_parse(c("csv:/nonexistent/losses.csv").as_ptr(), &mut d) };
    assert_eq!(status, DriskStatus::Io);
}

#[test]
fn classification() {
    let mut s = DriskShape::Neither;
    for (spec, want) in [
        ("identity", DriskShape::Linear),
        ("tvar:0.9", DriskShape::Concave),
        ("power:2", DriskShape::Convex),
    ] {
        let g = distortion(spec);
        assert_eq!(unsafe { drisk_distortion_classify(g, 1000, &mut s) }, DriskStatus::Ok);
        assert_eq!(s, want, "{spec}");
        unsafe { drisk_distortion_free(g) };
    }
    let g = distortion("identity");
    assert_eq!(unsafe { drisk_distortion_classify(g, 4, &mut s) }, DriskStatus::Domain);
    unsafe { drisk_distortion_free(g) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(drisk_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let h = std::fs::read_to_string(root.join("include/drisk.h")).unwrap();
    for name in [
        "drisk_distortion_parse",
        "drisk_distortion_eval",
        "drisk_distortion_free",
        "drisk_distortion_classify",
        "drisk_distribution_parse",
        "drisk_distribution_survival",
        "drisk_distribution_free",
        "drisk_choquet",
        "drisk_var",
        "drisk_tvar",
        "drisk_last_error_message",
        "drisk_version",
        "DRISK_STATUS_DIVERGENCE = 3",
        "typedef struct DriskDistortion DriskDistortion;",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

/// Compile and run a C program against the header and the static library
/// when a C compiler is available.
#[test]
fn c_program_links() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libdrisk_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("drisk_smoke");
    let status = Command::new(&cc)
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "smoke program exited with {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.trim().ends_with("500.0"), "{text}");
}
