use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use goalrec_ffi::*;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel)
}

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gr_last_error()) }.to_string_lossy().into_owned()
}

fn load(rel: &str) -> *mut GrBundle {
    let mut b = ptr::null_mut();
    let status = unsafe { gr_bundle_load(cstr(&fixture(rel)).as_ptr(), &mut b) };
    assert_eq!(status, GrStatus::Ok, "{}", last_error());
    b
}

fn take_string(p: *mut std::os::raw::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { gr_string_free(p) };
    s
}

#[test]
fn landmark_recognition_through_handles() {
    let b = load("bench/campus/100/p01-d0");
    unsafe {
        assert_eq!(gr_bundle_hypothesis_count(b), 6);
        let mut r = ptr::null_mut();
        assert_eq!(gr_recognize_lm(b, &mut r), GrStatus::Ok);
        let spread = gr_result_spread(r);
        assert!(spread >= 1);

        let mut len = 0;
        assert_eq!(gr_result_predicted(r, ptr::null_mut(), 0, &mut len), GrStatus::BufferTooSmall);
        assert_eq!(len, spread);
        assert!(last_error().contains("slots"));
        let mut buf = vec![usize::MAX; len];
        assert_eq!(gr_result_predicted(r, buf.as_mut_ptr(), buf.len(), &mut len), GrStatus::Ok);
        assert!(buf.contains(&2), "real goal is hypothesis 2: {buf:?}");

        let mut json = ptr::null_mut();
        assert_eq!(gr_result_to_json(r, &mut json), GrStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["recognizer"], "lm");
        assert_eq!(v["predicted"].as_array().unwrap().len(), spread);

        gr_result_free(r);
        gr_bundle_free(b);
    }
}

#[test]
fn uniform_returns_every_goal() {
    let b = load("llm/bundle");
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(gr_recognize_uniform(b, &mut r), GrStatus::Ok);
        assert_eq!(gr_result_spread(r), gr_bundle_hypothesis_count(b));
        gr_result_free(r);
        gr_bundle_free(b);
    }
}

#[test]
fn prompt_and_response_parsing() {
    let b = load("llm/bundle");
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(gr_build_prompt(b, &mut p), GrStatus::Ok);
        let golden = std::fs::read_to_string(fixture("llm/expected_prompt.txt")).unwrap();
        assert_eq!(take_string(p), golden);

        let reply = CString::new(std::fs::read_to_string(fixture("llm/responses/single_goal.txt")).unwrap()).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(gr_parse_response(b, reply.as_ptr(), &mut r), GrStatus::Ok);
        assert_eq!(gr_result_spread(r), 1);
        let (mut one, mut len) = (0usize, 0usize);
        assert_eq!(gr_result_predicted(r, &mut one, 1, &mut len), GrStatus::Ok);
        assert_eq!((one, len), (1, 1));
        gr_result_free(r);

        let garbage = CString::new("[:answer A]").unwrap();
        assert_eq!(gr_parse_response(b, garbage.as_ptr(), &mut r), GrStatus::Ok);
        assert_eq!(gr_result_spread(r), 0);
        let mut json = ptr::null_mut();
        gr_result_to_json(r, &mut json);
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["parse_status"], "garbage");
        gr_result_free(r);
        gr_bundle_free(b);
    }
}

#[test]
fn errors_are_reported_not_raised() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(gr_bundle_load(ptr::null(), &mut b), GrStatus::NullArgument);
        assert!(b.is_null());
        let missing = cstr(&fixture("no/such/bundle"));
        assert_eq!(gr_bundle_load(missing.as_ptr(), &mut b), GrStatus::Load);
        assert!(b.is_null());
        assert!(last_error().contains("obs.dat") || last_error().contains("No such file"), "{}", last_error());
        assert_eq!(gr_bundle_load(missing.as_ptr(), ptr::null_mut()), GrStatus::NullArgument);

        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(gr_bundle_load(bad_utf8.as_ptr().cast(), &mut b), GrStatus::InvalidUtf8);

        let mut r = ptr::null_mut();
        assert_eq!(gr_recognize_lm(ptr::null(), &mut r), GrStatus::NullArgument);
        assert_eq!(gr_result_spread(ptr::null()), 0);
        assert_eq!(gr_bundle_hypothesis_count(ptr::null()), 0);
        let mut len = 0;
        assert_eq!(gr_result_predicted(ptr::null(), ptr::null_mut(), 0, &mut len), GrStatus::NullArgument);

        gr_bundle_free(ptr::null_mut());
        gr_result_free(ptr::null_mut());
        gr_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/goalrec.h")).unwrap();
    for f in [
        "gr_last_error",
        "gr_bundle_load",
        "gr_bundle_free",
        "gr_bundle_hypothesis_count",
        "gr_recognize_lm",
        "gr_recognize_uniform",
        "gr_build_prompt",
        "gr_parse_response",
        "gr_result_spread",
        "gr_result_predicted",
        "gr_result_to_json",
        "gr_result_free",
        "gr_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("GR_STATUS_BUFFER_TOO_SMALL"));
    assert!(header.contains("typedef struct GrBundle GrBundle") || header.contains("struct GrBundle;"));

    if let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-"])
        .arg("-I")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .stdin(std::process::Stdio::piped())
        .spawn()
        .and_then(|mut child| {
            use std::io::Write;
            child.stdin.take().unwrap().write_all(b"#include \"goalrec.h\"\nint main(void){return GR_STATUS_OK;}\n")?;
            child.wait_with_output()
        })
    {
        assert!(out.status.success(), "header does not compile as C");
    }
}
