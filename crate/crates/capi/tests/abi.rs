//! Exercises the C ABI from Rust: handle lifecycle, error codes, and the
//! thread-local error message.

use causalfuse::synth::{forward_sample, BayesNetSpec};
use causalfuse_capi::*;
use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

fn write_fixture(dir: &Path) -> CString {
    let spec_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../networks/chain3.json");
    let spec = BayesNetSpec::load(&spec_path).unwrap();
    let obs = forward_sample(&spec, 4_000, 1).unwrap();
    let int = forward_sample(&spec, 4_000, 2).unwrap();
    std::fs::write(dir.join("obs.csv"), obs.to_csv()).unwrap();
    std::fs::write(dir.join("int_01.csv"), int.to_csv()).unwrap();
    let manifest = serde_json::json!({
        "observational": "obs.csv",
        "interventional": [{"path": "int_01.csv", "targets": ["A"]}],
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_string()).unwrap();
    CString::new(path.to_str().unwrap()).unwrap()
}

#[test]
fn load_learn_and_render_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_fixture(dir.path());

    let mut bundle: *mut CfBundle = ptr::null_mut();
    let status = unsafe { cf_bundle_load(manifest.as_ptr(), &mut bundle) };
    assert_eq!(status, CfStatus::CfOk);
    assert_eq!(unsafe { cf_bundle_num_vars(bundle) }, 3);

    let mut result: *mut CfResult = ptr::null_mut();
    let status = unsafe { cf_learn(bundle, ptr::null(), &mut result) };
    assert_eq!(status, CfStatus::CfOk);

    let text = unsafe { cf_result_graph_text(result) };
    assert!(!text.is_null());
    let rendered = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    assert!(rendered.contains("#nodes: A,B,C"), "{rendered}");
    unsafe { cf_string_free(text) };

    let json = unsafe { cf_result_edge_probs_json(result) };
    assert!(!json.is_null());
    let parsed: serde_json::Value =
        serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    assert!(parsed.is_object() || parsed.is_array());
    unsafe { cf_string_free(json) };

    unsafe { cf_result_free(result) };
    unsafe { cf_bundle_free(bundle) };
}

#[test]
fn default_options_round_trip_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_fixture(dir.path());
    let mut bundle: *mut CfBundle = ptr::null_mut();
    assert_eq!(
        unsafe { cf_bundle_load(manifest.as_ptr(), &mut bundle) },
        CfStatus::CfOk
    );

    let mut opts = CfOptions {
        significance: 0.0,
        cutoff: 0.0,
        max_sepset: 0,
        ess: 0.0,
        factors: 0,
    };
    assert_eq!(unsafe { cf_options_default(&mut opts) }, CfStatus::CfOk);
    assert_eq!(opts.significance, 0.05);
    assert_eq!(opts.cutoff, 0.5);
    assert_eq!(opts.max_sepset, 10);
    assert_eq!(opts.ess, 1.0);
    assert_eq!(opts.factors, 0b111);

    opts.cutoff = 2.0;
    let mut result: *mut CfResult = ptr::null_mut();
    let status = unsafe { cf_learn(bundle, &opts, &mut result) };
    assert_eq!(status, CfStatus::CfInvalidArgument);
    assert!(result.is_null());
    let msg = unsafe { CStr::from_ptr(cf_last_error()) }.to_str().unwrap();
    assert!(msg.contains("cutoff"), "{msg}");

    unsafe { cf_bundle_free(bundle) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let missing = CString::new("/nonexistent/manifest.json").unwrap();
    let mut bundle: *mut CfBundle = ptr::null_mut();
    let status = unsafe { cf_bundle_load(missing.as_ptr(), &mut bundle) };
    assert_eq!(status, CfStatus::CfValidation);
    assert!(bundle.is_null());
    let msg = unsafe { CStr::from_ptr(cf_last_error()) }.to_str().unwrap();
    assert!(msg.contains("manifest.json"), "{msg}");

    assert_eq!(
        unsafe { cf_bundle_load(ptr::null(), &mut bundle) },
        CfStatus::CfInvalidArgument
    );
    assert_eq!(unsafe { cf_options_default(ptr::null_mut()) }, CfStatus::CfInvalidArgument);
    assert_eq!(unsafe { cf_bundle_num_vars(ptr::null()) }, 0);

    // null handles are safe no-ops everywhere
    unsafe {
        cf_bundle_free(ptr::null_mut());
        cf_result_free(ptr::null_mut());
        cf_string_free(ptr::null_mut());
        assert!(cf_result_graph_text(ptr::null()).is_null());
        assert!(cf_result_edge_probs_json(ptr::null()).is_null());
    }

    let version = unsafe { CStr::from_ptr(cf_version()) }.to_str().unwrap();
    assert!(!version.is_empty());
}
