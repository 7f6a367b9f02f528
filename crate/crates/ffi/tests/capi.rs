use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cartan_mgs_ffi::*;

fn new_algebra(family: u8, p: u32, m: usize, n: usize) -> *mut CmgsAlgebra {
    let mut alg = ptr::null_mut();
    let st = unsafe { cmgs_algebra_new(family as c_char, p, m, n, &mut alg) };
    assert_eq!(st, CmgsStatus::Ok);
    assert!(!alg.is_null());
    alg
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; cmgs_last_error_length() + 1];
    let mut len = 0;
    let st = unsafe { cmgs_last_error_message(buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(st, CmgsStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn dimensions_through_the_abi() {
    for (fam, m, dim) in [(b'W', 2, 400), (b'H', 2, 98), (b'K', 3, 500)] {
        let alg = new_algebra(fam, 5, m, 2);
        let mut d = 0;
        assert_eq!(unsafe { cmgs_algebra_dim(alg, &mut d) }, CmgsStatus::Ok);
        assert_eq!(d, dim);
        let (mut lo, mut hi) = (0, 0);
        assert_eq!(unsafe { cmgs_algebra_degree_range(alg, &mut lo, &mut hi) }, CmgsStatus::Ok);
        let mut total = 0;
        for deg in lo..=hi {
            let mut c = 0;
            assert_eq!(unsafe { cmgs_algebra_component_dim(alg, deg, &mut c) }, CmgsStatus::Ok);
            total += c;
        }
        assert_eq!(total, dim);
        unsafe { cmgs_algebra_free(alg) };
    }
}

#[test]
fn h_uses_the_quadratic_extension() {
    let alg = new_algebra(b'H', 5, 2, 2);
    let mut deg = 0;
    assert_eq!(unsafe { cmgs_algebra_field_degree(alg, &mut deg) }, CmgsStatus::Ok);
    assert_eq!(deg, 2);
    unsafe { cmgs_algebra_free(alg) };
}

#[test]
fn bad_parameters_report_errors() {
    let mut alg = ptr::null_mut();
    let st = unsafe { cmgs_algebra_new(b'W' as c_char, 4, 2, 2, &mut alg) };
    assert_eq!(st, CmgsStatus::InvalidParameter);
    assert!(alg.is_null());
    assert!(last_error().contains("prime"));

    let st = unsafe { cmgs_algebra_new(b'Q' as c_char, 5, 2, 2, &mut alg) };
    assert_eq!(st, CmgsStatus::InvalidParameter);
    assert!(last_error().contains("family"));

    let st = unsafe { cmgs_algebra_dim(ptr::null(), ptr::null_mut()) };
    assert_eq!(st, CmgsStatus::NullPointer);
}

#[test]
fn bracket_is_antisymmetric_on_even_vectors() {
    let alg = new_algebra(b'W', 5, 2, 2);
    let mut idx = [0u32; 64];
    let mut coeff = [CmgsScalar::default(); 64];
    let mut len = 0;
    // Needs a size query first when the buffer is empty.
    let st = unsafe { cmgs_algebra_bracket(alg, 0, 5, ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert!(st == CmgsStatus::Ok || st == CmgsStatus::BufferTooSmall);
    let needed = len;
    assert_eq!(unsafe { cmgs_algebra_bracket(alg, 0, 5, idx.as_mut_ptr(), coeff.as_mut_ptr(), 64, &mut len) }, CmgsStatus::Ok);
    assert_eq!(len, needed);
    let ab: Vec<(u32, CmgsScalar)> = idx[..len].iter().copied().zip(coeff[..len].iter().copied()).collect();
    assert_eq!(unsafe { cmgs_algebra_bracket(alg, 5, 0, idx.as_mut_ptr(), coeff.as_mut_ptr(), 64, &mut len) }, CmgsStatus::Ok);
    let ba: Vec<(u32, CmgsScalar)> = idx[..len].iter().copied().zip(coeff[..len].iter().copied()).collect();
    assert_eq!(ab.len(), ba.len());
    for ((i, a), (j, b)) in ab.iter().zip(&ba) {
        assert_eq!(i, j);
        assert_eq!((a.c0 + b.c0) % 5, 0);
    }
    let st = unsafe { cmgs_algebra_bracket(alg, 400, 0, idx.as_mut_ptr(), coeff.as_mut_ptr(), 64, &mut len) };
    assert_eq!(st, CmgsStatus::InvalidParameter);
    unsafe { cmgs_algebra_free(alg) };
}

#[test]
fn verify_identities_and_read_json() {
    let alg = new_algebra(b'H', 5, 2, 2);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { cmgs_verify(alg, CMGS_SUITE_IDENTITIES, 50, 1, &mut rep) }, CmgsStatus::Ok);
    let (mut count, mut bad) = (0, 7);
    assert_eq!(unsafe { cmgs_report_finding_count(rep, &mut count) }, CmgsStatus::Ok);
    assert_eq!(unsafe { cmgs_report_unexpected_failures(rep, &mut bad) }, CmgsStatus::Ok);
    assert!(count > 0);
    assert_eq!(bad, 0);
    let mut len = 0;
    let st = unsafe { cmgs_report_json(rep, ptr::null_mut(), 0, &mut len) };
    assert_eq!(st, CmgsStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; len + 1];
    assert_eq!(unsafe { cmgs_report_json(rep, buf.as_mut_ptr(), buf.len(), &mut len) }, CmgsStatus::Ok);
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string();
    assert!(json.contains("identities.jacobi"));
    assert!(json.contains("GF(25)"));
    assert_eq!(unsafe { cmgs_verify(alg, 64, 50, 1, &mut rep) }, CmgsStatus::InvalidParameter);
    assert!(rep.is_null());
    unsafe { cmgs_algebra_free(alg) };
}

#[test]
fn cache_written_through_the_abi_decodes() {
    let dir = std::env::temp_dir().join(format!("cmgs-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.cmgs");
    let alg = new_algebra(b'W', 5, 2, 2);
    let c = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { cmgs_algebra_write_cache(alg, c.as_ptr()) }, CmgsStatus::Ok);
    let bytes = std::fs::read(&path).unwrap();
    let cache = cartan_mgs::cli::decode_cache(&bytes).unwrap();
    assert_eq!(cache.labels.len(), 400);
    unsafe { cmgs_algebra_free(alg) };
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(cmgs_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_parses_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/cartan_mgs.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in ["cmgs_algebra_new", "cmgs_verify", "cmgs_report_json", "cmgs_last_error_message", "typedef struct CmgsAlgebra CmgsAlgebra"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c"]).arg(&header).output() else {
        eprintln!("no C compiler; skipped the syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
