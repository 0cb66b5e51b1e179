//! The C ABI exercised from Rust, plus a C compile check of the header.

use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use aohf_ffi::*;

const TOY: &str = include_str!("../../core/fixtures/toy-heh.aoints");
const TOY_ENERGY: f64 = -1.3650903785766157;

fn last_error() -> String {
    let p = aohf_last_error();
    assert!(!p.is_null(), "an error message is set");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn toy() -> *mut AohfSystem {
    let text = CString::new(TOY).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(
        unsafe { aohf_system_from_str(text.as_ptr(), &mut sys) },
        AohfStatus::Ok
    );
    assert!(aohf_last_error().is_null());
    sys
}

fn solve(
    sys: *const AohfSystem,
    solver: AohfSolver,
    options: Option<&AohfOptions>,
) -> *mut AohfSolution {
    let mut sol = ptr::null_mut();
    let opts = options.map_or(ptr::null(), |o| o as *const _);
    assert_eq!(
        unsafe { aohf_solve(sys, solver, opts, &mut sol) },
        AohfStatus::Ok
    );
    sol
}

#[test]
fn toy_through_both_solvers() {
    let sys = toy();
    unsafe {
        assert_eq!(aohf_system_size(sys), 4);
        assert_eq!(aohf_system_electrons(sys), 2);
        for solver in [AohfSolver::Roothaan, AohfSolver::DensityDescent] {
            let sol = solve(sys, solver, None);
            assert!(aohf_solution_converged(sol));
            assert!((aohf_solution_energy(sol) - TOY_ENERGY).abs() < 1e-10);
            assert!(aohf_solution_gradient(sol) <= 1e-8);
            assert!(aohf_solution_iterations(sol) > 0);

            let mut eq = AohfEquivalence::default();
            assert_eq!(aohf_solution_equivalence(sol, sys, &mut eq), AohfStatus::Ok);
            assert!(eq.passed, "{eq:?}");

            let mut needed = 0;
            let mut density = vec![0.0; 16];
            let status =
                aohf_solution_density(sol, density.as_mut_ptr(), density.len(), &mut needed);
            assert_eq!(status, AohfStatus::Ok);
            assert_eq!(needed, 16);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(density[4 * i + j], density[4 * j + i]);
                }
            }
            let mut eps = vec![0.0; 4];
            let status = aohf_solution_orbital_energies(sol, eps.as_mut_ptr(), 4, ptr::null_mut());
            assert_eq!(status, AohfStatus::Ok);
            assert!(eps.windows(2).all(|w| w[0] <= w[1]));
            aohf_solution_free(sol);
        }
        aohf_system_free(sys);
    }
}

#[test]
fn small_buffer_reports_needed_length() {
    let sys = toy();
    let sol = solve(sys, AohfSolver::Roothaan, None);
    unsafe {
        let mut needed = 0;
        let mut buf = [0.0; 3];
        let status = aohf_solution_density(sol, buf.as_mut_ptr(), buf.len(), &mut needed);
        assert_eq!(status, AohfStatus::BufferTooSmall);
        assert_eq!(needed, 16);
        assert!(last_error().contains("16 needed"));
        assert_eq!(
            aohf_solution_density(sol, ptr::null_mut(), 0, &mut needed),
            AohfStatus::BufferTooSmall
        );
        aohf_solution_free(sol);
        aohf_system_free(sys);
    }
}

#[test]
fn unconverged_run_is_still_a_solution() {
    let sys = toy();
    let mut opts = aohf_options_default();
    opts.max_iterations = 1;
    let sol = solve(sys, AohfSolver::Roothaan, Some(&opts));
    unsafe {
        assert!(!aohf_solution_converged(sol));
        let mut eq = AohfEquivalence::default();
        assert_eq!(
            aohf_solution_equivalence(sol, sys, &mut eq),
            AohfStatus::Unconverged
        );
        aohf_solution_free(sol);
        aohf_system_free(sys);
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    unsafe {
        let mut sys = ptr::null_mut();
        let bad =
            CString::new("AOINTS v1\nkind spinorbital\nnbasis 1\nnelec 1\nS 1 1 -1.0\n").unwrap();
        assert_eq!(
            aohf_system_from_str(bad.as_ptr(), &mut sys),
            AohfStatus::InvalidSystem
        );
        assert!(sys.is_null());
        assert!(last_error().contains("positive definite"));

        let garbage = CString::new("not a file").unwrap();
        assert_eq!(
            aohf_system_from_str(garbage.as_ptr(), &mut sys),
            AohfStatus::Parse
        );
        assert!(last_error().starts_with("line 1"));

        let missing = CString::new("/nonexistent/x.aoints").unwrap();
        assert_eq!(
            aohf_system_from_file(missing.as_ptr(), &mut sys),
            AohfStatus::Io
        );

        let invalid_utf8 = [0xffu8, 0xfe, 0];
        let status = aohf_system_from_str(invalid_utf8.as_ptr() as *const c_char, &mut sys);
        assert_eq!(status, AohfStatus::InvalidUtf8);

        assert_eq!(
            aohf_system_from_str(ptr::null(), &mut sys),
            AohfStatus::NullPointer
        );
        assert_eq!(
            aohf_system_random(2, 3, 0, 0.5, &mut sys),
            AohfStatus::InvalidSystem
        );

        let mut sol = ptr::null_mut();
        assert_eq!(
            aohf_solve(ptr::null(), AohfSolver::Roothaan, ptr::null(), &mut sol),
            AohfStatus::NullPointer
        );

        let sys = toy();
        let mut opts = aohf_options_default();
        opts.gradient_tolerance = -1.0;
        assert_eq!(
            aohf_solve(sys, AohfSolver::Roothaan, &opts, &mut sol),
            AohfStatus::InvalidArgument
        );
        aohf_system_free(sys);

        assert!(aohf_solution_energy(ptr::null()).is_nan());
        assert_eq!(aohf_system_size(ptr::null()), 0);
        aohf_system_free(ptr::null_mut());
        aohf_solution_free(ptr::null_mut());
        aohf_string_free(ptr::null_mut());
    }
}

#[test]
fn random_and_file_systems() {
    let path = CString::new(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../core/fixtures/toy-heh.aoints")
            .to_str()
            .unwrap(),
    )
    .unwrap();
    unsafe {
        let mut from_file = ptr::null_mut();
        assert_eq!(
            aohf_system_from_file(path.as_ptr(), &mut from_file),
            AohfStatus::Ok
        );
        assert_eq!(aohf_system_size(from_file), 4);
        aohf_system_free(from_file);

        let mut sys = ptr::null_mut();
        assert_eq!(aohf_system_random(8, 4, 3, 0.5, &mut sys), AohfStatus::Ok);
        let r = solve(sys, AohfSolver::Roothaan, None);
        let d = solve(sys, AohfSolver::DensityDescent, None);
        assert!((aohf_solution_energy(r) - aohf_solution_energy(d)).abs() < 1e-8);
        aohf_solution_free(r);
        aohf_solution_free(d);
        aohf_system_free(sys);
    }
}

#[test]
fn json_report() {
    let sys = toy();
    let sol = solve(sys, AohfSolver::DensityDescent, None);
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(aohf_solution_to_json(sol, &mut s), AohfStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_string();
        aohf_string_free(s);
        assert!(text.contains("\"solver\": \"density_descent\""));
        assert!(text.contains("\"system_label\": \"toy-heh\""));
        aohf_solution_free(sol);
        aohf_system_free(sys);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(aohf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut sys = ptr::null_mut();
        assert_eq!(
            aohf_system_from_str(ptr::null(), &mut sys),
            AohfStatus::NullPointer
        );
    }
    let other = std::thread::spawn(|| aohf_last_error().is_null())
        .join()
        .unwrap();
    assert!(other);
    assert!(last_error().contains("null"));
}

#[test]
fn header_declares_the_api_and_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header =
        std::fs::read_to_string(dir.join("include/aohf.h")).expect("header generated by the build");
    for name in [
        "typedef struct AohfSystem AohfSystem;",
        "typedef struct AohfSolution AohfSolution;",
        "AOHF_STATUS_BUFFER_TOO_SMALL = 9",
        "AohfStatus aohf_solve(",
        "const char *aohf_last_error(void);",
        "AohfOptions aohf_options_default(void);",
    ] {
        assert!(header.contains(name), "missing `{name}`");
    }

    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping the compile check");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "aohf.h"
int main(void) {
    AohfSystem *sys = NULL;
    AohfOptions opts = aohf_options_default();
    AohfStatus st = aohf_system_random(4, 2, 1, 0.5, &sys);
    AohfSolution *sol = NULL;
    if (st == AOHF_STATUS_OK) st = aohf_solve(sys, AOHF_SOLVER_ROOTHAAN, &opts, &sol);
    aohf_solution_free(sol);
    aohf_system_free(sys);
    return (int)st;
}
"#,
    )
    .unwrap();
    let out = Command::new(cc)
        .args([
            "-std=c99",
            "-Wall",
            "-Wextra",
            "-Werror",
            "-fsyntax-only",
            "-I",
        ])
        .arg(dir.join("include"))
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| {
            Command::new(c)
                .arg("--version")
                .output()
                .is_ok_and(|o| o.status.success())
        })
        .ok_or(())
}
