use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mediation_ffi::*;

fn last_error() -> String {
    let p = med_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn pd() -> *mut MedGame {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { med_game_prisoners_dilemma(&mut g) }, MedStatus::Ok);
    g
}

#[test]
fn game_round_trip_and_utility() {
    let counts = [2usize, 2];
    let payoffs = [2.0, 2.0, 0.0, 3.0, 3.0, 0.0, 1.0, 1.0];
    let mut g = ptr::null_mut();
    let status = unsafe { med_game_new(counts.as_ptr(), 2, payoffs.as_ptr(), payoffs.len(), &mut g) };
    assert_eq!(status, MedStatus::Ok);
    assert!(med_last_error().is_null());
    assert_eq!(unsafe { med_game_num_players(g) }, 2);
    let mut got = [0usize; 2];
    assert_eq!(unsafe { med_game_action_counts(g, got.as_mut_ptr(), 2) }, MedStatus::Ok);
    assert_eq!(got, counts);
    let mut u = [0.0; 2];
    assert_eq!(
        unsafe { med_game_utility(g, [1usize, 0].as_ptr(), 2, u.as_mut_ptr()) },
        MedStatus::Ok
    );
    assert_eq!(u, [3.0, 0.0]);
    assert_eq!(
        unsafe { med_game_utility(g, [2usize, 0].as_ptr(), 2, u.as_mut_ptr()) },
        MedStatus::InvalidProfile
    );
    assert!(!last_error().is_empty());
    unsafe { med_game_free(g) };
}

#[test]
fn invalid_construction_reports_errors() {
    let mut g = ptr::null_mut();
    let status = unsafe { med_game_new([2usize, 2].as_ptr(), 2, [1.0].as_ptr(), 1, &mut g) };
    assert_ne!(status, MedStatus::Ok);
    assert!(g.is_null());
    assert_eq!(
        unsafe { med_game_new(ptr::null(), 2, ptr::null(), 8, &mut g) },
        MedStatus::NullPointer
    );
    assert!(last_error().contains("null"));
    assert_eq!(
        unsafe { med_game_prisoners_dilemma(ptr::null_mut()) },
        MedStatus::NullPointer
    );
    unsafe { med_game_free(ptr::null_mut()) };
}

#[test]
fn mediation_through_the_boundary() {
    let g = pd();
    let mut resolved = [9usize; 2];
    let mut activated = false;
    let status = unsafe {
        med_mediate(
            g,
            MedMediator::Pareto as u32,
            [1usize, 1].as_ptr(),
            [1u8, 1].as_ptr(),
            2,
            resolved.as_mut_ptr(),
            &mut activated,
        )
    };
    assert_eq!(status, MedStatus::Ok);
    assert_eq!(resolved, [0, 0]);
    assert!(activated);
    let status = unsafe {
        med_mediate(
            g,
            7,
            [1usize, 1].as_ptr(),
            [1u8, 1].as_ptr(),
            2,
            resolved.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(status, MedStatus::InvalidArgument);
    assert!(last_error().contains("mediator"));

    let mut table = ptr::null_mut();
    assert_eq!(
        unsafe { med_build_mediated_game(g, MedMediator::Pareto as u32, &mut table) },
        MedStatus::Ok
    );
    let mut u = [0.0; 2];
    assert_eq!(
        unsafe { med_game_utility(table, [3usize, 3].as_ptr(), 2, u.as_mut_ptr()) },
        MedStatus::Ok
    );
    assert_eq!(u, [2.0, 2.0]);

    let mut count = 0usize;
    assert_eq!(
        unsafe { med_pure_nash(table, ptr::null_mut(), 0, &mut count) },
        MedStatus::BufferTooSmall
    );
    let mut buf = vec![0usize; 2 * count];
    assert_eq!(
        unsafe { med_pure_nash(table, buf.as_mut_ptr(), buf.len(), &mut count) },
        MedStatus::Ok
    );
    assert!(buf.chunks(2).any(|p| p == [3, 3]));
    unsafe {
        med_game_free(table);
        med_game_free(g);
    }
}

#[test]
fn assignment_through_the_boundary() {
    let w = [2.0, 3.0, 3.0, 2.0];
    let mut slots = [0usize; 2];
    let mut total = 0.0;
    assert_eq!(
        unsafe { med_solve_assignment(w.as_ptr(), 2, 2, slots.as_mut_ptr(), &mut total) },
        MedStatus::Ok
    );
    assert_eq!((slots, total), ([1, 0], 6.0));
    let w = [f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY, 1.0];
    assert_eq!(
        unsafe { med_solve_assignment(w.as_ptr(), 2, 2, slots.as_mut_ptr(), &mut total) },
        MedStatus::Infeasible
    );
}

/// Compile a C program against the generated header and static library.
#[test]
fn header_links_from_c() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "mediation.h"
int main(void) {
    MedGame *g = NULL;
    if (med_game_prisoners_dilemma(&g) != MED_STATUS_OK) return 1;
    size_t actions[2] = {1, 1}, resolved[2];
    uint8_t delegate[2] = {1, 1};
    bool activated = false;
    if (med_mediate(g, MED_MEDIATOR_PARETO, actions, delegate, 2, resolved, &activated) != MED_STATUS_OK) return 2;
    printf("%zu %zu %d\n", resolved[0], resolved[1], (int)activated);
    med_game_free(g);
    return 0;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(target.join("libmediation_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0 0 1\n");
}
