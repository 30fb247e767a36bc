//! One pass/fail line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::checks::{self, Check};

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("golden table (4,2)", checks::criterion_golden_n4_a2),
        ("golden tables (5,2), (6,2), (6,3)", checks::criterion_golden_larger),
        (
            "Euler characteristics vs reference polynomials",
            checks::criterion_euler_reference,
        ),
        (
            "link homology vs representation-space cohomology",
            checks::criterion_routes_agree,
        ),
        ("reduced homology oracle", checks::criterion_reduced),
        ("symmetric-function suite", checks::criterion_symmetric_functions),
        ("Koszul resolution property", checks::criterion_resolution),
        ("perturbation suite", checks::criterion_perturbation),
        ("numeric representation-space suite", checks::criterion_numeric),
        ("Borel freeness", checks::criterion_borel),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:7.2}s] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:7.2}s] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
