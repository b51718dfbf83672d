//! Acceptance run: every criterion at its stated tolerance and instance
//! count, one PASS/FAIL line each. Exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::time::Instant;

use mattolab_cli::report::verify_report;
use mattolab_cli::verify::{find_row, run_row, Counts, Ctx, Limits, Row, Tolerances};

const SEED: u64 = 0;

/// A row checked against a criterion: bound on its residual and the
/// fewest cases it must have covered.
struct Check {
    row: &'static str,
    bound: f64,
    min_cases: usize,
}

const fn check(row: &'static str, bound: f64, min_cases: usize) -> Check {
    Check {
        row,
        bound,
        min_cases,
    }
}

fn ctx() -> Ctx {
    Ctx::new(
        SEED,
        Limits::default(),
        Counts::acceptance(),
        Tolerances::default(),
        None,
    )
}

fn criteria() -> Vec<(&'static str, Vec<Check>)> {
    vec![
        (
            "1 inner functions",
            vec![
                check("inner_unitary_on_grid", 1e-10, 50),
                check("purity_detection", 0.0, 5),
            ],
        ),
        (
            "2 model-space dimension",
            vec![
                check("modelspace_dimension", 0.0, 50),
                check("reproducing_kernel", 1e-9, 50 * 100),
            ],
        ),
        (
            "3 defect identities",
            vec![
                check("defect_identities", 1e-9, 1),
                check("projection_and_kernel_at_zero", 1e-9, 1),
                check("piecewise_shift_formulas", 1e-9, 1),
                check("tilde_defect_through_tau", 1e-9, 1),
            ],
        ),
        (
            "4 shift residual identity",
            vec![check("shift_residual_lemma", 1e-9, 50)],
        ),
        (
            "5 certificate forward and converse",
            vec![
                check("certificate_forward", 1e-8, 20),
                check("certificate_matches_symbols", 1e-8, 20),
                check("certificate_converse", 1e-8, 20),
            ],
        ),
        (
            "6 oracle agreement",
            vec![check("oracle_agreement", 0.0, 200)],
        ),
        (
            "7 tau machinery",
            vec![
                check("tau_conjugates_shift", 1e-10, 1),
                check("tau_conjugates_defect", 1e-10, 1),
                check("tau_membership_equivalence", 0.0, 40),
                check("tau_symbol_law", 1e-8, 1),
            ],
        ),
        (
            "8 Crofoot transform",
            vec![
                check("crofoot_unitary_pure", 1e-9, 20),
                check("crofoot_symbol_law", 1e-8, 20),
                check("crofoot_zero_parameter", 1e-12, 1),
            ],
        ),
        (
            "9 flavor equivalence",
            vec![
                check("flavor_equivalence", 0.0, 1),
                check("certificate_conversion_roundtrip", 1e-9, 1),
            ],
        ),
    ]
}

fn judge(row: &Row, c: &Check) -> Result<(), String> {
    if let Some(e) = &row.error {
        return Err(format!("{}: {e}", c.row));
    }
    if row.cases < c.min_cases {
        return Err(format!(
            "{}: {} cases, need {}",
            c.row, row.cases, c.min_cases
        ));
    }
    if !(row.max_residual <= c.bound) {
        return Err(format!(
            "{}: residual {:.3e} > {:.0e}",
            c.row, row.max_residual, c.bound
        ));
    }
    Ok(())
}

fn line(label: &str, result: &Result<String, String>) -> bool {
    match result {
        Ok(detail) => println!("PASS  criterion {label}  {detail}"),
        Err(why) => println!("FAIL  criterion {label}  {why}"),
    }
    result.is_ok()
}

fn main() {
    let ctx = ctx();
    let mut ok = true;

    // Criterion 1 is also timed on its own.
    let start = Instant::now();
    let timed: Vec<Row> = ["inner_unitary_on_grid", "purity_detection"]
        .iter()
        .map(|name| {
            let (n, t, f) = find_row(name).expect("row exists");
            run_row(&ctx, n, t, f)
        })
        .collect();
    let criterion1_secs = start.elapsed().as_secs_f64();

    let first = verify_report(&ctx);
    let rows: HashMap<&str, &Row> = first.rows.iter().map(|r| (r.name.as_str(), r)).collect();

    let timed: HashMap<&str, &Row> = timed.iter().map(|r| (r.name.as_str(), r)).collect();

    for (label, checks) in criteria() {
        let is_timed = label.starts_with("1 ");
        let source = if is_timed { &timed } else { &rows };
        let mut result = checks
            .iter()
            .try_for_each(|c| judge(source[c.row], c))
            .map(|()| {
                let worst = checks
                    .iter()
                    .map(|c| source[c.row].max_residual)
                    .fold(0.0, f64::max);
                format!("worst residual {worst:.3e}")
            });
        if is_timed {
            result = result.and_then(|d| {
                if criterion1_secs > 5.0 {
                    Err(format!("took {criterion1_secs:.2} s, limit 5 s"))
                } else {
                    Ok(format!("{d} in {criterion1_secs:.2} s"))
                }
            });
        }
        ok &= line(label, &result);
    }

    let second = verify_report(&ctx);
    let elapsed = first.timestamp.elapsed_ms as f64 / 1e3;
    let result = if !first.pass {
        let failed: Vec<&str> = first
            .rows
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        Err(format!("suite rows failed: {}", failed.join(", ")))
    } else if elapsed > 60.0 {
        Err(format!("suite took {elapsed:.2} s, limit 60 s"))
    } else if first.deterministic_json() != second.deterministic_json() {
        Err("two runs with the same seed differ".into())
    } else {
        Ok(format!(
            "{} rows in {elapsed:.2} s, byte-identical reruns",
            first.rows.len()
        ))
    };
    ok &= line("10 full suite", &result);

    if !ok {
        std::process::exit(1);
    }
}
