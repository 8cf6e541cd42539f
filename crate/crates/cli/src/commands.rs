use std::fmt::Write as _;
use std::path::Path;

use smoothfem_core::export::{debug_check_lines, paper_report, table_to_csv, table_to_json};
use smoothfem_core::verify::{check_unisolvency_with, oracle_sweep, CellPair, ContinuityHarness};
use smoothfem_core::{
    assign_dofs, group_summary, verify_dimension_identity, ElementParams, Simplex,
};

use crate::{Command, CommonArgs, Format, SweepArgs, UnisolvencyArgs};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Largest dimension accepted by the numeric checks.
const NUMERIC_MAX_DIM: usize = 4;

enum Failure {
    Usage(String),
    Check(String),
}

type Outcome = std::result::Result<String, (Failure, Option<String>)>;

fn usage(msg: impl Into<String>) -> (Failure, Option<String>) {
    (Failure::Usage(msg.into()), None)
}

fn params(n: i64, m: i64, k1: i64) -> Result<ElementParams, (Failure, Option<String>)> {
    let n = usize::try_from(n).map_err(|_| usage(format!("dimension {n} out of range")))?;
    ElementParams::new(n, m, k1).map_err(|e| usage(e.to_string()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn write_output(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

pub fn run(command: Command) -> u8 {
    let (outcome, out) = match &command {
        Command::Generate(a) => (generate(a), a.out.clone()),
        Command::Verify(a) => (verify(a), a.out.clone()),
        Command::Unisolvency(a) => (unisolvency(a), a.common.out.clone()),
        Command::Continuity(a) => (continuity(a), a.out.clone()),
        Command::Sweep(a) => (sweep(a), a.out.clone()),
    };
    let (report, code) = match outcome {
        Ok(report) => (Some(report), EXIT_PASS),
        Err((Failure::Usage(msg), _)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
        Err((Failure::Check(msg), report)) => {
            eprintln!("check failed: {msg}");
            (report, EXIT_FAIL)
        }
    };
    if let Some(text) = report {
        if let Err(e) = write_output(&text, out.as_deref()) {
            eprintln!("error: cannot write report: {e}");
            return EXIT_USAGE;
        }
    }
    code
}

fn reject_csv(format: Format) -> Result<(), (Failure, Option<String>)> {
    if format == Format::Csv {
        Err(usage("csv output is only available for `generate`"))
    } else {
        Ok(())
    }
}

fn generate(a: &CommonArgs) -> Outcome {
    let p = params(a.dim, a.smoothness, a.excess)?;
    let table = assign_dofs(p).map_err(|e| usage(e.to_string()))?;
    let text = match a.format {
        Format::Paper => {
            let mut text = String::new();
            if a.debug_face_checks {
                for line in debug_check_lines(&table) {
                    text.push_str(&line);
                    text.push('\n');
                }
            }
            text.push_str(&paper_report(&table).map_err(|e| usage(e.to_string()))?);
            text
        }
        Format::Json => {
            let mut s = table_to_json(&table).map_err(|e| usage(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => table_to_csv(&table),
    };
    Ok(text)
}

fn verify(a: &CommonArgs) -> Outcome {
    reject_csv(a.format)?;
    let p = params(a.dim, a.smoothness, a.excess)?;
    let table = assign_dofs(p).map_err(|e| usage(e.to_string()))?;
    let mut failures = Vec::new();
    if let Err(e) = table.validate() {
        failures.push(format!("partition: {e}"));
    }
    let counted = group_summary(&table);
    if let Err(e) = &counted {
        failures.push(e.to_string());
    }
    let closed = if (2..=4).contains(&p.n) {
        let report = verify_dimension_identity(p.n, p.m, p.k1).map_err(|e| usage(e.to_string()))?;
        failures.extend(report.mismatches.iter().cloned());
        Some(report)
    } else {
        None
    };
    let total = table.total() as u64;
    if total != p.dimension() {
        failures.push(format!(
            "total {total} != dim P_{}^({}) = {}",
            p.k(),
            p.n,
            p.dimension()
        ));
    }

    let text = match a.format {
        Format::Json => to_json(&serde_json::json!({
            "params": p,
            "assignment": counted.as_ref().ok(),
            "closed_form": closed,
            "dofs": total,
            "dim_pk": p.dimension(),
            "failures": failures,
            "pass": failures.is_empty(),
        })),
        _ => {
            let mut s = format!("{p}\n");
            if let Ok(c) = &counted {
                for level in &c.levels {
                    let _ = write!(
                        s,
                        "level {}: {} per entity x {} = {}",
                        level.level, level.per_entity, level.simplex_count, level.total
                    );
                    if let Some(cf) = &closed {
                        let _ = write!(s, " (closed form {})", cf.levels[level.level].per_entity);
                    }
                    s.push('\n');
                }
            }
            let _ = writeln!(
                s,
                "total: {total} = {} = dim P_{}^({})",
                p.dimension(),
                p.k(),
                p.n
            );
            let _ = writeln!(
                s,
                "result: {}",
                if failures.is_empty() { "pass" } else { "FAIL" }
            );
            s
        }
    };
    match failures.first() {
        None => Ok(text),
        Some(first) => Err((Failure::Check(first.clone()), Some(text))),
    }
}

fn numeric_params(n: i64, m: i64, k1: i64) -> Result<ElementParams, (Failure, Option<String>)> {
    let p = params(n, m, k1)?;
    if p.n > NUMERIC_MAX_DIM {
        return Err(usage(format!(
            "numeric checks support n <= {NUMERIC_MAX_DIM}, got {}",
            p.n
        )));
    }
    Ok(p)
}

fn unisolvency(a: &UnisolvencyArgs) -> Outcome {
    let c = &a.common;
    reject_csv(c.format)?;
    let p = numeric_params(c.dim, c.smoothness, c.excess)?;
    let r = check_unisolvency_with(p, &Simplex::unit(p.n), a.tolerance, c.seed);
    let text = match c.format {
        Format::Json => to_json(&r),
        _ => {
            let mut s = format!("{p}, {} DOFs, unit simplex\n", r.dofs);
            if let Some(f) = &r.failure {
                let _ = writeln!(s, "assembly failed: {f}");
            } else {
                let _ = writeln!(
                    s,
                    "residual max|V C - I| = {:.3e} (tolerance {:.1e}), refinement steps {}",
                    r.residual, r.tolerance, r.refinement_steps
                );
                let _ = writeln!(s, "condition estimate = {:.3e}", r.condition_estimate);
            }
            if let Some(rep) = &r.reproduction {
                let _ = writeln!(
                    s,
                    "interpolation reproduction at {} points: max error {:.3e} (tolerance {:.3e})",
                    rep.points, rep.max_error, rep.tolerance
                );
            }
            let _ = writeln!(s, "result: {}", if r.pass { "pass" } else { "FAIL" });
            s
        }
    };
    if r.pass {
        Ok(text)
    } else {
        let why = r
            .failure
            .clone()
            .unwrap_or_else(|| format!("{p}: residual {:.3e}", r.residual));
        Err((Failure::Check(why), Some(text)))
    }
}

fn continuity(a: &CommonArgs) -> Outcome {
    reject_csv(a.format)?;
    let p = numeric_params(a.dim, a.smoothness, a.excess)?;
    if p.n < 2 {
        return Err(usage("continuity needs n >= 2"));
    }
    let pair = CellPair::standard(p.n).map_err(|e| usage(e.to_string()))?;
    let harness =
        ContinuityHarness::new(p, pair).map_err(|e| (Failure::Check(e.to_string()), None))?;
    let r = harness.run(a.seed);
    let text = match a.format {
        Format::Json => to_json(&r),
        _ => {
            let mut s = format!(
                "{p}, seed {}, {} shared DOFs, {} facet samples\n",
                r.seed, r.shared_dofs, r.samples
            );
            s.push_str("order   max jump      scale         relative      status\n");
            for o in &r.orders {
                let status = match (o.required, o.pass) {
                    (false, _) => "not required",
                    (true, true) => "pass",
                    (true, false) => "FAIL",
                };
                let _ = writeln!(
                    s,
                    "{:>5}   {:<12.3e}  {:<12.3e}  {:<12.3e}  {status}",
                    o.order, o.max_jump, o.scale, o.relative
                );
            }
            let _ = writeln!(s, "result: {}", if r.pass { "pass" } else { "FAIL" });
            s
        }
    };
    if r.pass {
        Ok(text)
    } else {
        let first = r
            .orders
            .iter()
            .find(|o| !o.pass)
            .map(|o| o.order)
            .unwrap_or(0);
        Err((
            Failure::Check(format!("{p}: jump of order {first}")),
            Some(text),
        ))
    }
}

fn sweep(a: &SweepArgs) -> Outcome {
    reject_csv(a.format)?;
    let n_max = usize::try_from(a.dim)
        .ok()
        .filter(|n| (2..=4).contains(n))
        .ok_or_else(|| usage(format!("sweep needs 2 <= n <= 4, got {}", a.dim)))?;
    let m_max = u32::try_from(a.smoothness)
        .ok()
        .filter(|m| *m >= 1)
        .ok_or_else(|| usage(format!("sweep needs m >= 1, got {}", a.smoothness)))?;
    let k1_max = u32::try_from(a.excess)
        .map_err(|_| usage(format!("sweep needs k1 >= 0, got {}", a.excess)))?;
    let report = oracle_sweep(n_max, m_max, k1_max).map_err(|e| usage(e.to_string()))?;
    let text = match a.format {
        Format::Json => to_json(&report),
        _ => {
            let mut s = String::new();
            for c in &report.cases {
                let _ = writeln!(
                    s,
                    "{} k={:<3} dofs {:>8} dim {:>8} {}",
                    c.params,
                    c.k,
                    c.total,
                    c.dim_pk,
                    if c.passed() { "pass" } else { "FAIL" }
                );
            }
            let passed = report.cases.iter().filter(|c| c.passed()).count();
            let _ = writeln!(s, "{passed}/{} cases pass", report.cases.len());
            s
        }
    };
    let first = report.failures().next().cloned();
    match first {
        None => Ok(text),
        Some(first) => Err((Failure::Check(first), Some(text))),
    }
}
