//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use strings_coins::gamesat::Role;
use strings_coins::verify::{
    campaign_strategies, check_cycle_union, check_lava_chains, check_loony, check_oracle, four_variable_formula,
    majority_formula, pair_formula, parity_audit, skip_dominance_sweep, structure_campaign, CheckReport,
    StrategyCampaign,
};

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn exact(report: &CheckReport, expected: usize) -> Outcome {
    Outcome {
        passed: report.passed == expected && report.failed == 0 && report.skipped == 0,
        detail: format!("{} (dual {}) {:?}", report.line(), report.dual_checked, report.counterexamples),
    }
}

fn timed(limit: Duration, elapsed: Duration, mut o: Outcome) -> Outcome {
    o.passed &= elapsed < limit;
    o.detail = format!("{} in {:.1}s (limit {}s)", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    o
}

fn oracle() -> Outcome {
    let t = Instant::now();
    let r = check_oracle(SEED, 200);
    timed(Duration::from_secs(60), t.elapsed(), exact(&r, 600))
}

fn cycle_union() -> Outcome {
    exact(&check_cycle_union(SEED, 100), 100)
}

fn loony() -> Outcome {
    exact(&check_loony(SEED, 100), 100)
}

fn lava_chains() -> Outcome {
    let t = Instant::now();
    let r = check_lava_chains(SEED, 100);
    timed(Duration::from_secs(300), t.elapsed(), exact(&r, 100))
}

fn structure() -> Outcome {
    let r = structure_campaign(SEED, 50);
    // Four-variable formula plus 50 random ones, each at N = 2, 3 and both first movers.
    exact(&r, 51 * 4)
}

fn parity() -> Outcome {
    let cases = [
        (pair_formula(), Role::Trudy, 2),
        (pair_formula(), Role::Fallon, 2),
        (majority_formula(), Role::Trudy, 2),
        (majority_formula(), Role::Fallon, 2),
        (four_variable_formula(), Role::Trudy, 2),
        (four_variable_formula(), Role::Fallon, 2),
    ];
    match parity_audit(&cases, 20) {
        Ok(a) => Outcome {
            passed: a.playouts >= 50 && a.fallon_terminals > 0 && a.violations == 0 && a.errors == 0,
            detail: format!(
                "{} playouts, {} Fallon terminals, {} Trudy terminals, {} violations, {} errors {:?}",
                a.playouts, a.fallon_terminals, a.trudy_terminals, a.violations, a.errors, a.counterexamples
            ),
        },
        Err(e) => Outcome {
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn skip_dominance() -> Outcome {
    let r = skip_dominance_sweep(3, 3);
    Outcome {
        passed: r.ok() && r.skipped == 0,
        detail: format!("{} {:?} {:?}", r.line(), r.notes, r.counterexamples),
    }
}

fn describe(c: &StrategyCampaign) -> String {
    let mut s = format!(
        "  {} first={} predicted={:?} minimal N={:?}\n",
        c.formula, c.first, c.predicted, c.minimal_n
    );
    for w in &c.widths {
        for m in &w.matchups {
            s += &format!(
                "    N={} strings={} vs {}: wins {}/{}, shape {}, illegal {}, parity {}, {:?}{}\n",
                w.width_base,
                w.strings,
                m.opponent,
                m.script_wins,
                m.playouts,
                m.shape_matches,
                m.violations,
                m.parity_violations,
                m.terminals,
                m.counterexamples.first().map(|c| format!(" e.g. {c}")).unwrap_or_default()
            );
        }
    }
    s
}

fn strategies() -> Outcome {
    let runs = [
        (pair_formula(), Role::Trudy, vec![2, 3]),
        (pair_formula(), Role::Fallon, vec![2, 3]),
        (majority_formula(), Role::Trudy, vec![2, 3, 4, 5]),
    ];
    let mut passed = true;
    let mut detail = String::from("\n");
    for (f, first, widths) in runs {
        match campaign_strategies(&f, first, &widths, 200) {
            Ok(c) => {
                passed &= c.ok() && c.seeds >= 200;
                detail += &describe(&c);
            }
            Err(e) => {
                passed = false;
                detail += &format!("  {f}: error {e}\n");
            }
        }
    }
    Outcome { passed, detail }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 solver oracle equivalence", oracle),
        ("2 nimstring to strings-and-coins", cycle_union),
        ("3 loony positions", loony),
        ("4 lava to nimstring", lava_chains),
        ("5 compiler structure", structure),
        ("6 parity fixer", parity),
        ("7 skip dominance", skip_dominance),
        ("8 strategy campaigns", strategies),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        failures += !o.passed as usize;
        println!(
            "{} criterion {name} [{:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
