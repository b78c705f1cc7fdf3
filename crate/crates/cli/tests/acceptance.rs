//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Tolerances and runtime limits are pinned here rather than read back from
//! the suites, so loosening a suite cannot loosen the gate.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use volkov_cli::config::VerifyConfig;
use volkov_cli::suites::{run, SuiteEntry, VerifyReport};

const SEED: u64 = 20_240_601;

struct Criterion {
    id: u32,
    title: &'static str,
    groups: &'static [&'static str],
    /// `(entry name, pinned tolerance)`; the entry passes iff `achieved <= tol`.
    pinned: &'static [(&'static str, f64)],
    time_limit: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "Sonin discontinuous integral",
        groups: &["sonin"],
        pinned: &[("sonin.inside", 1e-6), ("sonin.outside", 1e-6)],
        time_limit: Some(Duration::from_secs(30)),
    },
    Criterion {
        id: 2,
        title: "timelike 2-D solution vs Hankel integral",
        groups: &["psi_plus"],
        pinned: &[("psi_plus.closed_form", 1e-5)],
        time_limit: None,
    },
    Criterion {
        id: 3,
        title: "spacelike 2-D solution vs MacDonald integral",
        groups: &["psi_minus"],
        pinned: &[("psi_minus.closed_form", 1e-6), ("psi_minus.massless", 1e-4)],
        time_limit: None,
    },
    Criterion {
        id: 4,
        title: "MacDonald superposition",
        groups: &["macdonald"],
        pinned: &[("macdonald.superposition", 1e-8)],
        time_limit: None,
    },
    Criterion {
        id: 5,
        title: "order-raising identity",
        groups: &["order_raise"],
        pinned: &[("order_raise.residual", 1e-6), ("order_raise.ratio", 0.5)],
        time_limit: None,
    },
    Criterion {
        id: 6,
        title: "Riemann function property",
        groups: &["riemann"],
        pinned: &[
            ("riemann.constant", 1e-5),
            ("riemann.linear", 1e-5),
            ("riemann.circular", 1e-5),
            ("riemann.ratio", 0.5),
        ],
        time_limit: None,
    },
    Criterion {
        id: 7,
        title: "characteristic-grid solver",
        groups: &["goursat"],
        pinned: &[
            ("goursat.constant", 0.2),
            ("goursat.linear", 0.2),
            ("goursat.circular", 0.2),
            ("goursat.zero", 0.0),
        ],
        time_limit: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 8,
        title: "effective mass",
        groups: &["effective_mass"],
        pinned: &[
            ("effective_mass.variance", 1e-10),
            ("effective_mass.circular", 1e-10),
            ("effective_mass.uncharged", 0.0),
        ],
        time_limit: None,
    },
    Criterion {
        id: 9,
        title: "free reduction of the Volkov solution",
        groups: &["free_reduction"],
        pinned: &[("free_reduction.bitwise", 0.0), ("free_reduction.phase", 0.0)],
        time_limit: None,
    },
    Criterion {
        id: 10,
        title: "proper-time integral vs free structures",
        groups: &["proper_time"],
        pinned: &[("proper_time.structures", 1e-3)],
        time_limit: Some(Duration::from_secs(120)),
    },
];

fn find<'a>(report: &'a VerifyReport, name: &str) -> Option<&'a SuiteEntry> {
    report.suites.iter().find(|s| s.name == name)
}

fn line(pass: bool, id: u32, title: &str, detail: &str) {
    println!("[{}] criterion {id:>2}: {title}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn main() -> ExitCode {
    let mut failures = 0;
    for c in CRITERIA {
        let cfg = VerifyConfig {
            suites: c.groups.iter().map(|s| s.to_string()).collect(),
            required_tol: None,
        };
        let start = Instant::now();
        let report = run(&cfg, SEED);
        let elapsed = start.elapsed();
        let report = match report {
            Ok(r) => r,
            Err(e) => {
                line(false, c.id, c.title, &format!("error: {e}"));
                failures += 1;
                continue;
            }
        };
        let mut pass = true;
        let mut parts = Vec::new();
        for &(name, tol) in c.pinned {
            match find(&report, name) {
                Some(entry) => {
                    let ok = entry.achieved.is_finite() && entry.achieved <= tol;
                    pass &= ok;
                    parts.push(format!("{name} {:.3e} <= {tol:.1e}", entry.achieved));
                    if let Some(note) = &entry.note {
                        parts.push(format!("({note})"));
                    }
                }
                None => {
                    pass = false;
                    parts.push(format!("{name} missing"));
                }
            }
        }
        if let Some(limit) = c.time_limit {
            let ok = elapsed <= limit;
            pass &= ok;
            parts.push(format!("{:.2} s <= {} s", elapsed.as_secs_f64(), limit.as_secs()));
        }
        failures += usize::from(!pass);
        line(pass, c.id, c.title, &parts.join("; "));
    }

    // criterion 11: two full runs with the same seed serialize identically
    let cfg = VerifyConfig::default();
    let first = run(&cfg, SEED).map(|r| serde_json::to_string(&r).expect("serializable"));
    let second = run(&cfg, SEED).map(|r| serde_json::to_string(&r).expect("serializable"));
    let (pass, detail) = match (first, second) {
        (Ok(a), Ok(b)) => (a == b, format!("{} bytes, identical = {}", a.len(), a == b)),
        (Err(e), _) | (_, Err(e)) => (false, format!("error: {e}")),
    };
    failures += usize::from(!pass);
    line(pass, 11, "deterministic verification report", &detail);

    println!("acceptance: {} of {} criteria passed", CRITERIA.len() + 1 - failures, CRITERIA.len() + 1);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
