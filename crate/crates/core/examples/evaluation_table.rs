//! Reproduces a manual-versus-tool comparison table from condition means,
//! and derives effort measures from an instrumented session log.
use chrono::{Duration, TimeZone, Utc};
use dreams::metrics::{effort_from_log, Action, Comparison, Effort, Phase, SessionLog};

pub fn run() -> Result<(Comparison, Effort), dreams::Error> {
    let table = Comparison::from_means(
        "Manual",
        "DREAMS",
        &[
            ("Model creation time (min)", 51.0, 22.0),
            ("Revision time (min)", 24.5, 2.0),
            ("Edge crossings", 4.25, 1.0),
            ("Repositioning actions", 37.5, 0.0),
            ("Evidence retrieval time (min)", 5.0, 1.0),
        ],
    );

    let t0 = Utc.with_ymd_and_hms(2026, 3, 2, 9, 0, 0).unwrap();
    let at = |min: i64| t0 + Duration::minutes(min);
    let mut log = SessionLog::default();
    log.push(at(0), Action::PhaseStart { phase: Phase::Creation });
    log.push(at(3), Action::AddNode);
    log.push(at(5), Action::AddLink);
    log.push(at(9), Action::AutoLayout);
    log.push(at(22), Action::PhaseEnd { phase: Phase::Creation });
    log.push(at(23), Action::PhaseStart { phase: Phase::Retrieval });
    log.push(at(23), Action::Search { query: "protocol".into() });
    log.push(at(24), Action::PhaseEnd { phase: Phase::Retrieval });
    let effort = effort_from_log(&log)?;
    Ok((table, effort))
}

#[allow(dead_code)]
fn main() -> Result<(), dreams::Error> {
    let (table, effort) = run()?;
    print!("{table}");
    println!();
    println!(
        "session: creation {:.0} s, retrieval {:.0} s, repositioning actions {}",
        effort.creation_seconds.unwrap_or(0.0),
        effort.retrieval_seconds.unwrap_or(0.0),
        effort.repositioning_actions
    );
    Ok(())
}
