use wpspine::Exec;
use wpspine_cli::criteria::{format_line, run_all, Tolerances};

#[test]
fn all_criteria_at_pinned_tolerances() {
    let ids: Vec<usize> = (1..=11).collect();
    let report = run_all(&ids, &Tolerances::default(), Exec::default(), |o| println!("{}", format_line(o)));
    let failed: Vec<String> = report.criteria.iter().filter(|o| !o.passed).map(|o| format!("{} ({})", o.id, o.name)).collect();
    println!("{} of {} criteria passed", ids.len() - failed.len(), ids.len());
    assert!(failed.is_empty(), "failed: {}", failed.join(", "));
}
