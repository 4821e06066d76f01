use num_complex::Complex64;
use pgl3_gluing::analysis::Tolerances;
use pgl3_gluing::census::{catalog, verify_catalog, verify_entries, EntryPoint, VerifyOptions};

#[test]
fn full_catalog_passes() {
    let opts = VerifyOptions {
        jobs: 4,
        ..VerifyOptions::default()
    };
    let report = verify_catalog(&opts).unwrap();
    for e in &report.entries {
        for c in e.checks.iter().filter(|c| !c.pass) {
            eprintln!("{} {}: {}", e.id, c.name, c.detail);
        }
    }
    assert!(report.all_pass);
    assert_eq!(report.warnings().count(), 0);
    let rigid = report.entries.iter().filter(|e| e.samples == 1).count();
    let family_samples: usize = report.entries.iter().filter(|e| e.samples > 1).map(|e| e.samples).sum();
    assert_eq!(rigid, 22);
    assert_eq!(family_samples, 100);
}

#[test]
fn job_count_does_not_change_the_report() {
    let entries: Vec<_> = catalog().unwrap().into_iter().take(8).collect();
    let one = verify_entries(&entries, &VerifyOptions::default()).unwrap();
    let many = verify_entries(&entries, &VerifyOptions { jobs: 3, ..VerifyOptions::default() }).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
}

#[test]
fn tampered_point_fails_residual() {
    let mut entries: Vec<_> = catalog().unwrap().into_iter().filter(|e| e.id == "geometric").collect();
    if let EntryPoint::Point(p) = &mut entries[0].point {
        p.values_mut()[2] += Complex64::new(1e-3, 0.0);
    }
    let report = verify_entries(&entries, &VerifyOptions::default()).unwrap();
    assert!(!report.all_pass);
    let residual = report.entries[0].checks.iter().find(|c| c.name == "residual").unwrap();
    assert!(!residual.pass);
}

#[test]
fn loose_rank_tolerance_is_flagged() {
    let entries: Vec<_> = catalog()
        .unwrap()
        .into_iter()
        .filter(|e| e.id.starts_with("P-root"))
        .take(4)
        .collect();
    let opts = VerifyOptions {
        tol: Tolerances {
            rank: 1e-2,
            ..Tolerances::default()
        },
        ..VerifyOptions::default()
    };
    let report = verify_entries(&entries, &opts).unwrap();
    assert!(report.warnings().count() > 0);
    assert!(report.warnings().all(|w| w.contains("indeterminate")));
}

#[test]
fn degree_eight_roots_are_simple_and_conjugate_closed() {
    let entries: Vec<_> = catalog().unwrap().into_iter().filter(|e| e.root.is_some()).collect();
    assert_eq!(entries.len(), 16);
    for e in &entries {
        assert!(e.root.as_ref().unwrap().residual() <= 1e-12);
    }
    let report = verify_entries(&entries, &VerifyOptions::default()).unwrap();
    assert!(report.catalog_checks.iter().all(|c| c.pass));
    assert_eq!(report.catalog_checks.len(), 3);
}
