use aanse::fem2d::ConvectionForm;
use aanse::verify::{run_checks, VerifyLevel, VerifyOptions};

#[test]
fn quick_checks_pass() {
    let results = run_checks(&VerifyOptions::default());
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    assert!(results.iter().all(|r| r.passed));
}

#[test]
fn fault_injected_convection_is_caught() {
    let results = run_checks(&VerifyOptions {
        level: VerifyLevel::Quick,
        seed: 3,
        convection: ConvectionForm::FaultInjected,
    });
    let skew = results.iter().find(|r| r.name.contains("skew")).unwrap();
    assert!(!skew.passed, "{}", skew.detail);
}
