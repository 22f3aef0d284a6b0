use gluing_orbit::classify::{classify, CheckStatus, ClassifyConfig};
use gluing_orbit::systems::zoo;

#[test]
fn no_cross_check_fails_on_the_zoo() {
    let systems = zoo::sfts().into_iter().chain(zoo::grids()).chain([zoo::thue_morse(256)]);
    for sys in systems {
        let t = std::time::Instant::now();
        let r = classify(&sys, &ClassifyConfig::default());
        eprintln!("{} ({:?})\n{}", sys.label, t.elapsed(), r.table());
        assert!(r.failures().is_empty(), "{}\n{}", sys.label, r.table());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"checks\""));
    }
}

#[test]
fn gluing_non_minimal_shifts_pass_the_dichotomy() {
    for sys in zoo::sfts() {
        let r = classify(&sys, &ClassifyConfig::default());
        if r.gluing.is_yes() && r.minimal.is_no() {
            let d = r.checks.iter().find(|c| c.id == "dichotomy").unwrap();
            assert_eq!(d.status, CheckStatus::Pass, "{}\n{}", sys.label, r.table());
            let n = r.checks.iter().find(|c| c.id == "nonrecurrent_point").unwrap();
            assert_eq!(n.status, CheckStatus::Pass, "{}", sys.label);
        }
    }
}
