use std::path::Path;

use epshape::scenario::{load_scenario, parse_scenario};
use epshape::sim::{simulate_loop, IntegratorConfig};
use epshape::Error;

const FIXTURES: [&str; 7] = [
    "uwv_uncontrolled",
    "uwv_steady_stable",
    "uwv_steady_unstable",
    "uwv_drift_stable",
    "htmb_shaping",
    "uwv_uncontrolled_at_steady",
    "nan_injection",
];

fn load(name: &str) -> epshape::scenario::Scenario {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    load_scenario(&p).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn fixtures_load_and_round_trip() {
    for name in FIXTURES {
        let s = load(name);
        let again = parse_scenario(&s.to_json()).unwrap();
        assert_eq!(again, s, "{name}");
        assert_eq!(again.digest(), s.digest());
    }
}

#[test]
fn only_the_violating_fixture_warns() {
    for name in FIXTURES {
        let warned = !load(name).warnings.is_empty();
        assert_eq!(warned, name == "uwv_steady_unstable", "{name}");
    }
}

#[test]
fn short_runs_conserve_energy_and_casimirs() {
    let cfg = IntegratorConfig::new(1e-3, 1.0).unwrap();
    for name in &FIXTURES[..5] {
        let s = load(name);
        let cl = s.closed_loop().unwrap();
        let traj = simulate_loop(&cl, &s.initial, &cfg).unwrap();
        for row in traj.conservation() {
            assert!(
                row.max_drift < 1e-10,
                "{name}: {} drifts {}",
                row.name,
                row.max_drift
            );
        }
    }
}

#[test]
fn nan_injection_reports_time() {
    let s = load("nan_injection");
    let cl = s.closed_loop().unwrap();
    let err = simulate_loop(&cl, &s.initial, &s.integrator).unwrap_err();
    assert!(matches!(err, Error::NonFiniteState { .. }), "{err:?}");
}
