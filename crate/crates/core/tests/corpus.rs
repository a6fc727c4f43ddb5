use laxgeom::corpus::{self, Options};

fn run(name: &str) {
    let entry = corpus::load(name).unwrap();
    let report = corpus::verify(&entry, &Options::default());
    for c in &report.checks {
        println!("{name} {} expected={} actual={} {:?}", c.key, c.expected, c.actual, c.elapsed);
    }
    assert!(!report.checks.is_empty());
    assert!(report.passed(), "{name}: {:?}", report.failures());
}

#[test]
fn dkp() {
    run("dkp");
}

#[test]
fn dkp_broken() {
    run("dkp-broken");
}

#[test]
fn flat_counterexample() {
    run("flat-counterexample");
}

#[test]
fn manakov_santini() {
    run("manakov-santini");
}

#[test]
fn master_ew() {
    run("master-ew");
}

#[test]
fn second_heavenly() {
    run("second-heavenly");
}

#[test]
fn every_entry_round_trips() {
    for name in corpus::NAMES {
        let spec = corpus::load(name).unwrap().spec;
        let printed = laxgeom::dsl::print(&spec);
        let again = laxgeom::dsl::parse(&printed).unwrap();
        assert_eq!(laxgeom::dsl::print(&again), printed, "{name}");
    }
}
