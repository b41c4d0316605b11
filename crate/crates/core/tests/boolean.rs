use locallearn::boolean::*;

fn reproduction_config() -> LearnConfig {
    LearnConfig {
        restarts: 16384,
        shallow_restarts: 4096,
        ..LearnConfig::default()
    }
}

fn counts(n: usize, monotone: bool, cfg: &LearnConfig) -> Vec<(usize, usize, usize)> {
    census(n, monotone, &census_rules(), cfg, 2024)
        .unwrap()
        .rows
        .iter()
        .map(|r| {
            assert!(r.shallow_count <= r.deep_count && r.deep_count <= r.total);
            (r.shallow_count, r.deep_count, r.total)
        })
        .collect()
}

#[test]
fn two_input_census() {
    let cfg = LearnConfig::default();
    assert_eq!(counts(2, false, &cfg), vec![(14, 16, 16); 3]);
    let detail = census(2, false, &census_rules(), &cfg, 2024).unwrap().details;
    let missed: Vec<u64> = detail
        .iter()
        .filter(|d| d.rule_name == "simple_hebb" && !d.shallow.learnt)
        .map(|d| d.function.truth_table)
        .collect();
    // XOR and XNOR.
    assert_eq!(missed, vec![6, 9]);
}

#[test]
fn monotone_census() {
    let cfg = reproduction_config();
    assert_eq!(counts(2, true, &cfg), vec![(6, 6, 6); 3]);
    assert_eq!(counts(3, true, &cfg), vec![(20, 20, 20); 3]);
    assert_eq!(counts(4, true, &cfg), vec![(150, 168, 168); 3]);
}

#[test]
fn three_input_census() {
    assert_eq!(counts(3, false, &reproduction_config()), vec![(104, 256, 256); 3]);
}

#[test]
fn shallow_never_learns_non_separable() {
    let cfg = LearnConfig::default();
    for f in enumerate_functions(3, false).unwrap() {
        if linearly_separable(&f) {
            continue;
        }
        for rule in census_rules() {
            assert!(!learnable(&f, &rule, Depth::Shallow, &cfg, 9).unwrap().learnt);
        }
    }
}

#[test]
fn counts_grow_with_restarts() {
    let mut prev = (0, 0);
    for restarts in [1, 4, 16, 64, 256] {
        let cfg = LearnConfig {
            restarts,
            shallow_restarts: restarts,
            ..LearnConfig::default()
        };
        let row = &census(3, false, &[locallearn::rules::oja()], &cfg, 7).unwrap().rows[0];
        assert!(row.shallow_count >= prev.0 && row.deep_count >= prev.1);
        prev = (row.shallow_count, row.deep_count);
    }
}

#[test]
fn census_csv_reports_budgets() {
    let cfg = LearnConfig::default();
    let csv = census(2, true, &census_rules(), &cfg, 1).unwrap().to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "fan_in,rule_name,shallow_count,deep_count,total,restarts,shallow_restarts,seed");
    assert_eq!(lines.next().unwrap(), "2,simple_hebb,6,6,6,64,64,1");
}
