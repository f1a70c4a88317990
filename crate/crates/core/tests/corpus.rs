use std::fs;
use std::path::{Path, PathBuf};

use deligne::delignedata::{DataError, DataViolation, ManifoldData};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/manifolds")
}

fn load(rel: &str) -> Result<ManifoldData, DataError> {
    ManifoldData::from_json_str(&fs::read_to_string(corpus().join(rel)).unwrap())
}

const VALID: [&str; 7] = [
    "s1.json",
    "s2xs3.json",
    "rp5.json",
    "rp5xS.json",
    "battery/b2_z3xz3.json",
    "battery/b0_z6.json",
    "battery/b3_z2_z4xz4.json",
];

/// Count from the definition: `(2l)^b` lambda classes times the number of
/// regular torsion elements found by scanning `T`.
fn oracle_count(m: &ManifoldData, level: u64) -> u128 {
    (2 * level as u128).pow(m.b as u32) * m.linking.count_r_by_scan(level)
}

#[test]
fn corpus_counts_match_the_definition() {
    for rel in VALID {
        let m = load(rel).unwrap();
        assert!(m.validate().is_empty(), "{rel}");
        for level in 1..=3 {
            let c = m.classify(level).unwrap();
            assert_eq!(c.count, oracle_count(&m, level), "{rel} at level {level}");
            assert_eq!(c.labels.len() as u128, c.count);
        }
    }
}

#[test]
fn known_totals() {
    let totals = [2, 2, 2, 4, 4, 4, 64];
    for (rel, want) in VALID.iter().zip(totals) {
        assert_eq!(load(rel).unwrap().classify(1).unwrap().count, want, "{rel}");
    }
}

#[test]
fn labels_are_pairwise_inequivalent() {
    for rel in ["rp5xS.json", "battery/b2_z3xz3.json"] {
        let m = load(rel).unwrap();
        let c = m.classify(1).unwrap();
        for (i, a) in c.labels.iter().enumerate() {
            for b in &c.labels[i + 1..] {
                assert!(!m.labels_equivalent(1, a, b).unwrap(), "{rel}: {a} ~ {b}");
            }
        }
    }
}

#[test]
fn corpus_round_trips_through_json() {
    for rel in VALID {
        let m = load(rel).unwrap();
        assert_eq!(ManifoldData::from_json_str(&m.to_json()).unwrap(), m, "{rel}");
    }
}

#[test]
fn invalid_sigma_lists_every_violation() {
    let m = load("invalid/bad_sigma.json").unwrap();
    let v = m.validate();
    assert!(v.iter().any(|x| matches!(x, DataViolation::SigmaNotSkew { .. })));
    assert!(v.iter().any(|x| matches!(x, DataViolation::SigmaDiagonal { i: 0, .. })));
    assert!(m.checked().is_err());
}

#[test]
fn bad_rational_is_a_parse_error() {
    assert!(matches!(load("invalid/bad_rational.json"), Err(DataError::Parse(_))));
}
