use std::path::PathBuf;

use rdalloc::oracle::{brute_force, rd_points, DEFAULT_ENUM_CAP};
use rdalloc::{gen_synthetic, solve_constrained, Instance, InstanceFile, Profile, TableLayout};
use serde_json::{json, Value};

fn golden(name: &str, actual: &Value) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(actual).unwrap() + "\n").unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let expected: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(actual, &expected, "{name} differs; rerun with UPDATE_GOLDEN=1 after review");
}

#[test]
fn perturbed_synthetic_instance_is_stable() {
    let inst: Instance = gen_synthetic(5, 3, 7, Profile::Perturbed).unwrap();
    let file = InstanceFile::from_instance(&inst, TableLayout::Records).unwrap();
    golden("synthetic_5_3_7.json", &serde_json::to_value(&file).unwrap());
}

#[test]
fn perturbed_synthetic_optimum_has_one_rate() {
    let inst: Instance = gen_synthetic(5, 3, 7, Profile::Perturbed).unwrap();
    let points = rd_points(&inst, DEFAULT_ENUM_CAP).unwrap();
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    let budget = ((lo + hi) / 2.0).round();

    let best = brute_force(&inst, budget).unwrap();
    let ties = points
        .iter()
        .filter(|&&(r, d)| r <= budget && d == best.distortion)
        .count();
    assert_eq!(ties, 1, "several rates reach the optimum");
    assert_eq!(solve_constrained(&inst, budget, 1.0).unwrap().distortion, best.distortion);

    golden(
        "synthetic_5_3_7_optimum.json",
        &json!({ "budget": budget, "solution": best }),
    );
}
