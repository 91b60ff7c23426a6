use polydef::energetics::{
    four_decimals, parse_ledger, relative_formation_energies, render_table, stability_ranking, write_ledger,
    EnergeticsError,
};
use polydef::fixtures;
use proptest::prelude::*;

fn names(ranking: &[polydef::energetics::RankedConfig]) -> Vec<String> {
    ranking.iter().map(|r| r.name.clone()).collect()
}

#[test]
fn table_fixture_ranks_er_h_first() {
    let ledger = parse_ledger(fixtures::TABLE_LEDGER).unwrap();
    assert_eq!(ledger.reference, "Er_k");
    let ranking = stability_ranking(&ledger);
    assert_eq!(names(&ranking), ["Er_h", "Er_hV", "Er_kV", "Er_k"]);
    assert_eq!(four_decimals(ledger.results["Er_h"]), "-1.4815");
    assert_eq!(four_decimals(ledger.results["Er_k"]), "0.0000");
    assert_eq!(four_decimals(ranking[2].gap_to_previous.unwrap()), "0.0002");
    let table = render_table(&ledger);
    assert!(table.lines().next().unwrap().starts_with("Configuration"));
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn explicit_reference_and_errors() {
    let entries = [("a", -1.0), ("b", -2.0)];
    let ledger = relative_formation_energies(-3.0, &entries, Some("a")).unwrap();
    assert_eq!(ledger.results["a"], 0.0);
    assert_eq!(ledger.results["b"], 1.0);
    assert!(matches!(
        relative_formation_energies(-3.0, &entries, Some("z")),
        Err(EnergeticsError::UnknownReference(_))
    ));
    assert!(matches!(
        relative_formation_energies::<&str>(-3.0, &[], None),
        Err(EnergeticsError::Empty)
    ));
    assert!(matches!(
        relative_formation_energies(-3.0, &[("a", -1.0), ("a", -2.0)], None),
        Err(EnergeticsError::Duplicate(n)) if n == "a"
    ));
    assert!(matches!(
        relative_formation_energies(-3.0, &[("a", f64::NAN)], None),
        Err(EnergeticsError::NonFinite(_))
    ));
    let dup = "{\"pristine_E_T\": -8.0, \"entries\": {\"a\": -1.0, \"a\": -2.0}}";
    assert!(matches!(parse_ledger(dup), Err(EnergeticsError::Parse { .. })));
}

#[test]
fn ties_are_grouped_by_name() {
    let ledger = relative_formation_energies(-5.0, &[("z", -1.0), ("m", -1.0), ("a", -2.0)], None).unwrap();
    let ranking = stability_ranking(&ledger);
    assert_eq!(names(&ranking), ["m", "z", "a"]);
    assert!(ranking[0].tied && ranking[1].tied && !ranking[2].tied);
    assert_eq!(ranking[1].gap_to_previous, Some(0.0));
}

fn entries() -> impl Strategy<Value = Vec<(String, f64)>> {
    proptest::collection::btree_map("[A-Za-z][A-Za-z0-9_]{0,8}", -20.0f64..0.0, 1..8)
        .prop_map(|m| m.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn common_offset_changes_nothing(e_t in -20.0f64..0.0, list in entries(), offset in -100.0f64..100.0) {
        let base = relative_formation_energies(e_t, &list, None).unwrap();
        let moved: Vec<(String, f64)> = list.iter().map(|(n, e)| (n.clone(), e + offset)).collect();
        let shifted = relative_formation_energies(e_t + offset, &moved, None).unwrap();
        prop_assert_eq!(&shifted.reference, &base.reference);
        for (name, e) in &base.results {
            prop_assert!((shifted.results[name] - e).abs() < 1e-9);
        }
        // ties are decided on exact values, so compare orderings only when none are close
        let r = stability_ranking(&base);
        let clear = r.windows(2).all(|w| (w[1].relative_energy - w[0].relative_energy).abs() > 1e-9);
        if clear {
            prop_assert_eq!(names(&r), names(&stability_ranking(&shifted)));
        }
    }

    #[test]
    fn differences_follow_defect_energies(e_t in -20.0f64..0.0, list in entries()) {
        let ledger = relative_formation_energies(e_t, &list, None).unwrap();
        for (x, ex) in &list {
            for (y, ey) in &list {
                let lhs = ledger.results[x] - ledger.results[y];
                prop_assert!((lhs - (ey - ex)).abs() < 1e-12, "{} {}: {} vs {}", x, y, lhs, ey - ex);
            }
        }
        prop_assert_eq!(ledger.results[&ledger.reference], 0.0);
        prop_assert!(ledger.results.values().all(|e| *e <= 0.0));
    }

    #[test]
    fn ledger_round_trip(e_t in -20.0f64..0.0, list in entries(), pick in any::<prop::sample::Index>()) {
        let reference = list[pick.index(list.len())].0.clone();
        let ledger = relative_formation_energies(e_t, &list, Some(&reference)).unwrap();
        let text = write_ledger(&ledger);
        let back = parse_ledger(&text).unwrap();
        prop_assert_eq!(write_ledger(&back), text);
        prop_assert_eq!(back.reference, reference);
        prop_assert_eq!(back.entries.keys().collect::<Vec<_>>(), ledger.entries.keys().collect::<Vec<_>>());
    }
}
