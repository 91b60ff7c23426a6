use polydef::crystal::{polytype, structure_from_json, structure_to_json, CrystalStructure, SiteClass};
use polydef::defects::{
    apply_defect, doping_concentration, expand_supercell, first_shell_carbons, DefectConfiguration, DefectError,
    DefectedStructure, Supercell,
};

fn sic() -> CrystalStructure {
    polytype(&"ABCB".parse().unwrap(), 3.09, 10.08).unwrap()
}

#[test]
fn supercell_min_distance_is_invariant() {
    let base = sic();
    let d0 = base.min_distance();
    for n1 in 1..=4 {
        for n2 in 1..=4 {
            for n3 in 1..=4 {
                let sc = expand_supercell(&base, n1, n2, n3).unwrap();
                assert_eq!(sc.structure.sites.len(), 8 * n1 * n2 * n3);
                let d = sc.structure.min_distance();
                assert!((d - d0).abs() < 1e-9, "{n1}x{n2}x{n3}: {d} vs {d0}");
            }
        }
    }
}

#[test]
fn supercell_keeps_classes_and_parents() {
    let base = sic();
    let sc = expand_supercell(&base, 4, 4, 1).unwrap();
    assert_eq!(sc.structure.sites.len(), 128);
    for (site, &p) in sc.structure.sites.iter().zip(&sc.parent_index) {
        assert_eq!(site.species, base.sites[p].species);
        assert_eq!(site.site_class, base.sites[p].site_class);
    }
    assert!(matches!(
        expand_supercell(&base, 0, 1, 1),
        Err(DefectError::BadMultiplier(_))
    ));
}

#[test]
fn each_configuration() {
    let sc = expand_supercell(&sic(), 4, 4, 1).unwrap();
    for config in DefectConfiguration::ALL {
        let d = apply_defect(&sc, config).unwrap();
        let want_atoms = if config.has_vacancy() { 127 } else { 128 };
        assert_eq!(d.structure.sites.len(), want_atoms, "{config}");
        assert_eq!(d.structure.count_species("Er"), 1);
        assert_eq!(d.structure.count_species("Si"), 63);
        let er = &d.structure.sites[d.er_index()];
        assert_eq!(er.species, "Er");
        assert_eq!(er.site_class, config.site_class());
        assert_eq!(doping_concentration(&d).unwrap(), 1.0 / 128.0);
        assert_eq!(format!("{:.2}", 100.0 * doping_concentration(&d).unwrap()), "0.78");
        assert!(!d.log.is_empty());
        match d.removed_site {
            Some(r) => {
                assert!(config.has_vacancy());
                assert_eq!(sc.structure.sites[r].species, "C");
                let shell = first_shell_carbons(&sc.structure, d.substituted_site);
                assert_eq!(shell.len(), 4);
                assert!(
                    shell.contains(&r),
                    "{config}: removed C {r} not in first shell {shell:?}"
                );
                let bond = sc.structure.interatomic_distance(d.substituted_site, r).unwrap();
                assert!(bond < 1.05 * 1.89);
            }
            None => assert!(!config.has_vacancy()),
        }
    }
}

#[test]
fn er_hv_reference_geometry() {
    let sc = expand_supercell(&sic(), 4, 4, 1).unwrap();
    let d = apply_defect(&sc, DefectConfiguration::ErHV).unwrap();
    assert_eq!(d.substituted_site, 69);
    assert_eq!(d.removed_site, Some(85));
    let bond = sc.structure.interatomic_distance(69, 85).unwrap();
    assert!((bond - 1.89).abs() < 1e-9);
}

#[test]
fn class_absent_is_an_error() {
    let wurtzite = polytype(&"AB".parse().unwrap(), 3.09, 5.04).unwrap();
    let sc = expand_supercell(&wurtzite, 2, 2, 1).unwrap();
    match apply_defect(&sc, DefectConfiguration::ErK) {
        Err(DefectError::SiteNotFound { class, .. }) => assert_eq!(class, SiteClass::K),
        other => panic!("{other:?}"),
    }
}

#[test]
fn defect_document_round_trip() {
    let sc = expand_supercell(&sic(), 4, 4, 1).unwrap();
    let text = structure_to_json(&sc.to_document());
    let back = Supercell::from_document(&structure_from_json(&text).unwrap()).unwrap();
    assert_eq!(back.parent_index, sc.parent_index);
    assert_eq!(back.multipliers, [4, 4, 1]);

    let d = apply_defect(&sc, DefectConfiguration::ErKV).unwrap();
    let text = structure_to_json(&d.to_document());
    let doc = structure_from_json(&text).unwrap();
    let back = DefectedStructure::from_document(&doc).unwrap();
    assert_eq!(back.config, DefectConfiguration::ErKV);
    assert_eq!(back.removed_site, d.removed_site);
    assert_eq!(structure_to_json(&back.to_document()), text);
    assert!(matches!(
        Supercell::from_document(&doc),
        Err(DefectError::AlreadyDefected(_))
    ));
}

#[test]
fn kind_names() {
    for (text, want) in [
        ("ErH", DefectConfiguration::ErH),
        ("Er_kV", DefectConfiguration::ErKV),
        ("erhv", DefectConfiguration::ErHV),
    ] {
        assert_eq!(text.parse::<DefectConfiguration>().unwrap(), want);
    }
    assert!(matches!(
        "ErX".parse::<DefectConfiguration>(),
        Err(DefectError::UnknownKind(_))
    ));
}
