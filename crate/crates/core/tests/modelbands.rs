use std::collections::BTreeMap;

use nalgebra::linalg::Schur;
use polydef::bz::{build_kpath, hex_high_symmetry_points, HEX_PATH};
use polydef::crystal::{polytype, wrap_frac, CrystalStructure, LatticeCell};
use polydef::defects::{apply_defect, expand_supercell, DefectConfiguration};
use polydef::fixtures;
use polydef::modelbands::{
    bloch_hamiltonian, synthesize, tb_solve, tb_solve_points, Hopping, ModelError, SyntheticBandSpec, TbModel,
};
use polydef::spectra::{find_band_edges, write_eigenvalues};
use proptest::prelude::*;

const ORACLE: &str = include_str!("oracles/tb_sk_expected.txt");

fn sic() -> CrystalStructure {
    polytype(&"ABCB".parse().unwrap(), 3.09, 10.08).unwrap()
}

fn model() -> TbModel {
    TbModel::from_json(fixtures::SIC_SP3_TB).unwrap()
}

fn oracle_values(key: &str) -> Vec<f64> {
    let line = ORACLE
        .lines()
        .find(|l| l.split_whitespace().next() == Some(key))
        .unwrap();
    line.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect()
}

fn oracle_field(key: &str) -> f64 {
    let toks: Vec<&str> = ORACLE.lines().flat_map(str::split_whitespace).collect();
    let i = toks.iter().position(|t| *t == key).unwrap();
    toks[i + 1].parse().unwrap()
}

#[test]
fn tb_matches_numpy_oracle_at_g_and_m() {
    let points: Vec<[f64; 3]> = ["G", "M"]
        .iter()
        .map(|l| hex_high_symmetry_points().iter().find(|(n, _)| n == l).unwrap().1)
        .collect();
    let bands = tb_solve_points(&sic(), &model(), &points).unwrap();
    for (label, row) in ["G", "M"].iter().zip(&bands) {
        let want = oracle_values(label);
        assert_eq!(row.len(), want.len());
        for (got, want) in row.iter().zip(&want) {
            assert!((got - want).abs() < 1e-9, "{label}: {got} vs {want}");
        }
    }
}

#[test]
fn tb_path_is_continuous_and_gapped() {
    let s = sic();
    let path = build_kpath(&s.cell, &HEX_PATH, 113).unwrap();
    let set = tb_solve(&s, &model(), &path).unwrap();
    assert_eq!(set.nbands(), 4 * s.sites.len());
    let mut jump: f64 = 0.0;
    for w in set.bands.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            jump = jump.max((a - b).abs());
        }
    }
    assert!(jump < 0.5, "max jump {jump}");
    assert!((jump - oracle_field("max_jump")).abs() < 1e-9);
    let e = find_band_edges(&set).unwrap();
    assert!((e.vbm - oracle_field("vbm")).abs() < 1e-9);
    assert!((e.cbm - oracle_field("cbm")).abs() < 1e-9);
}

#[test]
fn hamiltonian_is_hermitian_with_real_spectrum() {
    let s = sic();
    let m = model();
    let path = build_kpath(&s.cell, &HEX_PATH, 113).unwrap();
    for (i, p) in path.points.iter().enumerate() {
        let h = bloch_hamiltonian(&s, &m, p.frac).unwrap();
        let dev = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "k {i}: |H - H†| = {dev}");
        let eig = Schur::new(h).eigenvalues().unwrap();
        let worst = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "k {i}: imaginary part {worst}");
    }
}

#[test]
fn zero_hopping_returns_onsite_energies() {
    let s = sic();
    let mut m = model();
    for h in m.hoppings.values_mut() {
        *h = Hopping {
            ss_sigma: 0.0,
            sp_sigma: 0.0,
            ps_sigma: None,
            pp_sigma: 0.0,
            pp_pi: 0.0,
        };
    }
    let mut want: Vec<f64> = s
        .sites
        .iter()
        .flat_map(|site| {
            let o = &m.onsite[&site.species];
            [o.s, o.px, o.py, o.pz]
        })
        .collect();
    want.sort_by(f64::total_cmp);
    for row in tb_solve_points(&s, &m, &[[0.0; 3], [0.3, 0.1, 0.25]]).unwrap() {
        for (a, b) in row.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn defect_cells_need_every_species() {
    let sc = expand_supercell(&sic(), 2, 2, 1).unwrap();
    let d = apply_defect(&sc, DefectConfiguration::ErHV).unwrap();
    let bands = tb_solve_points(&d.structure, &model(), &[[0.0; 3]]).unwrap();
    assert_eq!(bands[0].len(), 4 * d.structure.sites.len());

    let mut m = model();
    m.onsite.remove("Er");
    assert!(matches!(tb_solve_points(&d.structure, &m, &[[0.0; 3]]), Err(ModelError::MissingSpecies(s)) if s == "Er"));
    let mut m = model();
    m.hoppings.remove("Er-C");
    assert!(matches!(
        tb_solve_points(&d.structure, &m, &[[0.0; 3]]),
        Err(ModelError::MissingPair(_))
    ));
    let mut m = model();
    m.valence_electrons = BTreeMap::new();
    let path = build_kpath(&d.structure.cell, &["G", "M"], 3).unwrap();
    assert!(matches!(
        tb_solve(&d.structure, &m, &path),
        Err(ModelError::MissingValence(_))
    ));
}

#[test]
fn model_round_trips() {
    let m = model();
    assert_eq!(TbModel::from_json(&m.to_json()).unwrap(), m);
    assert!(matches!(
        TbModel::from_json(&m.to_json().replace("\"cutoff\": 2.2", "\"cutoff\": -1.0")),
        Err(ModelError::InvalidModel(_))
    ));
}

#[test]
fn bundled_spectra_regenerate_exactly() {
    let path = build_kpath(&LatticeCell::hexagonal(3.09, 10.08).unwrap(), &HEX_PATH, 113).unwrap();
    for (name, spec, eig, gap) in fixtures::SPECTRA {
        let spec = SyntheticBandSpec::from_json(spec).unwrap();
        let set = synthesize(&spec, &path).unwrap();
        assert_eq!(write_eigenvalues(&set), eig, "{name}: bundled file is stale");
        assert!((find_band_edges(&set).unwrap().gap - gap).abs() < 1e-9, "{name}");
    }
}

#[test]
fn synthetic_spec_validation() {
    let spec = SyntheticBandSpec::from_json(fixtures::ER_HV_SPEC).unwrap();
    let mut bad = spec.clone();
    bad.electrons = 10_000;
    assert!(matches!(bad.validate(), Err(ModelError::TooManyElectrons { .. })));
    let mut bad = spec.clone();
    bad.bands[0].mode = 9;
    assert!(matches!(bad.validate(), Err(ModelError::InvalidSpec(_))));
    assert!(matches!(
        SyntheticBandSpec::from_json("{\"bands\": [], \"extra\": 1}"),
        Err(ModelError::Parse(_))
    ));
    assert_eq!(SyntheticBandSpec::from_json(&spec.to_json()).unwrap(), spec);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rigid_translation_leaves_bands_unchanged(t in prop::array::uniform3(-1.0f64..1.0), k in prop::array::uniform3(-0.5f64..0.5)) {
        let s = sic();
        let mut moved = s.clone();
        for site in &mut moved.sites {
            site.frac = std::array::from_fn(|d| wrap_frac(site.frac[d] + t[d]));
        }
        let m = model();
        let a = tb_solve_points(&s, &m, &[k]).unwrap();
        let b = tb_solve_points(&moved, &m, &[k]).unwrap();
        for (x, y) in a[0].iter().zip(&b[0]) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }
}
