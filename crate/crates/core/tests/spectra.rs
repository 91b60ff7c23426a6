use polydef::bz::{build_kpath, KPath, HEX_PATH};
use polydef::crystal::LatticeCell;
use polydef::fixtures;
use polydef::modelbands::{synthesize, BandTerm, DefectLevel, SyntheticBandSpec};
use polydef::spectra::{
    audit_convergence, compute_dos, compute_dos_with, detect_flat_bands, ev_to_wavelength, find_band_edges,
    normalize_to_vbm, parse_eigenvalues, wavelength_to_ev, write_eigenvalues, DosParams, EigenvalueSet, KSample,
    Kernel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn path() -> KPath {
    build_kpath(&LatticeCell::hexagonal(3.09, 10.08).unwrap(), &HEX_PATH, 113).unwrap()
}

/// A random spectrum whose occupied manifold sits entirely below the empty
/// one, with the closed-form VBM and CBM. Modes 0..=3 all reach cos = ±1
/// on the default path (at Γ and at M or A).
fn random_spectrum(rng: &mut ChaCha8Rng) -> (SyntheticBandSpec, f64, f64) {
    let spin: u8 = rng.gen_range(1..=2);
    let n_occ_bands = rng.gen_range(1..=4);
    let n_occ_levels = rng.gen_range(0..=2);
    let n_empty_bands = rng.gen_range(1..=4);
    let n_empty_levels = rng.gen_range(0..=2);

    let mut bands = Vec::new();
    let mut levels = Vec::new();
    let mut vbm = f64::NEG_INFINITY;
    for _ in 0..n_occ_bands {
        let b = BandTerm {
            base: rng.gen_range(-9.0..-1.0),
            amplitude: rng.gen_range(0.0..1.0),
            mode: rng.gen_range(0..4),
        };
        vbm = vbm.max(b.base + b.amplitude);
        bands.push(b);
    }
    for _ in 0..n_occ_levels {
        let l = DefectLevel {
            energy: rng.gen_range(-1.0..0.0),
            ripple: rng.gen_range(0.0..0.05),
        };
        vbm = vbm.max(l.energy + l.ripple);
        levels.push(l);
    }
    let floor = vbm + rng.gen_range(0.05..3.0);
    let mut cbm = f64::INFINITY;
    for _ in 0..n_empty_bands {
        let amplitude: f64 = rng.gen_range(0.0..1.0);
        let b = BandTerm {
            base: floor + amplitude + rng.gen_range(0.0..4.0),
            amplitude,
            mode: rng.gen_range(0..4),
        };
        cbm = cbm.min(b.base - b.amplitude);
        bands.push(b);
    }
    for _ in 0..n_empty_levels {
        let ripple: f64 = rng.gen_range(0.0..0.05);
        let l = DefectLevel {
            energy: floor + ripple + rng.gen_range(0.0..1.0),
            ripple,
        };
        cbm = cbm.min(l.energy - l.ripple);
        levels.push(l);
    }
    let occupied = (n_occ_bands + n_occ_levels) as u32;
    let spec = SyntheticBandSpec {
        bands,
        defect_levels: levels,
        electrons: occupied * u32::from(spin),
        spin_degeneracy: spin,
    };
    (spec, vbm, cbm)
}

#[test]
fn edges_match_closed_form_on_1000_spectra() {
    let path = path();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for trial in 0..1000 {
        let (spec, vbm, cbm) = random_spectrum(&mut rng);
        let set = synthesize(&spec, &path).unwrap();
        let e = find_band_edges(&set).unwrap();
        assert!((e.vbm - vbm).abs() < 1e-12, "trial {trial}: vbm {} vs {vbm}", e.vbm);
        assert!((e.cbm - cbm).abs() < 1e-12, "trial {trial}: cbm {} vs {cbm}", e.cbm);
        assert!((e.gap - (cbm - vbm)).abs() < 1e-12);
    }
}

#[test]
fn fixture_gaps() {
    for (name, _, eig, gap) in fixtures::SPECTRA {
        let set = parse_eigenvalues(eig).unwrap();
        let e = find_band_edges(&set).unwrap();
        assert!((e.gap - gap).abs() < 1e-9, "{name}: {}", e.gap);
    }
}

#[test]
fn defect_spectra_have_in_gap_flat_bands() {
    let pristine = find_band_edges(&parse_eigenvalues(fixtures::PRISTINE_EIG).unwrap()).unwrap();
    let window = (pristine.vbm, pristine.cbm);
    let count = |eig: &str| {
        detect_flat_bands(&parse_eigenvalues(eig).unwrap(), window, 0.05)
            .unwrap()
            .len()
    };
    assert_eq!(count(fixtures::PRISTINE_EIG), 0);
    assert!(count(fixtures::ER_HV_EIG) > 0);
    assert!(count(fixtures::ER_KV_EIG) > 0);
}

#[test]
fn normalization_preserves_gap() {
    for (name, _, eig, _) in fixtures::SPECTRA {
        let set = parse_eigenvalues(eig).unwrap();
        let before = find_band_edges(&set).unwrap();
        let norm = normalize_to_vbm(&set).unwrap();
        let after = find_band_edges(&norm).unwrap();
        assert_eq!(after.vbm, 0.0, "{name}");
        assert!((after.gap - before.gap).abs() < 1e-12, "{name}");
    }
}

#[test]
fn dos_of_pristine_vanishes_in_gap() {
    let set = parse_eigenvalues(fixtures::PRISTINE_EIG).unwrap();
    let e = find_band_edges(&set).unwrap();
    let sigma = 0.05;
    let (lo, hi) = set.energy_range();
    let n = ((hi - lo + 12.0 * sigma) / (sigma / 20.0)).round() as usize + 1;
    let dos = compute_dos(&set, lo - 6.0 * sigma, hi + 6.0 * sigma, n, sigma).unwrap();
    assert_eq!(dos.max_in(e.vbm + 4.0 * sigma, e.cbm - 4.0 * sigma), 0.0);
    let expected = f64::from(set.spin_degeneracy) * set.nbands() as f64 * set.weight_sum();
    assert!((dos.integral() - expected).abs() / expected < 1e-6);
}

#[test]
fn convergence_fixtures() {
    let ok = audit_convergence(fixtures::SCF_CONVERGED_LOG, 1e-4, 100).unwrap();
    assert!(ok.converged);
    assert_eq!(ok.iterations, 37);
    let stalled = audit_convergence(fixtures::SCF_STALLED_LOG, 1e-4, 100).unwrap();
    assert!(!stalled.converged);
    assert_eq!(stalled.iterations, 100);
    assert!((stalled.final_residual - 2e-3).abs() < 1e-15);
}

#[test]
fn zero_phonon_line() {
    let um = ev_to_wavelength(0.8).unwrap();
    assert!((um - 1.5498).abs() < 1e-4);
    assert!((wavelength_to_ev(um).unwrap() - 0.8).abs() < 1e-12);
    assert!(ev_to_wavelength(0.0).is_err());
    assert!(ev_to_wavelength(-1.0).is_err());
}

fn random_set() -> impl Strategy<Value = EigenvalueSet> {
    (1usize..6, 1usize..8, 1u8..=2, any::<u64>()).prop_map(|(nk, nb, spin, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kpoints = (0..nk)
            .map(|i| KSample {
                frac: [
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.5..0.5),
                ],
                weight: rng.gen_range(0.01..1.0),
                s: (i % 2 == 0).then(|| rng.gen_range(0.0..10.0)),
            })
            .collect();
        let bands = (0..nk)
            .map(|_| {
                let mut row: Vec<f64> = (0..nb).map(|_| rng.gen_range(-20.0..20.0)).collect();
                row.sort_by(f64::total_cmp);
                row
            })
            .collect();
        let electrons = rng.gen_range(0..=nb as u32) * u32::from(spin);
        EigenvalueSet::new(kpoints, bands, electrons, spin).unwrap()
    })
}

fn dos_params(set: &EigenvalueSet, sigma: f64) -> DosParams {
    let (lo, hi) = set.energy_range();
    let e_min = lo - 6.0 * sigma;
    let e_max = hi + 6.0 * sigma;
    let n_grid = ((e_max - e_min) / (sigma / 20.0)).ceil() as usize + 1;
    DosParams {
        e_min,
        e_max,
        n_grid,
        sigma,
        kernel: Kernel::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalue_round_trip(set in random_set()) {
        let text = write_eigenvalues(&set);
        let back = parse_eigenvalues(&text).unwrap();
        prop_assert_eq!(write_eigenvalues(&back), text);
        prop_assert_eq!(back.nk(), set.nk());
        for (a, b) in back.bands.iter().flatten().zip(set.bands.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
        }
    }

    #[test]
    fn dos_integrates_to_state_count(set in random_set(), sigma in 0.05f64..0.5) {
        let dos = compute_dos_with(&set, &dos_params(&set, sigma)).unwrap();
        let expected = f64::from(set.spin_degeneracy) * set.nbands() as f64 * set.weight_sum();
        prop_assert!((dos.integral() - expected).abs() <= 1e-6 * expected, "{} vs {}", dos.integral(), expected);
    }

    #[test]
    fn dos_is_linear_in_bands(a in random_set(), seed in any::<u64>(), sigma in 0.05f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra: Vec<Vec<f64>> = a.bands.iter().map(|_| vec![rng.gen_range(-20.0..20.0)]).collect();
        let b = EigenvalueSet::new(a.kpoints.clone(), extra.clone(), 0, a.spin_degeneracy).unwrap();
        let joined_rows = a.bands.iter().zip(&extra).map(|(r, x)| {
            let mut row = r.clone();
            row.extend(x);
            row
        }).collect();
        let joined = EigenvalueSet::new(a.kpoints.clone(), joined_rows, 0, a.spin_degeneracy).unwrap();
        let p = dos_params(&joined, sigma);
        let (da, db, dj) = (
            compute_dos_with(&a, &p).unwrap(),
            compute_dos_with(&b, &p).unwrap(),
            compute_dos_with(&joined, &p).unwrap(),
        );
        let peak = dj.values.iter().copied().fold(0.0, f64::max);
        for i in 0..p.n_grid {
            prop_assert!((da.values[i] + db.values[i] - dj.values[i]).abs() <= 1e-12 * peak.max(1.0));
        }
    }

    #[test]
    fn gap_is_shift_invariant(seed in any::<u64>(), shift in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (spec, _, _) = random_spectrum(&mut rng);
        let set = synthesize(&spec, &path()).unwrap();
        let before = find_band_edges(&set).unwrap();
        let after = find_band_edges(&set.shifted(shift)).unwrap();
        prop_assert!((after.gap - before.gap).abs() < 1e-12);
        prop_assert!((after.vbm - before.vbm - shift).abs() < 1e-12);
    }

    #[test]
    fn flat_band_count_is_monotone_in_delta(set in random_set(), d1 in 1e-3f64..5.0, d2 in 1e-3f64..5.0) {
        let (lo, hi) = set.energy_range();
        let window = (lo - 1.0, hi + 1.0);
        let (small, large) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = detect_flat_bands(&set, window, small).unwrap();
        let b = detect_flat_bands(&set, window, large).unwrap();
        prop_assert!(a.len() <= b.len());
        prop_assert!(a.iter().all(|f| b.iter().any(|g| g.band == f.band)));
    }
}

#[test]
fn gaussian_kernel_is_available() {
    let set = parse_eigenvalues(fixtures::ER_HV_EIG).unwrap();
    let mut p = dos_params(&set, 0.1);
    p.kernel = Kernel::Gaussian;
    let dos = compute_dos_with(&set, &p).unwrap();
    let expected = f64::from(set.spin_degeneracy) * set.nbands() as f64 * set.weight_sum();
    assert!((dos.integral() - expected).abs() / expected < 1e-6);
}
