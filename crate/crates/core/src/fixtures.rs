//! Data files bundled with the crate: synthetic band specs calibrated to
//! known gaps, their eigenvalue files on the 113-point hexagonal path, an
//! illustrative sp3 parameter set, SCF residual logs and an energy ledger.

pub const PRISTINE_SPEC: &str = include_str!("../fixtures/pristine.spec.json");
pub const ER_H_SPEC: &str = include_str!("../fixtures/er_h.spec.json");
pub const ER_K_SPEC: &str = include_str!("../fixtures/er_k.spec.json");
pub const ER_HV_SPEC: &str = include_str!("../fixtures/er_hv.spec.json");
pub const ER_KV_SPEC: &str = include_str!("../fixtures/er_kv.spec.json");

pub const PRISTINE_EIG: &str = include_str!("../fixtures/pristine.eig");
pub const ER_H_EIG: &str = include_str!("../fixtures/er_h.eig");
pub const ER_K_EIG: &str = include_str!("../fixtures/er_k.eig");
pub const ER_HV_EIG: &str = include_str!("../fixtures/er_hv.eig");
pub const ER_KV_EIG: &str = include_str!("../fixtures/er_kv.eig");

pub const SIC_SP3_TB: &str = include_str!("../fixtures/sic_sp3.tb.json");
pub const SCF_CONVERGED_LOG: &str = include_str!("../fixtures/scf_converged.log");
pub const SCF_STALLED_LOG: &str = include_str!("../fixtures/scf_stalled.log");
pub const TABLE_LEDGER: &str = include_str!("../fixtures/table1.ledger.json");

/// (name, spec, eigenvalue file, gap in eV the fixture is calibrated to).
pub const SPECTRA: [(&str, &str, &str, f64); 5] = [
    ("pristine", PRISTINE_SPEC, PRISTINE_EIG, 2.23),
    ("Er_h", ER_H_SPEC, ER_H_EIG, 2.19),
    ("Er_k", ER_K_SPEC, ER_K_EIG, 2.22),
    ("Er_hV", ER_HV_SPEC, ER_HV_EIG, 1.30),
    ("Er_kV", ER_KV_SPEC, ER_KV_EIG, 1.06),
];

pub fn spectrum(name: &str) -> Option<(&'static str, &'static str, f64)> {
    SPECTRA
        .iter()
        .find(|(n, ..)| n.eq_ignore_ascii_case(name))
        .map(|(_, spec, eig, gap)| (*spec, *eig, *gap))
}
