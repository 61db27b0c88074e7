use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, DVector};

use super::rng::{keyed_rng, poisson, Purpose};
use super::ExperimentConfig;
use crate::error::{QslError, Result};
use crate::quantum::{
    identity, kron, pauli_x, pauli_y, pauli_z, DensityMatrix, EigenDecomposition, Operator,
};
use crate::scalar::{trace_product_re, CMatrix};

/// Largest register the tomography plan supports.
pub const MAX_TOMOGRAPHY_QUBITS: usize = 4;

const BASES: [char; 3] = ['z', 'x', 'y'];

/// One projector of the measurement plan, e.g. `z+x-`.
#[derive(Debug, Clone)]
pub struct Projector {
    pub label: String,
    pub matrix: CMatrix<f64>,
}

fn single_qubit_projector(basis: char, outcome: usize) -> CMatrix<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    let ket = match basis {
        'z' if outcome == 0 => [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
        'z' => [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        'x' => [Complex::new(h, 0.0), Complex::new(sign * h, 0.0)],
        _ => [Complex::new(h, 0.0), Complex::new(0.0, sign * h)],
    };
    CMatrix::from_fn(2, 2, |i, j| ket[i] * ket[j].conj())
}

fn digits(mut index: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
    out
}

/// The `6^n` product projectors, grouped by basis: all `2^n` outcomes of one
/// basis choice are contiguous. Qubit 0 is the leftmost label character pair.
pub fn tomography_settings(n: usize) -> Result<Vec<Projector>> {
    if n == 0 || n > MAX_TOMOGRAPHY_QUBITS {
        return Err(QslError::InvalidConfig(format!(
            "tomography supports 1 to {MAX_TOMOGRAPHY_QUBITS} qubits, got {n}"
        )));
    }
    let groups = 3usize.pow(n as u32);
    let outcomes = 1usize << n;
    let mut out = Vec::with_capacity(groups * outcomes);
    for g in 0..groups {
        let bases = digits(g, 3, n);
        for o in 0..outcomes {
            let signs = digits(o, 2, n);
            let mut label = String::with_capacity(2 * n);
            let mut matrix = CMatrix::<f64>::identity(1, 1);
            for q in 0..n {
                let b = BASES[bases[q]];
                label.push(b);
                label.push(if signs[q] == 0 { '+' } else { '-' });
                matrix = matrix.kronecker(&single_qubit_projector(b, signs[q]));
            }
            out.push(Projector { label, matrix });
        }
    }
    Ok(out)
}

fn pauli_basis(n: usize) -> Vec<CMatrix<f64>> {
    let singles: [Operator<f64>; 4] = [identity(1), pauli_x(), pauli_y(), pauli_z()];
    (0..4usize.pow(n as u32))
        .map(|index| {
            let mut op = singles[digits(index, 4, n)[0]].clone();
            for &d in &digits(index, 4, n)[1..] {
                op = kron(&op, &singles[d]).expect("small register");
            }
            op.entries().clone()
        })
        .collect()
}

/// Measurement plan for `n` qubits and its linear-inversion map.
#[derive(Debug)]
pub struct TomographySetup {
    n_qubits: usize,
    settings: Vec<Projector>,
    paulis: Vec<CMatrix<f64>>,
    /// Maps normalized frequencies to Pauli expectation values.
    inversion: DMatrix<f64>,
}

impl TomographySetup {
    pub fn new(n: usize) -> Result<Self> {
        let settings = tomography_settings(n)?;
        let paulis = pauli_basis(n);
        let dim = (1usize << n) as f64;
        let design = DMatrix::from_fn(settings.len(), paulis.len(), |i, p| {
            trace_product_re(&paulis[p], &settings[i].matrix) / dim
        });
        let svd = design.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * smax)
            .count();
        if rank != paulis.len() {
            return Err(QslError::InvalidConfig(format!(
                "measurement map has rank {rank}, needs {}",
                paulis.len()
            )));
        }
        let inversion = svd.pseudo_inverse(1e-10 * smax).expect("full SVD");
        Ok(Self {
            n_qubits: n,
            settings,
            paulis,
            inversion,
        })
    }

    /// Shared plan for `n` qubits, built on first use.
    pub fn shared(n: usize) -> Result<&'static TomographySetup> {
        static CACHE: [OnceLock<TomographySetup>; MAX_TOMOGRAPHY_QUBITS] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        if n == 0 || n > MAX_TOMOGRAPHY_QUBITS {
            return Err(QslError::InvalidConfig(format!(
                "no tomography plan for {n} qubits"
            )));
        }
        if let Some(setup) = CACHE[n - 1].get() {
            return Ok(setup);
        }
        let setup = TomographySetup::new(n)?;
        Ok(CACHE[n - 1].get_or_init(|| setup))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn settings(&self) -> &[Projector] {
        &self.settings
    }

    pub fn group_size(&self) -> usize {
        1 << self.n_qubits
    }

    /// Mean counts `rate·T·Tr[ρΠ]` for every setting.
    pub fn expected_counts(
        &self,
        rho: &DensityMatrix<f64>,
        cfg: &ExperimentConfig,
    ) -> Result<Vec<f64>> {
        if rho.n_qubits() != self.n_qubits {
            return Err(QslError::DimensionMismatch(rho.n_qubits(), self.n_qubits));
        }
        let scale = cfg.rate_hz * cfg.integration_s;
        Ok(self
            .settings
            .iter()
            .map(|p| (scale * trace_product_re(rho.entries(), &p.matrix)).max(0.0))
            .collect())
    }

    /// Linear inversion of counts, then eigenvalue clipping at zero and trace renormalization.
    pub fn reconstruct(&self, counts: &[f64]) -> Result<DensityMatrix<f64>> {
        if counts.len() != self.settings.len() {
            return Err(QslError::DimensionMismatch(
                counts.len(),
                self.settings.len(),
            ));
        }
        let size = self.group_size();
        let mut freqs = DVector::<f64>::zeros(counts.len());
        for (g, chunk) in counts.chunks(size).enumerate() {
            let total: f64 = chunk.iter().sum();
            if !(total > 0.0) {
                return Err(QslError::EmptyBasis(g));
            }
            for (k, c) in chunk.iter().enumerate() {
                freqs[g * size + k] = c / total;
            }
        }
        let pauli_means = &self.inversion * freqs;
        let dim = 1usize << self.n_qubits;
        let mut raw = CMatrix::<f64>::zeros(dim, dim);
        for (coef, p) in pauli_means.iter().zip(&self.paulis) {
            raw += p.map(|z| z * (coef / dim as f64));
        }
        project_physical(raw)
    }
}

fn project_physical(raw: CMatrix<f64>) -> Result<DensityMatrix<f64>> {
    let mut eig = EigenDecomposition::of_hermitian(&raw, 0.0);
    let mut total = 0.0;
    for p in eig.eigenvalues.iter_mut() {
        *p = p.max(0.0);
        total += *p;
    }
    if !(total > 0.0) {
        return Err(QslError::NonPhysical(
            "reconstruction has no positive eigenvalue".into(),
        ));
    }
    eig.eigenvalues.iter_mut().for_each(|p| *p /= total);
    DensityMatrix::new_unchecked(eig.reconstruct())
}

/// Counts recorded at one optical path difference. Counts are real so that
/// noiseless expected values can stand in for Poisson data.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyDataset {
    pub l: f64,
    pub n_qubits: usize,
    pub settings: Vec<String>,
    pub counts: Vec<f64>,
    pub truth_tag: String,
}

impl TomographyDataset {
    pub fn new(
        l: f64,
        n_qubits: usize,
        counts: Vec<f64>,
        truth_tag: impl Into<String>,
    ) -> Result<Self> {
        let setup = TomographySetup::shared(n_qubits)?;
        if counts.len() != setup.settings.len() {
            return Err(QslError::DimensionMismatch(
                counts.len(),
                setup.settings.len(),
            ));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(QslError::InvalidConfig(
                "counts must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            l,
            n_qubits,
            settings: setup.settings.iter().map(|p| p.label.clone()).collect(),
            counts,
            truth_tag: truth_tag.into(),
        })
    }
}

/// Poisson counts for every setting; each draw is keyed by `(seed, l, setting)`.
pub fn simulate_counts(
    rho: &DensityMatrix<f64>,
    cfg: &ExperimentConfig,
    l: f64,
    truth_tag: &str,
) -> Result<TomographyDataset> {
    let setup = TomographySetup::shared(rho.n_qubits())?;
    let counts = setup
        .expected_counts(rho, cfg)?
        .into_iter()
        .enumerate()
        .map(|(s, mean)| {
            poisson(
                mean,
                &mut keyed_rng(cfg.master_seed, Purpose::Measurement, 0, l, s),
            )
        })
        .collect();
    TomographyDataset::new(l, rho.n_qubits(), counts, truth_tag)
}

/// Noiseless dataset holding the Poisson means themselves.
pub fn expected_dataset(
    rho: &DensityMatrix<f64>,
    cfg: &ExperimentConfig,
    l: f64,
    truth_tag: &str,
) -> Result<TomographyDataset> {
    let counts = TomographySetup::shared(rho.n_qubits())?.expected_counts(rho, cfg)?;
    TomographyDataset::new(l, rho.n_qubits(), counts, truth_tag)
}

pub fn reconstruct_state(ds: &TomographyDataset) -> Result<DensityMatrix<f64>> {
    TomographySetup::shared(ds.n_qubits)?.reconstruct(&ds.counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{fidelity, make_state, StateSpec};
    use crate::scalar::max_abs_entry;

    #[test]
    fn plan_sizes_and_labels() {
        assert_eq!(tomography_settings(1).unwrap().len(), 6);
        let two = tomography_settings(2).unwrap();
        assert_eq!(two.len(), 36);
        assert_eq!(two[0].label, "z+z+");
        assert_eq!(two[1].label, "z+z-");
        assert_eq!(two[4].label, "z+x+");
        assert!(tomography_settings(5).is_err());
    }

    #[test]
    fn every_plan_is_informationally_complete() {
        for n in 1..=3 {
            assert!(TomographySetup::new(n).is_ok());
        }
    }

    #[test]
    fn outcome_groups_resolve_identity() {
        let setup = TomographySetup::shared(2).unwrap();
        for chunk in setup.settings().chunks(setup.group_size()) {
            let sum = chunk
                .iter()
                .fold(CMatrix::<f64>::zeros(4, 4), |acc, p| acc + &p.matrix);
            assert!(max_abs_entry(&(sum - CMatrix::<f64>::identity(4, 4))) < 1e-14);
        }
    }

    #[test]
    fn horizontal_pair_mean_count() {
        let hh = make_state::<f64>(&StateSpec::Custom(vec![
            (1.0, 0.0),
            (0.0, 0.0),
            (0.0, 0.0),
            (0.0, 0.0),
        ]))
        .unwrap()
        .to_density();
        let cfg = ExperimentConfig::default();
        let means = TomographySetup::shared(2)
            .unwrap()
            .expected_counts(&hh, &cfg)
            .unwrap();
        assert!((means[0] - 65_000.0).abs() < 1e-9);
        assert_eq!(means[3], 0.0);
        let ds = simulate_counts(&hh, &cfg, 0.0, "HH").unwrap();
        assert_eq!(ds.counts[3], 0.0);
        assert_eq!(ds, simulate_counts(&hh, &cfg, 0.0, "HH").unwrap());
    }

    #[test]
    fn expected_counts_invert_exactly() {
        let cfg = ExperimentConfig::default();
        for spec in [
            StateSpec::P,
            StateSpec::BellPhiPlus,
            StateSpec::PN(2),
            StateSpec::Ghz(3),
        ] {
            let rho = make_state::<f64>(&spec).unwrap().to_density();
            let ds = expected_dataset(&rho, &cfg, 0.0, "exact").unwrap();
            let back = reconstruct_state(&ds).unwrap();
            assert!(max_abs_entry(&(back.entries() - rho.entries())) < 1e-9);
        }
    }

    #[test]
    fn bell_reconstruction_fidelity() {
        let rho = make_state::<f64>(&StateSpec::BellPhiPlus)
            .unwrap()
            .to_density();
        let cfg = ExperimentConfig {
            rate_hz: 7200.0,
            integration_s: 10.0,
            ..ExperimentConfig::default()
        };
        let back = reconstruct_state(&simulate_counts(&rho, &cfg, 0.0, "bell").unwrap()).unwrap();
        back.check_physical(1e-12).unwrap();
        assert!(fidelity(&back, &rho).unwrap() >= 0.99);
    }

    #[test]
    fn empty_basis_is_reported() {
        let mut counts = vec![1.0; 6];
        counts[2] = 0.0;
        counts[3] = 0.0;
        let ds = TomographyDataset::new(0.0, 1, counts, "t").unwrap();
        assert_eq!(reconstruct_state(&ds).unwrap_err(), QslError::EmptyBasis(1));
    }
}
