//! The interpolated annealing Hamiltonian `H(s) = (1−s) H_M + s H_P` and the
//! reflection-parity sectors of the chain.
//!
//! `H_M = Σ_i σ_i^x` is the mixer and `H_P = Σ χ_ij σ_i^z σ_j^z + Σ λ_i σ_i^z`
//! the classical problem Hamiltonian. `s = 0` is the mixer end of the ramp.
//! Computational basis bit 0 is `z = +1`.

use std::collections::BTreeMap;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{zero, DenseOperator};
use crate::pauli::check_dense_capacity;
use crate::sparse::CsrMatrix;

const SYMMETRY_TOL: f64 = 1e-12;
const COMMUTATOR_TOL: f64 = 1e-10;

/// Couplings `χ_ij` (one entry per unordered pair, `i < j`) and fields `λ_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct HamiltonianSpec {
    n_sites: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
}

/// On-disk form; omitted couplings or fields fall back to the default chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct SpecDocument {
    n_sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    couplings: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fields: Option<Vec<f64>>,
}

impl TryFrom<SpecDocument> for HamiltonianSpec {
    type Error = Error;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        let default = HamiltonianSpec::nearest_neighbor(doc.n_sites.max(1));
        HamiltonianSpec::new(
            doc.n_sites,
            doc.couplings.unwrap_or(default.couplings),
            doc.fields.unwrap_or(default.fields),
        )
    }
}

impl From<HamiltonianSpec> for SpecDocument {
    fn from(spec: HamiltonianSpec) -> Self {
        SpecDocument {
            n_sites: spec.n_sites,
            couplings: Some(spec.couplings),
            fields: Some(spec.fields),
        }
    }
}

impl HamiltonianSpec {
    pub fn new(n_sites: usize, couplings: Vec<(usize, usize, f64)>, fields: Vec<f64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameter {
                name: "n_sites",
                reason: "chain must have at least one site".into(),
            });
        }
        if fields.len() != n_sites {
            return Err(Error::InvalidParameter {
                name: "fields",
                reason: format!("expected {n_sites} fields, found {}", fields.len()),
            });
        }
        let mut pairs = BTreeMap::new();
        for (i, j, v) in couplings {
            if i == j {
                return Err(Error::InvalidParameter {
                    name: "couplings",
                    reason: format!("diagonal entry ({i}, {j})"),
                });
            }
            if i >= n_sites || j >= n_sites {
                return Err(Error::InvalidParameter {
                    name: "couplings",
                    reason: format!("pair ({i}, {j}) outside a chain of {n_sites}"),
                });
            }
            let key = (i.min(j), i.max(j));
            if pairs.insert(key, v).is_some() {
                return Err(Error::InvalidParameter {
                    name: "couplings",
                    reason: format!("pair ({}, {}) given twice", key.0, key.1),
                });
            }
        }
        Ok(Self {
            n_sites,
            couplings: pairs.into_iter().map(|((i, j), v)| (i, j, v)).collect(),
            fields,
        })
    }

    /// Open chain with `χ_{i,i+1} = 1` and `λ_i = 1`.
    pub fn nearest_neighbor(n_sites: usize) -> Self {
        Self {
            n_sites,
            couplings: (0..n_sites.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect(),
            fields: vec![1.0; n_sites],
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Largest violation of `χ_ij = χ_{R(i)R(j)}`, `λ_i = λ_{R(i)}`.
    pub fn reflection_asymmetry(&self) -> f64 {
        let n = self.n_sites;
        let lookup: BTreeMap<(usize, usize), f64> =
            self.couplings.iter().map(|&(i, j, v)| ((i, j), v)).collect();
        let mut worst = 0.0f64;
        for &(i, j, v) in &self.couplings {
            let (ri, rj) = (n - 1 - i, n - 1 - j);
            let mirrored = lookup.get(&(ri.min(rj), ri.max(rj))).copied().unwrap_or(0.0);
            worst = worst.max((v - mirrored).abs());
        }
        for i in 0..n {
            worst = worst.max((self.fields[i] - self.fields[n - 1 - i]).abs());
        }
        worst
    }

    pub fn is_reflection_symmetric(&self) -> bool {
        self.reflection_asymmetry() <= SYMMETRY_TOL
    }

    /// `H_P` eigenvalue of every computational basis state.
    pub fn problem_diagonal(&self) -> Vec<f64> {
        let spin = |z: usize, i: usize| if z >> i & 1 == 0 { 1.0 } else { -1.0 };
        (0..self.dim())
            .map(|z| {
                let pair: f64 = self
                    .couplings
                    .iter()
                    .map(|&(i, j, chi)| chi * spin(z, i) * spin(z, j))
                    .sum();
                let local: f64 = self.fields.iter().enumerate().map(|(i, l)| l * spin(z, i)).sum();
                pair + local
            })
            .collect()
    }
}

pub fn mixer_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    check_dense_capacity("mixer_hamiltonian", spec.n_sites)?;
    let d = spec.dim();
    let mut m = DenseOperator::zeros(d);
    for w in 0..d {
        for i in 0..spec.n_sites {
            m.set(w ^ (1 << i), w, c64::new(1.0, 0.0));
        }
    }
    Ok(m)
}

pub fn problem_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseOperator> {
    check_dense_capacity("problem_hamiltonian", spec.n_sites)?;
    Ok(DenseOperator::from_real_diagonal(&spec.problem_diagonal()))
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "s",
            reason: format!("{s} is outside [0, 1]"),
        })
    }
}

/// Full-space `H(s) = (1−s) H_M + s H_P`.
pub fn interpolated_hamiltonian(spec: &HamiltonianSpec, s: f64) -> Result<DenseOperator> {
    check_s(s)?;
    RampGenerator::new(spec, None).map(|g| g.operator_at(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Bit-reversal of the lowest `n_sites` bits: site `i` ↔ site `N−1−i`.
pub fn reflect(z: usize, n_sites: usize) -> usize {
    let mut out = 0;
    for i in 0..n_sites {
        out |= (z >> i & 1) << (n_sites - 1 - i);
    }
    out
}

/// Dense permutation matrix of the chain reflection.
pub fn reflection_operator(n_sites: usize) -> Result<DenseOperator> {
    check_dense_capacity("reflection_operator", n_sites)?;
    let d = 1 << n_sites;
    let mut r = DenseOperator::zeros(d);
    for z in 0..d {
        r.set(reflect(z, n_sites), z, c64::new(1.0, 0.0));
    }
    Ok(r)
}

/// Orthonormal basis of one reflection-parity eigenspace.
///
/// Each basis vector is either a reflection-invariant basis state (even sector
/// only) or `(|z⟩ ± |R z⟩)/√2` for a pair `z < R z`.
#[derive(Clone, Debug)]
pub struct ParitySector {
    n_sites: usize,
    parity: Parity,
    members: Vec<(usize, Option<usize>)>,
    index: Vec<u32>,
}

const NOT_IN_SECTOR: u32 = u32::MAX;

impl ParitySector {
    pub fn new(n_sites: usize, parity: Parity) -> Result<Self> {
        check_dense_capacity("parity_sector", n_sites)?;
        let d = 1usize << n_sites;
        let mut members = Vec::new();
        let mut index = vec![NOT_IN_SECTOR; d];
        for z in 0..d {
            let rz = reflect(z, n_sites);
            if rz == z {
                if parity == Parity::Even {
                    index[z] = members.len() as u32;
                    members.push((z, None));
                }
            } else if z < rz {
                index[z] = members.len() as u32;
                index[rz] = members.len() as u32;
                members.push((z, Some(rz)));
            }
        }
        Ok(Self {
            n_sites,
            parity,
            members,
            index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// Component of sector basis vector `a` on full basis state `z`.
    pub fn coefficient(&self, a: usize, z: usize) -> f64 {
        match self.members[a] {
            (rep, None) if rep == z => 1.0,
            (rep, Some(_)) if rep == z => std::f64::consts::FRAC_1_SQRT_2,
            (_, Some(partner)) if partner == z => self.parity.sign() * std::f64::consts::FRAC_1_SQRT_2,
            _ => 0.0,
        }
    }

    /// Full basis states carrying weight in sector vector `a`, with their coefficients.
    fn support(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (rep, partner) = self.members[a];
        std::iter::once(rep)
            .chain(partner)
            .map(move |z| (z, self.coefficient(a, z)))
    }

    /// Sector index of the orbit containing `z`, if it belongs to this sector.
    pub fn index_of(&self, z: usize) -> Option<usize> {
        match self.index[z] {
            NOT_IN_SECTOR => None,
            a => Some(a as usize),
        }
    }

    /// Sector amplitudes to full-space amplitudes (`B v`).
    pub fn embed(&self, v: &[c64]) -> Result<Vec<c64>> {
        crate::linalg::check_dim(self.dim(), v.len())?;
        let mut out = vec![zero(); 1 << self.n_sites];
        for (a, &va) in v.iter().enumerate() {
            for (z, c) in self.support(a) {
                out[z] += va * c;
            }
        }
        Ok(out)
    }

    /// Full-space amplitudes to sector amplitudes (`B† ψ`).
    pub fn project(&self, psi: &[c64]) -> Result<Vec<c64>> {
        crate::linalg::check_dim(1 << self.n_sites, psi.len())?;
        Ok((0..self.dim())
            .map(|a| self.support(a).map(|(z, c)| psi[z] * c).sum())
            .collect())
    }

    /// `2^N × dim` isometry whose columns are the sector basis.
    pub fn basis_matrix(&self) -> Mat<f64> {
        let mut b = Mat::zeros(1 << self.n_sites, self.dim());
        for a in 0..self.dim() {
            for (z, c) in self.support(a) {
                b[(z, a)] = c;
            }
        }
        b
    }

    /// Orthogonal projector `B B†` onto the sector.
    pub fn projector(&self) -> DenseOperator {
        let b = self.basis_matrix();
        let p = &b * b.transpose();
        DenseOperator::from_real(p.as_ref())
    }
}

/// Sector basis for a Hamiltonian spec; fails if the spec breaks the reflection.
pub fn parity_sector(spec: &HamiltonianSpec, parity: Parity) -> Result<ParitySector> {
    let asym = spec.reflection_asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotReflectionSymmetric(format!(
            "couplings or fields differ from their mirror image by {asym:.3e}"
        )));
    }
    ParitySector::new(spec.n_sites, parity)
}

/// `B† A B` for an operator commuting with the reflection.
pub fn restrict(op: &DenseOperator, sector: &ParitySector) -> Result<DenseOperator> {
    let n = sector.n_sites;
    crate::linalg::check_dim(1 << n, op.dim())?;
    let d = op.dim();
    let mut residual = 0.0f64;
    for w in 0..d {
        let rw = reflect(w, n);
        for z in 0..d {
            residual = residual.max((op.get(reflect(z, n), rw) - op.get(z, w)).norm());
        }
    }
    if residual > COMMUTATOR_TOL {
        return Err(Error::BreaksReflection(residual));
    }
    let dim = sector.dim();
    Ok(DenseOperator::from_fn(dim, |a, b| {
        let mut acc = zero();
        for (z, ca) in sector.support(a) {
            for (w, cb) in sector.support(b) {
                acc += op.get(z, w) * (ca * cb);
            }
        }
        acc
    }))
}

/// Sparse form of the ramp family `H(s) = (1−s) M + s D` in the full space or a sector.
///
/// `M` is the (restricted) mixer and `D` the diagonal of the problem Hamiltonian,
/// which stays diagonal in the sector basis because mirrored states share their energy.
#[derive(Clone, Debug)]
pub struct RampGenerator {
    n_sites: usize,
    mixer: CsrMatrix,
    problem: Vec<f64>,
    sector: Option<ParitySector>,
}

impl RampGenerator {
    pub fn new(spec: &HamiltonianSpec, sector: Option<&ParitySector>) -> Result<Self> {
        check_dense_capacity("ramp_generator", spec.n_sites)?;
        let n = spec.n_sites;
        let full_diag = spec.problem_diagonal();
        match sector {
            None => {
                let d = spec.dim();
                let triplets = (0..d)
                    .flat_map(|w| (0..n).map(move |i| (w ^ (1 << i), w, 1.0)))
                    .collect();
                Ok(Self {
                    n_sites: n,
                    mixer: CsrMatrix::from_triplets(d, triplets),
                    problem: full_diag,
                    sector: None,
                })
            }
            Some(sector) => {
                if sector.n_sites != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: sector.n_sites,
                    });
                }
                let asym = spec.reflection_asymmetry();
                if asym > SYMMETRY_TOL {
                    return Err(Error::NotReflectionSymmetric(format!(
                        "couplings or fields differ from their mirror image by {asym:.3e}"
                    )));
                }
                let mut triplets = Vec::new();
                for a in 0..sector.dim() {
                    for (z, ca) in sector.support(a) {
                        for i in 0..n {
                            let w = z ^ (1 << i);
                            if let Some(b) = sector.index_of(w) {
                                triplets.push((b, a, ca * sector.coefficient(b, w)));
                            }
                        }
                    }
                }
                let problem = (0..sector.dim())
                    .map(|a| sector.support(a).map(|(z, c)| c * c * full_diag[z]).sum())
                    .collect();
                Ok(Self {
                    n_sites: n,
                    mixer: CsrMatrix::from_triplets(sector.dim(), triplets),
                    problem,
                    sector: Some(sector.clone()),
                })
            }
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.problem.len()
    }

    pub fn sector(&self) -> Option<&ParitySector> {
        self.sector.as_ref()
    }

    pub fn mixer(&self) -> &CsrMatrix {
        &self.mixer
    }

    pub fn problem_diagonal(&self) -> &[f64] {
        &self.problem
    }

    /// Real symmetric matrix of `H(s)`.
    pub fn dense_at(&self, s: f64) -> Mat<f64> {
        let mut m = self.mixer.to_dense();
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m[(i, j)] *= 1.0 - s;
            }
            m[(j, j)] += s * self.problem[j];
        }
        m
    }

    pub fn operator_at(&self, s: f64) -> DenseOperator {
        DenseOperator::from_real(self.dense_at(s).as_ref())
    }

    /// `H_P − H_M`, the constant `∂H/∂s`.
    pub fn derivative(&self) -> Mat<f64> {
        let mut m = self.mixer.to_dense();
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                m[(i, j)] = -m[(i, j)];
            }
            m[(j, j)] += self.problem[j];
        }
        m
    }

    /// `y = H(s) x`.
    #[inline]
    pub fn apply(&self, s: f64, x: &[c64], y: &mut [c64]) {
        self.mixer.apply(x, y);
        let a = 1.0 - s;
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.problem) {
            *yi = *yi * a + *xi * (s * di);
        }
    }

    /// Gershgorin enclosure of the spectrum of `H(s)`.
    pub fn spectral_bounds(&self, s: f64) -> (f64, f64) {
        let a = 1.0 - s;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim() {
            let center = a * self.mixer.diagonal(r) + s * self.problem[r];
            let radius = a.abs() * self.mixer.off_diagonal_radius(r);
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }
}

/// Dense `H(s)` restricted to a parity sector, built without the full-space matrix.
pub fn sector_hamiltonian(spec: &HamiltonianSpec, sector: &ParitySector, s: f64) -> Result<DenseOperator> {
    check_s(s)?;
    Ok(RampGenerator::new(spec, Some(sector))?.operator_at(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixer_examples() {
        let spec = HamiltonianSpec::nearest_neighbor(1);
        let m = mixer_hamiltonian(&spec).unwrap();
        assert_eq!(m.get(0, 1), c64::new(1.0, 0.0));
        assert_eq!(m.get(0, 0), c64::new(0.0, 0.0));

        let m2 = mixer_hamiltonian(&HamiltonianSpec::nearest_neighbor(2)).unwrap();
        let vals = m2.hermitian_eigenvalues().unwrap();
        for (v, e) in vals.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn mixer_ground_state_is_all_minus() {
        let n = 4;
        let m = mixer_hamiltonian(&HamiltonianSpec::nearest_neighbor(n)).unwrap();
        let d = 1 << n;
        // |−⟩ = (|0⟩ − |1⟩)/√2 per site
        let amp = 1.0 / (d as f64).sqrt();
        let v: Vec<c64> = (0..d)
            .map(|z: usize| c64::new(if z.count_ones().is_multiple_of(2) { amp } else { -amp }, 0.0))
            .collect();
        let mv = m.apply(&v).unwrap();
        for (a, b) in mv.iter().zip(&v) {
            assert!((a - b * -(n as f64)).norm() < 1e-12);
        }
    }

    #[test]
    fn problem_two_site_default() {
        // per-bitstring evaluation of χ z0 z1 + z0 + z1 with bit 0 ↔ z = +1
        let diag = HamiltonianSpec::nearest_neighbor(2).problem_diagonal();
        assert_eq!(diag, vec![3.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn problem_zero_spec_is_zero() {
        let spec = HamiltonianSpec::new(3, vec![], vec![0.0; 3]).unwrap();
        let p = problem_hamiltonian(&spec).unwrap();
        assert_eq!(p.max_abs(), 0.0);
    }

    #[test]
    fn problem_is_diagonal() {
        let spec = HamiltonianSpec::new(3, vec![(0, 2, 0.7), (0, 1, -1.3)], vec![0.2, -0.4, 1.0]).unwrap();
        let p = problem_hamiltonian(&spec).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert_eq!(p.get(i, j), c64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn interpolation_endpoints_and_linearity() {
        let spec = HamiltonianSpec::nearest_neighbor(3);
        let hm = mixer_hamiltonian(&spec).unwrap();
        let hp = problem_hamiltonian(&spec).unwrap();
        assert!(interpolated_hamiltonian(&spec, 0.0).unwrap().max_abs_diff(&hm) < 1e-15);
        assert!(interpolated_hamiltonian(&spec, 1.0).unwrap().max_abs_diff(&hp) < 1e-15);
        let mid = (&hm + &hp).scale(c64::new(0.5, 0.0));
        assert!(interpolated_hamiltonian(&spec, 0.5).unwrap().max_abs_diff(&mid) < 1e-15);
        assert!(interpolated_hamiltonian(&spec, 1.5).is_err());
        assert!(interpolated_hamiltonian(&spec, -0.1).is_err());
    }

    #[test]
    fn sector_dimensions() {
        for (n, plus) in [(2usize, 3usize), (3, 6), (14, 8256)] {
            let spec = HamiltonianSpec::nearest_neighbor(n);
            let even = parity_sector(&spec, Parity::Even).unwrap();
            let odd = parity_sector(&spec, Parity::Odd).unwrap();
            assert_eq!(even.dim(), plus, "N={n}");
            assert_eq!(even.dim() + odd.dim(), 1 << n);
        }
    }

    #[test]
    fn two_site_even_basis() {
        let sector = ParitySector::new(2, Parity::Even).unwrap();
        let b = sector.basis_matrix();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // columns: |00⟩, (|01⟩+|10⟩)/√2, |11⟩
        let cols: Vec<Vec<f64>> = (0..3).map(|a| (0..4).map(|z| b[(z, a)]).collect()).collect();
        assert!(cols.contains(&vec![1.0, 0.0, 0.0, 0.0]));
        assert!(cols.contains(&vec![0.0, 0.0, 0.0, 1.0]));
        assert!(cols.contains(&vec![0.0, h, h, 0.0]));
    }

    #[test]
    fn asymmetric_spec_has_no_sector() {
        let spec = HamiltonianSpec::new(3, vec![(0, 1, 1.0)], vec![1.0; 3]).unwrap();
        assert!(matches!(
            parity_sector(&spec, Parity::Even),
            Err(Error::NotReflectionSymmetric(_))
        ));
    }

    #[test]
    fn restrict_examples() {
        let spec = HamiltonianSpec::nearest_neighbor(2);
        let sector = parity_sector(&spec, Parity::Even).unwrap();
        let id = restrict(&DenseOperator::identity(4), &sector).unwrap();
        assert!(id.max_abs_diff(&DenseOperator::identity(3)) < 1e-15);

        let hm = restrict(&mixer_hamiltonian(&spec).unwrap(), &sector).unwrap();
        let vals = hm.hermitian_eigenvalues().unwrap();
        for (v, e) in vals.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }

        // σ^z on site 0 breaks the reflection
        let z0 = crate::pauli::pauli_matrix(&"ZI".parse().unwrap()).unwrap();
        assert!(matches!(restrict(&z0, &sector), Err(Error::BreaksReflection(_))));
    }

    #[test]
    fn sector_spectra_partition_full_spectrum() {
        let spec = HamiltonianSpec::nearest_neighbor(5);
        let h = interpolated_hamiltonian(&spec, 0.37).unwrap();
        let mut full = h.hermitian_eigenvalues().unwrap();
        let mut parts = Vec::new();
        for parity in [Parity::Even, Parity::Odd] {
            let sector = parity_sector(&spec, parity).unwrap();
            parts.extend(restrict(&h, &sector).unwrap().hermitian_eigenvalues().unwrap());
        }
        parts.sort_by(f64::total_cmp);
        full.sort_by(f64::total_cmp);
        for (a, b) in parts.iter().zip(&full) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sparse_generator_matches_dense_restriction() {
        let spec = HamiltonianSpec::nearest_neighbor(5);
        for parity in [Parity::Even, Parity::Odd] {
            let sector = parity_sector(&spec, parity).unwrap();
            let dense = restrict(&interpolated_hamiltonian(&spec, 0.61).unwrap(), &sector).unwrap();
            let sparse = sector_hamiltonian(&spec, &sector, 0.61).unwrap();
            assert!(dense.max_abs_diff(&sparse) < 1e-14);
        }
    }

    #[test]
    fn spectral_bounds_enclose_spectrum() {
        let spec = HamiltonianSpec::nearest_neighbor(4);
        let sector = parity_sector(&spec, Parity::Even).unwrap();
        let g = RampGenerator::new(&spec, Some(&sector)).unwrap();
        for s in [0.0, 0.3, 1.0] {
            let vals = g.operator_at(s).hermitian_eigenvalues().unwrap();
            let (lo, hi) = g.spectral_bounds(s);
            assert!(lo <= vals[0] + 1e-12 && hi >= vals[vals.len() - 1] - 1e-12);
        }
    }

    #[test]
    fn json_defaults_and_roundtrip() {
        let spec: HamiltonianSpec = serde_json::from_str(r#"{"n_sites": 4}"#).unwrap();
        assert_eq!(spec, HamiltonianSpec::nearest_neighbor(4));
        let custom: HamiltonianSpec =
            serde_json::from_str(r#"{"n_sites": 3, "couplings": [[2, 0, 0.5]], "fields": [0, 1, 0]}"#).unwrap();
        assert_eq!(custom.couplings(), &[(0, 2, 0.5)]);
        let back: HamiltonianSpec = serde_json::from_str(&serde_json::to_string(&custom).unwrap()).unwrap();
        assert_eq!(back, custom);
        assert!(serde_json::from_str::<HamiltonianSpec>(r#"{"n_sites": 2, "couplings": [[0, 0, 1]]}"#).is_err());
    }
}
