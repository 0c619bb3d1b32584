use anneal_lab::evolution::{evolve_ramp, EvolveOptions, RampKind, RampParams};
use anneal_lab::model::{interpolated_hamiltonian, parity_sector, reflect, HamiltonianSpec, Parity};
use anneal_lab::scrambling::operator_size_distribution;
use anneal_lab::spectral::{bulk_statistics, mlsr_unitary, SpectrumResult, DEGENERACY_REL_TOL};
use anneal_lab::states::{cut_entropy, max_entropy, half_chain_entropy};
use anneal_lab::DenseOperator;
use faer::c64;
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<c64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| c64::new(a, b)).collect())
}

fn normalized(v: Vec<c64>) -> Vec<c64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn operator(n: usize) -> impl Strategy<Value = DenseOperator> {
    let d = 1 << n;
    complex_vec(d * d).prop_map(move |v| DenseOperator::from_fn(d, |i, j| v[i + d * j]))
}

/// `P_k` from Pauli strings assembled by hand, site 0 being the lowest bit.
fn size_oracle(a: &DenseOperator, n: usize) -> Vec<f64> {
    let one = c64::new(1.0, 0.0);
    let zero = c64::new(0.0, 0.0);
    let i = c64::new(0.0, 1.0);
    let paulis = [[[one, zero], [zero, one]], [[zero, one], [one, zero]], [[zero, -i], [i, zero]], [[one, zero], [zero, -one]]];
    let d = 1 << n;
    let mut w = vec![0.0; n + 1];
    for code in 0..4usize.pow(n as u32) {
        let f: Vec<usize> = (0..n).map(|s| (code >> (2 * s)) & 3).collect();
        let mut tr = zero;
        for r in 0..d {
            for c in 0..d {
                let q = f.iter().enumerate().fold(one, |acc, (s, &p)| acc * paulis[p][(r >> s) & 1][(c >> s) & 1]);
                tr += q * a.get(c, r);
            }
        }
        w[f.iter().filter(|&&p| p != 0).count()] += tr.norm_sqr();
    }
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ramp_unitaries_are_unitary(
        n in 2usize..=5,
        total_time in 1.0f64..20.0,
        dt in prop::sample::select(vec![0.1, 0.25, 0.5]),
        cyclic in any::<bool>(),
        sector in prop::sample::select(vec![None, Some(Parity::Even), Some(Parity::Odd)]),
    ) {
        let spec = HamiltonianSpec::nearest_neighbor(n);
        let kind = if cyclic { RampKind::Cyclic } else { RampKind::Forward };
        let total_time = (total_time / dt).round().max(1.0) * dt;
        let params = RampParams::new(kind, total_time, dt).unwrap();
        let sector = sector.and_then(|p| parity_sector(&spec, p).ok()).filter(|s| s.dim() >= 1);
        let r = evolve_ramp(&spec, &params, sector.as_ref(), &EvolveOptions::default()).unwrap();
        prop_assert!(r.unitary.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn size_distribution_matches_oracle(a in (1usize..=3).prop_flat_map(operator)) {
        let n = a.dim().trailing_zeros() as usize;
        let p = operator_size_distribution(&a).unwrap();
        prop_assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        for (x, y) in p.probabilities.iter().zip(size_oracle(&a, n)) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn size_distribution_ignores_scale(a in operator(2), re in 0.1f64..5.0, im in -5.0f64..5.0) {
        let p = operator_size_distribution(&a).unwrap();
        let q = operator_size_distribution(&a.scale(c64::new(re, im))).unwrap();
        for (x, y) in p.probabilities.iter().zip(&q.probabilities) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn entropy_is_symmetric_across_the_cut(
        (n, cut, psi) in (2usize..=7).prop_flat_map(|n| (Just(n), 1..n, complex_vec(1 << n)))
    ) {
        let psi = normalized(psi);
        let mirrored: Vec<c64> = (0..psi.len()).map(|z| psi[reflect(z, n)]).collect();
        let s = cut_entropy(&psi, n, cut).unwrap();
        prop_assert!((s - cut_entropy(&mirrored, n, n - cut).unwrap()).abs() <= 1e-9);
        prop_assert!(s >= 0.0 && s <= cut.min(n - cut) as f64 * std::f64::consts::LN_2 + 1e-9);
        prop_assert!(half_chain_entropy(&psi, n).unwrap() <= max_entropy(n) + 1e-9);
    }

    #[test]
    fn parity_projectors_are_idempotent_and_commute(n in 2usize..=7, s in 0.0f64..=1.0) {
        let spec = HamiltonianSpec::nearest_neighbor(n);
        let h = interpolated_hamiltonian(&spec, s).unwrap();
        for parity in [Parity::Even, Parity::Odd] {
            let p = parity_sector(&spec, parity).unwrap().projector();
            prop_assert!(p.checked_mul(&p).unwrap().max_abs_diff(&p) <= 1e-12);
            let ph = p.checked_mul(&h).unwrap();
            prop_assert!(ph.max_abs_diff(&h.checked_mul(&p).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn mlsr_is_affine_invariant(
        mut levels in prop::collection::vec(-10.0f64..10.0, 40..120),
        scale in 0.01f64..100.0,
        shift in -50.0f64..50.0,
    ) {
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        prop_assume!(levels.len() >= 30);
        let moved: Vec<f64> = levels.iter().map(|x| scale * x + shift).collect();
        let a = bulk_statistics(&levels, 0.05).unwrap();
        let b = bulk_statistics(&moved, 0.05).unwrap();
        prop_assert!((a.mlsr - b.mlsr).abs() <= 1e-9);
    }

    #[test]
    fn unitary_mlsr_ignores_global_phase(
        phases in prop::collection::vec(0.0f64..std::f64::consts::TAU, 20..60),
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let a = SpectrumResult::from_phases(phases.clone(), DEGENERACY_REL_TOL).unwrap();
        let shifted: Vec<f64> = phases.iter().map(|p| p + theta).collect();
        let b = SpectrumResult::from_phases(shifted, DEGENERACY_REL_TOL).unwrap();
        prop_assert!((a.mlsr - b.mlsr).abs() <= 1e-9);
        let u = DenseOperator::from_fn(phases.len(), |i, j| {
            if i == j { c64::new(phases[i].cos(), -phases[i].sin()) } else { c64::new(0.0, 0.0) }
        });
        let v = u.scale(c64::new(theta.cos(), theta.sin()));
        prop_assert!((mlsr_unitary(&u).unwrap() - mlsr_unitary(&v).unwrap()).abs() <= 1e-9);
    }
}
