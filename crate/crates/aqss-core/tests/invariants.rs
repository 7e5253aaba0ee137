//! Cross-module invariants on randomized inputs.

use aqss_core::channels::{
    complementary, compose, kraus_to_choi, validate_cptp, KrausChannel,
};
use aqss_core::divergences::{density_sqrt, q_function, QKernel};
use aqss_core::numkernel::{
    self, density_project, eig_hermitian, trace_norm, CMat, HermitianOperator,
};
use aqss_core::rng::SplitMix64;
use proptest::prelude::*;

mod common;
use common::{random_channel, random_density, random_unitary};

#[test]
fn trace_norm_is_unitarily_invariant() {
    let mut rng = SplitMix64::new(101);
    for _ in 0..20 {
        let n = 2 + rng.next_below(4);
        let m = CMat::from_fn(n, n, |_, _| {
            let (re, im) = rng.next_gaussian_pair();
            numkernel::c(re, im)
        });
        let u = random_unitary(n, &mut rng);
        let v = random_unitary(n, &mut rng);
        let t0 = trace_norm(&m).unwrap();
        let t1 = trace_norm(&u.mul_mat(&m).mul_mat(&v)).unwrap();
        assert!((t0 - t1).abs() < 1e-9 * (1.0 + t0), "{t0} vs {t1}");
    }
}

#[test]
fn density_project_is_idempotent() {
    let mut rng = SplitMix64::new(102);
    for _ in 0..30 {
        let n = 2 + rng.next_below(5);
        let h = HermitianOperator::from_hermitian_parts(CMat::from_fn(n, n, |_, _| {
            let (re, im) = rng.next_gaussian_pair();
            numkernel::c(re, im)
        }));
        let once = density_project(&h).unwrap();
        let twice = density_project(once.hermitian()).unwrap();
        assert!(once.matrix().sub_mat(twice.matrix()).frobenius_norm() < 1e-10);
    }
}

#[test]
fn representation_round_trips_preserve_action() {
    let mut rng = SplitMix64::new(103);
    for _ in 0..10 {
        let din = 2 + rng.next_below(3);
        let dout = 2 + rng.next_below(3);
        let rank = 1 + rng.next_below(3);
        let ch = random_channel(din, dout, rank.max(din.div_ceil(dout)), &mut rng);
        let back = ch.reduced().unwrap();
        for _ in 0..5 {
            let rho = random_density(din, &mut rng);
            let a = ch.apply_matrix(rho.matrix()).unwrap();
            let b = back.apply_matrix(rho.matrix()).unwrap();
            assert!(a.sub_mat(&b).frobenius_norm() < 1e-8);
        }
        assert!(validate_cptp(&back).unwrap().pass);
    }
}

#[test]
fn double_complement_preserves_q_values() {
    let mut rng = SplitMix64::new(104);
    for _ in 0..8 {
        let ch = random_channel(2, 3, 2, &mut rng);
        let cc = complementary(&complementary(&ch));
        let j1 = kraus_to_choi(&ch);
        let j2 = kraus_to_choi(&cc);
        let rho = random_density(2, &mut rng);
        let sig = random_density(3, &mut rng);
        let q1 = q_function(&rho, &sig, &j1).unwrap();
        let q2 = q_function(&rho, &sig, &j2).unwrap();
        assert!((q1 - q2).abs() < 1e-8, "{q1} vs {q2}");
    }
}

#[test]
fn composed_channel_complement_is_cptp_and_trace_one() {
    let mut rng = SplitMix64::new(105);
    let a = random_channel(3, 2, 2, &mut rng);
    let b = random_channel(2, 3, 2, &mut rng);
    let chained = compose(&b, &a).unwrap().reduced().unwrap();
    let comp = complementary(&chained);
    assert!(validate_cptp(&comp).unwrap().pass);
    for _ in 0..5 {
        let rho = random_density(3, &mut rng);
        let out = comp.apply_matrix(rho.matrix()).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-9);
    }
}

#[test]
fn qkernel_matches_reference_q_on_mixed_dimensions() {
    let mut rng = SplitMix64::new(106);
    for (din, dout, rank) in [(2, 2, 1), (2, 4, 2), (3, 2, 3)] {
        let ch = random_channel(din, dout, rank, &mut rng);
        let j = kraus_to_choi(&ch);
        let kernel = QKernel::from_channel(&ch);
        for _ in 0..4 {
            let rho = random_density(din, &mut rng);
            let sig = random_density(dout, &mut rng);
            let q_ref = q_function(&rho, &sig, &j).unwrap();
            let q_fast = kernel.q(rho.matrix(), &density_sqrt(&sig).unwrap()).unwrap();
            assert!((q_ref - q_fast).abs() < 1e-7, "{q_ref} vs {q_fast}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_projection_feasible_and_idempotent(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = SplitMix64::new(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.next_gaussian() * 3.0).collect();
        let p = numkernel::simplex_project(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let pp = numkernel::simplex_project(&p);
        for (a, b) in p.iter().zip(&pp) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fuchs_van_de_graaf_holds(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = SplitMix64::new(seed);
        let rho = random_density(dim, &mut rng);
        let sig = random_density(dim, &mut rng);
        let f = numkernel::fidelity(&rho, &sig).unwrap();
        let t = numkernel::trace_distance(&rho, &sig).unwrap();
        prop_assert!(1.0 - f.sqrt() <= t + 1e-8);
        prop_assert!(t <= (1.0 - f).sqrt() + 1e-8);
    }

    #[test]
    fn purification_marginal_is_exact(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = SplitMix64::new(seed);
        let rho = random_density(dim, &mut rng);
        let psi = numkernel::purify(&rho).unwrap();
        let marg = numkernel::trace_out_second(&psi.projector(), dim, dim).unwrap();
        prop_assert!(marg.sub_mat(rho.matrix()).frobenius_norm() < 1e-9);
    }

    #[test]
    fn hermitian_eig_reconstructs(seed in any::<u64>(), dim in 1usize..10) {
        let mut rng = SplitMix64::new(seed);
        let h = HermitianOperator::from_hermitian_parts(CMat::from_fn(dim, dim, |_, _| {
            let (re, im) = rng.next_gaussian_pair();
            numkernel::c(re, im)
        }));
        let eig = eig_hermitian(h.matrix()).unwrap();
        let rebuilt = eig.apply(|l| l);
        prop_assert!(
            rebuilt.sub_mat(h.matrix()).frobenius_norm()
                < 1e-10 * (1.0 + h.matrix().frobenius_norm())
        );
    }
}

#[test]
fn kraus_channel_rejects_nonpreserving_inputs() {
    let bad = vec![CMat::identity(2).scale_re(0.9)];
    assert!(KrausChannel::new(bad).is_err());
}
