//! Shared random generators for the integration tests.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use aqss_core::numkernel::{c, cr, eig_hermitian, vec_dot, vec_norm, CMat, DensityMatrix, C64};
use aqss_core::channels::KrausChannel;
use aqss_core::rng::SplitMix64;

pub fn random_density(dim: usize, rng: &mut SplitMix64) -> DensityMatrix {
    let g = CMat::from_fn(dim, dim, |_, _| {
        let (re, im) = rng.next_gaussian_pair();
        c(re, im)
    });
    let p = g.mul_mat(&g.dagger());
    let tr = p.trace().re;
    DensityMatrix::new(p.scale_re(1.0 / tr)).unwrap()
}

/// Unitary from the eigenbasis of a random Hermitian matrix.
pub fn random_unitary(dim: usize, rng: &mut SplitMix64) -> CMat {
    let h = CMat::from_fn(dim, dim, |_, _| {
        let (re, im) = rng.next_gaussian_pair();
        c(re, im)
    })
    .hermitize();
    eig_hermitian(&h).unwrap().vectors
}

/// Random CPTP channel from a Gram-Schmidt Stinespring isometry.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    rank: usize,
    rng: &mut SplitMix64,
) -> KrausChannel {
    let rows = dim_out * rank;
    assert!(rows >= dim_in, "need dim_out * rank >= dim_in");
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim_in);
    while cols.len() < dim_in {
        let mut v: Vec<C64> = (0..rows)
            .map(|_| {
                let (re, im) = rng.next_gaussian_pair();
                c(re, im)
            })
            .collect();
        for u in &cols {
            let overlap = vec_dot(u, &v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= overlap * ui;
            }
        }
        let n = vec_norm(&v);
        if n < 1e-6 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= cr(n);
        }
        cols.push(v);
    }
    let mut kraus = Vec::with_capacity(rank);
    for e in 0..rank {
        let mut k = CMat::zeros(dim_out, dim_in);
        for m in 0..dim_out {
            for i in 0..dim_in {
                k.set(m, i, cols[i][e * dim_out + m]);
            }
        }
        kraus.push(k);
    }
    KrausChannel::new(kraus).expect("random Stinespring channel is CPTP")
}

/// Random pure state on `dim` from Gaussian amplitudes.
pub fn random_pure(dim: usize, rng: &mut SplitMix64) -> aqss_core::numkernel::PureState {
    let v: Vec<C64> = (0..dim)
        .map(|_| {
            let (re, im) = rng.next_gaussian_pair();
            c(re, im)
        })
        .collect();
    aqss_core::numkernel::PureState::normalized(v).unwrap()
}
