#![allow(dead_code)]

use qrlnas_core::qnet::Architecture;
use qrlnas_core::qsim::GateKind;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_gene<R: Rng>(rng: &mut R, kind: GateKind, n: usize) -> (GateKind, Vec<usize>) {
    if kind.arity() == 1 {
        (kind, vec![rng.gen_range(0..n)])
    } else {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        (kind, vec![a, b])
    }
}

/// Uniform kinds and wires; single-qubit kinds only when `n == 1`.
pub fn random_arch<R: Rng>(rng: &mut R, n: usize, len: usize) -> Architecture {
    let kinds: Vec<GateKind> = GateKind::ALL
        .iter()
        .copied()
        .filter(|k| n > 1 || k.arity() == 1)
        .collect();
    let genes = (0..len)
        .map(|_| {
            let kind = *kinds.choose(rng).unwrap();
            random_gene(rng, kind, n)
        })
        .collect();
    Architecture::new(n, genes).unwrap()
}

/// Every gate kind once plus `extra` random gates, shuffled.
pub fn all_kinds_arch<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Architecture {
    let mut kinds = GateKind::ALL.to_vec();
    for _ in 0..extra {
        kinds.push(*GateKind::ALL.choose(rng).unwrap());
    }
    kinds.shuffle(rng);
    let genes = kinds.into_iter().map(|k| random_gene(rng, k, n)).collect();
    Architecture::new(n, genes).unwrap()
}

pub fn random_params<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-4.0..4.0)).collect()
}
