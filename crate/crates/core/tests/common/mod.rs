//! Independent oracles and random generators shared by the integration tests.
//! Nothing here calls the eigensolver or the library's matrix product.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spinbath::{ComplexMatrix, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Textbook triple-loop product.
pub fn naive_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum()).unwrap()
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring around a 30-term Taylor series.
pub fn taylor_exp(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let mut squarings = 0;
    let mut norm = one_norm(a);
    while norm > 0.25 {
        norm /= 2.0;
        squarings += 1;
    }
    let scaled = a.scale_real(0.5f64.powi(squarings));
    let mut term = ComplexMatrix::identity(n);
    let mut sum = ComplexMatrix::identity(n);
    for k in 1..=30 {
        term = naive_mul(&term, &scaled).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..squarings {
        sum = naive_mul(&sum, &sum);
    }
    sum
}

/// `exp(-i h t)` via [`taylor_exp`].
pub fn taylor_propagator(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    taylor_exp(&h.scale(c(0.0, -t)))
}

/// First-order product formula `(exp(-i a dt) exp(-i b dt))^steps`.
pub fn trotter_propagator(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    t: f64,
    steps: usize,
) -> ComplexMatrix {
    let dt = t / steps as f64;
    let step = naive_mul(&taylor_propagator(a, dt), &taylor_propagator(b, dt));
    let mut u = ComplexMatrix::identity(a.dim());
    for _ in 0..steps {
        u = naive_mul(&u, &step);
    }
    u
}

/// Partial trace over qubits by explicit summation over the traced bits.
/// `keep` lists 0-based qubit positions, most significant first.
pub fn index_sum_partial_trace(
    rho: &ComplexMatrix,
    n_qubits: usize,
    keep: &[usize],
) -> ComplexMatrix {
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !keep.contains(q)).collect();
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let place = |qubits: &[usize], value: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(k, _)| value >> (qubits.len() - 1 - k) & 1 == 1)
            .map(|(_, &q)| bit(q))
            .sum()
    };
    let dk = 1 << keep.len();
    ComplexMatrix::from_fn(dk, |i, j| {
        (0..1usize << traced.len())
            .map(|e| {
                let env = place(&traced, e);
                rho[(place(keep, i) | env, place(keep, j) | env)]
            })
            .sum()
    })
    .unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| c(gaussian(rng), gaussian(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random mixed state of the given rank (`G G^dagger / Tr`).
pub fn random_density(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> = (0..rank).map(|_| random_vector(rng, n)).collect();
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    ComplexMatrix::from_fn(n, |i, j| {
        cols.iter()
            .zip(&weights)
            .map(|(v, w)| v[i] * v[j].conj() * (w / total))
            .sum()
    })
    .unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| c(gaussian(rng), gaussian(rng))).unwrap();
    ComplexMatrix::from_fn(n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5).unwrap()
}

/// Random element of SU(2) from a unit quaternion.
pub fn random_su2(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let q: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (c(q[0] / n, q[1] / n), c(q[2] / n, q[3] / n));
    ComplexMatrix::from_rows(&[[a, -b.conj()], [b, a.conj()]]).unwrap()
}
