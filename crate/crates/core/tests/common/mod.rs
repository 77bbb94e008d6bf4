#![allow(dead_code)]

use rail::eval::DomainSuite;
use rail::store::{synthesize_domains, SynthConfig};
use rail::{Matrix, RhlParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random multi-domain regression problem: `splits[k]` holds the rows,
/// global labels and class list of domain `k`.
pub struct Problem {
    pub splits: Vec<(Matrix, Vec<usize>, Vec<usize>)>,
}

impl Problem {
    pub fn random(seed: u64, n_domains: usize, classes_per_domain: usize, rows_per_domain: usize, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let splits = (0..n_domains)
            .map(|k| {
                let x = Matrix::from_fn(rows_per_domain, dim, |_, _| rng.random_range(-1.0..1.0));
                let classes: Vec<usize> = (k * classes_per_domain..(k + 1) * classes_per_domain).collect();
                let labels = (0..rows_per_domain)
                    .map(|i| classes[if i < classes.len() { i } else { rng.random_range(0..classes.len()) }])
                    .collect();
                (x, labels, classes)
            })
            .collect();
        Problem { splits }
    }

    pub fn pooled(&self) -> (Matrix, Vec<usize>, Vec<usize>) {
        let rows: Vec<_> = self
            .splits
            .iter()
            .flat_map(|(x, _, _)| x.row_iter().map(|r| r.clone_owned()).collect::<Vec<_>>())
            .collect();
        let labels = self.splits.iter().flat_map(|(_, y, _)| y.clone()).collect();
        let classes = self.splits.iter().flat_map(|(_, _, c)| c.clone()).collect();
        (Matrix::from_rows(&rows), labels, classes)
    }
}

pub fn one_hot(labels: &[usize], classes: &[usize]) -> Matrix {
    Matrix::from_fn(labels.len(), classes.len(), |i, j| (labels[i] == classes[j]) as u8 as f64)
}

/// `relu(x · W)` written out with explicit loops.
pub fn relu_project(x: &Matrix, params: &RhlParams) -> Matrix {
    let w = params.weight();
    Matrix::from_fn(x.nrows(), w.ncols(), |i, j| {
        let mut s = 0.0;
        for k in 0..x.ncols() {
            s += x[(i, k)] * w[(k, j)];
        }
        s.max(0.0)
    })
}

pub fn rbf_loop(a: &Matrix, b: &Matrix, gamma: f64) -> Matrix {
    Matrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        let mut d2 = 0.0;
        for k in 0..a.ncols() {
            let t = a[(i, k)] - b[(j, k)];
            d2 += t * t;
        }
        (-gamma * d2).exp()
    })
}

/// Pooled primal solution `(W, M)` through an LU factorization.
pub fn primal_oracle(phi: &Matrix, y: &Matrix, lambda: f64) -> (Matrix, Matrix) {
    let n = phi.ncols();
    let a = phi.transpose() * phi + Matrix::identity(n, n) * lambda;
    let m = a.clone().lu().try_inverse().expect("invertible");
    let w = a.lu().solve(&(phi.transpose() * y)).expect("solvable");
    (w, m)
}

/// Pooled dual coefficients through an LU factorization.
pub fn dual_oracle(k: &Matrix, c: &Matrix, lambda: f64) -> Matrix {
    let n = k.nrows();
    (k + Matrix::identity(n, n) * lambda).lu().solve(c).expect("solvable")
}

/// Synthetic suite used by the protocol tests.
pub fn suite(n_domains: usize, seed: u64) -> DomainSuite {
    let mut sc = SynthConfig::new(n_domains, 5, 24, 32, 0.8, seed);
    sc.noise = 0.5;
    sc.text_noise = 1.0;
    sc.text_alignment = 0.03;
    DomainSuite::from_synthetic(&synthesize_domains(&sc).unwrap()).unwrap()
}

pub fn rel(a: &Matrix, b: &Matrix) -> f64 {
    rail::linalg::relative_frobenius(a, b)
}
