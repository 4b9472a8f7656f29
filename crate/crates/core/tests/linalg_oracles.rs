//! Linear-algebra operations checked against independent brute-force oracles.

use mompca_core::matrix::{scatter_matrix, DataMatrix, SymmetricMatrix};
use mompca_core::metrics::subspace_distance;
use mompca_core::rng::CounterRng;
use mompca_core::{gram_schmidt_orthonormalize, top_eigenvectors, Basis};

fn gaussian_cols(p: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::new(seed, 1000);
    (0..p * d).map(|_| rng.next_gaussian()).collect()
}

fn random_basis(p: usize, d: usize, seed: u64) -> Basis<f64> {
    gram_schmidt_orthonormalize(p, d, &gaussian_cols(p, d, seed)).unwrap()
}

/// Dense p x p projector V V^T.
fn dense_projector(v: &Basis<f64>) -> Vec<f64> {
    let p = v.ambient_dim();
    let mut q = vec![0.0; p * p];
    for k in 0..v.subspace_dim() {
        let col = v.column(k);
        for i in 0..p {
            for j in 0..p {
                q[i * p + j] += col[i] * col[j];
            }
        }
    }
    q
}

/// Classical Jacobi eigensolver (largest off-diagonal pivot), written
/// independently of the library's eigensolver to act as its oracle.
fn jacobi_oracle(s: &SymmetricMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = s.dim();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| s.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..200 * n * n {
        // largest off-diagonal element
        let (mut p, mut q, mut big) = (0, 1, 0.0f64);
        for i in 0..n {
            for j in (i + 1)..n {
                if a[i][j].abs() > big {
                    big = a[i][j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if big < 1e-14 {
            break;
        }
        let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s_ = t * c;
        for k in 0..n {
            let akp = a[k][p];
            let akq = a[k][q];
            a[k][p] = c * akp - s_ * akq;
            a[k][q] = s_ * akp + c * akq;
        }
        for k in 0..n {
            let apk = a[p][k];
            let aqk = a[q][k];
            a[p][k] = c * apk - s_ * aqk;
            a[q][k] = s_ * apk + c * aqk;
        }
        for k in 0..n {
            let vkp = v[k][p];
            let vkq = v[k][q];
            v[k][p] = c * vkp - s_ * vkq;
            v[k][q] = s_ * vkp + c * vkq;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (a[k][k], (0..n).map(|i| v[i][k]).collect()))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = pairs.into_iter().map(|p| p.1).collect();
    (values, vectors)
}

#[test]
fn gram_schmidt_preserves_the_column_span() {
    let p = 5;
    let d = 3;
    let cols = gaussian_cols(p, d, 42);
    let basis = gram_schmidt_orthonormalize(p, d, &cols).unwrap();
    assert!(basis.orthonormality_residual() <= 1e-10);
    // every original column must project onto the result with no remainder
    for k in 0..d {
        let m: Vec<f64> = cols[k * p..(k + 1) * p].to_vec();
        let projected = basis.project(&m).unwrap();
        let norm: f64 = m.iter().map(|v| v * v).sum::<f64>().sqrt();
        let resid: f64 = m
            .iter()
            .zip(&projected)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(resid <= 1e-8 * norm, "column {k}: residual {resid}");
    }
}

#[test]
fn scatter_matches_the_double_loop_oracle() {
    let n = 100;
    let p = 4;
    let mut rng = CounterRng::new(7, 2000);
    let x =
        DataMatrix::new(n, p, (0..n * p).map(|_| rng.next_gaussian()).collect()).unwrap();
    let s = scatter_matrix(&x);
    for i in 0..p {
        for j in 0..p {
            let mut want = 0.0;
            for r in 0..n {
                want += x.get(r, i) * x.get(r, j);
            }
            assert!(
                (s.get(i, j) - want).abs() <= 1e-12 * want.abs().max(1.0),
                "entry ({i},{j})"
            );
        }
    }
}

#[test]
fn top_eigenvectors_agree_with_the_jacobi_oracle() {
    let p = 8;
    let d = 3;
    let mut rng = CounterRng::new(11, 3000);
    let mut s = SymmetricMatrix::zeros(p);
    for i in 0..p {
        for j in 0..=i {
            s.set(i, j, rng.next_gaussian());
        }
    }
    let (basis, values) = top_eigenvectors(&s, d).unwrap();
    let (oracle_vals, oracle_vecs) = jacobi_oracle(&s);
    for k in 0..d {
        assert!(
            (values[k] - oracle_vals[k]).abs() <= 1e-8 * s.frobenius_norm(),
            "eigenvalue {k}: {} vs {}",
            values[k],
            oracle_vals[k]
        );
    }
    // subspace agreement via principal angles
    let mut oracle_cols = vec![0.0; p * d];
    for k in 0..d {
        for i in 0..p {
            oracle_cols[k * p + i] = oracle_vecs[k][i];
        }
    }
    let oracle_basis = gram_schmidt_orthonormalize(p, d, &oracle_cols).unwrap();
    let (_, angle) = subspace_distance(&basis, &oracle_basis).unwrap();
    assert!(angle < 1e-6, "principal angle {angle}");
}

#[test]
fn projector_equals_the_dense_oracle() {
    let basis = random_basis(5, 2, 3);
    let mut rng = CounterRng::new(3, 4000);
    let x: Vec<f64> = (0..5).map(|_| rng.next_gaussian()).collect();
    let fast = basis.project(&x).unwrap();
    let q = dense_projector(&basis);
    for i in 0..5 {
        let want: f64 = (0..5).map(|j| q[i * 5 + j] * x[j]).sum();
        assert!((fast[i] - want).abs() <= 1e-12);
    }
    // idempotence
    let twice = basis.project(&fast).unwrap();
    for i in 0..5 {
        assert!((twice[i] - fast[i]).abs() <= 1e-10);
    }
}

#[test]
fn subspace_distance_matches_the_dense_projector_oracle() {
    let v1 = random_basis(6, 2, 21);
    let v2 = random_basis(6, 2, 22);
    let (frob, angle) = subspace_distance(&v1, &v2).unwrap();
    let q1 = dense_projector(&v1);
    let q2 = dense_projector(&v2);
    let want: f64 = q1
        .iter()
        .zip(&q2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!((frob - want).abs() <= 1e-10, "{frob} vs {want}");
    assert!(angle >= 0.0 && angle <= std::f64::consts::FRAC_PI_2);
    // symmetry
    let (frob_rev, angle_rev) = subspace_distance(&v2, &v1).unwrap();
    assert!((frob - frob_rev).abs() <= 1e-10);
    assert!((angle - angle_rev).abs() <= 1e-8);
}

#[test]
fn subspace_distance_triangle_inequality_spot_check() {
    for seed in 0..10u64 {
        let a = random_basis(7, 3, 100 + seed);
        let b = random_basis(7, 3, 200 + seed);
        let c = random_basis(7, 3, 300 + seed);
        let (ab, _) = subspace_distance(&a, &b).unwrap();
        let (bc, _) = subspace_distance(&b, &c).unwrap();
        let (ac, _) = subspace_distance(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-9, "seed {seed}: {ac} > {ab} + {bc}");
    }
}
