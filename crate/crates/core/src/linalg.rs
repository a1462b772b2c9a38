// Copyright 2026 The edgeburst Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense and sparse complex linear algebra used by the solvers.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_dense(m: &DMatrix<C>) -> Self {
        let mut triplets = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                if m[(i, j)] != C::new(0.0, 0.0) {
                    triplets.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), triplets)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[C], y: &mut [C]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = C::new(0.0, 0.0);
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[idx] * x[self.cols[idx]];
            }
            *out = acc;
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for idx in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[idx])] += self.vals[idx];
            }
        }
        m
    }
}

/// Frobenius norm of the commutator `[A, A^H]`, zero iff `A` is normal.
pub fn departure_from_normality(a: &DMatrix<C>) -> f64 {
    let ah = a.adjoint();
    (a * &ah - &ah * a).norm()
}

/// Complex Schur factorization `A = Q T Q^H`, `T` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: DMatrix<C>,
    pub t: DMatrix<C>,
}

impl ComplexSchur {
    pub fn new(a: &DMatrix<C>) -> Result<Self> {
        let n = a.nrows();
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 200 * n.max(10)).ok_or_else(|| {
            Error::Eigensolver {
                condition: departure_from_normality(a),
            }
        })?;
        let (q, mut t) = schur.unpack();
        let scale = t.norm().max(f64::MIN_POSITIVE);
        for j in 0..n {
            for i in j + 1..n {
                if t[(i, j)].norm() > 1e-10 * scale {
                    return Err(Error::Eigensolver {
                        condition: departure_from_normality(a),
                    });
                }
                t[(i, j)] = C::new(0.0, 0.0);
            }
        }
        Ok(Self { q, t })
    }

    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<C> {
        (0..self.dim()).map(|i| self.t[(i, i)]).collect()
    }

    /// Right eigenvectors (unit 2-norm columns, ordered as `eigenvalues`),
    /// by back substitution on the triangular factor.
    pub fn eigenvectors(&self) -> DMatrix<C> {
        let n = self.dim();
        let t = &self.t;
        let floor = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
        let mut y = DMatrix::<C>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = C::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = C::new(0.0, 0.0);
                for j in i + 1..=k {
                    s += t[(i, j)] * y[(j, k)];
                }
                let mut d = t[(i, i)] - lambda;
                if d.norm() < floor {
                    d = C::new(floor, 0.0);
                }
                y[(i, k)] = -s / d;
                // Keep the column representable; only its direction matters.
                let big = y[(i, k)].norm();
                if big > 1e100 {
                    for r in i..=k {
                        y[(r, k)] /= big;
                    }
                }
            }
        }
        let mut v = &self.q * y;
        for mut col in v.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= C::new(norm, 0.0);
            }
        }
        v
    }

    /// Diagonal of `X = ∫_0^∞ exp(-iAt) ψψ^H exp(iA^H t) dt`, which solves
    /// `A X - X A^H = -i ψψ^H`. Requires every eigenvalue in the open lower
    /// half-plane; the solve runs on the triangular factor and is backward
    /// stable irrespective of eigenvector conditioning.
    pub fn gramian_diagonal(&self, psi: &[C]) -> Result<Vec<f64>> {
        let n = self.dim();
        let t = &self.t;
        let c = self.q.adjoint() * DVector::from_column_slice(psi);
        let eigs = self.eigenvalues();
        if let Some(top) = eigs.iter().map(|e| e.im).reduce(f64::max) {
            if top >= 0.0 {
                return Err(Error::Domain(format!(
                    "non-decaying mode (max Im E = {top:.3e}); the time integral diverges"
                )));
            }
        }
        let minus_i = C::new(0.0, -1.0);
        let mut y = DMatrix::<C>::zeros(n, n);
        for i in (0..n).rev() {
            for j in (0..n).rev() {
                let mut r = minus_i * c[i] * c[j].conj();
                for k in i + 1..n {
                    r -= t[(i, k)] * y[(k, j)];
                }
                for k in j + 1..n {
                    r += y[(i, k)] * t[(j, k)].conj();
                }
                y[(i, j)] = r / (t[(i, i)] - t[(j, j)].conj());
            }
        }
        let z = &self.q * y;
        Ok((0..n)
            .map(|d| {
                let mut acc = C::new(0.0, 0.0);
                for l in 0..n {
                    acc += z[(d, l)] * self.q[(d, l)].conj();
                }
                acc.re
            })
            .collect())
    }
}

/// Solves `A x = b` for a banded `A` with `kl` sub- and `ku` super-diagonals
/// using Gaussian elimination with partial pivoting. `entry(i, j)` is only
/// queried inside the band.
pub fn solve_banded(
    n: usize,
    kl: usize,
    ku: usize,
    entry: impl Fn(usize, usize) -> C,
    rhs: &[C],
) -> Result<Vec<C>> {
    // Row i stores columns [i - kl, i + kl + ku]; the extra kl columns hold
    // fill-in from pivoting.
    let width = 2 * kl + ku + 1;
    let mut a = vec![C::new(0.0, 0.0); n * width];
    let at = |i: usize, j: usize| i * width + (j + kl - i);
    for i in 0..n {
        let lo = i.saturating_sub(kl);
        let hi = (i + ku).min(n - 1);
        for j in lo..=hi {
            a[at(i, j)] = entry(i, j);
        }
    }
    let mut b = rhs.to_vec();
    for k in 0..n {
        let last_row = (k + kl).min(n - 1);
        let last_col = (k + kl + ku).min(n - 1);
        let mut p = k;
        let mut best = a[at(k, k)].norm();
        for i in k + 1..=last_row {
            let v = a[at(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::Domain(format!(
                "singular banded matrix (zero pivot at column {k})"
            )));
        }
        if p != k {
            for j in k..=last_col {
                a.swap(at(k, j), at(p, j));
            }
            b.swap(k, p);
        }
        let pivot = a[at(k, k)];
        for i in k + 1..=last_row {
            let m = a[at(i, k)] / pivot;
            if m == C::new(0.0, 0.0) {
                continue;
            }
            a[at(i, k)] = C::new(0.0, 0.0);
            for j in k + 1..=last_col {
                let u = a[at(k, j)];
                a[at(i, j)] -= m * u;
            }
            let bk = b[k];
            b[i] -= m * bk;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let last_col = (i + kl + ku).min(n - 1);
        let mut s = b[i];
        for j in i + 1..=last_col {
            s -= a[at(i, j)] * x[j];
        }
        x[i] = s / a[at(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    /// Deterministic pseudo-random complex matrix.
    fn test_matrix(n: usize, seed: u64) -> DMatrix<C> {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(0.0, 2.0)), (1, 0, c(3.0, 0.0))],
        );
        assert_eq!(m.nnz(), 2);
        let mut y = vec![c(0.0, 0.0); 2];
        m.mul_vec_into(&[c(1.0, 0.0), c(1.0, 1.0)], &mut y);
        assert_eq!(y[0], c(1.0, 2.0) * c(1.0, 1.0));
        assert_eq!(y[1], c(3.0, 0.0));
        assert_eq!(m.norm_inf(), 5f64.sqrt().max(3.0));
    }

    #[test]
    fn schur_reconstructs() {
        let a = test_matrix(12, 7);
        let s = ComplexSchur::new(&a).unwrap();
        let back = &s.q * &s.t * s.q.adjoint();
        assert!((back - &a).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn eigenvectors_satisfy_eigen_equation() {
        let a = test_matrix(15, 3);
        let s = ComplexSchur::new(&a).unwrap();
        let v = s.eigenvectors();
        for (k, lambda) in s.eigenvalues().into_iter().enumerate() {
            let col = v.column(k);
            let r = &a * col - col * lambda;
            assert!(r.norm() < 1e-11, "mode {k}: residual {}", r.norm());
        }
    }

    #[test]
    fn gramian_solves_lyapunov_equation() {
        let n = 10;
        let mut a = test_matrix(n, 11);
        for i in 0..n {
            a[(i, i)] -= c(0.0, 3.0);
        }
        let s = ComplexSchur::new(&a).unwrap();
        let psi: Vec<C> = (0..n).map(|i| c(1.0 / (1.0 + i as f64), 0.3)).collect();
        let diag = s.gramian_diagonal(&psi).unwrap();

        // Reference: Kronecker-form solve of A X - X A^H = -i ψψ^H.
        let p = DVector::from_column_slice(&psi);
        let rhs = (p.clone() * p.adjoint()) * c(0.0, -1.0);
        let id = DMatrix::<C>::identity(n, n);
        let mut big = DMatrix::<C>::zeros(n * n, n * n);
        // vec(A X) = (I ⊗ A) vec X ; vec(X A^H) = (conj(A) ⊗ I) vec X.
        let abar = a.map(|z| z.conj());
        for (bi, bj) in index_pairs(n) {
            for i in 0..n {
                for j in 0..n {
                    big[(bi * n + i, bj * n + j)] += id[(bi, bj)] * a[(i, j)];
                    big[(bi * n + i, bj * n + j)] -= abar[(bi, bj)] * id[(i, j)];
                }
            }
        }
        let vec_rhs = DVector::from_iterator(n * n, rhs.iter().cloned());
        let x = big.lu().solve(&vec_rhs).unwrap();
        for d in 0..n {
            let expected = x[d * n + d];
            assert!(expected.im.abs() < 1e-10);
            assert!((diag[d] - expected.re).abs() < 1e-10 * expected.re.abs().max(1.0));
        }
    }

    fn index_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)))
    }

    #[test]
    fn gramian_rejects_growing_modes() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, -1.0), c(0.0, 0.5)]));
        let s = ComplexSchur::new(&a).unwrap();
        assert!(s.gramian_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn banded_solver_matches_dense_lu() {
        let n = 23;
        let (kl, ku) = (3, 2);
        let full = test_matrix(n, 5);
        let banded = DMatrix::from_fn(n, n, |i, j| {
            if j + kl >= i && j <= i + ku {
                full[(i, j)]
            } else {
                c(0.0, 0.0)
            }
        });
        let rhs: Vec<C> = (0..n).map(|i| c(i as f64, 1.0)).collect();
        let x = solve_banded(n, kl, ku, |i, j| banded[(i, j)], &rhs).unwrap();
        let reference = banded
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&rhs))
            .unwrap();
        for i in 0..n {
            assert!((x[i] - reference[i]).norm() < 1e-10 * (1.0 + reference[i].norm()));
        }
    }

    #[test]
    fn banded_solver_pivots_on_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap.
        let m = [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let x = solve_banded(2, 1, 1, |i, j| m[i][j], &[c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(x, vec![c(3.0, 0.0), c(2.0, 0.0)]);
        let z = [[c(0.0, 0.0); 2]; 2];
        assert!(solve_banded(2, 1, 1, |i, j| z[i][j], &[c(1.0, 0.0); 2]).is_err());
    }
}
