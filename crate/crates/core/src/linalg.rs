//! Small dense linear algebra on fixed-size arrays.
//!
//! Every matrix in this crate is at most 16×16, so the routines here favour
//! plain loops over blocking or pivot heuristics.

use alloc::vec::Vec;
use num_complex::Complex64;
// Shadowed by inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{numerical, Result};

pub type C64 = Complex64;
pub type CMat<const N: usize> = [[C64; N]; N];
pub type RMat<const N: usize> = [[f64; N]; N];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity<const N: usize>() -> CMat<N> {
    let mut m = [[ZERO; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = [[ZERO; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = [[ZERO; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[j][i] = a[i][j];
        }
    }
    out
}

/// Largest absolute entry.
pub fn max_abs<const N: usize>(a: &CMat<N>) -> f64 {
    a.iter()
        .flat_map(|r| r.iter())
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// Inverse by LU decomposition with partial pivoting. Returns `None` when a
/// pivot falls below `1e-14` times the largest entry.
pub fn inverse<const N: usize>(a: &CMat<N>) -> Option<CMat<N>> {
    let scale = max_abs(a);
    if scale == 0.0 {
        return None;
    }
    let mut lu = *a;
    let mut inv = identity::<N>();
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&p, &q| lu[p][col].norm().total_cmp(&lu[q][col].norm()))
            .unwrap_or(col);
        if lu[pivot][col].norm() <= 1e-14 * scale {
            return None;
        }
        lu.swap(col, pivot);
        inv.swap(col, pivot);
        let d = ONE / lu[col][col];
        for row in 0..N {
            if row == col {
                continue;
            }
            let f = lu[row][col] * d;
            if f == ZERO {
                continue;
            }
            for k in 0..N {
                let (l, r) = (lu[col][k], inv[col][k]);
                lu[row][k] -= f * l;
                inv[row][k] -= f * r;
            }
        }
    }
    for row in 0..N {
        let d = ONE / lu[row][row];
        for k in 0..N {
            inv[row][k] *= d;
        }
    }
    Some(inv)
}

/// Reduce to upper Hessenberg form by Householder similarity transforms.
fn hessenberg<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut h = *a;
    for k in 0..N.saturating_sub(2) {
        let norm = (k + 1..N).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        let mut v = [ZERO; N];
        for i in k + 1..N {
            v[i] = h[i][k];
        }
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..N {
            let s: C64 = (k + 1..N).map(|i| v[i].conj() * h[i][j]).sum();
            for i in k + 1..N {
                h[i][j] -= 2.0 * v[i] * s;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..N {
            let s: C64 = (k + 1..N).map(|j| h[i][j] * v[j]).sum();
            for j in k + 1..N {
                h[i][j] -= 2.0 * s * v[j].conj();
            }
        }
    }
    h
}

/// Eigenvalues of a general complex matrix by shifted QR iteration on the
/// Hessenberg form (Wilkinson shifts, Givens rotations, deflation).
pub fn eigenvalues<const N: usize>(a: &CMat<N>) -> Result<[C64; N]> {
    let mut eig = [ZERO; N];
    if N == 0 {
        return Ok(eig);
    }
    let norm = max_abs(a);
    if norm == 0.0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut h = hessenberg(a);
    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[l - 1][l - 1].norm() + h[l][l].norm();
            let s = if s == 0.0 { norm } else { s };
            if h[l][l - 1].norm() <= eps * s {
                h[l][l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * N {
            return Err(numerical!("QR eigenvalue iteration did not converge for matrix {:?}", a));
        }
        let shift = if iter % 11 == 10 {
            h[hi][hi] + h[hi][hi - 1].norm()
        } else {
            let (p, q, r, s) = (h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
            let half_tr = 0.5 * (p + s);
            let disc = (0.25 * (p - s) * (p - s) + q * r).sqrt();
            let (e1, e2) = (half_tr + disc, half_tr - disc);
            if (e1 - s).norm() <= (e2 - s).norm() {
                e1
            } else {
                e2
            }
        };
        for k in l..=hi {
            h[k][k] -= shift;
        }
        let mut rotations = [(ZERO, ZERO); N];
        for k in l..hi {
            let (x, y) = (h[k][k], h[k + 1][k]);
            let r = x.norm().hypot(y.norm());
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            rotations[k] = (c, s);
            for j in l..=hi {
                let (u, w) = (h[k][j], h[k + 1][j]);
                h[k][j] = c.conj() * u + s.conj() * w;
                h[k + 1][j] = -s * u + c * w;
            }
        }
        for (k, &(c, s)) in rotations.iter().enumerate().take(hi).skip(l) {
            for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(l) {
                let (u, w) = (row[k], row[k + 1]);
                row[k] = u * c + w * s;
                row[k + 1] = -u * s.conj() + w * c.conj();
            }
        }
        for k in l..=hi {
            h[k][k] += shift;
        }
    }
    eig[0] = h[0][0];
    Ok(eig)
}

/// Solve the dense real system `a x = b` (`a` row-major `n × n`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(numerical!("zero matrix in linear solve"));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .unwrap_or(col);
        let pv = a[pivot * n + col];
        if pv.abs() <= 1e-13 * scale {
            return Err(numerical!("singular linear system (pivot {pv:.3e}, scale {scale:.3e})"));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Ok(x)
}

/// Eigenvalues `(min, max)` of the symmetric 2×2 matrix `[[a, b], [b, c]]`.
pub fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    (mean - radius, mean + radius)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky<const N: usize>(a: &RMat<N>) -> Option<RMat<N>> {
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 0.0) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}
