//! Thin SVD by Householder QR followed by one-sided (Hestenes) Jacobi on the
//! triangular factor.
//!
//! Jacobi orthogonalizes columns to a relative tolerance, so even tiny
//! singular values come with orthonormal vectors. Exactly zero columns get a
//! deterministic orthonormal completion. Everything runs serially in a fixed
//! order, which makes the output bit-reproducible.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Unsorted-sign thin SVD: `a = u * diag(s) * v^T` with `s` nonincreasing,
/// `u` of shape `n x r`, `v` of shape `p x r`, `r = min(n, p)`.
pub(crate) struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    if a.nrows() >= a.ncols() {
        tall_svd(a)
    } else {
        let t = tall_svd(&a.transpose())?;
        Ok(ThinSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

fn tall_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    let (n, p) = a.shape();
    debug_assert!(n >= p);
    let (q, r) = householder_qr(a);

    let mut b = r;
    let mut v = DMatrix::<f64>::identity(p, p);
    jacobi_sweeps(&mut b, &mut v)?;

    let norms: Vec<f64> = b.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut s = DVector::zeros(p);
    let mut u_r = DMatrix::zeros(p, p);
    let mut v_sorted = DMatrix::zeros(p, p);
    let mut missing = Vec::new();
    for (t, &j) in order.iter().enumerate() {
        s[t] = norms[j];
        v_sorted.set_column(t, &v.column(j));
        if norms[j] > 0.0 {
            u_r.set_column(t, &(b.column(j) / norms[j]));
        } else {
            missing.push(t);
        }
    }
    complete_basis(&mut u_r, &missing);

    Ok(ThinSvd {
        u: q * u_r,
        s,
        v: v_sorted,
    })
}

/// Rotates column pairs of `b` (and `v`) until every pair is orthogonal to
/// relative tolerance `sqrt(rows) * eps`.
fn jacobi_sweeps(b: &mut DMatrix<f64>, v: &mut DMatrix<f64>) -> Result<()> {
    let (m, p) = b.shape();
    let tol = (m as f64).sqrt() * f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                {
                    let bi = b.column(i);
                    let bj = b.column(j);
                    for r in 0..m {
                        alpha += bi[r] * bi[r];
                        beta += bj[r] * bj[r];
                        gamma += bi[r] * bj[r];
                    }
                }
                // A column whose squared norm underflows is numerically zero.
                if gamma == 0.0
                    || alpha == 0.0
                    || beta == 0.0
                    || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(b, i, j, c, s);
                rotate(v, i, j, c, s);
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(Error::NoConvergence)
}

fn rotate(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let x = m[(r, i)];
        let y = m[(r, j)];
        m[(r, i)] = c * x - s * y;
        m[(r, j)] = s * x + c * y;
    }
}

/// Fills the listed columns of `u` (currently zero) with unit vectors
/// orthogonal to every other column, trying standard basis vectors in order.
fn complete_basis(u: &mut DMatrix<f64>, missing: &[usize]) {
    let (n, cols) = u.shape();
    let mut filled: Vec<bool> = (0..cols).map(|t| !missing.contains(&t)).collect();
    let mut candidate = 0;
    for &t in missing {
        loop {
            assert!(candidate < n, "ran out of basis candidates");
            let mut w = DVector::<f64>::zeros(n);
            w[candidate] = 1.0;
            candidate += 1;
            // Two passes of Gram-Schmidt.
            for _ in 0..2 {
                for (o, &done) in filled.iter().enumerate() {
                    if done {
                        let col = u.column(o);
                        let proj = col.dot(&w);
                        w.axpy(-proj, &col, 1.0);
                    }
                }
            }
            let norm = w.norm();
            if norm > 0.5 {
                u.set_column(t, &(w / norm));
                filled[t] = true;
                break;
            }
        }
    }
}

/// Thin Householder QR of a tall matrix: `a = q * r`, `q` is `n x p` with
/// orthonormal columns and `r` is `p x p` upper triangular.
fn householder_qr(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, p) = a.shape();
    let mut work = a.clone();
    let mut reflectors: Vec<Option<DVector<f64>>> = Vec::with_capacity(p);

    for k in 0..p {
        let x = work.view((k, k), (n - k, 1)).column(0).into_owned();
        let norm = x.norm();
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let mut h = x;
        let alpha = if h[0] >= 0.0 { -norm } else { norm };
        h[0] -= alpha;
        let h_norm = h.norm();
        if h_norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        h /= h_norm;
        // Apply I - 2 h h^T to the trailing block.
        for j in k..p {
            let mut col = work.view_mut((k, j), (n - k, 1));
            let d = 2.0 * h.dot(&col.column(0));
            col.column_mut(0).axpy(-d, &h, 1.0);
        }
        reflectors.push(Some(h));
    }

    let r = DMatrix::from_fn(p, p, |i, j| if i <= j { work[(i, j)] } else { 0.0 });
    let mut q = DMatrix::<f64>::identity(n, p);
    for k in (0..p).rev() {
        if let Some(h) = &reflectors[k] {
            for j in 0..p {
                let mut col = q.view_mut((k, j), (n - k, 1));
                let d = 2.0 * h.dot(&col.column(0));
                col.column_mut(0).axpy(-d, h, 1.0);
            }
        }
    }
    (q, r)
}
