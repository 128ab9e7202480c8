//! Small dense complex linear algebra over the generic scalar.
//!
//! Everything here targets matrices of dimension up to a few hundred
//! (operators) or a few thousand (vectorized generators), where simple
//! cache-friendly loops are sufficient. Routines return [`Error`] instead of
//! panicking on numerical breakdown so callers can attach model context.

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;
use ndarray::{Array1, Array2};
use num_complex::Complex;

/// `A†`.
pub fn adjoint<R: Scalar>(a: &Array2<Complex<R>>) -> Array2<Complex<R>> {
    let (n, m) = a.dim();
    Array2::from_shape_fn((m, n), |(i, j)| a[[j, i]].conj())
}

/// Dense product `A B` (ikj loop order over contiguous rows).
pub fn matmul<R: Scalar>(a: &Array2<Complex<R>>, b: &Array2<Complex<R>>) -> Array2<Complex<R>> {
    let (n, k) = a.dim();
    let (kb, m) = b.dim();
    assert_eq!(k, kb, "inner dimensions must agree");
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for l in 0..k {
            let ail = a[[i, l]];
            if ail == Complex::new(R::zero(), R::zero()) {
                continue;
            }
            let brow = b.row(l);
            let mut orow = out.row_mut(i);
            for j in 0..m {
                orow[j] = orow[j] + ail * brow[j];
            }
        }
    }
    out
}

/// Kronecker product `A ⊗ B`.
pub fn kron<R: Scalar>(a: &Array2<Complex<R>>, b: &Array2<Complex<R>>) -> Array2<Complex<R>> {
    let (na, ma) = a.dim();
    let (nb, mb) = b.dim();
    let mut out = Array2::zeros((na * nb, ma * mb));
    for i in 0..na {
        for j in 0..ma {
            let aij = a[[i, j]];
            for k in 0..nb {
                for l in 0..mb {
                    out[[i * nb + k, j * mb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Complex identity.
pub fn identity<R: Scalar>(n: usize) -> Array2<Complex<R>> {
    Array2::from_diag_elem(n, Complex::new(R::one(), R::zero()))
}

/// `tr A`.
pub fn trace<R: Scalar>(a: &Array2<Complex<R>>) -> Complex<R> {
    a.diag().iter().copied().fold(Complex::new(R::zero(), R::zero()), |s, x| s + x)
}

/// Frobenius norm.
pub fn frobenius_norm<R: Scalar>(a: &Array2<Complex<R>>) -> R {
    a.iter().map(|x| x.norm_sqr()).fold(R::zero(), |s, x| s + x).sqrt()
}

/// Largest entry magnitude.
pub fn max_abs<R: Scalar>(a: &Array2<Complex<R>>) -> R {
    a.iter().map(|x| x.norm()).fold(R::zero(), R::max)
}

/// Induced 1-norm (max absolute column sum).
pub fn one_norm<R: Scalar>(a: &Array2<Complex<R>>) -> R {
    let (n, m) = a.dim();
    let mut best = R::zero();
    for j in 0..m {
        let mut s = R::zero();
        for i in 0..n {
            s += a[[i, j]].norm();
        }
        best = best.max(s);
    }
    best
}

/// Largest deviation from hermiticity, `max |A - A†|`.
pub fn hermiticity_deviation<R: Scalar>(a: &Array2<Complex<R>>) -> R {
    let n = a.nrows();
    let mut dev = R::zero();
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    dev
}

/// Cholesky probe of `A + shift I`. Returns true when the shifted matrix
/// admits a Cholesky factorization, i.e. all its eigenvalues exceed zero;
/// used as a cheap lower bound `λ_min(A) > -shift`.
pub fn cholesky_probe<R: Scalar>(a: &Array2<Complex<R>>, shift: R) -> bool {
    let n = a.nrows();
    let mut l = a.clone();
    for i in 0..n {
        l[[i, i]] += Complex::new(shift, R::zero());
    }
    for j in 0..n {
        let mut d = l[[j, j]].re;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= R::zero() || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = Complex::new(d, R::zero());
        for i in j + 1..n {
            let mut s = l[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

/// LU factorization with partial pivoting.
pub struct LuFactors<R: Scalar> {
    lu: Array2<Complex<R>>,
    piv: Vec<usize>,
}

impl<R: Scalar> LuFactors<R> {
    /// Factors a square matrix; errors when a pivot falls below
    /// `n * eps * max|A|` (numerically singular).
    pub fn factor(a: &Array2<Complex<R>>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        let tiny = R::of(n as f64) * R::epsilon() * max_abs(a).max(R::one());
        for k in 0..n {
            let mut p = k;
            let mut best = lu[[k, k]].norm();
            for i in k + 1..n {
                let v = lu[[i, k]].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < tiny {
                return Err(Error::LinalgFailure(format!(
                    "singular system: pivot {:e} at column {k} of {n}",
                    best.as_f64()
                )));
            }
            if p != k {
                for j in 0..n {
                    let t = lu[[k, j]];
                    lu[[k, j]] = lu[[p, j]];
                    lu[[p, j]] = t;
                }
            }
            piv.push(p);
            let d = lu[[k, k]];
            for i in k + 1..n {
                let m = lu[[i, k]] / d;
                lu[[i, k]] = m;
                if m != Complex::new(R::zero(), R::zero()) {
                    for j in k + 1..n {
                        let s = lu[[k, j]];
                        lu[[i, j]] = lu[[i, j]] - m * s;
                    }
                }
            }
        }
        Ok(Self { lu, piv })
    }

    /// Packed factors, for growth diagnostics.
    pub fn matrix_ref(&self) -> &Array2<Complex<R>> {
        &self.lu
    }

    /// Row-swap record, for diagnostics.
    pub fn pivots_ref(&self) -> &[usize] {
        &self.piv
    }

    /// Solves `A x = b` in place. The packed factors carry fully swapped
    /// rows, so all recorded swaps apply to `b` before the triangular
    /// solves.
    pub fn solve_in_place(&self, b: &mut [Complex<R>]) {
        let n = self.piv.len();
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let bk = b[k];
            if bk != Complex::new(R::zero(), R::zero()) {
                for i in k + 1..n {
                    let l = self.lu[[i, k]];
                    b[i] = b[i] - l * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..n {
                s = s - self.lu[[k, j]] * b[j];
            }
            b[k] = s / self.lu[[k, k]];
        }
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Array2<Complex<R>>) -> Array2<Complex<R>> {
        let n = self.piv.len();
        let m = b.ncols();
        let mut out = b.clone();
        let mut col = vec![Complex::new(R::zero(), R::zero()); n];
        for j in 0..m {
            for i in 0..n {
                col[i] = out[[i, j]];
            }
            self.solve_in_place(&mut col);
            for i in 0..n {
                out[[i, j]] = col[i];
            }
        }
        out
    }
}

/// Convenience one-shot solve of `A x = b`.
pub fn solve<R: Scalar>(a: &Array2<Complex<R>>, b: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
    let f = LuFactors::factor(a)?;
    let mut x = b.to_vec();
    f.solve_in_place(&mut x);
    Ok(x)
}

/// Matrix exponential by Pade(13) with scaling and squaring.
///
/// Coefficients and the order-13 evaluation scheme follow the standard
/// double-precision tuning (scaling threshold 5.372 on the 1-norm); for f32
/// the same threshold costs a little accuracy, which the f32 tier accepts.
pub fn expm<R: Scalar>(a: &Array2<Complex<R>>) -> Result<Array2<Complex<R>>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let theta13 = R::of(5.371920351148152);
    let norm = one_norm(a);
    let mut s = 0u32;
    if norm > theta13 {
        s = (norm / theta13).log2().ceil().to_u32().unwrap_or(0).max(1);
    }
    let scale = Complex::new(R::of(0.5).powi(s as i32), R::zero());
    let a = a.mapv(|x| x * scale);
    let b: Vec<Complex<R>> = B.iter().map(|&c| Complex::new(R::of(c), R::zero())).collect();

    let a2 = matmul(&a, &a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);
    let eye = identity::<R>(n);

    // U = A [A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let mut w1 = Array2::zeros((n, n));
    for ((i, j), v) in w1.indexed_iter_mut() {
        *v = b[13] * a6[[i, j]] + b[11] * a4[[i, j]] + b[9] * a2[[i, j]];
    }
    let mut u_inner = matmul(&a6, &w1);
    for ((i, j), v) in u_inner.indexed_iter_mut() {
        *v = *v + b[7] * a6[[i, j]] + b[5] * a4[[i, j]] + b[3] * a2[[i, j]] + b[1] * eye[[i, j]];
    }
    let u = matmul(&a, &u_inner);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut w2 = Array2::zeros((n, n));
    for ((i, j), v) in w2.indexed_iter_mut() {
        *v = b[12] * a6[[i, j]] + b[10] * a4[[i, j]] + b[8] * a2[[i, j]];
    }
    let mut v = matmul(&a6, &w2);
    for ((i, j), val) in v.indexed_iter_mut() {
        *val = *val + b[6] * a6[[i, j]] + b[4] * a4[[i, j]] + b[2] * a2[[i, j]] + b[0] * eye[[i, j]];
    }

    // (V - U) F = (V + U)
    let mut vm = Array2::zeros((n, n));
    let mut vp = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            vm[[i, j]] = v[[i, j]] - u[[i, j]];
            vp[[i, j]] = v[[i, j]] + u[[i, j]];
        }
    }
    let f = LuFactors::factor(&vm)?;
    let mut e = f.solve_matrix(&vp);
    for _ in 0..s {
        e = matmul(&e, &e);
    }
    Ok(e)
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Householder tridiagonalization followed by implicit-shift QL; returns
/// eigenvalues ascending with orthonormal eigenvectors in matching columns.
pub fn eigh_real<R: Scalar>(a: &Array2<R>) -> Result<(Array1<R>, Array2<R>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut z = a.clone();
    let mut d = vec![R::zero(); n];
    let mut e = vec![R::zero(); n];
    tred2(&mut z, &mut d, &mut e);
    tql2(&mut z, &mut d, &mut e)?;
    // Ascending sort; QL leaves values nearly sorted already.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalues are finite"));
    let vals = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vecs = Array2::zeros((n, n));
    for (newcol, &oldcol) in order.iter().enumerate() {
        for r in 0..n {
            vecs[[r, newcol]] = z[[r, oldcol]];
        }
    }
    Ok((vals, vecs))
}

/// Householder reduction to tridiagonal form with accumulated transforms.
/// On exit `z` holds the orthogonal matrix, `d` the diagonal, `e[1..]` the
/// subdiagonal.
fn tred2<R: Scalar>(z: &mut Array2<R>, d: &mut [R], e: &mut [R]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i;
        let mut h = R::zero();
        if l > 1 {
            let mut scale = R::zero();
            for k in 0..l {
                scale += z[[i, k]].abs();
            }
            if scale == R::zero() {
                e[i] = z[[i, l - 1]];
            } else {
                for k in 0..l {
                    z[[i, k]] = z[[i, k]] / scale;
                    h += z[[i, k]] * z[[i, k]];
                }
                let mut f = z[[i, l - 1]];
                let g = if f >= R::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[[i, l - 1]] = f - g;
                f = R::zero();
                for j in 0..l {
                    z[[j, i]] = z[[i, j]] / h;
                    let mut g = R::zero();
                    for k in 0..=j {
                        g += z[[j, k]] * z[[i, k]];
                    }
                    for k in j + 1..l {
                        g += z[[k, j]] * z[[i, k]];
                    }
                    e[j] = g / h;
                    f += e[j] * z[[i, j]];
                }
                let hh = f / (h + h);
                for j in 0..l {
                    let f = z[[i, j]];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[[j, k]] = z[[j, k]] - f * e[k] - g * z[[i, k]];
                    }
                }
            }
        } else {
            e[i] = z[[i, l - 1]];
        }
        d[i] = h;
    }
    d[0] = R::zero();
    e[0] = R::zero();
    for i in 0..n {
        let l = i;
        if d[i] != R::zero() {
            for j in 0..l {
                let mut g = R::zero();
                for k in 0..l {
                    g += z[[i, k]] * z[[k, j]];
                }
                for k in 0..l {
                    z[[k, j]] = z[[k, j]] - g * z[[k, i]];
                }
            }
        }
        d[i] = z[[i, i]];
        z[[i, i]] = R::one();
        for j in 0..l {
            z[[j, i]] = R::zero();
            z[[i, j]] = R::zero();
        }
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, rotating the
/// accumulated transforms in `z` along.
fn tql2<R: Scalar>(z: &mut Array2<R>, d: &mut [R], e: &mut [R]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = R::zero();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= R::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::LinalgFailure(format!(
                    "QL did not converge within 50 sweeps at row {l} of {n}"
                )));
            }
            let two = R::of(2.0);
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(R::one());
            let sign_r = if g >= R::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = R::one();
            let mut c = R::one();
            let mut p = R::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == R::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = R::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = R::zero();
        }
    }
    Ok(())
}

/// Eigendecomposition of a complex Hermitian matrix.
///
/// Reduces `A = B + iC` to the real symmetric `[[B, -C], [C, B]]`, whose
/// spectrum is that of `A` with every eigenvalue doubled and whose
/// eigenvectors `[p; q]` map back to `p + iq`. Doubled eigenspaces are
/// deflated by complex Gram-Schmidt, so clustered eigenvalues may mix within
/// their cluster; residuals stay below the clustering width
/// `64 n eps max(1, |A|_F)`. Returns eigenvalues ascending with orthonormal
/// eigenvector columns.
pub fn eigh<R: Scalar>(a: &Array2<Complex<R>>) -> Result<(Array1<R>, Array2<Complex<R>>)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut m = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let x = (a[[i, j]] + a[[j, i]].conj()) * Complex::new(R::of(0.5), R::zero());
            m[[i, j]] = x.re;
            m[[n + i, n + j]] = x.re;
            m[[i, n + j]] = -x.im;
            m[[n + i, j]] = x.im;
        }
    }
    let (dvals, dvecs) = eigh_real(&m)?;

    let scale = frobenius_norm(a).max(R::one());
    let cluster_tol = R::of(64.0 * n as f64) * R::epsilon() * scale;
    let mut vals = Array1::zeros(n);
    let mut vecs: Array2<Complex<R>> = Array2::zeros((n, n));
    let mut kept = 0usize;
    let mut idx = 0usize;
    while idx < 2 * n {
        // Chain-group doubled eigenvalues.
        let mut hi = idx + 1;
        while hi < 2 * n && dvals[hi] - dvals[hi - 1] <= cluster_tol {
            hi += 1;
        }
        let group = idx..hi;
        let want = group.len() / 2;
        if group.len() % 2 != 0 {
            return Err(Error::LinalgFailure(
                "embedded spectrum lost its exact doubling; matrix may be non-Hermitian".into(),
            ));
        }
        let mean = {
            let mut s = R::zero();
            for g in group.clone() {
                s += dvals[g];
            }
            s / R::of(group.len() as f64)
        };
        let mut taken = 0usize;
        for g in group {
            if taken == want {
                break;
            }
            let mut cand: Vec<Complex<R>> =
                (0..n).map(|r| Complex::new(dvecs[[r, g]], dvecs[[n + r, g]])).collect();
            // Two-pass Gram-Schmidt against vectors kept so far in this group.
            for _ in 0..2 {
                for pcol in (kept - taken)..kept {
                    let mut ip = Complex::new(R::zero(), R::zero());
                    for r in 0..n {
                        ip = ip + vecs[[r, pcol]].conj() * cand[r];
                    }
                    for r in 0..n {
                        let sub = vecs[[r, pcol]] * ip;
                        cand[r] = cand[r] - sub;
                    }
                }
            }
            let nrm = cand.iter().map(|x| x.norm_sqr()).fold(R::zero(), |s, x| s + x).sqrt();
            if nrm > R::of(1e-3) {
                for r in 0..n {
                    vecs[[r, kept]] = cand[r] / Complex::new(nrm, R::zero());
                }
                vals[kept] = mean;
                kept += 1;
                taken += 1;
            }
        }
        if taken != want {
            return Err(Error::LinalgFailure(
                "failed to extract a full complex basis from a doubled eigenspace".into(),
            ));
        }
        idx = hi;
    }
    debug_assert_eq!(kept, n);
    Ok((vals, vecs))
}

/// Hermitian square root of a positive semidefinite matrix; eigenvalues
/// below zero (allowed within `clip`) are clamped to zero.
pub fn sqrtm_psd<R: Scalar>(a: &Array2<Complex<R>>, clip: R) -> Result<Array2<Complex<R>>> {
    let n = a.nrows();
    let (vals, vecs) = eigh(a)?;
    for &v in vals.iter() {
        if v < -clip {
            return Err(Error::LinalgFailure(format!(
                "matrix is not positive semidefinite: eigenvalue {:e}",
                v.as_f64()
            )));
        }
    }
    let mut out = Array2::zeros((n, n));
    for k in 0..n {
        let s = vals[k].max(R::zero()).sqrt();
        if s == R::zero() {
            continue;
        }
        let sc = Complex::new(s, R::zero());
        for i in 0..n {
            let vik = vecs[[i, k]] * sc;
            for j in 0..n {
                out[[i, j]] = out[[i, j]] + vik * vecs[[j, k]].conj();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Deterministic scramble for test matrices; not a statistical RNG.
    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random_hermitian(n: usize, seed: u64) -> Array2<C64> {
        let mut s = seed.wrapping_mul(2654435761).wrapping_add(1);
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = c(lcg(&mut s), lcg(&mut s));
            }
        }
        let ad = adjoint(&a);
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] = (a[[i, j]] + ad[[i, j]]) * c(0.5, 0.0);
            }
        }
        a
    }

    #[test]
    fn eigh_real_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenpairs 1:(1,-1)/sqrt2 and 3:(1,1)/sqrt2.
        let a: Array2<f64> = ndarray::arr2(&[[2.0, 1.0], [1.0, 2.0]]);
        let (vals, vecs) = eigh_real(&a).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        let r = (vecs[[0, 1]] / vecs[[1, 1]] - 1.0).abs();
        assert!(r < 1e-13, "symmetric eigenvector expected, ratio dev {r}");
    }

    #[test]
    fn eigh_real_residuals_and_orthonormality() {
        for n in [1usize, 2, 3, 5, 9, 24] {
            let mut s = 77 + n as u64;
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in i..n {
                    let v = lcg(&mut s) * 3.0;
                    a[[i, j]] = v;
                    a[[j, i]] = v;
                }
            }
            let (vals, vecs) = eigh_real(&a).unwrap();
            for k in 0..n {
                for i in 0..n {
                    let mut av = 0.0;
                    for j in 0..n {
                        av += a[[i, j]] * vecs[[j, k]];
                    }
                    assert!(
                        (av - vals[k] * vecs[[i, k]]).abs() < 1e-12,
                        "residual too large at n={n} k={k}"
                    );
                }
            }
            for p in 0..n {
                for q in 0..n {
                    let mut ip = 0.0;
                    for i in 0..n {
                        ip += vecs[[i, p]] * vecs[[i, q]];
                    }
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigh_complex_residuals_orthonormality_and_degeneracy() {
        for n in [1usize, 2, 4, 8, 17] {
            let a = random_hermitian(n, 1000 + n as u64);
            let (vals, vecs) = eigh(&a).unwrap();
            for k in 0..n {
                for i in 0..n {
                    let mut av = c(0.0, 0.0);
                    for j in 0..n {
                        av += a[[i, j]] * vecs[[j, k]];
                    }
                    let dev = (av - vecs[[i, k]] * c(vals[k], 0.0)).norm();
                    assert!(dev < 1e-11, "residual {dev} at n={n}");
                }
            }
            for p in 0..n {
                for q in 0..n {
                    let mut ip = c(0.0, 0.0);
                    for i in 0..n {
                        ip += vecs[[i, p]].conj() * vecs[[i, q]];
                    }
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert!((ip - c(want, 0.0)).norm() < 1e-11);
                }
            }
            for k in 1..n {
                assert!(vals[k] >= vals[k - 1] - 1e-13);
            }
        }
        // Exact degeneracy: identity plus a rank-one bump.
        let mut a = identity::<f64>(5);
        a[[2, 2]] = c(4.0, 0.0);
        let (vals, _) = eigh(&a).unwrap();
        assert!((vals[4] - 4.0).abs() < 1e-13);
        for k in 0..4 {
            assert!((vals[k] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_solves_and_flags_singularity() {
        // No diagonal boost: generic random matrices force row swaps at
        // almost every elimination step.
        for n in [12usize, 100] {
            let mut s = 5 + n as u64;
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    a[[i, j]] = c(lcg(&mut s), lcg(&mut s));
                }
            }
            let x_true: Vec<C64> = (0..n).map(|_| c(lcg(&mut s), lcg(&mut s))).collect();
            let mut b = vec![c(0.0, 0.0); n];
            for i in 0..n {
                let mut acc = c(0.0, 0.0);
                for j in 0..n {
                    acc += a[[i, j]] * x_true[j];
                }
                b[i] = acc;
            }
            let x = solve(&a, &b).unwrap();
            let fwd: f64 =
                x.iter().zip(&x_true).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
            assert!(fwd < 1e-9, "n={n}: forward error {fwd:e}");
            for i in 0..n {
                let mut ax = c(0.0, 0.0);
                for j in 0..n {
                    ax += a[[i, j]] * x[j];
                }
                assert!((ax - b[i]).norm() < 1e-11, "n={n}: backward residual");
            }
        }

        // Exchange matrix: every step pivots, solution is exact.
        let n = 9;
        let mut ex = Array2::zeros((n, n));
        for i in 0..n {
            ex[[i, n - 1 - i]] = c((i + 2) as f64, 0.0);
        }
        let b: Vec<C64> = (0..n).map(|i| c(i as f64, -(i as f64))).collect();
        let x = solve(&ex, &b).unwrap();
        for i in 0..n {
            let want = b[n - 1 - i] / c((n - i + 1) as f64, 0.0);
            assert!((x[i] - want).norm() < 1e-14);
        }

        let mut sing = Array2::zeros((4, 4));
        let mut s = 11u64;
        for i in 0..4 {
            for j in 0..4 {
                sing[[i, j]] = c(lcg(&mut s), lcg(&mut s));
            }
        }
        for j in 0..4 {
            let v = sing[[0, j]];
            sing[[1, j]] = v;
        }
        assert!(LuFactors::factor(&sing).is_err());
    }

    #[test]
    fn expm_matches_analytic_cases() {
        // Nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]].
        let a = ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e[[0, 1]] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(e[[1, 0]].norm() < 1e-15);

        // Diagonal with large entry exercises scaling-squaring.
        let a = ndarray::arr2(&[[c(-30.0, 7.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, -1.0)]]);
        let e = expm(&a).unwrap();
        let want00 = C64::from_polar((-30.0f64).exp(), 7.0);
        let want11 = C64::from_polar(2.0f64.exp(), -1.0);
        assert!((e[[0, 0]] - want00).norm() < 1e-13 * want00.norm().max(1.0));
        assert!((e[[1, 1]] - want11).norm() < 1e-13 * want11.norm());

        // Skew-Hermitian exponent gives a unitary; checked via eigh route.
        let h = random_hermitian(9, 42);
        let ih = h.mapv(|x| x * c(0.0, -1.0));
        let u = expm(&ih).unwrap();
        let udu = matmul(&adjoint(&u), &u);
        let dev = {
            let mut d = 0.0f64;
            for i in 0..9 {
                for j in 0..9 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    d = d.max((udu[[i, j]] - c(want, 0.0)).norm());
                }
            }
            d
        };
        assert!(dev < 1e-12, "unitarity deviation {dev}");

        // Cross-validate against spectral exp(-iH).
        let (vals, vecs) = eigh(&h).unwrap();
        let mut spect: Array2<C64> = Array2::zeros((9, 9));
        for k in 0..9 {
            let ph = C64::from_polar(1.0, -vals[k]);
            for i in 0..9 {
                for j in 0..9 {
                    spect[[i, j]] += vecs[[i, k]] * ph * vecs[[j, k]].conj();
                }
            }
        }
        for i in 0..9 {
            for j in 0..9 {
                assert!((spect[[i, j]] - u[[i, j]]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn cholesky_probe_bounds_minimum_eigenvalue() {
        let h = random_hermitian(6, 9);
        let (vals, _) = eigh(&h).unwrap();
        let lo = vals[0];
        assert!(cholesky_probe(&h, -lo + 1e-9));
        assert!(!cholesky_probe(&h, -lo - 1e-6));
    }

    #[test]
    fn sqrtm_squares_back() {
        let g = random_hermitian(5, 21);
        let psd = matmul(&g, &adjoint(&g));
        let r = sqrtm_psd(&psd, 1e-12).unwrap();
        let rr = matmul(&r, &r);
        for i in 0..5 {
            for j in 0..5 {
                assert!((rr[[i, j]] - psd[[i, j]]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn kron_and_trace_basics() {
        let a = ndarray::arr2(&[[c(1.0, 0.0), c(2.0, 0.0)], [c(3.0, 0.0), c(4.0, 0.0)]]);
        let b = identity::<f64>(2);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 0]], c(1.0, 0.0));
        assert_eq!(k[[1, 3]], c(2.0, 0.0));
        assert_eq!(k[[2, 0]], c(3.0, 0.0));
        assert_eq!(trace(&k), c(10.0, 0.0));
    }
}
