//! Dense complex linear-algebra kernel.
//!
//! Everything here is a pure function of its inputs. The decompositions are
//! backed by `nalgebra`; this module adds the conventions the rest of the
//! crate relies on:
//!
//! * singular values sorted in descending order,
//! * a fixed global phase for every returned eigen/singular vector (the
//!   largest-magnitude entry is made real and non-negative),
//! * rank decisions relative to the largest singular value.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Singular values at or below `DEFAULT_RANK_TOL * s_max` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Hermiticity and residual tolerance for [`hermitian_principal_eigpair`].
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Thin singular value decomposition `A = U diag(s) V^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: ComplexMatrix,
    /// Descending.
    pub s: Vec<f64>,
    /// `cols x k` with orthonormal columns.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.adjoint()
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        numerical_rank(&self.s, rank_tol)
    }
}

/// `a^H b`.
pub fn inner(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `a b^H`.
pub fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.adjoint()
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Number of entries of `s` (descending) strictly above `rank_tol * s[0]`.
pub fn numerical_rank(s: &[f64], rank_tol: f64) -> usize {
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().take_while(|&&x| x > rank_tol * smax).count(),
        _ => 0,
    }
}

/// Rotates `v` so its largest-magnitude entry is real and non-negative.
/// Returns the unit-modulus factor that was applied. Ties go to the lowest index.
pub fn normalize_phase(v: &mut ComplexVector) -> Complex64 {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    if best_mag <= 0.0 {
        return ONE;
    }
    let rot = v[best].conj() / best_mag;
    v.iter_mut().for_each(|z| *z *= rot);
    v[best] = Complex64::new(best_mag, 0.0);
    rot
}

fn ensure_nonempty(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Dimension(format!("{what}: empty matrix")));
    }
    if !all_finite(a) {
        return Err(Error::Domain(format!("{what}: non-finite entry")));
    }
    Ok(())
}

/// Largest eigenvalue of a Hermitian matrix and its unit-norm eigenvector.
///
/// `tol` bounds the accepted asymmetry `‖A − A^H‖_F ≤ tol·‖A‖_F`.
pub fn hermitian_principal_eigpair(a: &ComplexMatrix, tol: f64) -> Result<(f64, ComplexVector)> {
    ensure_nonempty(a, "hermitian_principal_eigpair")?;
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "hermitian_principal_eigpair: {}x{} is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = frobenius(a);
    let asym = frobenius(&(a - a.adjoint()));
    if asym > tol * scale {
        return Err(Error::NotHermitian {
            asymmetry: if scale > 0.0 { asym / scale } else { asym },
            tol,
        });
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut idx = 0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let mut v: ComplexVector = eig.eigenvectors.column(idx).into_owned();
    let n = vec_norm(&v);
    v.unscale_mut(n);
    normalize_phase(&mut v);
    Ok((eig.eigenvalues[idx], v))
}

/// Principal eigenpair of the rank-one matrix `x x^H`: `(‖x‖², x/‖x‖)`,
/// phase-normalized like [`hermitian_principal_eigpair`]. `None` when `x = 0`.
pub fn rank_one_principal(x: &ComplexVector) -> Option<(f64, ComplexVector)> {
    let n = vec_norm(x);
    if !n.is_finite() || n <= 0.0 {
        return None;
    }
    let mut v = x.unscale(n);
    normalize_phase(&mut v);
    Some((n * n, v))
}

/// Thin SVD with descending singular values and phase-normalized columns.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    ensure_nonempty(a, "svd")?;
    let fa = faer::Mat::<Complex64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let dec = fa.thin_svd().map_err(|e| Error::NoConvergence(format!("svd: {e:?}")))?;
    let (fu, fs, fv) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = fs.nrows();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        fs[j]
            .re
            .partial_cmp(&fs[i].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut u = ComplexMatrix::zeros(a.nrows(), k);
    let mut v = ComplexMatrix::zeros(a.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = ComplexVector::from_fn(a.nrows(), |i, _| fu[(i, src)]);
        let mut vc = ComplexVector::from_fn(a.ncols(), |i, _| fv[(i, src)]);
        let rot = normalize_phase(&mut uc);
        vc.iter_mut().for_each(|z| *z *= rot);
        u.set_column(dst, &uc);
        v.set_column(dst, &vc);
        s.push(fs[src].re);
    }
    Ok(Svd { u, s, v })
}

/// Moore–Penrose pseudo-inverse; singular values `≤ rank_tol·s_max` are dropped.
pub fn pseudo_inverse(a: &ComplexMatrix, rank_tol: f64) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.ncols(), a.nrows());
    if a.nrows() == 0 || a.ncols() == 0 {
        return out;
    }
    let Ok(dec) = svd(a) else {
        return out;
    };
    let r = dec.rank(rank_tol);
    for j in 0..r {
        let vj: ComplexVector = dec.v.column(j).into_owned();
        let uj: ComplexVector = dec.u.column(j).into_owned();
        out += outer(&vj, &uj).unscale(dec.s[j]);
    }
    out
}

/// Projects every entry onto the unit circle. Entries that are exactly zero
/// have no phase and are copied from `fallback`.
pub fn unit_modulus_project(t: &ComplexVector, fallback: &ComplexVector) -> Result<ComplexVector> {
    if t.len() != fallback.len() {
        return Err(Error::Dimension(format!(
            "unit_modulus_project: length {} vs fallback {}",
            t.len(),
            fallback.len()
        )));
    }
    Ok(ComplexVector::from_iterator(
        t.len(),
        t.iter().zip(fallback.iter()).map(|(ti, fi)| {
            if ti.norm() > 0.0 {
                Complex64::from_polar(1.0, ti.arg())
            } else {
                *fi
            }
        }),
    ))
}
