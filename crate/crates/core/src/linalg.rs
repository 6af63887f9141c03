//! Dense complex linear-algebra helpers shared by the signal-model modules.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `a ⊗ b` for dense complex matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMat::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Block-diagonal assembly of square blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Keeps only the diagonal of `a`.
pub fn diag_part(a: &CMat) -> CMat {
    let n = a.nrows();
    CMat::from_fn(n, n, |i, j| if i == j { a[(i, i)] } else { ZERO })
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn real_trace(a: &CMat) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// Largest entry of `|a - a^H|`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenpairs of a Hermitian matrix sorted by descending eigenvalue, ties by
/// original eigensolver index.
pub fn hermitian_eigen_desc(a: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(a.nrows(), order.len(), |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Clamps negative eigenvalues to zero and re-symmetrizes.
pub fn psd_repair(a: &CMat) -> CMat {
    let eig = hermitian_part(a).symmetric_eigen();
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return hermitian_part(a);
    }
    let n = a.nrows();
    let mut out = CMat::zeros(n, n);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        out += (&v * v.adjoint()).scale(lam);
    }
    hermitian_part(&out)
}

/// Polar factor `U V^H` of a tall matrix (nearest semi-unitary matrix).
pub fn polar_factor(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

/// Moore-Penrose pseudoinverse with a relative singular-value cutoff. Returns
/// the pseudoinverse and the condition number of the retained spectrum
/// (infinite when any singular value falls under the cutoff).
pub fn pseudoinverse(a: &CMat, rel_cutoff: f64) -> (CMat, f64) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = rel_cutoff * smax;
    let mut out = CMat::zeros(a.ncols(), a.nrows());
    let mut dropped = false;
    for (i, &sv) in s.iter().enumerate() {
        if sv <= cutoff || sv == 0.0 {
            dropped = true;
            continue;
        }
        let vi = v_t.row(i).adjoint();
        let ui = u.column(i).adjoint();
        out += (vi * ui).scale(1.0 / sv);
    }
    let cond = if dropped || smin == 0.0 { f64::INFINITY } else { smax / smin };
    (out, cond)
}

/// `log2 det(I + A / s2)` for Hermitian PSD `A`, via the Cholesky factor of
/// `I + A / s2`.
pub fn log2_det_identity_plus(a: &CMat, s2: f64) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    if s2 == 0.0 {
        return if a.iter().all(|z| *z == ZERO) { 0.0 } else { f64::INFINITY };
    }
    let shifted = hermitian_part(a).scale(1.0 / s2) + CMat::identity(n, n);
    match shifted.cholesky() {
        Some(ch) => {
            let l = ch.l_dirty();
            let ln_det: f64 = (0..n).map(|i| 2.0 * (l[(i, i)].re - 1.0).ln_1p()).sum();
            ln_det / std::f64::consts::LN_2
        }
        // Indefinite beyond round-off: fall back to the spectrum.
        None => hermitian_eigenvalues(a)
            .iter()
            .map(|&v| (1.0 + v.max(0.0) / s2).log2())
            .sum(),
    }
}

/// Hermitian inverse through Cholesky, with an LU fallback.
pub fn hermitian_inverse(a: &CMat) -> Option<CMat> {
    let h = hermitian_part(a);
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.inverse());
    }
    h.try_inverse()
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let a = CMat::identity(2, 2);
        let b = CMat::identity(3, 3);
        assert_eq!(kron(&a, &b), CMat::identity(6, 6));
    }

    #[test]
    fn kron_places_blocks() {
        let a = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 2.0)]);
        let b = CMat::from_row_slice(2, 1, &[c(1.0, 0.0), c(3.0, 0.0)]);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (2, 2));
        assert_eq!(k[(1, 0)], c(3.0, 0.0));
        assert_eq!(k[(1, 1)], c(0.0, 6.0));
    }

    #[test]
    fn logdet_matches_spectrum() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(4.0, 0.0)]));
        let got = log2_det_identity_plus(&a, 2.0);
        let want = (1.5f64).log2() + 3f64.log2();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn pseudoinverse_of_wide_matrix_is_right_inverse() {
        let a = CMat::from_row_slice(2, 3, &[c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, -1.0), c(1.0, 0.0)]);
        let (p, cond) = pseudoinverse(&a, 1e-12);
        assert!(cond.is_finite());
        let prod = &a * &p;
        assert!((prod - CMat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn psd_repair_clamps_negative_eigenvalues() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(-1e-11, 0.0)]));
        let r = psd_repair(&a);
        assert!(hermitian_eigenvalues(&r)[0] >= 0.0);
        assert!((r[(0, 0)].re - 1.0).abs() < 1e-14);
    }
}
