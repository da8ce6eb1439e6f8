//! Dense linear-algebra helpers shared by the modules.

use nalgebra::DVector;

use crate::{CMat, RMat, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_real(a: &RMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.abs()))
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_deviation(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

pub fn is_real(a: &CMat) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub fn real_part(a: &CMat) -> RMat {
    a.map(|z| z.re)
}

pub fn complexify(a: &RMat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

// Eigensolvers come from faer: nalgebra's symmetric QR iteration returns NaN
// on some sparse inputs that occur here (two-copy operators of GHZ states).

fn faer_eigen_real(a: &RMat, vectors: bool) -> (Vec<f64>, Option<RMat>) {
    let n = a.nrows();
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    if vectors {
        let e = m
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("symmetric eigensolver converged");
        let (s, u) = (e.S(), e.U());
        let w = (0..n).map(|i| s[i]).collect();
        (w, Some(RMat::from_fn(n, n, |i, j| u[(i, j)])))
    } else {
        let w = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("symmetric eigensolver converged");
        (w, None)
    }
}

fn faer_eigen_complex(a: &CMat, vectors: bool) -> (Vec<f64>, Option<CMat>) {
    let n = a.nrows();
    let m = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        faer::c64::new(z.re, z.im)
    });
    if vectors {
        let e = m
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("Hermitian eigensolver converged");
        let (s, u) = (e.S(), e.U());
        let w = (0..n).map(|i| s[i].re).collect();
        let v = CMat::from_fn(n, n, |i, j| C64::new(u[(i, j)].re, u[(i, j)].im));
        (w, Some(v))
    } else {
        let w = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("Hermitian eigensolver converged");
        (w, None)
    }
}

fn ascending_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&i, &j| w[i].total_cmp(&w[j]));
    order
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &RMat) -> (DVector<f64>, RMat) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), RMat::zeros(0, 0));
    }
    let (w, v) = faer_eigen_real(a, true);
    let v = v.expect("vectors requested");
    let order = ascending_order(&w);
    let values = DVector::from_iterator(n, order.iter().map(|&i| w[i]));
    let vectors = RMat::from_fn(n, n, |r, k| v[(r, order[k])]);
    (values, vectors)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Purely real inputs go through the real symmetric solver.
pub fn hermitian_eigen(a: &CMat) -> (DVector<f64>, CMat) {
    if is_real(a) {
        let (w, v) = symmetric_eigen(&real_part(a));
        return (w, complexify(&v));
    }
    let n = a.nrows();
    let (w, v) = faer_eigen_complex(a, true);
    let v = v.expect("vectors requested");
    let order = ascending_order(&w);
    let values = DVector::from_iterator(n, order.iter().map(|&i| w[i]));
    let vectors = CMat::from_fn(n, n, |r, k| v[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(a: &CMat) -> DVector<f64> {
    if a.nrows() == 0 {
        return DVector::zeros(0);
    }
    let mut w = if is_real(a) {
        faer_eigen_real(&real_part(a), false).0
    } else {
        faer_eigen_complex(a, false).0
    };
    w.sort_by(f64::total_cmp);
    DVector::from_vec(w)
}

pub fn min_eigenvalue(a: &CMat) -> f64 {
    let w = hermitian_eigenvalues(a);
    if w.is_empty() {
        0.0
    } else {
        w[0]
    }
}

/// Sum of singular values. Hermitian inputs use the eigenvalue path.
pub fn trace_norm(a: &CMat) -> f64 {
    let scale = max_abs(a).max(1.0);
    if hermiticity_deviation(a) <= 1e-13 * scale {
        hermitian_eigenvalues(a).iter().map(|w| w.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

/// Singular values from the spectrum of `A^dag A`, ascending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    hermitian_eigenvalues(&(a.adjoint() * a))
        .iter()
        .map(|w| w.max(0.0).sqrt())
        .collect()
}

/// Singular values of a real matrix, ascending.
pub fn singular_values_real(a: &RMat) -> Vec<f64> {
    symmetric_eigen(&(a.transpose() * a))
        .0
        .iter()
        .map(|w| w.max(0.0).sqrt())
        .collect()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `Tr_B` of an operator on `A (x) B` with `dim A = keep`, `dim B = rest`.
pub fn partial_trace_keep_first(a: &CMat, keep: usize, rest: usize) -> CMat {
    assert_eq!(a.nrows(), keep * rest);
    CMat::from_fn(keep, keep, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..rest {
            acc += a[(i * rest + r, j * rest + r)];
        }
        acc
    })
}

/// Modified Gram-Schmidt (two passes) over the columns of `a`; columns whose
/// residual norm falls below `drop_tol` are discarded.
pub fn orthonormalize_columns(a: &CMat, drop_tol: f64) -> CMat {
    let mut cols: Vec<DVector<C64>> = Vec::new();
    for k in 0..a.ncols() {
        let mut v: DVector<C64> = a.column(k).into_owned();
        let norm0 = v.norm();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > drop_tol * norm0.max(1e-300) && n > 0.0 {
            cols.push(v / C64::new(n, 0.0));
        }
    }
    let rows = a.nrows();
    CMat::from_fn(rows, cols.len(), |r, k| cols[k][r])
}

/// Projector `V V^dag` onto the column span of an orthonormal `v`.
pub fn projector_from_basis(v: &CMat) -> CMat {
    v * v.adjoint()
}

/// Apply `op` (`d x d`) to tensor factor `party` of each column of `v`, where
/// columns live on `d^n` with party 0 most significant.
pub fn apply_on_party(v: &CMat, op: &CMat, party: usize, n: usize, d: usize) -> CMat {
    let left = d.pow(party as u32);
    let right = d.pow((n - party - 1) as u32);
    let mut out = CMat::zeros(v.nrows(), v.ncols());
    for col in 0..v.ncols() {
        for l in 0..left {
            for r in 0..right {
                for s_out in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for s_in in 0..d {
                        let w = op[(s_out, s_in)];
                        if w.re != 0.0 || w.im != 0.0 {
                            acc += w * v[((l * d + s_in) * right + r, col)];
                        }
                    }
                    out[((l * d + s_out) * right + r, col)] = acc;
                }
            }
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_product() {
        let a = CMat::from_fn(2, 2, |r, c| C64::new((r + 2 * c) as f64, 0.0));
        let b = CMat::from_fn(3, 3, |r, c| C64::new(if r == c { 1.0 } else { 0.5 }, 0.0));
        let tr = partial_trace_keep_first(&kron(&a, &b), 2, 3);
        assert!(max_abs(&(tr - a.scale(3.0))) < 1e-12);
    }

    #[test]
    fn eigen_sorted_and_trace_norm() {
        let a = CMat::from_diagonal(&DVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(-3.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let (w, _) = hermitian_eigen(&a);
        assert_eq!(w.as_slice(), &[-3.0, 0.5, 2.0]);
        assert!((trace_norm(&a) - 5.5).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(16, 9), 11440);
        assert_eq!(binomial(3, 5), 0);
    }
}
