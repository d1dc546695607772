//! Dense complex linear-algebra helpers shared by the simulator modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Builds a square complex matrix from row-major entries.
pub fn cmatrix(n: usize, rows: &[C64]) -> CMatrix {
    assert_eq!(rows.len(), n * n);
    CMatrix::from_row_slice(n, n, rows)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry magnitude of `U†U − I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let p = u.adjoint() * u;
    max_abs_diff(&p, &CMatrix::identity(n, n))
}

/// Largest entry magnitude of `M − M†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Phase-insensitive operator distance `1 − |Tr(U†V)| / d`.
///
/// Zero iff `V = e^{iφ} U` for unitary inputs; for a contraction (e.g. a
/// propagator block with leakage) it also absorbs the lost norm.
pub fn phase_invariant_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    assert_eq!(u.shape(), v.shape());
    let d = u.nrows() as f64;
    let overlap: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    (1.0 - overlap.norm() / d).max(0.0)
}

/// Hermitian part `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// `exp(−i·H·t)` for Hermitian `H`, via eigen-decomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(h);
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    );
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * phases[c]
    });
    scaled * vectors.adjoint()
}

/// `exp(M)` for a general complex matrix by scaling and squaring with a
/// truncated Taylor series. Used as an independent check on the Hermitian path.
pub fn expm_general(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = m.iter().map(|x| x.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * real(scale);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &a * real(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Integer matrix power by repeated squaring.
pub fn matrix_power(m: &CMatrix, mut exp: usize) -> CMatrix {
    let n = m.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &base * &result;
        }
        exp >>= 1;
        if exp > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Euclidean projection of `values` onto `{x ≥ 0, Σx = total}`.
pub fn project_onto_simplex(values: &[f64], total: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - total) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

/// Nearest (Frobenius) positive-semidefinite matrix with the given trace.
///
/// For 2×2 unit-trace inputs this coincides with eigenvalue clipping
/// followed by trace renormalisation.
pub fn project_psd_with_trace(m: &CMatrix, total: f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let projected = project_onto_simplex(&values, total);
    let n = values.len();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in projected.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = vectors.column(k);
        out += (&v * v.adjoint()) * real(lambda);
    }
    out
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Index bookkeeping for applying an operator on a subset of sites of a
/// mixed-dimension register. Site 0 is the most significant digit.
#[derive(Debug, Clone)]
pub struct SiteEmbedding {
    /// Offsets, in full-register index space, of each local basis state
    /// of the targets (local index is row-major over `targets` order).
    pub offsets: Vec<usize>,
    /// Full-register indices with every target digit set to zero.
    pub bases: Vec<usize>,
}

impl SiteEmbedding {
    pub fn new(dims: &[usize], targets: &[usize]) -> Self {
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let mut offsets = vec![0usize];
        for &t in targets {
            let mut next = Vec::with_capacity(offsets.len() * dims[t]);
            for &o in &offsets {
                for level in 0..dims[t] {
                    next.push(o + level * strides[t]);
                }
            }
            offsets = next;
        }
        let mut bases = vec![0usize];
        for k in 0..n {
            if targets.contains(&k) {
                continue;
            }
            let mut next = Vec::with_capacity(bases.len() * dims[k]);
            for &b in &bases {
                for level in 0..dims[k] {
                    next.push(b + level * strides[k]);
                }
            }
            bases = next;
        }
        Self { offsets, bases }
    }

    pub fn apply(&self, op: &CMatrix, amplitudes: &mut [C64]) {
        let m = self.offsets.len();
        let mut local = vec![C64::new(0.0, 0.0); m];
        for &base in &self.bases {
            for (k, &o) in self.offsets.iter().enumerate() {
                local[k] = amplitudes[base + o];
            }
            for (r, &o) in self.offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, l) in local.iter().enumerate() {
                    acc += op[(r, c)] * l;
                }
                amplitudes[base + o] = acc;
            }
        }
    }

    pub fn embed(&self, op: &CMatrix, total: usize) -> CMatrix {
        let mut full = CMatrix::zeros(total, total);
        for &base in &self.bases {
            for (r, &ro) in self.offsets.iter().enumerate() {
                for (c, &co) in self.offsets.iter().enumerate() {
                    full[(base + ro, base + co)] = op[(r, c)];
                }
            }
        }
        full
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_exponential_matches_taylor() {
        let h = cmatrix(
            3,
            &[
                real(1.0),
                c64(0.3, -0.2),
                real(0.0),
                c64(0.3, 0.2),
                real(-0.5),
                c64(0.0, 0.7),
                real(0.0),
                c64(0.0, -0.7),
                real(2.0),
            ],
        );
        let t = 1.7;
        let a = expm_hermitian(&h, t);
        let b = expm_general(&(&h * c64(0.0, -t)));
        assert!(max_abs_diff(&a, &b) < 1e-12);
        assert!(unitarity_deviation(&a) < 1e-12);
    }

    #[test]
    fn simplex_projection_keeps_feasible_points() {
        let p = project_onto_simplex(&[0.2, 0.3, 0.5], 1.0);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
        let q = project_onto_simplex(&[1.2, -0.2], 1.0);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    #[test]
    fn matrix_power_by_squaring() {
        let m = cmatrix(2, &[real(1.0), real(1.0), real(0.0), real(1.0)]);
        let p = matrix_power(&m, 13);
        assert_eq!(p[(0, 1)], real(13.0));
    }
}
