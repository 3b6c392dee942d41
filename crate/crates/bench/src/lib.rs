//! Fixtures shared by the benchmarks.

use kvloc_core::zeroset::SkewComplexMatrix;
use num_complex::Complex64;

/// Deterministic well-conditioned skew matrix of size `n`.
pub fn skew_fixture(n: usize) -> SkewComplexMatrix {
    let mut m = SkewComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let k = (i * n + j) as f64;
            m.set(i, j, Complex64::new((1.3 * k).sin(), (0.7 * k).cos()));
        }
    }
    m
}
