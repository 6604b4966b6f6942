//! Small index utilities for 3-vectors and 4×4 spacetime arrays.

/// Fully antisymmetric symbol on `{0,1,2}` with `ε_{012} = 1`
/// (the zero-based form of `ε_{123} = 1`).
#[inline]
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    debug_assert!(i < 3 && j < 3 && k < 3);
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[inline]
pub fn kronecker(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[inline]
pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(a × b)^i = ε_{iab} a^a b^b`.
#[inline]
pub fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Bilinear form `Σ m[α][β] x^α y^β` on 4-component arrays.
#[inline]
pub fn bilinear4(m: &[[f64; 4]; 4], x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            acc += m[a][b] * x[a] * y[b];
        }
    }
    acc
}
