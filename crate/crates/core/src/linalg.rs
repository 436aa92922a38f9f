//! Small dense matrix helpers for the ridge heads.
//!
//! Matrices are row-major `Vec<f64>` of length d*d; d stays small (tens),
//! so direct Gauss-Jordan inversion is cheap and numerically adequate for
//! the occasional full rebuild. The incremental rank-one paths live in
//! `estimators`; independent verification inverts via a different library.

pub(crate) fn identity(d: usize, scale: f64) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = scale;
    }
    m
}

pub(crate) fn mat_vec(m: &[f64], x: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for i in 0..d {
        let row = &m[i * d..(i + 1) * d];
        let mut acc = 0.0;
        for j in 0..d {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// m += scale * x xᵀ
pub(crate) fn add_outer(m: &mut [f64], x: &[f64], scale: f64, d: usize) {
    for i in 0..d {
        let xi = scale * x[i];
        let row = &mut m[i * d..(i + 1) * d];
        for j in 0..d {
            row[j] += xi * x[j];
        }
    }
}

/// Gauss-Jordan inverse with partial pivoting.
///
/// Returns `None` when a pivot falls below the degeneracy threshold; the
/// ridge term keeps the heads' matrices well away from that in practice.
pub(crate) fn invert(m: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = identity(d, 1.0);
    for col in 0..d {
        let mut pivot = col;
        for row in (col + 1)..d {
            if a[row * d + col].abs() > a[pivot * d + col].abs() {
                pivot = row;
            }
        }
        let p = a[pivot * d + col];
        if p.abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..d {
                a.swap(col * d + j, pivot * d + j);
                inv.swap(col * d + j, pivot * d + j);
            }
        }
        let inv_p = 1.0 / a[col * d + col];
        for j in 0..d {
            a[col * d + j] *= inv_p;
            inv[col * d + j] *= inv_p;
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let f = a[row * d + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..d {
                a[row * d + j] -= f * a[col * d + j];
                inv[row * d + j] -= f * inv[col * d + j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_a_known_matrix() {
        // [[2,1],[1,3]] has inverse (1/5)[[3,-1],[-1,2]].
        let m = vec![2.0, 1.0, 1.0, 3.0];
        let inv = invert(&m, 2).unwrap();
        let expect = [0.6, -0.2, -0.2, 0.4];
        for (a, b) in inv.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_singular() {
        let m = vec![1.0, 2.0, 2.0, 4.0];
        assert!(invert(&m, 2).is_none());
    }

    #[test]
    fn outer_and_matvec_agree_with_hand_math() {
        let mut m = identity(2, 1.0);
        add_outer(&mut m, &[1.0, 2.0], 1.0, 2);
        assert_eq!(m, vec![2.0, 2.0, 2.0, 5.0]);
        assert_eq!(mat_vec(&m, &[1.0, 0.0], 2), vec![2.0, 2.0]);
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
    }
}
