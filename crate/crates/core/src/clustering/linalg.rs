//! Dense symmetric-matrix helpers for small dimensions (row-major `d × d`).

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub(crate) fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// ln|A| from its Cholesky factor.
pub(crate) fn chol_logdet(l: &[f64], d: usize) -> f64 {
    2.0 * (0..d).map(|i| l[i * d + i].ln()).sum::<f64>()
}

/// `vᵀ A⁻¹ v` via forward substitution on the factor of `A`.
pub(crate) fn chol_inv_quad(l: &[f64], d: usize, v: &[f64], scratch: &mut [f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        let mut s = v[i];
        for k in 0..i {
            s -= l[i * d + k] * scratch[k];
        }
        let y = s / l[i * d + i];
        scratch[i] = y;
        acc += y * y;
    }
    acc
}

/// A⁻¹ from the Cholesky factor of `A`.
pub(crate) fn chol_inverse(l: &[f64], d: usize) -> Vec<f64> {
    // Invert L, then A⁻¹ = L⁻ᵀ L⁻¹.
    let mut linv = vec![0.0; d * d];
    for i in 0..d {
        linv[i * d + i] = 1.0 / l[i * d + i];
        for j in 0..i {
            let mut s = 0.0;
            for k in j..i {
                s -= l[i * d + k] * linv[k * d + j];
            }
            linv[i * d + j] = s / l[i * d + i];
        }
    }
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = 0.0;
            for k in i..d {
                s += linv[k * d + i] * linv[k * d + j];
            }
            inv[i * d + j] = s;
            inv[j * d + i] = s;
        }
    }
    inv
}

/// tr(A B) for row-major square matrices.
pub(crate) fn trace_product(a: &[f64], b: &[f64], d: usize) -> f64 {
    let mut t = 0.0;
    for i in 0..d {
        for k in 0..d {
            t += a[i * d + k] * b[k * d + i];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_inverse_and_quadratic_form() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(&a, 3).unwrap();
        let inv = chol_inverse(&l, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[i * 3 + k] * inv[k * 3 + j];
                }
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((s - id).abs() < 1e-12);
            }
        }
        let v = [1.0, -2.0, 0.5];
        let mut scratch = [0.0; 3];
        let q = chol_inv_quad(&l, 3, &v, &mut scratch);
        let mut direct = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                direct += v[i] * inv[i * 3 + j] * v[j];
            }
        }
        assert!((q - direct).abs() < 1e-12);
        // det = 4(15-1) - 2(6-0.6) + 0.6(2-3) = 44.6
        assert!((chol_logdet(&l, 3) - 44.6f64.ln()).abs() < 1e-12);
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
