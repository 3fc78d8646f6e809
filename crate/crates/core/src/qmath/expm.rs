//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (Higham 2005), plus a truncated-Taylor routine for the
//! action `exp(A)·v` when forming `exp(A)` itself would be wasteful.

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C64};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
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

/// `exp(A)` for square `A`.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::arg(format!(
            "matrix_exponential needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NumericalInstability(
            "matrix_exponential input has non-finite entries".into(),
        ));
    }
    let n = a.rows();
    let norm = a.norm_one();
    let ident = ComplexMatrix::identity(n);
    if norm == 0.0 {
        return Ok(ident);
    }

    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            let (u, v) = pade_low(a, coeffs, &ident);
            return pade_quotient(&u, &v);
        }
    }

    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as i32;
    let scaled = a.scale_real(2f64.powi(-s));
    let (u, v) = pade_13(&scaled, &ident);
    let mut r = pade_quotient(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &ComplexMatrix, b: &[f64], ident: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u_inner = ident.scale_real(b[1]);
    let mut v = ident.scale_real(b[0]);
    let m = b.len() - 1;
    for k in (2..=m).step_by(2) {
        power = &power * &a2;
        v = &v + &power.scale_real(b[k]);
        u_inner = &u_inner + &power.scale_real(b[k + 1]);
    }
    (a * &u_inner, v)
}

fn pade_13(a: &ComplexMatrix, ident: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64| -> ComplexMatrix {
        &(&a6.scale_real(c6) + &a4.scale_real(c4)) + &a2.scale_real(c2)
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9])) + &(&lin(b[7], b[5], b[3]) + &ident.scale_real(b[1]));
    let u = a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8])) + &(&lin(b[6], b[4], b[2]) + &ident.scale_real(b[0]));
    (u, v)
}

fn pade_quotient(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = u + v;
    let q = v - u;
    q.solve(&p)
        .ok_or_else(|| Error::NumericalInstability("singular Padé denominator".into()))
}

/// `exp(−i·t·H)` for Hermitian `H`, through its eigendecomposition.
pub fn unitary_propagator(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    h.hermitian_map(|l| C64::from_polar(1.0, -l * t))
}

/// Computes `exp(A)·v` with a scaled, truncated Taylor series.
///
/// `apply` evaluates `A·x`; `norm_one` is an upper bound for `‖A‖₁`. The
/// series for each substep stops once two consecutive terms fall below
/// `tolerance` relative to the running sum. Fails if more than `max_products`
/// applications of `A` would be needed.
pub fn exponential_action<F>(
    apply: F,
    norm_one: f64,
    v: &[C64],
    tolerance: f64,
    max_products: usize,
) -> Result<Vec<C64>>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    const MAX_TERMS: usize = 60;
    if !norm_one.is_finite() {
        return Err(Error::NumericalInstability("generator norm is not finite".into()));
    }
    let substeps = ((norm_one / 0.5).ceil() as usize).max(1);
    let inv_s = 1.0 / substeps as f64;
    let mut f = v.to_vec();
    let mut products = 0usize;
    for _ in 0..substeps {
        let mut term = f.clone();
        let mut sum = f.clone();
        let mut prev_small = false;
        for k in 1..=MAX_TERMS {
            products += 1;
            if products > max_products {
                return Err(Error::NumericalInstability(format!(
                    "exponential action exceeded {max_products} substeps"
                )));
            }
            let scale = inv_s / k as f64;
            term = apply(&term).into_iter().map(|z| z * scale).collect();
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
            let small = inf_norm(&term) <= tolerance * inf_norm(&sum);
            if small && prev_small {
                break;
            }
            prev_small = small;
        }
        f = sum;
    }
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericalInstability("exponential action diverged".into()));
    }
    Ok(f)
}

fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::super::matrix::ops::*;
    use super::super::matrix::{I, ONE, ZERO};
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2};

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exponential(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn x_rotation_by_half_pi() {
        // cos(π/2)·I − i·sin(π/2)·σx = −i·σx
        let a = sigma_x().scale(-I * FRAC_PI_2);
        let e = matrix_exponential(&a).unwrap();
        let expected = sigma_x().scale(-I);
        assert!(e.max_abs_diff(&expected) < 1e-14);
        let out = e.mul_vec(&[ONE, ZERO]);
        assert!((out[1] - (-I)).norm() < 1e-14);
    }

    #[test]
    fn diagonal() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let e = matrix_exponential(&a).unwrap();
        assert!((e.get(0, 0).re - E).abs() < 1e-14);
        assert!((e.get(1, 1).re - E * E).abs() < 1e-13);
        assert!(e.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matrix_exponential(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn large_norm_uses_squaring() {
        // exp(−i·40·σz) is diagonal with phases e^{∓40i}.
        let a = sigma_z().scale(-I * 40.0);
        let e = matrix_exponential(&a).unwrap();
        assert!((e.get(0, 0) - C64::from_polar(1.0, -40.0)).norm() < 1e-12);
        assert!((e.get(1, 1) - C64::from_polar(1.0, 40.0)).norm() < 1e-12);
    }

    fn random_matrix(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        let v: Vec<C64> = entries[..n * n].iter().map(|&(r, i)| C64::new(r, i)).collect();
        ComplexMatrix::from_row_major(n, n, &v).unwrap()
    }

    proptest! {
        #[test]
        fn inverse_pair(entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
                        scale in 0.1f64..5.0) {
            let a = random_matrix(4, &entries);
            let a = a.scale_real(scale / a.norm_one().max(1e-12));
            let p = &matrix_exponential(&a).unwrap() * &matrix_exponential(&(-a.clone())).unwrap();
            prop_assert!(p.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-9);
        }

        #[test]
        fn matches_eigendecomposition_on_hermitian(
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            t in 0.05f64..4.0,
        ) {
            let h = random_matrix(4, &entries).hermitian_part();
            let pade = matrix_exponential(&h.scale(-I * t)).unwrap();
            let eig = unitary_propagator(&h, t);
            let rel = pade.max_abs_diff(&eig) / eig.max_abs();
            prop_assert!(rel < 1e-10, "relative error {rel}");
        }

        #[test]
        fn action_matches_full_exponential(
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            scale in 0.0f64..8.0,
        ) {
            let a = random_matrix(4, &entries);
            let a = a.scale_real(scale / a.norm_one().max(1e-12));
            let v = [ONE, C64::new(0.5, -0.25), ZERO, C64::new(-1.0, 0.3)];
            let full = matrix_exponential(&a).unwrap().mul_vec(&v);
            let act = exponential_action(|x| a.mul_vec(x), a.norm_one(), &v, 1e-12, 100_000).unwrap();
            for (x, y) in full.iter().zip(&act) {
                prop_assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn action_respects_product_budget() {
        let a = sigma_x().scale_real(50.0);
        let r = exponential_action(|x| a.mul_vec(x), a.norm_one(), &[ONE, ZERO], 1e-10, 10);
        assert!(matches!(r, Err(Error::NumericalInstability(_))));
    }
}
