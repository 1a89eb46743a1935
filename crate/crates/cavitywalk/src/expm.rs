//! Dense complex matrix exponential by Pade approximation with scaling and
//! squaring (Higham 2005). Serves as the general-purpose propagator backend,
//! independent of the eigenbasis route used by the closed form.

// The threshold constants are quoted verbatim from the literature.
#![allow(clippy::excessive_precision)]

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

// Backward-error thresholds for the [m/m] diagonal Pade approximants.
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

/// Matrix 1-norm (maximum absolute column sum).
fn norm_1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &CMat) -> CMat {
    assert_eq!(a.nrows(), a.ncols(), "expm requires a square matrix");
    let norm = norm_1(a);
    if norm <= THETA_9 {
        let coeffs: &[f64] = if norm <= THETA_3 {
            &B3
        } else if norm <= THETA_5 {
            &B5
        } else if norm <= THETA_7 {
            &B7
        } else {
            &B9
        };
        return pade_low(a, coeffs);
    }
    // Scale down so the Pade-13 approximant is accurate, then square back up.
    let squarings = ((norm / THETA_13).log2().ceil() as i32).max(0);
    let scaled = a * Complex64::from(0.5f64.powi(squarings));
    let mut result = pade_13(&scaled);
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Evaluate the [m/m] approximant for m in {3, 5, 7, 9} from the coefficient
/// table: U collects odd powers of `a`, V even powers.
fn pade_low(a: &CMat, coeffs: &[f64]) -> CMat {
    let n = a.nrows();
    let a2 = a * a;
    let ident = CMat::identity(n, n);
    let mut even = &ident * Complex64::from(coeffs[0]);
    let mut odd_poly = &ident * Complex64::from(coeffs[1]);
    let mut a2_pow = ident;
    for k in 1..=(coeffs.len() - 1) / 2 {
        a2_pow = &a2_pow * &a2;
        even += &a2_pow * Complex64::from(coeffs[2 * k]);
        if 2 * k + 1 < coeffs.len() {
            odd_poly += &a2_pow * Complex64::from(coeffs[2 * k + 1]);
        }
    }
    let odd = a * odd_poly;
    solve_pade(even, odd)
}

fn pade_13(a: &CMat) -> CMat {
    let n = a.nrows();
    let b: Vec<Complex64> = B13.iter().copied().map(Complex64::from).collect();
    let ident = CMat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_high = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u_low = &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let odd = a * (u_high + u_low);
    let v_high = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let even = v_high + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    solve_pade(even, odd)
}

/// r = (V - U)^-1 (V + U)
fn solve_pade(even: CMat, odd: CMat) -> CMat {
    let numer = &even + &odd;
    let denom = even - odd;
    denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is singular; the input matrix is not representable")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let z = CMat::zeros(4, 4);
        assert_eq!(expm(&z), CMat::identity(4, 4));
    }

    #[test]
    fn diagonal_matrix_exponentiates_entrywise() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.3, -1.2),
            Complex64::new(-2.0, 0.5),
            Complex64::new(0.0, 3.0),
        ]));
        let e = expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-14);
        }
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn nilpotent_matrix() {
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = Complex64::from(3.0);
        let e = expm(&a);
        let mut want = CMat::identity(2, 2);
        want[(0, 1)] = Complex64::from(3.0);
        assert!(max_abs_diff(&e, &want) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp(i t sigma_x) = cos t + i sin t sigma_x
        let t = 0.83;
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = Complex64::new(0.0, t);
        a[(1, 0)] = Complex64::new(0.0, t);
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::from(t.cos())).norm() < 1e-14);
        assert!((e[(0, 1)] - Complex64::new(0.0, t.sin())).norm() < 1e-14);
    }

    #[test]
    fn squaring_branch_agrees_with_semigroup() {
        // Large norm forces the scaling/squaring path; exp(A) must equal
        // exp(A/2)^2 computed through the small-norm path.
        let n = 6;
        let mut a = CMat::zeros(n, n);
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = Complex64::new(next() * 4.0, next() * 4.0);
            }
        }
        let whole = expm(&a);
        let half = expm(&(&a * Complex64::from(0.5)));
        assert!(max_abs_diff(&whole, &(&half * &half)) < 1e-10);
    }
}
