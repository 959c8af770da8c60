//! All complex roots of a univariate polynomial by Durand-Kerner iteration.
//! Adequate for the small degrees produced by branch polynomials and test
//! oracles.

use num_complex::Complex64;

const MAX_SWEEPS: usize = 400;

/// Roots of `sum_k coeffs[k] t^k`. Returns an empty list for constant input.
pub fn univariate_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() == 0.0 {
        c.pop();
    }
    let degree = c.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = c[degree];
    let monic: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let radius = 1.0 + monic[..degree].iter().map(|x| x.norm()).fold(0.0, f64::max);

    // Non-symmetric spray of start points avoids stalling on real axes.
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| seed.powu(k as u32 + 1) * radius)
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut max_update = 0.0f64;
        for i in 0..degree {
            let p = eval_monic(&monic, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Coincident iterates; nudge apart and continue.
                z[i] += Complex64::new(1e-6 * radius, 1e-6 * radius);
                continue;
            }
            let delta = p / denom;
            z[i] -= delta;
            max_update = max_update.max(delta.norm());
        }
        if max_update < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    z
}

fn eval_monic(monic: &[Complex64], t: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in monic.iter().rev() {
        acc = acc * t + a;
    }
    acc
}
