//! Single films checked against the closed-form Airy summation, written here
//! in the `n + ik`, `exp(i(kz - ωt))` convention with Fresnel coefficients,
//! independent of the characteristic-matrix code.

use filmsearch_core::tmm::{solve, Linear};
use filmsearch_core::Complex64;
use proptest::prelude::*;

struct Airy {
    r: f64,
    t: f64,
}

/// `n0 | n1, d | n2` with `n0` real. `cos` are the complex cosines in each medium.
fn airy(n: [Complex64; 3], d: f64, wl: f64, angle_deg: f64, pol: Linear) -> Airy {
    let s0 = n[0] * angle_deg.to_radians().sin();
    let cos: Vec<Complex64> = n
        .iter()
        .map(|&ni| {
            let c = (Complex64::new(1.0, 0.0) - (s0 / ni) * (s0 / ni)).sqrt();
            // forward-propagating, decaying branch
            if (ni * c).im < 0.0 { -c } else { c }
        })
        .collect();
    let fresnel = |i: usize, j: usize| -> (Complex64, Complex64) {
        match pol {
            Linear::S => {
                let (a, b) = (n[i] * cos[i], n[j] * cos[j]);
                ((a - b) / (a + b), 2.0 * a / (a + b))
            }
            Linear::P => {
                let (a, b) = (n[j] * cos[i], n[i] * cos[j]);
                ((a - b) / (a + b), 2.0 * n[i] * cos[i] / (a + b))
            }
        }
    };
    let beta = n[1] * cos[1] * (2.0 * std::f64::consts::PI * d / wl);
    let phase = (Complex64::i() * beta).exp();
    let (r01, t01) = fresnel(0, 1);
    let (r12, t12) = fresnel(1, 2);
    let denom = 1.0 + r01 * r12 * phase * phase;
    let r = (r01 + r12 * phase * phase) / denom;
    let t = t01 * t12 * phase / denom;
    let flux = match pol {
        Linear::S => (n[2] * cos[2]).re / (n[0] * cos[0]).re,
        Linear::P => (n[2].conj() * cos[2]).re / (n[0].conj() * cos[0]).re,
    };
    Airy { r: r.norm_sqr(), t: t.norm_sqr() * flux }
}

proptest! {
    #[test]
    fn absorbing_film_at_normal_incidence(
        n1 in 1.0f64..4.0, k1 in 0.0f64..3.0, d in 1.0f64..300.0,
        n2 in 1.0f64..3.0, k2 in 0.0f64..1.0, wl in 300.0f64..2000.0,
    ) {
        let idx = [Complex64::new(1.0, 0.0), Complex64::new(n1, k1), Complex64::new(n2, k2)];
        let oracle = airy(idx, d, wl, 0.0, Linear::S);
        for pol in [Linear::S, Linear::P] {
            let got = solve(idx[0], &[(idx[1], d)], idx[2], wl, 0.0, pol);
            prop_assert!((got.reflection - oracle.r).abs() < 1e-9, "R {} vs {}", got.reflection, oracle.r);
            prop_assert!((got.transmission - oracle.t).abs() < 1e-9, "T {} vs {}", got.transmission, oracle.t);
        }
    }

    #[test]
    fn lossless_film_at_oblique_incidence(
        n1 in 1.0f64..4.0, d in 1.0f64..300.0, n2 in 1.0f64..3.0,
        wl in 300.0f64..2000.0, angle in 0.0f64..80.0, p in any::<bool>(),
    ) {
        let pol = if p { Linear::P } else { Linear::S };
        let idx = [Complex64::new(1.0, 0.0), Complex64::new(n1, 0.0), Complex64::new(n2, 0.0)];
        let oracle = airy(idx, d, wl, angle, pol);
        let got = solve(idx[0], &[(idx[1], d)], idx[2], wl, angle, pol);
        prop_assert!((got.reflection - oracle.r).abs() < 1e-9, "R {} vs {}", got.reflection, oracle.r);
        prop_assert!((got.transmission - oracle.t).abs() < 1e-9, "T {} vs {}", got.transmission, oracle.t);
    }
}
