//! Real polynomials of degree <= 4: interpolation and closed-form roots.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

/// Roots whose imaginary part is below this are treated as real.
pub const REAL_ROOT_TOL: f64 = 1e-9;

/// Coefficients (ascending powers) of the quartic through `(x_i, y_i)` for
/// the five nodes `0, 1/4, 1/2, 3/4, 1`.
pub fn interpolate_quartic_unit(values: [f64; 5]) -> Result<[f64; 5]> {
    let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
    // Newton divided differences, then expansion into the monomial basis.
    let mut dd = values;
    for level in 1..5 {
        for i in (level..5).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    let mut coef = [0.0f64; 5];
    for k in (0..5).rev() {
        // coef <- coef * (x - xs[k]) + dd[k]
        let mut next = [0.0f64; 5];
        for p in 0..5 {
            if p + 1 < 5 {
                next[p + 1] += coef[p];
            }
            next[p] -= coef[p] * xs[k];
        }
        next[0] += dd[k];
        coef = next;
    }
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("quartic interpolation produced non-finite coefficients".into()));
    }
    Ok(coef)
}

/// Horner evaluation, ascending coefficients.
pub fn eval(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_c(coef: &[f64], x: C) -> C {
    coef.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
}

fn deriv(coef: &[f64]) -> Vec<f64> {
    coef.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

fn cubic_monic(a: C, b: C, c: C) -> [C; 3] {
    // z^3 + a z^2 + b z + c, via the depressed cubic t^3 + p t + q.
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = C::new(-0.5, 3f64.sqrt() / 2.0);
    if u3.norm() == 0.0 {
        return [shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let mut roots = [C::new(0.0, 0.0); 3];
    let mut w = C::new(1.0, 0.0);
    for r in roots.iter_mut() {
        let uk = u * w;
        *r = uk - p / (uk * 3.0) + shift;
        w *= omega;
    }
    roots
}

fn quadratic(a: C, b: C, c: C) -> [C; 2] {
    let d = (b * b - a * c * 4.0).sqrt();
    let q = if (b.conj() * d).re >= 0.0 {
        -(b + d) / 2.0
    } else {
        -(b - d) / 2.0
    };
    if q.norm() == 0.0 {
        return [C::new(0.0, 0.0); 2];
    }
    [q / a, c / q]
}

/// All complex roots of the polynomial with ascending real coefficients
/// (degree <= 4, trailing zero leading coefficients dropped).
pub fn roots(coef: &[f64]) -> Vec<C> {
    let scale = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return vec![];
    }
    let mut deg = coef.len() - 1;
    while deg > 0 && coef[deg].abs() <= 1e-13 * scale {
        deg -= 1;
    }
    let lead = coef[deg];
    let raw: Vec<C> = match deg {
        0 => vec![],
        1 => vec![C::new(-coef[0] / coef[1], 0.0)],
        2 => quadratic(C::new(coef[2], 0.0), C::new(coef[1], 0.0), C::new(coef[0], 0.0)).to_vec(),
        3 => cubic_monic(
            C::new(coef[2] / lead, 0.0),
            C::new(coef[1] / lead, 0.0),
            C::new(coef[0] / lead, 0.0),
        )
        .to_vec(),
        _ => {
            let b = coef[3] / lead;
            let c = coef[2] / lead;
            let d = coef[1] / lead;
            let e = coef[0] / lead;
            let p = c - 3.0 * b * b / 8.0;
            let q = d - b * c / 2.0 + b * b * b / 8.0;
            let r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b.powi(4) / 256.0;
            let shift = C::new(-b / 4.0, 0.0);
            let ys: Vec<C> = if q.abs() <= 1e-14 * (1.0 + p.abs() + r.abs()) {
                let zs = quadratic(C::new(1.0, 0.0), C::new(p, 0.0), C::new(r, 0.0));
                zs.iter()
                    .flat_map(|z| {
                        let s = z.sqrt();
                        [s, -s]
                    })
                    .collect()
            } else {
                // resolvent: 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0
                let ms = cubic_monic(
                    C::new(p, 0.0),
                    C::new(p * p / 4.0 - r, 0.0),
                    C::new(-q * q / 8.0, 0.0),
                );
                let m = ms
                    .iter()
                    .copied()
                    .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                    .expect("three roots");
                let s = (m * 2.0).sqrt();
                let t = C::new(q, 0.0) / (s * 2.0);
                let half_p = C::new(p / 2.0, 0.0);
                let r1 = quadratic(C::new(1.0, 0.0), s, half_p + m - t);
                let r2 = quadratic(C::new(1.0, 0.0), -s, half_p + m + t);
                vec![r1[0], r1[1], r2[0], r2[1]]
            };
            ys.into_iter().map(|y| y + shift).collect()
        }
    };
    let used = &coef[..=deg];
    let d1 = deriv(used);
    raw.into_iter()
        .map(|mut z| {
            for _ in 0..3 {
                let f = eval_c(used, z);
                let fp = eval_c(&d1, z);
                if fp.norm() == 0.0 {
                    break;
                }
                let step = f / fp;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                let cand = z - step;
                if eval_c(used, cand).norm() <= f.norm() {
                    z = cand;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Real roots (|Im| < `REAL_ROOT_TOL`), ascending, Newton-polished on the real line.
pub fn real_roots(coef: &[f64]) -> Vec<f64> {
    let d1 = deriv(coef);
    let mut out: Vec<f64> = roots(coef)
        .into_iter()
        .filter(|z| z.im.abs() < REAL_ROOT_TOL)
        .map(|z| {
            let mut x = z.re;
            for _ in 0..3 {
                let fp = eval(&d1, x);
                if fp == 0.0 {
                    break;
                }
                let cand = x - eval(coef, x) / fp;
                if cand.is_finite() && eval(coef, cand).abs() <= eval(coef, x).abs() {
                    x = cand;
                } else {
                    break;
                }
            }
            x
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_roots(rs: &[f64], lead: f64) -> Vec<f64> {
        let mut c = vec![lead];
        for &r in rs {
            let mut n = vec![0.0; c.len() + 1];
            for (i, &x) in c.iter().enumerate() {
                n[i + 1] += x;
                n[i] -= r * x;
            }
            c = n;
        }
        c
    }

    #[test]
    fn interpolation_is_exact_for_quartics() {
        let coef = [0.3, -1.2, 2.5, 0.7, -4.0];
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0];
        let vals = xs.map(|x| eval(&coef, x));
        let got = interpolate_quartic_unit(vals).unwrap();
        for (a, b) in got.iter().zip(coef) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn known_quartic_roots() {
        let c = from_roots(&[0.1, 0.4, 0.7, 2.0], 3.0);
        let r = real_roots(&c);
        for (a, b) in r.iter().zip([0.1, 0.4, 0.7, 2.0]) {
            assert!((a - b).abs() < 1e-12, "{r:?}");
        }
        // x^4 + 1 has no real roots
        assert!(real_roots(&[1.0, 0.0, 0.0, 0.0, 1.0]).is_empty());
        // biquadratic
        let r = real_roots(&from_roots(&[-0.5, 0.5, -2.0, 2.0], 1.0));
        assert_eq!(r.len(), 4);
        assert!((r[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_degrees() {
        assert_eq!(real_roots(&[-1.0, 2.0, 0.0, 0.0, 0.0]), vec![0.5]);
        let r = real_roots(&from_roots(&[0.2, 0.9], 1.0));
        assert!((r[0] - 0.2).abs() < 1e-14 && (r[1] - 0.9).abs() < 1e-14);
        let r = real_roots(&from_roots(&[-1.0, 0.25, 3.0], 2.0));
        assert_eq!(r.len(), 3);
    }

    proptest! {
        #[test]
        fn recovers_random_real_roots(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0,
                                      d in -1.0f64..1.0, lead in 0.1f64..10.0) {
            let mut rs = [a, b, c, d];
            rs.sort_by(f64::total_cmp);
            prop_assume!(rs.windows(2).all(|w| w[1] - w[0] > 1e-2));
            let got = real_roots(&from_roots(&rs, lead));
            prop_assert_eq!(got.len(), 4);
            for (x, y) in got.iter().zip(rs) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
