//! Integral identities over diagonal entries and ordered eigenvalues, and
//! chamber integrals of separability functions of `C_max`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

use super::constants::value;
use super::quad::{adaptive_simplex, grundmann_moller, Cubature, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Identity {
    /// `8/33 = 12108096000/71 ∫ (D1D2D3D4)³ (3-ν)² ν` over `ν <= 1`.
    DesfComplex,
    /// `8/17 = 1209600/17 ∫ (D1D2D3D4)^{3/2} (3-ν) √ν` over `ν <= 1`.
    DesfReal,
    /// `8/33 = 2201472000 ∫ σ(C_max) Π(λi-λj)²` over the ordered chamber.
    EsfComplex,
    /// `8/17 = 15482880/17 ∫ σ(C_max) Π(λi-λj)` over the ordered chamber.
    EsfReal,
    /// `1680(√2-1)/π⁸ = π²/71680 ∫ σ(C_max) Π λ^{-1/2} Π(λi-λj)²/(λi+λj)`.
    EsfBures,
}

impl Identity {
    pub const ALL: [Identity; 5] = [
        Identity::DesfComplex,
        Identity::DesfReal,
        Identity::EsfComplex,
        Identity::EsfReal,
        Identity::EsfBures,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Identity::DesfComplex => "desfconj",
            Identity::DesfReal => "desfconjreal",
            Identity::EsfComplex => "esfconj",
            Identity::EsfReal => "esfconjreal",
            Identity::EsfBures => "esfconjBures",
        }
    }

    pub fn parse(s: &str) -> Result<Identity> {
        Identity::ALL
            .into_iter()
            .find(|i| i.tag() == s)
            .ok_or_else(|| Error::UnknownId {
                id: s.to_string(),
                valid: Identity::ALL.map(Identity::tag).join(", "),
            })
    }

    pub fn target(self) -> f64 {
        match self {
            Identity::DesfComplex | Identity::EsfComplex => value("hs_sep_complex"),
            Identity::DesfReal | Identity::EsfReal => value("hs_sep_real"),
            Identity::EsfBures => value("bures_sep_complex"),
        }
    }

    pub fn needs_sigma(self) -> bool {
        !matches!(self, Identity::DesfComplex | Identity::DesfReal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub identity: Identity,
    pub rhs: f64,
    pub target: f64,
    /// `rhs - target`.
    pub deviation: f64,
    /// Estimated cubature error of `rhs`.
    pub error_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Integrand of a diagonal-entry identity at `D1 D4 = s²q²`, `D2 D3 = t²r²`.
fn desf_integrand(id: Identity, s: f64, q: f64, r: f64) -> f64 {
    let t = 1.0 - s;
    let d14 = s * s * q * q;
    let d23 = t * t * r * r;
    let nu = d14 / d23;
    match id {
        Identity::DesfComplex => 12108096000.0 / 71.0 * (d14 * d23).powi(3) * (3.0 - nu).powi(2) * nu,
        _ => 1209600.0 / 17.0 * (d14 * d23).powf(1.5) * (3.0 - nu) * nu.sqrt(),
    }
}

/// Tensor Gauss-Legendre over `(s, θ, φ)` with `D1 = s sin²θ`, `D4 = s cos²θ`,
/// `D2 = (1-s) sin²φ`, `D3 = (1-s) cos²φ`; `ν <= 1` becomes `s <= r/(q+r)`.
fn desf_rule(id: Identity, n: usize) -> f64 {
    let g = GaussLegendre::new(n);
    g.integrate(0.0, FRAC_PI_2, |th| {
        let q = th.sin() * th.cos();
        g.integrate(0.0, FRAC_PI_2, |ph| {
            let r = ph.sin() * ph.cos();
            if q + r <= 0.0 {
                return 0.0;
            }
            let smax = r / (q + r);
            // da db = (2q dθ)(2r dφ); dD1 dD2 dD3 = s(1-s) ds da db
            4.0 * q * r * g.integrate(0.0, smax, |s| s * (1.0 - s) * desf_integrand(id, s, q, r))
        })
    })
}

fn verify_desf(id: Identity, tol: f64) -> IdentityReport {
    let mut n = 16;
    let mut prev = desf_rule(id, n);
    let mut evaluations = n * n * n;
    loop {
        n *= 2;
        let cur = desf_rule(id, n);
        evaluations += n * n * n;
        let err = (cur - prev).abs();
        if err <= tol || n >= 256 {
            return report(id, cur, err, err <= tol, evaluations);
        }
        prev = cur;
    }
}

fn report(identity: Identity, rhs: f64, err: f64, converged: bool, evaluations: usize) -> IdentityReport {
    let target = identity.target();
    IdentityReport {
        identity,
        rhs,
        target,
        deviation: rhs - target,
        error_estimate: err,
        converged,
        evaluations,
    }
}

/// Corners of the chamber `λ1 >= λ2 >= λ3 >= λ4 >= 0` in `(λ1, λ2, λ3)`.
pub fn weyl_chamber() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0],
        vec![0.5, 0.5, 0.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        vec![0.25, 0.25, 0.25],
    ]
}

fn spectrum(x: &[f64]) -> [f64; 4] {
    [x[0], x[1], x[2], (1.0 - x[0] - x[1] - x[2]).max(0.0)]
}

/// Unclipped `λ1 - λ3 - 2√(λ2 λ4)`.
pub fn c_max_raw(l: &[f64; 4]) -> f64 {
    l[0] - l[2] - 2.0 * (l[1] * l[3]).sqrt()
}

/// `Π_{i<j} (λi - λj)^β` on an ordered spectrum.
pub fn vandermonde(l: &[f64; 4], beta: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            v *= l[i] - l[j];
        }
    }
    v.abs().powi(beta as i32)
}

fn bures_density(l: &[f64; 4]) -> f64 {
    if l.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    let mut v = 1.0 / l.iter().product::<f64>().sqrt();
    for i in 0..4 {
        for j in i + 1..4 {
            v *= (l[i] - l[j]).powi(2) / (l[i] + l[j]);
        }
    }
    v
}

/// `1 / ∫_chamber Π(λi-λj)^β`; exact integers 1935360 (β=1) and 9081072000 (β=2).
pub fn chamber_norm(beta: u32) -> Result<f64> {
    if !matches!(beta, 1 | 2 | 4) {
        return Err(Error::Domain(format!("beta must be 1, 2 or 4, got {beta}")));
    }
    // the integrand is a polynomial of degree 6β
    let rule = grundmann_moller(3, 3 * beta as usize);
    let z = rule.apply(&weyl_chamber(), &|x: &[f64]| vandermonde(&spectrum(x), beta));
    Ok(1.0 / z)
}

/// `Z_β ∫_chamber f(λ) Π(λi-λj)^β`: an expectation under the HS eigenvalue
/// law of a full-rank two-qubit state.
pub fn chamber_expectation(
    beta: u32,
    f: impl Fn(&[f64; 4]) -> f64,
    tol: f64,
    max_regions: usize,
) -> Result<Cubature> {
    let z = chamber_norm(beta)?;
    let mut c = adaptive_simplex(
        |x| {
            let l = spectrum(x);
            f(&l) * vandermonde(&l, beta)
        },
        &weyl_chamber(),
        3,
        tol / z,
        MIN_REGIONS,
        max_regions,
    );
    c.value *= z;
    c.error *= z;
    Ok(c)
}

/// `∫ σ(C_max)` over the HS eigenvalue law, restricted to `C_max ∈ range`.
pub fn esf_probability(
    beta: u32,
    sigma: &dyn Fn(f64) -> f64,
    range: (f64, f64),
    tol: f64,
    max_regions: usize,
) -> Result<Cubature> {
    chamber_expectation(
        beta,
        |l| {
            let c = c_max_raw(l).max(0.0);
            if c >= range.0 && c <= range.1 {
                sigma(c)
            } else {
                0.0
            }
        },
        tol,
        max_regions,
    )
}

const MAX_REGIONS: usize = 200_000;
const MIN_REGIONS: usize = 4096;

/// Evaluates the right-hand side of an identity and compares it with its target.
///
/// Diagonal-entry identities ignore `sigma`; eigenvalue identities require it.
/// Missing the tolerance is reported through `converged`, not as an error.
pub fn verify_identity(id: Identity, sigma: Option<&dyn Fn(f64) -> f64>, tol: f64) -> Result<IdentityReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    if !id.needs_sigma() {
        return Ok(verify_desf(id, tol));
    }
    let sigma = sigma.ok_or_else(|| Error::Config(format!("identity {} needs a separability function", id.tag())))?;
    let chamber = weyl_chamber();
    let (prefactor, integrand): (f64, Box<dyn Fn(&[f64; 4]) -> f64>) = match id {
        Identity::EsfComplex => (2201472000.0, Box::new(|l| vandermonde(l, 2))),
        Identity::EsfReal => (15482880.0 / 17.0, Box::new(|l| vandermonde(l, 1))),
        _ => (PI * PI / 71680.0, Box::new(bures_density)),
    };
    let c = adaptive_simplex(
        |x| {
            let l = spectrum(x);
            let s = sigma(c_max_raw(&l).max(0.0));
            if s == 0.0 {
                0.0
            } else {
                s * integrand(&l)
            }
        },
        &chamber,
        3,
        tol / prefactor,
        MIN_REGIONS,
        MAX_REGIONS,
    );
    Ok(report(id, prefactor * c.value, prefactor * c.error, c.converged, c.evaluations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desf_identities() {
        for id in [Identity::DesfComplex, Identity::DesfReal] {
            let r = verify_identity(id, None, 1e-8).unwrap();
            assert!(r.converged, "{r:?}");
            assert!(r.deviation.abs() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn chamber_norms_are_the_known_integers() {
        assert!((chamber_norm(1).unwrap() / 1935360.0 - 1.0).abs() < 1e-12);
        assert!((chamber_norm(2).unwrap() / 9081072000.0 - 1.0).abs() < 1e-12);
        assert!(chamber_norm(4).unwrap() > chamber_norm(2).unwrap());
    }

    #[test]
    fn esf_identity_with_zero_sigma_is_zero() {
        let r = verify_identity(Identity::EsfComplex, Some(&|_| 0.0), 1e-6).unwrap();
        assert_eq!(r.rhs, 0.0);
        assert!(verify_identity(Identity::EsfReal, None, 1e-6).is_err());
        assert!(Identity::parse("esfconjBures").is_ok());
        assert!(Identity::parse("x").is_err());
    }

    #[test]
    fn chamber_region_masses_are_consistent_with_registry() {
        // indicator integrands converge slowly; this is a coarse consistency check
        let ind = |pred: fn(f64) -> bool| move |l: &[f64; 4]| if pred(c_max_raw(l)) { 1.0 } else { 0.0 };
        for (beta, f) in [(1, "real"), (2, "complex")] {
            let abs = chamber_expectation(beta, ind(|c| c <= 0.0), 1e-9, 6000).unwrap();
            let up = chamber_expectation(beta, ind(|c| c >= 0.5), 1e-9, 6000).unwrap();
            let (a, u) = (value(&format!("abs_sep_hs_{f}")), value(&format!("upper_mass_hs_{f}")));
            assert!(((abs.value - a) / a).abs() < 0.05, "{f}: {abs:?} vs {a}");
            assert!(((up.value - u) / u).abs() < 0.05, "{f}: {up:?} vs {u}");
        }
        let s2 = |c: f64| (2.0 - 2.0 * c).powi(3) / 15.0;
        let e = esf_probability(2, &s2, (0.5, 1.0), 1e-9, 6000).unwrap();
        let t = value("upper_sep_hs_complex");
        assert!(((e.value - t) / t).abs() < 0.05, "{e:?} vs {t}");
    }

    #[test]
    fn printed_esf_prefactors_reproduce_the_target_with_unit_sigma() {
        let r = verify_identity(Identity::EsfComplex, Some(&|_| 1.0), 1e-9).unwrap();
        assert!(r.deviation.abs() < 1e-9, "{r:?}");
        let r = verify_identity(Identity::EsfReal, Some(&|_| 1.0), 1e-9).unwrap();
        assert!(r.deviation.abs() < 1e-9, "{r:?}");
    }
}
