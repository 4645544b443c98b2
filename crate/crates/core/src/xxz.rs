//! Six-vertex (XXZ) building blocks: R̃(u), M̃, the non-diagonal K̃± and the
//! similarity S that relates a pair of XXZ spaces to one D₂⁽²⁾ space.
//!
//! Two-dimensional basis order is |1⟩, |2⟩; on V ⊗ V it is |11⟩, |12⟩, |21⟩, |22⟩.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identities;
use crate::tensor::{c, DenseOperator, SiteLayout, C64};

/// Crossing parameter η, validated away from the points where R̃ degenerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C64", into = "C64")]
pub struct AnisotropyParam(C64);

impl AnisotropyParam {
    pub fn new(eta: C64) -> Result<Self> {
        if !(eta.re.is_finite() && eta.im.is_finite()) {
            return Err(Error::InvalidEta(eta, "not finite"));
        }
        if eta.sinh().norm() < 1e-12 {
            return Err(Error::InvalidEta(eta, "sinh η vanishes"));
        }
        let k = (eta.im / std::f64::consts::PI).round();
        if (eta - c(0.0, k * std::f64::consts::PI)).norm() < 1e-6 {
            return Err(Error::InvalidEta(eta, "η within 1e-6 of iπk"));
        }
        Ok(Self(eta))
    }

    pub fn value(self) -> C64 {
        self.0
    }
}

impl TryFrom<C64> for AnisotropyParam {
    type Error = Error;
    fn try_from(eta: C64) -> Result<Self> {
        Self::new(eta)
    }
}

impl From<AnisotropyParam> for C64 {
    fn from(p: AnisotropyParam) -> C64 {
        p.0
    }
}

/// Free boundary parameters of both chain ends: `(s, s1, s2)` enter K⁻,
/// the primed set `(sP, s1P, s2P)` enters K⁺.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxzBoundary {
    pub s: C64,
    pub s1: C64,
    pub s2: C64,
    #[serde(rename = "sP")]
    pub s_p: C64,
    #[serde(rename = "s1P")]
    pub s1_p: C64,
    #[serde(rename = "s2P")]
    pub s2_p: C64,
}

impl XxzBoundary {
    /// The primed triple moved into the unprimed slots.
    pub fn primed(&self) -> (C64, C64, C64) {
        (self.s_p, self.s1_p, self.s2_p)
    }

    pub fn unprimed(&self) -> (C64, C64, C64) {
        (self.s, self.s1, self.s2)
    }
}

fn two() -> SiteLayout {
    SiteLayout::flat(2)
}

fn pair() -> SiteLayout {
    SiteLayout::uniform(2, 2)
}

pub fn r_xxz(u: C64, eta: C64) -> DenseOperator {
    let z = c(0.0, 0.0);
    let a = (eta - u / 2.0).sinh();
    let b = (u / 2.0).sinh();
    let se = eta.sinh();
    let lo = (-u / 2.0).exp() * se;
    let hi = (u / 2.0).exp() * se;
    DenseOperator::from_rows(
        [[a, z, z, z], [z, b, lo, z], [z, hi, b, z], [z, z, z, a]],
        pair(),
    )
}

/// `ρ_s(u) = sinh(−u/2+η) sinh(u/2+η)`.
pub fn rho_s(u: C64, eta: C64) -> C64 {
    (eta - u / 2.0).sinh() * (eta + u / 2.0).sinh()
}

pub fn m_tilde(eta: C64) -> DenseOperator {
    DenseOperator::diagonal(&[eta.exp(), (-eta).exp()])
}

/// K̃⁻ built from an explicit triple.
pub fn k_minus_triple(u: C64, (s, s1, s2): (C64, C64, C64)) -> DenseOperator {
    let su = u.sinh();
    DenseOperator::from_rows(
        [
            [-(-u / 2.0).exp() * (u / 2.0 - s).sinh(), s1 * su],
            [s2 * su, (u / 2.0).exp() * (u / 2.0 + s).sinh()],
        ],
        two(),
    )
}

pub fn k_minus_xxz(u: C64, bnd: &XxzBoundary) -> DenseOperator {
    k_minus_triple(u, bnd.unprimed())
}

/// `K̃⁺(u) = M̃ K̃⁻(−u+2η)` with the primed triple.
pub fn k_plus_xxz(u: C64, bnd: &XxzBoundary, eta: C64) -> DenseOperator {
    &m_tilde(eta) * &k_minus_triple(-u + 2.0 * eta, bnd.primed())
}

/// The involutive similarity S on V ⊗ V; fails when cosh η ≈ 0.
pub fn s_transform(eta: C64) -> Result<DenseOperator> {
    let ch = eta.cosh();
    if ch.norm() < 1e-12 {
        return Err(Error::DegenerateS(ch));
    }
    let root = ch.sqrt();
    let p = (eta / 2.0).cosh() / root;
    let q = (eta / 2.0).sinh() / root;
    let one = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    Ok(DenseOperator::from_rows(
        [
            [one, z, z, z],
            [z, p, -q, z],
            [z, -q, -p, z],
            [z, z, z, one],
        ],
        pair(),
    ))
}

pub fn ybe_residual(u: C64, v: C64, eta: C64) -> f64 {
    identities::yang_baxter(|w| r_xxz(w, eta), 2, u, v)
}

pub fn unitarity_residual(u: C64, eta: C64) -> f64 {
    identities::unitarity(|w| r_xxz(w, eta), rho_s(u, eta), u)
}

pub fn crossing_residual(u: C64, eta: C64) -> f64 {
    identities::crossing_first(
        |w| r_xxz(w, eta),
        &m_tilde(eta),
        rho_s(u - 2.0 * eta, eta),
        u,
        eta,
    )
}

/// Full transposition of R̃ against R̃₂₁. The literal `R̃^{t₁t₂} = R̃` fails
/// because of the e^{∓u/2} weights; the space-swapped form holds.
pub fn pt_symmetry_residual(u: C64, eta: C64) -> f64 {
    let r = r_xxz(u, eta);
    crate::tensor::relative_residual(&r.transpose(), &identities::swap_spaces(&r))
        .expect("same dims")
}

/// `R̃(0) = ρ_s(0)^{1/2} 𝒫̃` with the root taken as sinh η.
pub fn initial_condition_residual(eta: C64) -> f64 {
    let p = crate::tensor::permutation_operator(2).scale(eta.sinh());
    crate::tensor::relative_residual(&r_xxz(c(0.0, 0.0), eta), &p).expect("same dims")
}

pub fn reflection_minus_residual(u: C64, v: C64, eta: C64, bnd: &XxzBoundary) -> f64 {
    identities::reflection_minus(|w| r_xxz(w, eta), |w| k_minus_xxz(w, bnd), u, v)
}

pub fn reflection_plus_residual(u: C64, v: C64, eta: C64, bnd: &XxzBoundary) -> f64 {
    identities::reflection_plus(
        |w| r_xxz(w, eta),
        |w| k_plus_xxz(w, bnd, eta),
        &m_tilde(eta),
        u,
        v,
        eta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{permutation_operator, relative_residual};
    use std::f64::consts::PI;

    fn bnd() -> XxzBoundary {
        XxzBoundary {
            s: c(0.23, 0.0),
            s1: c(0.51, 0.0),
            s2: c(-0.29, 0.0),
            s_p: c(0.41, 0.0),
            s1_p: c(-0.33, 0.0),
            s2_p: c(0.27, 0.0),
        }
    }

    #[test]
    fn anisotropy_validation() {
        assert!(AnisotropyParam::new(c(0.37, 0.0)).is_ok());
        assert!(AnisotropyParam::new(c(0.0, 0.0)).is_err());
        assert!(AnisotropyParam::new(c(0.0, PI)).is_err());
        assert!(AnisotropyParam::new(c(1e-8, 2.0 * PI)).is_err());
        assert!(AnisotropyParam::new(c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn r_initial_and_quasi_period() {
        let eta = c(0.37, 0.1);
        let r0 = r_xxz(c(0.0, 0.0), eta);
        assert!(
            relative_residual(&r0, &permutation_operator(2).scale(eta.sinh())).unwrap() < 1e-15
        );
        let u = c(0.3, -0.7);
        let shifted = r_xxz(u + c(0.0, 2.0 * PI), eta);
        assert!(relative_residual(&shifted, &r_xxz(u, eta).scale(c(-1.0, 0.0))).unwrap() < 1e-14);
    }

    #[test]
    fn rho_special_values() {
        let eta = c(0.37, 0.2);
        assert!((rho_s(c(0.0, 0.0), eta) - eta.sinh() * eta.sinh()).norm() < 1e-15);
        assert!(rho_s(2.0 * eta, eta).norm() < 1e-15);
        assert!((rho_s(c(0.0, PI), eta) - eta.cosh() * eta.cosh()).norm() < 1e-14);
    }

    #[test]
    fn m_tilde_basics() {
        assert_eq!(
            m_tilde(c(0.0, 0.0)).matrix(),
            DenseOperator::identity(two()).matrix()
        );
        assert!((m_tilde(c(0.4, 1.3)).determinant() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn r_properties() {
        let eta = c(0.37, 0.0);
        for u in [c(0.3, 0.2), c(-1.1, 2.5), c(1.7, -0.4)] {
            assert!(unitarity_residual(u, eta) < 1e-14);
            assert!(crossing_residual(u, eta) < 1e-14);
            assert!(pt_symmetry_residual(u, eta) < 1e-15);
            assert!(ybe_residual(u, c(0.2, -0.9), eta) < 1e-14);
        }
        assert!(initial_condition_residual(eta) < 1e-15);
    }

    #[test]
    fn k_matrices() {
        let b = bnd();
        let k0 = k_minus_xxz(c(0.0, 0.0), &b);
        assert!(
            relative_residual(&k0, &DenseOperator::identity(two()).scale(b.s.sinh())).unwrap()
                < 1e-15
        );
        let eta = c(0.37, 0.0);
        let kp = k_plus_xxz(2.0 * eta, &b, eta);
        assert!(relative_residual(&kp, &m_tilde(eta).scale(b.s_p.sinh())).unwrap() < 1e-15);
        let mut diag = b;
        diag.s1 = c(0.0, 0.0);
        diag.s2 = c(0.0, 0.0);
        let k = k_minus_xxz(c(0.4, 0.3), &diag);
        assert_eq!(k.get(0, 1), c(0.0, 0.0));
        assert_eq!(k.get(1, 0), c(0.0, 0.0));
        for (u, v) in [(c(0.3, 0.4), c(-0.5, 0.1)), (c(1.2, -2.0), c(0.7, 0.9))] {
            assert!(reflection_minus_residual(u, v, eta, &b) < 1e-14);
            assert!(reflection_plus_residual(u, v, eta, &b) < 1e-14);
        }
    }

    #[test]
    fn s_is_symmetric_involution() {
        let eta = c(0.37, 0.25);
        let s = s_transform(eta).unwrap();
        let s2 = &s * &s;
        assert!(relative_residual(&s2, &DenseOperator::identity(pair())).unwrap() < 1e-15);
        assert_eq!(s.transpose(), s);
        assert!((s.determinant() + c(1.0, 0.0)).norm() < 1e-14);
        assert!(s_transform(c(0.0, PI / 2.0)).is_err());
    }
}
