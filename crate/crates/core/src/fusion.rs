//! Fusion identities, the functional constraints on t̃(u), and the
//! inhomogeneous T-Q relation with its Bethe equations.
//!
//! With `L = 2N` XXZ sites and Bethe roots μ₁..μ_L:
//!
//! ```text
//! Λ̃(u) = F₁(u) a(u) Q(u+2η)/Q(u) + F₂(u) d(u) Q(u−2η)/Q(u)
//!        + x sinh u sinh(u−2η) a(u) d(u)/Q(u)
//! Q(u)  = Π_l sinh½(u−μ_l) sinh½(u+μ_l−2η) = Π_l ½[cosh(u−η) − cosh(μ_l−η)]
//! a(u)  = Π_j sinh½(u−θ_j−2η) sinh½(u+θ_j−2η),   d(u) = a(u+2η)
//! F₁(u) = 2 sinh(u−2η) / (sinh(u−η) √(αα′)) Π_i cosh½(u+α_i)
//! F₂(u) = 2 sinh u     / (sinh(u−η) √(αα′)) Π_i cosh½(u−2η−α_i)
//! ```
//!
//! where α_i runs over α₁, α₂, α′₁, α′₂.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::d22::BoundaryClass;
use crate::error::{Error, Result};
use crate::jet::{Analytic, Jet};
use crate::tensor::{
    c, permutation_operator, relative_residual, scaled_residual, DenseOperator, SiteLayout, C64,
};
use crate::transfer::{
    transfer_xxz, transfer_xxz_asymptotic, ChainSpec, Inhomogeneities, StaggerPattern,
};
use crate::xxz::{self, XxzBoundary};

/// Re u used when checking the asymptotic behaviour of the transfer matrix.
pub const ASYMPTOTIC_RE_OPERATOR: f64 = 20.0;
/// Re u used for the same check on scalar eigenvalues; scalars do not overflow here.
pub const ASYMPTOTIC_RE_SCALAR: f64 = 40.0;
const ASYMPTOTIC_IM: f64 = 0.3;
const LIMIT_EPS: f64 = 1e-4;

fn zero() -> C64 {
    c(0.0, 0.0)
}

fn one() -> C64 {
    c(1.0, 0.0)
}

fn ipi() -> C64 {
    c(0.0, PI)
}

/// Scalar relative difference `|a−b| / max(|a|, |b|)`.
pub fn scalar_residual(a: C64, b: C64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// `|ψ₀⟩⟨ψ₀|` with `|ψ₀⟩ = (e^{−η/2}|12⟩ + e^{η/2}|21⟩)/√(2 cosh η)`.
pub fn projector_psi0(eta: C64) -> Result<DenseOperator> {
    let ch = eta.cosh();
    if ch.norm() < 1e-12 {
        return Err(Error::DegenerateS(ch));
    }
    let norm = (2.0 * ch).sqrt();
    let v = [
        zero(),
        (-eta / 2.0).exp() / norm,
        (eta / 2.0).exp() / norm,
        zero(),
    ];
    Ok(DenseOperator::from_fn(SiteLayout::uniform(2, 2), |i, j| {
        v[i] * v[j]
    }))
}

/// `−sinh(u/2+η) sinh(u/2−η)`.
pub fn fused_r_scalar(u: C64, eta: C64) -> C64 {
    -(u / 2.0 + eta).sinh() * (u / 2.0 - eta).sinh()
}

/// Residuals of the two fused-R identities on `V₁′ ⊗ V₂′ ⊗ V₃`:
/// `P₂′₁′ R̃₁′₃(u) R̃₂′₃(u+2η) P₂′₁′` and `P₁′₂′ R̃₃₁′(u) R̃₃₂′(u+2η) P₁′₂′`,
/// each against the scalar multiple of its projector.
pub fn fused_r_identity(u: C64, eta: C64) -> Result<(f64, f64)> {
    let p = projector_psi0(eta)?;
    let layout = SiteLayout::uniform(2, 3);
    let on = |op: &DenseOperator, sites: &[usize]| DenseOperator::embed(op, sites, &layout);
    let scalar = fused_r_scalar(u, eta);
    let (r_a, r_b) = (xxz::r_xxz(u, eta), xxz::r_xxz(u + 2.0 * eta, eta));

    let p21 = on(&p, &[1, 0])?;
    let lhs = &(&(&p21 * &on(&r_a, &[0, 2])?) * &on(&r_b, &[1, 2])?) * &p21;
    let first = relative_residual(&lhs, &p21.scale(scalar))?;

    let p12 = on(&p, &[0, 1])?;
    let lhs = &(&(&p12 * &on(&r_a, &[2, 0])?) * &on(&r_b, &[2, 1])?) * &p12;
    let second = relative_residual(&lhs, &p12.scale(scalar))?;
    Ok((first, second))
}

/// α, β, α₁, α₂ for one chain end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndConstants {
    pub alpha: C64,
    pub beta: C64,
    pub alpha1: C64,
    pub alpha2: C64,
}

impl EndConstants {
    pub fn new(s: C64, s1: C64, s2: C64) -> Result<Self> {
        let p = s1 * s2;
        if p.norm() < 1e-14 {
            return Err(Error::DegenerateBoundary(
                "s1·s2 = 0: fusion constants need a non-diagonal boundary",
            ));
        }
        let alpha = one() / (2.0 * p);
        let beta = ((8.0 * p * (2.0 * s).cosh() + 16.0 * p * p + 1.0) / (16.0 * p * p)).sqrt();
        let alpha1 = (alpha / 2.0 + beta).acosh();
        let alpha2 = (alpha / 2.0 - beta).acosh();
        Ok(Self {
            alpha,
            beta,
            alpha1,
            alpha2,
        })
    }

    /// `(2/α)·Π± cosh½(u±α₁) cosh½(u±α₂)`, even in each α_i.
    fn cosh_product(&self, u: C64) -> C64 {
        let mut f = 2.0 / self.alpha;
        for a in [self.alpha1, self.alpha2] {
            f *= ((u + a) / 2.0).cosh() * ((u - a) / 2.0).cosh();
        }
        f
    }
}

/// Fusion constants of both ends (principal arccosh branches).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConstants {
    pub minus: EndConstants,
    pub plus: EndConstants,
}

impl FusionConstants {
    pub fn alphas(&self) -> [C64; 4] {
        [
            self.minus.alpha1,
            self.minus.alpha2,
            self.plus.alpha1,
            self.plus.alpha2,
        ]
    }
}

pub fn fusion_constants(bnd: &XxzBoundary) -> Result<FusionConstants> {
    Ok(FusionConstants {
        minus: EndConstants::new(bnd.s, bnd.s1, bnd.s2)?,
        plus: EndConstants::new(bnd.s_p, bnd.s1_p, bnd.s2_p)?,
    })
}

/// Scalar of the fused K⁺ identity: `2 sinh(u−2η)/α′ · Π cosh½(u±α′_i)`.
pub fn fused_k_plus_scalar(u: C64, eta: C64, consts: &FusionConstants) -> C64 {
    (u - 2.0 * eta).sinh() * consts.plus.cosh_product(u)
}

/// Scalar of the fused K⁻ identity: `−2 sinh(u+2η)/α · Π cosh½(u±α_i)`.
pub fn fused_k_minus_scalar(u: C64, eta: C64, consts: &FusionConstants) -> C64 {
    -(u + 2.0 * eta).sinh() * consts.minus.cosh_product(u)
}

/// Residuals `(K⁺ line, K⁻ line)` of the fused reflection identities
/// `P K̃⁺₂(u+2η) M̃₁ R̃₁₂(−2u+2η) M̃₁⁻¹ K̃⁺₁(u) P₂₁ = c⁺(u) P 𝒫̃` and
/// `P₂₁ K̃⁻₁(u) R̃₂₁(2u+2η) K̃⁻₂(u+2η) P = c⁻(u) 𝒫̃ P`, with `P₂₁ = 𝒫̃ P 𝒫̃`.
pub fn fused_k_identities(u: C64, bnd: &XxzBoundary, eta: C64) -> Result<(f64, f64)> {
    let consts = fusion_constants(bnd)?;
    let p = projector_psi0(eta)?;
    let swap = permutation_operator(2);
    let p21 = &(&swap * &p) * &swap;
    let id = DenseOperator::identity(SiteLayout::flat(2));
    let m1 = xxz::m_tilde(eta).kron(&id);
    let m1_inv = xxz::m_tilde(-eta).kron(&id);

    let kp = |w: C64| xxz::k_plus_xxz(w, bnd, eta);
    let lhs = [
        p.clone(),
        id.kron(&kp(u + 2.0 * eta)),
        m1,
        xxz::r_xxz(-2.0 * u + 2.0 * eta, eta),
        m1_inv,
        kp(u).kron(&id),
        p21.clone(),
    ]
    .iter()
    .skip(1)
    .fold(p.clone(), |acc, o| &acc * o);
    let plus = scaled_residual(
        &lhs,
        &(&p * &swap).scale(fused_k_plus_scalar(u, eta, &consts)),
    )?;

    let km = |w: C64| xxz::k_minus_xxz(w, bnd);
    let r21 = crate::identities::swap_spaces(&xxz::r_xxz(2.0 * u + 2.0 * eta, eta));
    let lhs = &(&(&(&p21 * &km(u).kron(&id)) * &r21) * &id.kron(&km(u + 2.0 * eta))) * &p;
    let minus = scaled_residual(
        &lhs,
        &(&swap * &p).scale(fused_k_minus_scalar(u, eta, &consts)),
    )?;
    Ok((plus, minus))
}

fn ensure_regular(w: C64, eta: C64) -> Result<()> {
    if ((w - eta).sinh() * (w + eta).sinh()).norm() < 1e-10 {
        Err(Error::SingularPoint(
            w,
            "sinh(w∓η) vanishes in the quantum-determinant prefactor",
        ))
    } else {
        Ok(())
    }
}

/// Closed form of `t̃(w) t̃(w+2η)` at `w = ±θ_j`.
pub fn quantum_det_scalar(
    w: C64,
    thetas: &Inhomogeneities,
    eta: C64,
    consts: &FusionConstants,
) -> C64 {
    let mut f = 4.0 * (w - 2.0 * eta).sinh() * (w + 2.0 * eta).sinh()
        / (consts.minus.alpha * consts.plus.alpha * (w - eta).sinh() * (w + eta).sinh());
    for a in consts.alphas() {
        f *= ((w - a) / 2.0).cosh() * ((w + a) / 2.0).cosh();
    }
    for &th in thetas.thetas() {
        f *= ((w - th - 2.0 * eta) / 2.0).sinh()
            * ((w - th + 2.0 * eta) / 2.0).sinh()
            * ((w + th - 2.0 * eta) / 2.0).sinh()
            * ((w + th + 2.0 * eta) / 2.0).sinh();
    }
    f
}

/// Scalar and operator residual of `t̃(±θ_j) t̃(±θ_j+2η)` (j is 1-based).
pub fn quantum_det_value(
    sign: f64,
    j: usize,
    thetas: &Inhomogeneities,
    eta: C64,
    bnd: &XxzBoundary,
) -> Result<(C64, f64)> {
    assert!((1..=thetas.len()).contains(&j), "site index out of range");
    let consts = fusion_constants(bnd)?;
    let w = sign * thetas.thetas()[j - 1];
    ensure_regular(w, eta)?;
    let scalar = quantum_det_scalar(w, thetas, eta, &consts);
    let prod = &transfer_xxz(w, thetas, eta, bnd) * &transfer_xxz(w + 2.0 * eta, thetas, eta, bnd);
    let target = DenseOperator::identity(prod.layout().clone()).scale(scalar);
    Ok((scalar, scaled_residual(&prod, &target)?))
}

/// `2 cosh η sinh s sinh s′ Π ρ_s(θ_j)`: the value of t̃ at 0 and at 2η.
pub fn special_value_zero(thetas: &Inhomogeneities, eta: C64, bnd: &XxzBoundary) -> C64 {
    let prod: C64 = thetas
        .thetas()
        .iter()
        .map(|&t| xxz::rho_s(t, eta))
        .product();
    2.0 * eta.cosh() * bnd.s.sinh() * bnd.s_p.sinh() * prod
}

/// `2 cosh η cosh s cosh s′ Π ρ_s(θ_j+iπ)`: the value of t̃ at iπ.
pub fn special_value_ipi(thetas: &Inhomogeneities, eta: C64, bnd: &XxzBoundary) -> C64 {
    let prod: C64 = thetas
        .thetas()
        .iter()
        .map(|&t| xxz::rho_s(t + ipi(), eta))
        .product();
    2.0 * eta.cosh() * bnd.s.cosh() * bnd.s_p.cosh() * prod
}

/// Residuals of t̃(0), t̃(2η), t̃(iπ) against their scalar values.
pub fn special_values(thetas: &Inhomogeneities, eta: C64, bnd: &XxzBoundary) -> Result<[f64; 3]> {
    let v0 = special_value_zero(thetas, eta, bnd);
    let vpi = special_value_ipi(thetas, eta, bnd);
    let check = |u: C64, v: C64| -> Result<f64> {
        let t = transfer_xxz(u, thetas, eta, bnd);
        let target = DenseOperator::identity(t.layout().clone()).scale(v);
        Ok(scaled_residual(&t, &target)?)
    };
    Ok([
        check(zero(), v0)?,
        check(2.0 * eta, v0)?,
        check(ipi(), vpi)?,
    ])
}

/// `−2^{−2L−2}(e^{−η} s₁ s′₂ + e^{η} s₂ s′₁)` for an L-site chain (L = 2N).
pub fn asymptotic_value(sites: usize, eta: C64, bnd: &XxzBoundary) -> C64 {
    let k = (-eta).exp() * bnd.s1 * bnd.s2_p + eta.exp() * bnd.s2 * bnd.s1_p;
    -k * 2f64.powi(-2 * sites as i32 - 2)
}

/// Residual of `e^{∓(L+2)(u−η)} t̃(u)` at `Re u = ±20` against [`asymptotic_value`].
pub fn asymptotic_coefficient(
    sign: f64,
    thetas: &Inhomogeneities,
    eta: C64,
    bnd: &XxzBoundary,
) -> Result<f64> {
    let u = c(sign * ASYMPTOTIC_RE_OPERATOR, ASYMPTOTIC_IM);
    let t = transfer_xxz_asymptotic(u, sign, thetas, eta, bnd);
    let target =
        DenseOperator::identity(t.layout().clone()).scale(asymptotic_value(thetas.len(), eta, bnd));
    Ok(scaled_residual(&t, &target)?)
}

/// Sign choices on top of the principal constants: α_i → −α_i for
/// (α₁, α₂, α′₁, α′₂), and the sign of √(αα′).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BranchChoice {
    pub flip: [bool; 4],
    pub negate_radical: bool,
}

impl BranchChoice {
    pub const PRINCIPAL: BranchChoice = BranchChoice {
        flip: [false; 4],
        negate_radical: false,
    };

    /// All 32 assignments, principal first.
    pub fn orbit() -> impl Iterator<Item = BranchChoice> {
        (0u8..32).map(|bits| BranchChoice {
            flip: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0, bits & 8 != 0],
            negate_radical: bits & 16 != 0,
        })
    }

    pub fn label(&self) -> String {
        let s = |b: bool| if b { '-' } else { '+' };
        format!(
            "a1{} a2{} a1P{} a2P{} sqrt{}",
            s(self.flip[0]),
            s(self.flip[1]),
            s(self.flip[2]),
            s(self.flip[3]),
            s(self.negate_radical)
        )
    }
}

/// Which kind of constraint a [`Constraint`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// `t̃(w) t̃(w+2η)` at `w = sign·θ_j`.
    QuantumDet { sign: i8, j: usize },
    /// `t̃(w)` at w ∈ {0, 2η, iπ}.
    Special,
    /// `e^{∓(L+2)(u−η)} t̃(u)` as Re u → ±∞.
    Asymptotic { sign: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub point: C64,
    pub expected: C64,
}

impl Constraint {
    pub fn label(&self) -> String {
        match self.kind {
            ConstraintKind::QuantumDet { sign, j } => {
                format!("qdet {}θ{}", if sign > 0 { "+" } else { "-" }, j)
            }
            ConstraintKind::Special => {
                format!("special u={:.4}{:+.4}i", self.point.re, self.point.im)
            }
            ConstraintKind::Asymptotic { sign } => {
                format!("asymptotic {}", if sign > 0 { "+" } else { "-" })
            }
        }
    }
}

/// The 4N+5 functional values that fix t̃(u) as an operator polynomial of
/// degree 4N+4 in e^u (L = 2N quantum-determinant pairs at ±θ_j, three
/// special values, two asymptotic coefficients).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    thetas: Inhomogeneities,
    eta: C64,
    bnd: XxzBoundary,
}

impl ConstraintSet {
    pub fn new(thetas: &Inhomogeneities, eta: C64, bnd: &XxzBoundary) -> Result<Self> {
        let consts = fusion_constants(bnd)?;
        let mut constraints = Vec::new();
        for sign in [1i8, -1] {
            for (j, &th) in thetas.thetas().iter().enumerate() {
                let w = f64::from(sign) * th;
                ensure_regular(w, eta)?;
                constraints.push(Constraint {
                    kind: ConstraintKind::QuantumDet { sign, j: j + 1 },
                    point: w,
                    expected: quantum_det_scalar(w, thetas, eta, &consts),
                });
            }
        }
        let v0 = special_value_zero(thetas, eta, bnd);
        for (point, expected) in [
            (zero(), v0),
            (2.0 * eta, v0),
            (ipi(), special_value_ipi(thetas, eta, bnd)),
        ] {
            constraints.push(Constraint {
                kind: ConstraintKind::Special,
                point,
                expected,
            });
        }
        let asym = asymptotic_value(thetas.len(), eta, bnd);
        for sign in [1i8, -1] {
            constraints.push(Constraint {
                kind: ConstraintKind::Asymptotic { sign },
                point: c(f64::from(sign) * f64::INFINITY, 0.0),
                expected: asym,
            });
        }
        Ok(Self {
            constraints,
            thetas: thetas.clone(),
            eta,
            bnd: *bnd,
        })
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Residual of every constraint evaluated on the transfer matrix itself.
    pub fn check_operator(&self) -> Result<Vec<f64>> {
        let (th, eta, bnd) = (&self.thetas, self.eta, &self.bnd);
        self.constraints
            .iter()
            .map(|con| {
                let value = match con.kind {
                    ConstraintKind::QuantumDet { .. } => {
                        &transfer_xxz(con.point, th, eta, bnd)
                            * &transfer_xxz(con.point + 2.0 * eta, th, eta, bnd)
                    }
                    ConstraintKind::Special => transfer_xxz(con.point, th, eta, bnd),
                    ConstraintKind::Asymptotic { sign } => {
                        let s = f64::from(sign);
                        transfer_xxz_asymptotic(
                            c(s * ASYMPTOTIC_RE_OPERATOR, ASYMPTOTIC_IM),
                            s,
                            th,
                            eta,
                            bnd,
                        )
                    }
                };
                let target = DenseOperator::identity(value.layout().clone()).scale(con.expected);
                Ok(scaled_residual(&value, &target)?)
            })
            .collect()
    }

    /// Residual of every constraint evaluated on the T-Q eigenvalue for `mus`.
    pub fn check_eigenvalue(&self, model: &TqModel, mus: &[C64]) -> Result<Vec<f64>> {
        let eta = self.eta;
        self.constraints
            .iter()
            .map(|con| {
                let value = match con.kind {
                    ConstraintKind::QuantumDet { .. } => {
                        model.lambda(con.point, mus)? * model.lambda(con.point + 2.0 * eta, mus)?
                    }
                    ConstraintKind::Special => model.lambda(con.point, mus)?,
                    ConstraintKind::Asymptotic { sign } => {
                        model.asymptotic_coefficient(f64::from(sign), mus)
                    }
                };
                Ok(scalar_residual(value, con.expected))
            })
            .collect()
    }
}

/// The T-Q eigenvalue function for one inhomogeneous chain and one branch choice.
#[derive(Debug, Clone, PartialEq)]
pub struct TqModel {
    eta: C64,
    thetas: Inhomogeneities,
    bnd: XxzBoundary,
    constants: FusionConstants,
    branch: BranchChoice,
    alphas: [C64; 4],
    radical: C64,
    x: C64,
}

/// Roots used when a root-independent value is evaluated through Λ̃.
fn probe_roots(len: usize) -> Vec<C64> {
    (0..len)
        .map(|k| c(0.137 + 0.291 * k as f64, 0.419 - 0.173 * k as f64))
        .collect()
}

impl TqModel {
    pub fn new(
        thetas: &Inhomogeneities,
        eta: C64,
        bnd: &XxzBoundary,
        branch: BranchChoice,
    ) -> Result<Self> {
        let constants = fusion_constants(bnd)?;
        let mut alphas = constants.alphas();
        for (a, flip) in alphas.iter_mut().zip(branch.flip) {
            if flip {
                *a = -*a;
            }
        }
        let mut radical = (constants.minus.alpha * constants.plus.alpha).sqrt();
        if branch.negate_radical {
            radical = -radical;
        }
        // √(s₁s₂s′₁s′₂) = 1/(2√(αα′)), with the same sign choice
        let sq = one() / (2.0 * radical);
        let l = thetas.len() as f64;
        let sum: C64 = alphas.iter().sum();
        let x = -2.0 * sq * ((l + 1.0) * eta + sum / 2.0).cosh()
            - ((-eta).exp() * bnd.s1 * bnd.s2_p + eta.exp() * bnd.s2 * bnd.s1_p);
        Ok(Self {
            eta,
            thetas: thetas.clone(),
            bnd: *bnd,
            constants,
            branch,
            alphas,
            radical,
            x,
        })
    }

    /// Principal branch if it satisfies the root-independent constraints,
    /// otherwise the best member of the sign orbit.
    pub fn select(thetas: &Inhomogeneities, eta: C64, bnd: &XxzBoundary) -> Result<(Self, f64)> {
        let constraints = ConstraintSet::new(thetas, eta, bnd)?;
        let probe = probe_roots(thetas.len());
        let mut best: Option<(Self, f64)> = None;
        for branch in BranchChoice::orbit() {
            let model = Self::new(thetas, eta, bnd, branch)?;
            let worst = constraints
                .check_eigenvalue(&model, &probe)
                .map(|r| r.into_iter().fold(0.0, f64::max))
                .unwrap_or(f64::INFINITY);
            if branch == BranchChoice::PRINCIPAL && worst <= 1e-9 {
                return Ok((model, worst));
            }
            if best.as_ref().is_none_or(|(_, b)| worst < *b) {
                best = Some((model, worst));
            }
        }
        let (model, worst) = best.expect("orbit is non-empty");
        if worst > 1e-6 {
            return Err(Error::NoBranch(worst));
        }
        Ok((model, worst))
    }

    /// Model on the staggered XXZ chain of `spec` (θ and variables of `pattern`).
    pub fn staggered(spec: &ChainSpec, pattern: StaggerPattern) -> Result<(Self, f64)> {
        pattern.check_class(spec.class())?;
        Self::select(
            &Inhomogeneities::staggered(spec.n(), pattern),
            spec.eta(),
            spec.params(),
        )
    }

    pub fn eta(&self) -> C64 {
        self.eta
    }

    pub fn thetas(&self) -> &Inhomogeneities {
        &self.thetas
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn branch(&self) -> BranchChoice {
        self.branch
    }

    pub fn constants(&self) -> &FusionConstants {
        &self.constants
    }

    pub fn root_count(&self) -> usize {
        self.thetas.len()
    }

    fn a<T: Analytic>(&self, w: &T) -> T {
        let mut out = w.lift(one());
        for &th in self.thetas.thetas() {
            out = out
                * w.shift(-th - 2.0 * self.eta).scale(c(0.5, 0.0)).sinh()
                * w.shift(th - 2.0 * self.eta).scale(c(0.5, 0.0)).sinh();
        }
        out
    }

    fn d<T: Analytic>(&self, w: &T) -> T {
        self.a(&w.shift(2.0 * self.eta))
    }

    fn cosh_plus<T: Analytic>(&self, w: &T) -> T {
        self.alphas.iter().fold(w.lift(one()), |acc, &al| {
            acc * w.shift(al).scale(c(0.5, 0.0)).cosh()
        })
    }

    fn cosh_minus<T: Analytic>(&self, w: &T) -> T {
        self.alphas.iter().fold(w.lift(one()), |acc, &al| {
            acc * w.shift(-2.0 * self.eta - al).scale(c(0.5, 0.0)).cosh()
        })
    }

    /// `½[cosh(w−η) − cosh(μ−η)]`.
    fn q_factor<T: Analytic>(&self, w: &T, mu: &T) -> T {
        (w.shift(-self.eta).cosh() - mu.shift(-self.eta).cosh()).scale(c(0.5, 0.0))
    }

    pub fn q(&self, w: C64, mus: &[C64]) -> C64 {
        mus.iter().map(|m| self.q_factor(&w, m)).product()
    }

    fn f1(&self, w: C64) -> C64 {
        2.0 * (w - 2.0 * self.eta).sinh() / ((w - self.eta).sinh() * self.radical)
            * self.cosh_plus(&w)
    }

    fn f2(&self, w: C64) -> C64 {
        2.0 * w.sinh() / ((w - self.eta).sinh() * self.radical) * self.cosh_minus(&w)
    }

    /// Three-term expression, no limit handling.
    pub fn lambda_unchecked(&self, u: C64, mus: &[C64]) -> C64 {
        let eta = self.eta;
        let qu = self.q(u, mus);
        let (a, d) = (self.a(&u), self.d(&u));
        self.f1(u) * a * self.q(u + 2.0 * eta, mus) / qu
            + self.f2(u) * d * self.q(u - 2.0 * eta, mus) / qu
            + self.x * u.sinh() * (u - 2.0 * eta).sinh() * a * d / qu
    }

    fn two_sided(&self, u: C64, mus: &[C64]) -> C64 {
        let avg =
            |e: f64| (self.lambda_unchecked(u + e, mus) + self.lambda_unchecked(u - e, mus)) / 2.0;
        // Richardson step on the symmetric average
        (4.0 * avg(LIMIT_EPS / 2.0) - avg(LIMIT_EPS)) / 3.0
    }

    /// Λ̃(u); removable singularities at u = η and at Q-zeros of a Bethe
    /// solution are resolved by a symmetric limit.
    pub fn lambda(&self, u: C64, mus: &[C64]) -> Result<C64> {
        let near_eta = (u - self.eta).sinh().norm() < 1e-6;
        let z = (u - self.eta).cosh();
        let near_root = mus
            .iter()
            .any(|m| (z - (*m - self.eta).cosh()).norm() < 1e-8);
        if near_root {
            let worst = self
                .bae_residuals(mus)
                .iter()
                .map(|r| r.norm())
                .fold(0.0, f64::max);
            if worst > 1e-8 {
                return Err(Error::Pole(u));
            }
        }
        if near_eta || near_root {
            Ok(self.two_sided(u, mus))
        } else {
            Ok(self.lambda_unchecked(u, mus))
        }
    }

    /// Left-minus-right of the Bethe equations:
    /// `F₁(μ)Q(μ+2η)/d(μ) + F₂(μ)Q(μ−2η)/a(μ) + x sinh μ sinh(μ−2η)`.
    pub fn bae_residuals(&self, mus: &[C64]) -> Vec<C64> {
        let eta = self.eta;
        mus.iter()
            .map(|&m| {
                self.f1(m) * self.q(m + 2.0 * eta, mus) / self.d(&m)
                    + self.f2(m) * self.q(m - 2.0 * eta, mus) / self.a(&m)
                    + self.x * m.sinh() * (m - 2.0 * eta).sinh()
            })
            .collect()
    }

    /// Bethe equations divided by `sinh μ_l sinh(μ_l−2η)`, with that factor
    /// cancelled analytically against the l-th factors of Q(μ_l±2η).
    pub fn reduced_bae<T: Analytic>(&self, mus: &[T]) -> Vec<T> {
        let eta = self.eta;
        let pre = 2.0 * eta.sinh() / self.radical;
        (0..mus.len())
            .map(|l| {
                let m = &mus[l];
                let mut up = self.cosh_plus(m) / self.d(m);
                let mut down = self.cosh_minus(m) / self.a(m);
                for (k, mk) in mus.iter().enumerate() {
                    if k != l {
                        up = up * self.q_factor(&m.shift(2.0 * eta), mk);
                        down = down * self.q_factor(&m.shift(-2.0 * eta), mk);
                    }
                }
                ((up - down) / m.shift(-eta).sinh())
                    .scale(pre)
                    .shift(self.x)
            })
            .collect()
    }

    /// Reduced equations multiplied by `sinh(μ_l−η) a(μ_l) d(μ_l)`. This form is
    /// entire in every μ (the double poles of 1/a, 1/d are gone) at the cost
    /// of trivial zeros at μ_l ∈ {η, η+iπ}.
    pub fn entire_bae<T: Analytic>(&self, mus: &[T]) -> Vec<T> {
        let eta = self.eta;
        let pre = 2.0 * eta.sinh() / self.radical;
        (0..mus.len())
            .map(|l| {
                let m = &mus[l];
                let (a, d) = (self.a(m), self.d(m));
                let mut up = self.cosh_plus(m) * a.clone();
                let mut down = self.cosh_minus(m) * d.clone();
                for (k, mk) in mus.iter().enumerate() {
                    if k != l {
                        up = up * self.q_factor(&m.shift(2.0 * eta), mk);
                        down = down * self.q_factor(&m.shift(-2.0 * eta), mk);
                    }
                }
                (up - down).scale(pre) + m.shift(-eta).sinh() * a * d.scale(self.x)
            })
            .collect()
    }

    pub fn entire_bae_jacobian(&self, mus: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        self.jacobian_of(mus, |v| self.entire_bae(v))
    }

    /// Reduced residual and its Jacobian.
    pub fn reduced_bae_jacobian(&self, mus: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        self.jacobian_of(mus, |v| self.reduced_bae(v))
    }

    fn jacobian_of(&self, mus: &[C64], f: impl Fn(&[Jet]) -> Vec<Jet>) -> (Vec<C64>, DMatrix<C64>) {
        let n = mus.len();
        let vars: Vec<Jet> = mus
            .iter()
            .enumerate()
            .map(|(i, &m)| Jet::variable(m, i, n))
            .collect();
        let out = f(&vars);
        let values = out.iter().map(|j| j.v).collect();
        let jac = DMatrix::from_fn(n, n, |i, k| out[i].d[k]);
        (values, jac)
    }

    /// `e^{∓(L+2)(u−η)} Λ̃(u)` at `Re u = ±40`.
    pub fn asymptotic_coefficient(&self, sign: f64, mus: &[C64]) -> C64 {
        let u = c(sign * ASYMPTOTIC_RE_SCALAR, ASYMPTOTIC_IM);
        let m = self.thetas.len() as f64 + 2.0;
        self.lambda_unchecked(u, mus) * (-sign * m * (u - self.eta)).exp()
    }
}

/// Eigenvalue of the D₂⁽²⁾ transfer matrix rebuilt from a staggered XXZ
/// eigenvalue: `2^{8N} ρ_s(2u+σ−2η) Λ̃_s(u+iπ) Λ̃_s(u)` with σ = iπ (class I) or
/// 2iπ (class II), where `Λ̃_s(u) = Λ̃(u + offset)` in the pattern's variables.
pub fn lambda_d22(
    u: C64,
    spec: &ChainSpec,
    pattern: StaggerPattern,
    model: &TqModel,
    mus: &[C64],
) -> Result<C64> {
    pattern.check_class(spec.class())?;
    let eta = spec.eta();
    let shift = match spec.class() {
        BoundaryClass::I => ipi(),
        BoundaryClass::II => 2.0 * ipi(),
    };
    let pre = xxz::rho_s(2.0 * u + shift - 2.0 * eta, eta) * 2f64.powi(8 * spec.n() as i32);
    let off = pattern.offset();
    Ok(pre * model.lambda(u + ipi() + off, mus)? * model.lambda(u + off, mus)?)
}

/// Least-squares fit of sampled values to `Σ_{k=−h}^{h} c_k e^{k u}`; returns the
/// relative residual `‖A c − b‖ / ‖b‖` over all components.
pub fn exp_polynomial_fit_residual<F>(f: F, half_degree: usize, samples: usize) -> f64
where
    F: Fn(C64) -> Vec<C64>,
{
    let h = half_degree as i32;
    let basis = 2 * half_degree + 1;
    assert!(samples > basis, "need more samples than basis functions");
    let points: Vec<C64> = (0..samples)
        .map(|k| c(0.17, 2.0 * PI * (k as f64 + 0.31) / samples as f64))
        .collect();
    let a = DMatrix::from_fn(samples, basis, |i, j| {
        (f64::from(j as i32 - h) * points[i]).exp()
    });
    let values: Vec<Vec<C64>> = points.iter().map(|&u| f(u)).collect();
    let comps = values[0].len();
    let b = DMatrix::from_fn(samples, comps, |i, j| values[i][j]);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-14).expect("SVD computed with U and V");
    let resid = (&a * coef - &b).norm();
    resid / b.norm().max(1e-300)
}
