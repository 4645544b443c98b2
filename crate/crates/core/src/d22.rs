//! D₂⁽²⁾ building blocks: the 16×16 R-matrix, its crossing matrix M, and the
//! two classes of non-diagonal boundary K-matrices.
//!
//! The four-dimensional space is written in the Weyl basis |1⟩..|4⟩, stored
//! at indices 0..3. When a D₂⁽²⁾ space is split into two XXZ spaces
//! `V = V_{1'} ⊗ V_{2'}`, index `2a + b` corresponds to `|a+1⟩_{1'} ⊗ |b+1⟩_{2'}`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::identities;
use crate::tensor::{c, permutation_operator, relative_residual, DenseOperator, SiteLayout, C64};
use crate::xxz::{self, XxzBoundary};

/// Index maps of the Weyl basis, 1-based as in the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeylConventions;

impl WeylConventions {
    /// `α′ = 5 − α`.
    pub fn prime(alpha: usize) -> usize {
        assert!((1..=4).contains(&alpha), "Weyl index out of range");
        5 - alpha
    }

    /// `ᾱ`: 2, 5/2, 5/2, 3 for α = 1, 2, 3, 4.
    pub fn bar(alpha: usize) -> f64 {
        match alpha {
            1 => 2.0,
            2 | 3 => 2.5,
            4 => 3.0,
            _ => panic!("Weyl index out of range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryClass {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

impl BoundaryClass {
    pub fn label(self) -> &'static str {
        match self {
            BoundaryClass::I => "I",
            BoundaryClass::II => "II",
        }
    }
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct D22Boundary {
    pub class: BoundaryClass,
    pub params: XxzBoundary,
}

fn ipi() -> C64 {
    c(0.0, PI)
}

fn four() -> SiteLayout {
    SiteLayout::flat(4)
}

fn pair4() -> SiteLayout {
    SiteLayout::uniform(4, 2)
}

/// `[e_{ab}] ⊗ [e_{cd}]` with 1-based Weyl indices.
fn add_unit(r: &mut [C64], coef: C64, (a, b): (usize, usize), (cc, d): (usize, usize)) {
    let row = (a - 1) * 4 + (cc - 1);
    let col = (b - 1) * 4 + (d - 1);
    r[row * 16 + col] += coef;
}

/// Entry-by-entry transcription of the trigonometric D₂⁽²⁾ R-matrix.
pub fn r_d22_direct(u: C64, eta: C64) -> DenseOperator {
    let e = |z: C64| z.exp();
    let one = c(1.0, 0.0);
    let pr = WeylConventions::prime;
    let bar = WeylConventions::bar;
    let (e2u, e4n, e2n, eu) = (e(2.0 * u), e(4.0 * eta), e(2.0 * eta), e(u));
    let mut r = vec![c(0.0, 0.0); 256];

    for a in [1, 4] {
        add_unit(&mut r, (e2u - e4n) * (e2u - e4n), (a, a), (a, a));
    }
    for a in 1..=4 {
        for b in 1..=4 {
            let both_middle = (2..=3).contains(&a) && (2..=3).contains(&b);
            if a != b && a != pr(b) && !both_middle {
                add_unit(&mut r, e2n * (e2u - one) * (e2u - e4n), (a, a), (b, b));
            }
        }
    }
    let pre = -0.5 * (e4n - one) * (e2u - e4n);
    for a in [1, 4] {
        for b in [2, 3] {
            let f1 = (eu + one) * if a == 1 { one } else { eu };
            add_unit(&mut r, pre * f1, (a, b), (b, a));
            add_unit(&mut r, pre * f1, (pr(b), pr(a)), (pr(a), pr(b)));
            let f2 = (eu - one) * if a == 1 { -one } else { eu };
            add_unit(&mut r, pre * f2, (a, b), (pr(b), a));
            add_unit(&mut r, pre * f2, (pr(b), pr(a)), (pr(a), b));
        }
    }
    for a in [1, 4] {
        for b in [1, 4] {
            let delta = if a == pr(b) { one } else { c(0.0, 0.0) };
            let wb = e(2.0 * eta * (bar(a) - bar(b)));
            let coef = if a == b {
                (e4n * e2u - e4n) * (e2u - one)
            } else if a < b {
                (e4n - one) * (e4n * wb * (e2u - one) - delta * (e2u - e4n))
            } else {
                (e4n - one) * e2u * (wb * (e2u - one) - delta * (e2u - e4n))
            };
            add_unit(&mut r, coef, (a, b), (pr(a), pr(b)));
        }
    }
    for a in [1, 4] {
        for b in [2, 3] {
            let common = (e4n - one) * (e2u - one);
            let (bp, bm) = if a == 1 {
                let w = e(2.0 * eta * (a as f64 - 0.5));
                (w * common * (eu + e2n), -w * common * (eu - e2n))
            } else {
                let w = e(2.0 * eta * (a as f64 - 3.5));
                (w * common * eu * (eu + e2n), w * common * eu * (eu - e2n))
            };
            add_unit(&mut r, 0.5 * bp, (a, b), (pr(a), pr(b)));
            add_unit(&mut r, 0.5 * bp, (pr(b), pr(a)), (b, a));
            add_unit(&mut r, 0.5 * bm, (a, b), (pr(a), b));
            add_unit(&mut r, 0.5 * bm, (b, pr(a)), (b, a));
        }
    }
    let base = e2n * (e2u - one) * (e2u - e4n);
    let cp = 0.5 * (e4n - one) * (e2n + one) * eu * (eu - one) * (eu + e2n) + base;
    let cm = -0.5 * (e4n - one) * (e2n + one) * eu * (eu + one) * (eu - e2n) + base;
    let dp = 0.5 * (e4n - one) * (e2n - one) * eu * (eu + one) * (eu + e2n);
    let dm = -0.5 * (e4n - one) * (e2n - one) * eu * (eu - one) * (eu - e2n);
    for a in [2, 3] {
        add_unit(&mut r, cp, (a, a), (pr(a), pr(a)));
        add_unit(&mut r, cm, (a, a), (a, a));
        add_unit(&mut r, dp, (a, pr(a)), (pr(a), a));
        add_unit(&mut r, dm, (a, pr(a)), (a, pr(a)));
    }
    let scale = e(-2.0 * (u + 2.0 * eta));
    DenseOperator::from_fn(pair4(), |i, j| r[i * 16 + j] * scale)
}

/// `(S⊗S)·16 R̃₁′₄′(u+iπ) R̃₁′₃′(u) R̃₂′₄′(u) R̃₂′₃′(u−iπ)·(S⊗S)⁻¹` on
/// `V₁ ⊗ V₂ = (V₁′ ⊗ V₂′) ⊗ (V₃′ ⊗ V₄′)`. This is the canonical R.
pub fn r_d22_factorized(u: C64, eta: C64) -> DenseOperator {
    let qubits = SiteLayout::uniform(2, 4);
    let s = xxz::s_transform(eta).expect("cosh η ≠ 0 for a valid crossing parameter");
    let ss = s.kron(&s);
    let on = |w: C64, sites: [usize; 2]| {
        DenseOperator::embed(&xxz::r_xxz(w, eta), &sites, &qubits).expect("4 qubits")
    };
    let core =
        &(&(&on(u + ipi(), [0, 3]) * &on(u, [0, 2])) * &on(u, [1, 3])) * &on(u - ipi(), [1, 2]);
    // S⁻¹ = S
    let full = (&(&ss * &core) * &ss).scale(c(16.0, 0.0));
    full.with_layout(pair4()).expect("16 = 4·4")
}

/// Canonical R-matrix used by all higher layers.
pub fn r_d22(u: C64, eta: C64) -> DenseOperator {
    r_d22_factorized(u, eta)
}

/// `ρ(u) = 16 sinh²(u−2η) sinh²(u+2η)`.
pub fn rho_d22(u: C64, eta: C64) -> C64 {
    let a = (u - 2.0 * eta).sinh();
    let b = (u + 2.0 * eta).sinh();
    16.0 * a * a * b * b
}

pub fn m_d22(eta: C64) -> DenseOperator {
    let one = c(1.0, 0.0);
    DenseOperator::diagonal(&[(2.0 * eta).exp(), one, one, (-2.0 * eta).exp()])
}

/// One entry where the two R constructions disagree.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryDiff {
    pub row: usize,
    pub col: usize,
    pub direct: C64,
    pub factorized: C64,
}

/// Comparison of the direct transcription against the factorized R.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrixComparison {
    pub residual: f64,
    pub diffs: Vec<EntryDiff>,
}

impl fmt::Display for RMatrixComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "direct vs factorized residual {:.3e}", self.residual)?;
        for d in &self.diffs {
            // Weyl labels: row (α,γ), column (β,δ)
            writeln!(
                f,
                "  [{}{}|{}{}] direct {:.6e}{:+.6e}i factorized {:.6e}{:+.6e}i",
                d.row / 4 + 1,
                d.row % 4 + 1,
                d.col / 4 + 1,
                d.col % 4 + 1,
                d.direct.re,
                d.direct.im,
                d.factorized.re,
                d.factorized.im
            )?;
        }
        Ok(())
    }
}

/// Residual between the two R constructions plus every entry that differs by
/// more than `entry_tol` relative to the largest entry.
pub fn compare_r_constructions(u: C64, eta: C64, entry_tol: f64) -> RMatrixComparison {
    let direct = r_d22_direct(u, eta);
    let fact = r_d22_factorized(u, eta);
    let residual = relative_residual(&direct, &fact).expect("both 16×16");
    let scale = direct.max_abs().max(fact.max_abs()).max(1.0);
    let mut diffs = Vec::new();
    for row in 0..16 {
        for col in 0..16 {
            let (a, b) = (direct.get(row, col), fact.get(row, col));
            if (a - b).norm() > entry_tol * scale {
                diffs.push(EntryDiff {
                    row,
                    col,
                    direct: a,
                    factorized: b,
                });
            }
        }
    }
    RMatrixComparison { residual, diffs }
}

fn k_minus_class_one(u: C64, (s, s1, s2): (C64, C64, C64), eta: C64) -> DenseOperator {
    let h = 0.5;
    let cr = eta.cosh().sqrt();
    let (su, s2u, se) = (u.sinh(), (2.0 * u).sinh(), eta.sinh());
    let em = (-u / 2.0).exp();
    let ep = (u / 2.0).exp();
    let am = h * (u - eta - 2.0 * s);
    let ap = h * (u - eta + 2.0 * s);
    let mut k = [[c(0.0, 0.0); 4]; 4];
    k[0][0] =
        h * (-u).exp() * ((u - eta).cosh() * (u - 2.0 * s).sinh() - 2.0 * s1 * s2 * se * su * su);
    k[0][1] = h * s1 * em * cr * s2u * am.cosh();
    k[0][2] = -h * s1 * em * cr * s2u * am.sinh();
    k[0][3] = h * s1 * s1 * su * s2u;
    k[1][0] = h * s2 * em * cr * s2u * am.cosh();
    k[1][1] = -h * u.cosh() * (su + eta.cosh() * (2.0 * s).sinh());
    k[1][2] = -h * su * (se * (2.0 * s).cosh() + 2.0 * s1 * s2 * su * (u - eta).cosh());
    k[1][3] = -h * s1 * ep * cr * s2u * ap.sinh();
    k[2][0] = -h * s2 * em * cr * s2u * am.sinh();
    k[2][1] = k[1][2];
    k[2][2] = h * u.cosh() * (su - eta.cosh() * (2.0 * s).sinh());
    k[2][3] = -h * s1 * ep * cr * s2u * ap.cosh();
    k[3][0] = h * s2 * s2 * su * s2u;
    k[3][1] = -h * s2 * ep * cr * s2u * ap.sinh();
    k[3][2] = -h * s2 * ep * cr * s2u * ap.cosh();
    k[3][3] =
        -h * u.exp() * ((u - eta).cosh() * (u + 2.0 * s).sinh() - 2.0 * s1 * s2 * se * su * su);
    DenseOperator::from_rows(k, four())
}

fn k_minus_class_two(u: C64, (s, s1, s2): (C64, C64, C64), eta: C64) -> DenseOperator {
    let h = 0.5;
    let cr = eta.cosh().sqrt();
    let q = c(0.0, PI / 4.0).exp();
    let hp = c(0.0, PI / 2.0);
    let (su, cu, s2u, se) = (u.sinh(), u.cosh(), (2.0 * u).sinh(), eta.sinh());
    let em = (-u / 2.0).exp();
    let ep = (u / 2.0).exp();
    let am = h * (u - eta - 2.0 * s + hp);
    let ap = h * (u - eta + 2.0 * s - hp);
    let mut k = [[c(0.0, 0.0); 4]; 4];
    k[0][0] =
        h * (-u).exp() * ((u - eta).sinh() * (u - 2.0 * s).cosh() - 2.0 * s1 * s2 * se * cu * cu);
    k[0][1] = -h * s1 * em * q * cr * s2u * am.sinh();
    k[0][2] = h * s1 * em * q * cr * s2u * am.cosh();
    k[0][3] = -h * s1 * s1 * cu * s2u;
    k[1][0] = h * s2 * em * q * cr * s2u * am.cosh();
    k[1][1] = -h * cu * (se * (2.0 * s).cosh() - 2.0 * s1 * s2 * cu * (u - eta).sinh());
    // The sign pattern here is the one compatible with the reflection equation
    // and with the factorized form; k₂₃ = k₃₂.
    k[1][2] = -h * su * (eta.cosh() * (2.0 * s).sinh() + (u + hp).sinh());
    k[1][3] = h * s1 * ep * q * cr * s2u * ap.cosh();
    k[2][0] = -h * s2 * em * q * cr * s2u * am.sinh();
    k[2][1] = -h * su * (eta.cosh() * (2.0 * s).sinh() - (u + hp).sinh());
    k[2][2] = -h * cu * (se * (2.0 * s).cosh() - 2.0 * s1 * s2 * cu * (u - eta).sinh());
    k[2][3] = h * s1 * ep * q * cr * s2u * ap.sinh();
    k[3][0] = -h * s2 * s2 * cu * s2u;
    k[3][1] = h * s2 * ep * q * cr * s2u * ap.sinh();
    k[3][2] = h * s2 * ep * q * cr * s2u * ap.cosh();
    k[3][3] =
        h * u.exp() * ((u - eta).sinh() * (u + 2.0 * s).cosh() - 2.0 * s1 * s2 * se * cu * cu);
    DenseOperator::from_rows(k, four())
}

fn k_minus_with(class: BoundaryClass, u: C64, triple: (C64, C64, C64), eta: C64) -> DenseOperator {
    match class {
        BoundaryClass::I => k_minus_class_one(u, triple, eta),
        BoundaryClass::II => k_minus_class_two(u, triple, eta),
    }
}

pub fn k_minus_d22(u: C64, bnd: &D22Boundary, eta: C64) -> DenseOperator {
    k_minus_with(bnd.class, u, bnd.params.unprimed(), eta)
}

/// `K⁺(u) = M K⁻(−u+2η)` with the primed triple.
pub fn k_plus_d22(u: C64, bnd: &D22Boundary, eta: C64) -> DenseOperator {
    &m_d22(eta) * &k_minus_with(bnd.class, -u + 2.0 * eta, bnd.params.primed(), eta)
}

/// Residuals of K⁺ and K⁻ against their XXZ-block factorizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KFactorization {
    pub plus: f64,
    pub minus: f64,
}

/// K⁻ and K⁺ assembled from XXZ blocks on `V = V₁′ ⊗ V₂′`.
pub fn k_factorized(u: C64, bnd: &D22Boundary, eta: C64) -> (DenseOperator, DenseOperator) {
    let p = &bnd.params;
    let s = xxz::s_transform(eta).expect("cosh η ≠ 0 for a valid crossing parameter");
    let id = DenseOperator::identity(SiteLayout::flat(2));
    let km = |w: C64| xxz::k_minus_xxz(w, p);
    let kp = |w: C64| xxz::k_plus_xxz(w, p, eta);
    let r = |w: C64| xxz::r_xxz(w, eta);
    let r21 = |w: C64| identities::swap_spaces(&xxz::r_xxz(w, eta));
    let m2 = id.kron(&xxz::m_tilde(eta));
    let m2_inv = id.kron(&xxz::m_tilde(-eta));
    let ptilde = permutation_operator(2);
    let chain = |ops: &[DenseOperator]| ops.iter().skip(1).fold(ops[0].clone(), |acc, o| &acc * o);
    let (plus, minus) = match bnd.class {
        BoundaryClass::I => {
            let norm = c(1.0, 0.0) / xxz::rho_s(ipi(), eta).sqrt();
            let minus = chain(&[
                s.clone(),
                km(u + ipi()).kron(&id),
                r21(2.0 * u + ipi()),
                id.kron(&km(u)),
                r(-ipi()),
                s.clone(),
            ])
            .scale(norm);
            let plus = chain(&[
                s.clone(),
                r21(ipi()),
                id.kron(&kp(u)),
                m2_inv.clone(),
                r(-2.0 * u + 4.0 * eta - ipi()),
                m2.clone(),
                kp(u + ipi()).kron(&id),
                s.clone(),
            ])
            .scale(norm);
            (plus, minus)
        }
        BoundaryClass::II => {
            let h = c(0.0, PI / 2.0);
            let t = c(0.0, 1.5 * PI);
            let minus = chain(&[
                s.clone(),
                km(u + t).kron(&id),
                r21(2.0 * u + 2.0 * ipi()),
                id.kron(&km(u + h)),
                ptilde.clone(),
                s.clone(),
            ]);
            let plus = chain(&[
                s.clone(),
                ptilde,
                id.kron(&kp(u + h)),
                m2_inv,
                r(-2.0 * u + 4.0 * eta - 2.0 * ipi()),
                m2,
                kp(u + t).kron(&id),
                s.clone(),
            ]);
            (plus, minus)
        }
    };
    let flat = |op: DenseOperator| op.with_layout(four()).expect("4 = 2·2");
    (flat(plus), flat(minus))
}

pub fn k_factorization_check(u: C64, bnd: &D22Boundary, eta: C64) -> KFactorization {
    let (plus_f, minus_f) = k_factorized(u, bnd, eta);
    KFactorization {
        plus: relative_residual(&k_plus_d22(u, bnd, eta), &plus_f).expect("4×4"),
        minus: relative_residual(&k_minus_d22(u, bnd, eta), &minus_f).expect("4×4"),
    }
}

pub fn ybe_residual(u: C64, v: C64, eta: C64) -> f64 {
    identities::yang_baxter(|w| r_d22(w, eta), 4, u, v)
}

pub fn unitarity_residual(u: C64, eta: C64) -> f64 {
    identities::unitarity(|w| r_d22(w, eta), rho_d22(u, eta), u)
}

/// `R(0) = ρ(0)^{1/2} 𝒫` with the root taken as 4 sinh²(2η).
pub fn initial_condition_residual(eta: C64) -> f64 {
    let root = 4.0 * (2.0 * eta).sinh() * (2.0 * eta).sinh();
    relative_residual(
        &r_d22(c(0.0, 0.0), eta),
        &permutation_operator(4).scale(root),
    )
    .expect("16×16")
}

/// Both crossing-unitarity lines, `(t₁ line, t₂ line)`.
pub fn crossing_residuals(u: C64, eta: C64) -> (f64, f64) {
    let m = m_d22(eta);
    let rho = rho_d22(u - 2.0 * eta, eta);
    (
        identities::crossing_first(|w| r_d22(w, eta), &m, rho, u, eta),
        identities::crossing_second(|w| r_d22(w, eta), &m, rho, u, eta),
    )
}

pub fn reflection_minus_residual(u: C64, v: C64, bnd: &D22Boundary, eta: C64) -> f64 {
    identities::reflection_minus(|w| r_d22(w, eta), |w| k_minus_d22(w, bnd, eta), u, v)
}

pub fn reflection_plus_residual(u: C64, v: C64, bnd: &D22Boundary, eta: C64) -> f64 {
    identities::reflection_plus(
        |w| r_d22(w, eta),
        |w| k_plus_d22(w, bnd, eta),
        &m_d22(eta),
        u,
        v,
        eta,
    )
}

/// `‖[K⁻(u), K⁺(u)]‖ / (‖K⁻‖‖K⁺‖)`; nonzero when the boundaries cannot be
/// diagonalized together.
pub fn boundary_commutator(u: C64, bnd: &D22Boundary, eta: C64) -> f64 {
    let km = k_minus_d22(u, bnd, eta);
    let kp = k_plus_d22(u, bnd, eta);
    km.commutator(&kp).frobenius_norm() / (km.frobenius_norm() * kp.frobenius_norm())
}
