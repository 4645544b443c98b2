//! Monodromy and double-row transfer matrices, the factorization of the
//! D₂⁽²⁾ transfer matrix into two staggered XXZ transfer matrices, and the
//! Hamiltonian.
//!
//! Monodromies are never formed on the full auxiliary ⊗ quantum space. They are
//! kept as a `d × d` grid of quantum operators and multiplied one site at a time.
//!
//! The XXZ companion of an N-site D₂⁽²⁾ chain has 2N qubits. D₂⁽²⁾ site j
//! (1-based) is the qubit pair `V_{(2j)'} ⊗ V_{(2j−1)'}`, so XXZ site k
//! (0-based) lives on qubit `k ^ 1` of the quantum layout.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::d22::{self, BoundaryClass, D22Boundary};
use crate::error::{Error, Result};
use crate::identities::swap_spaces;
use crate::tensor::{c, relative_residual, DenseOperator, SiteLayout, C64};
use crate::xxz::{self, AnisotropyParam, XxzBoundary};

/// Largest supported D₂⁽²⁾ chain (Hilbert dimension 4³ = 64).
pub const MAX_SITES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    n: usize,
    eta: AnisotropyParam,
    boundary: D22Boundary,
}

impl ChainSpec {
    pub fn new(n: usize, eta: AnisotropyParam, boundary: D22Boundary) -> Result<Self> {
        if !(1..=MAX_SITES).contains(&n) {
            return Err(Error::ChainSize { n, max: MAX_SITES });
        }
        Ok(Self { n, eta, boundary })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> C64 {
        self.eta.value()
    }

    pub fn boundary(&self) -> &D22Boundary {
        &self.boundary
    }

    pub fn class(&self) -> BoundaryClass {
        self.boundary.class
    }

    pub fn params(&self) -> &XxzBoundary {
        &self.boundary.params
    }

    pub fn quantum_layout(&self) -> SiteLayout {
        SiteLayout::uniform(4, self.n)
    }

    pub fn xxz_layout(&self) -> SiteLayout {
        SiteLayout::uniform(2, 2 * self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StaggerPattern {
    /// θ = 0 on odd sites, iπ on even sites.
    Plain,
    /// θ = iπ/2 on odd sites, 3iπ/2 on even sites, spectral parameter shifted by iπ/2.
    Shifted,
}

impl StaggerPattern {
    pub fn for_class(class: BoundaryClass) -> Self {
        match class {
            BoundaryClass::I => StaggerPattern::Plain,
            BoundaryClass::II => StaggerPattern::Shifted,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StaggerPattern::Plain => "plain",
            StaggerPattern::Shifted => "shifted",
        }
    }

    /// Shift added to the spectral parameter before evaluating t̃.
    pub fn offset(self) -> C64 {
        match self {
            StaggerPattern::Plain => c(0.0, 0.0),
            StaggerPattern::Shifted => c(0.0, PI / 2.0),
        }
    }

    pub fn check_class(self, class: BoundaryClass) -> Result<()> {
        if Self::for_class(class) == self {
            Ok(())
        } else {
            Err(Error::PatternMismatch {
                pattern: self.label(),
                class: class.label(),
            })
        }
    }
}

impl fmt::Display for StaggerPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Inhomogeneities θ₁..θ_{2N} of the XXZ chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Inhomogeneities {
    thetas: Vec<C64>,
}

impl Inhomogeneities {
    pub fn new(thetas: Vec<C64>) -> Result<Self> {
        if thetas.is_empty() || !thetas.len().is_multiple_of(2) {
            return Err(Error::InhomogeneityCount(thetas.len()));
        }
        Ok(Self { thetas })
    }

    pub fn staggered(n: usize, pattern: StaggerPattern) -> Self {
        let (odd, even) = match pattern {
            StaggerPattern::Plain => (0.0, PI),
            StaggerPattern::Shifted => (PI / 2.0, 1.5 * PI),
        };
        let thetas = (0..2 * n)
            .map(|k| c(0.0, if k % 2 == 0 { odd } else { even }))
            .collect();
        Self { thetas }
    }

    pub fn thetas(&self) -> &[C64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// Grid of quantum operators indexed by auxiliary row/column.
struct AuxBlocks {
    d: usize,
    blocks: Vec<DenseOperator>,
}

impl AuxBlocks {
    fn identity(d: usize, layout: &SiteLayout) -> Self {
        let blocks = (0..d * d)
            .map(|k| {
                if k / d == k % d {
                    DenseOperator::identity(layout.clone())
                } else {
                    DenseOperator::zeros(layout.clone())
                }
            })
            .collect();
        Self { d, blocks }
    }

    /// `self · X_{0,site}` where `x` acts on (auxiliary, quantum factor `site`).
    fn mul_local(&self, x: &DenseOperator, site: usize) -> Self {
        let d = self.d;
        let q = x.dim() / d;
        let layout = self.blocks[0].layout().clone();
        let mut out: Vec<DenseOperator> = (0..d * d)
            .map(|_| DenseOperator::zeros(layout.clone()))
            .collect();
        for cc in 0..d {
            for b in 0..d {
                let local = x.matrix().view((cc * q, b * q), (q, q)).into_owned();
                if local.iter().all(|z| z.norm() == 0.0) {
                    continue;
                }
                for a in 0..d {
                    let term = self.blocks[a * d + cc]
                        .mul_local_right(&local, site)
                        .expect("site in layout");
                    out[a * d + b] = &out[a * d + b] + &term;
                }
            }
        }
        Self { d, blocks: out }
    }

    /// `self · k` with `k` acting on the auxiliary space only.
    fn mul_aux(&self, k: &DenseOperator) -> Self {
        let d = self.d;
        let layout = self.blocks[0].layout().clone();
        let blocks = (0..d * d)
            .map(|idx| {
                let (a, b) = (idx / d, idx % d);
                (0..d).fold(DenseOperator::zeros(layout.clone()), |acc, cc| {
                    &acc + &self.blocks[a * d + cc].scale(k.get(cc, b))
                })
            })
            .collect();
        Self { d, blocks }
    }

    /// `tr₀(k · self)`.
    fn trace_with(&self, k: &DenseOperator) -> DenseOperator {
        let d = self.d;
        let layout = self.blocks[0].layout().clone();
        let mut out = DenseOperator::zeros(layout);
        for a in 0..d {
            for b in 0..d {
                out = &out + &self.blocks[b * d + a].scale(k.get(a, b));
            }
        }
        out
    }
}

/// `tr₀ K⁺ · Π forward · K⁻ · Π backward`, each factor given as an operator
/// on (auxiliary, quantum site) in that order.
fn double_row(
    layout: &SiteLayout,
    k_plus: &DenseOperator,
    k_minus: &DenseOperator,
    forward: &[(usize, DenseOperator)],
    backward: &[(usize, DenseOperator)],
) -> DenseOperator {
    let mut mono = AuxBlocks::identity(k_plus.dim(), layout);
    for (site, x) in forward {
        mono = mono.mul_local(x, *site);
    }
    mono = mono.mul_aux(k_minus);
    for (site, x) in backward {
        mono = mono.mul_local(x, *site);
    }
    mono.trace_with(k_plus)
}

/// `t(u) = tr₀ K⁺₀(u) R₀₁(u)⋯R₀N(u) K⁻₀(u) R_{N0}(u)⋯R₁₀(u)`.
pub fn transfer_d22(u: C64, spec: &ChainSpec) -> DenseOperator {
    let eta = spec.eta();
    let r = d22::r_d22(u, eta);
    let r_rev = swap_spaces(&r);
    let forward: Vec<_> = (0..spec.n).map(|j| (j, r.clone())).collect();
    let backward: Vec<_> = (0..spec.n).rev().map(|j| (j, r_rev.clone())).collect();
    double_row(
        &spec.quantum_layout(),
        &d22::k_plus_d22(u, spec.boundary(), eta),
        &d22::k_minus_d22(u, spec.boundary(), eta),
        &forward,
        &backward,
    )
}

fn xxz_double_row(
    u: C64,
    thetas: &Inhomogeneities,
    eta: C64,
    bnd: &XxzBoundary,
    r_weight: C64,
    k_weight: C64,
) -> DenseOperator {
    let layout = SiteLayout::uniform(2, thetas.len());
    let qubit = |k: usize| k ^ 1;
    let forward: Vec<_> = thetas
        .thetas()
        .iter()
        .enumerate()
        .map(|(k, &th)| (qubit(k), xxz::r_xxz(u - th, eta).scale(r_weight)))
        .collect();
    // quantum-first R̃_{k0′}(u+θ_k), rewritten on (auxiliary, site)
    let backward: Vec<_> = thetas
        .thetas()
        .iter()
        .enumerate()
        .rev()
        .map(|(k, &th)| {
            (
                qubit(k),
                swap_spaces(&xxz::r_xxz(u + th, eta)).scale(r_weight),
            )
        })
        .collect();
    double_row(
        &layout,
        &xxz::k_plus_xxz(u, bnd, eta).scale(k_weight),
        &xxz::k_minus_xxz(u, bnd).scale(k_weight),
        &forward,
        &backward,
    )
}

/// `t̃(u) = tr₀′ K̃⁺(u) T̃(u) K̃⁻(u) T̂̃(u)` with
/// `T̃ = R̃_{0′1}(u−θ₁)⋯R̃_{0′,2N}(u−θ_{2N})` and
/// `T̂̃ = R̃_{2N,0′}(u+θ_{2N})⋯R̃_{1,0′}(u+θ₁)`.
pub fn transfer_xxz(
    u: C64,
    thetas: &Inhomogeneities,
    eta: C64,
    bnd: &XxzBoundary,
) -> DenseOperator {
    let one = c(1.0, 0.0);
    xxz_double_row(u, thetas, eta, bnd, one, one)
}

/// `e^{−σ(2N+2)(u−η)} t̃(u)` for `σ = ±1`, with each factor rescaled before
/// multiplication so that |Re u| ≫ 1 does not overflow.
pub fn transfer_xxz_asymptotic(
    u: C64,
    sign: f64,
    thetas: &Inhomogeneities,
    eta: C64,
    bnd: &XxzBoundary,
) -> DenseOperator {
    // R̃ ~ e^{σu/2} per factor (2·len of them), K̃± ~ e^{σu} each
    let r_weight = (-sign * u / 2.0).exp();
    let k_weight = (-sign * u).exp();
    let m = thetas.len() as f64 + 2.0;
    xxz_double_row(u, thetas, eta, bnd, r_weight, k_weight).scale((sign * m * eta).exp())
}

/// Staggered XXZ transfer matrix: `t̃_s(u)` (plain) or `t̄_s(u) = t̃(u+iπ/2)` (shifted),
/// each with its own staggered θ.
pub fn transfer_xxz_staggered(u: C64, spec: &ChainSpec, pattern: StaggerPattern) -> DenseOperator {
    let thetas = Inhomogeneities::staggered(spec.n, pattern);
    transfer_xxz(u + pattern.offset(), &thetas, spec.eta(), spec.params())
}

/// 𝒮 = S ⊗ ⋯ ⊗ S on the N four-dimensional sites.
pub struct ConjugationS;

impl ConjugationS {
    pub fn build(n: usize, eta: C64) -> Result<DenseOperator> {
        let s = xxz::s_transform(eta)?.with_layout(SiteLayout::flat(4))?;
        let mut out = s.clone();
        for _ in 1..n {
            out = out.kron(&s);
        }
        Ok(out)
    }
}

/// Scalar prefactor of the factorization identity and the shift of its first factor.
fn factorization_prefactor(u: C64, spec: &ChainSpec) -> C64 {
    let eta = spec.eta();
    let shift = match spec.class() {
        BoundaryClass::I => c(0.0, PI),
        BoundaryClass::II => c(0.0, 2.0 * PI),
    };
    xxz::rho_s(2.0 * u + shift - 2.0 * eta, eta) * 2f64.powi(8 * spec.n as i32)
}

/// `2^{8N} ρ_s(·) t̃_s(u+iπ) t̃_s(u)` for the stagger matching the boundary class.
pub fn factorized_transfer(u: C64, spec: &ChainSpec) -> Result<DenseOperator> {
    let pattern = StaggerPattern::for_class(spec.class());
    let pre = factorization_prefactor(u, spec);
    let a = transfer_xxz_staggered(u + c(0.0, PI), spec, pattern);
    let b = transfer_xxz_staggered(u, spec, pattern);
    Ok((&a * &b).scale(pre).with_layout(spec.quantum_layout())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizationResidual {
    /// `𝒮 t(u) 𝒮` against the product side; the binding number.
    pub conjugated: f64,
    /// `t(u)` against the product side without 𝒮.
    pub raw: f64,
}

/// Both residuals of the D₂⁽²⁾ → XXZ ⊗ XXZ factorization at `u`. Points where
/// the scalar prefactor vanishes are rejected so the caller can resample.
pub fn factorization_residual(u: C64, spec: &ChainSpec) -> Result<FactorizationResidual> {
    if factorization_prefactor(u, spec).norm() < 1e-8 * 2f64.powi(8 * spec.n as i32) {
        return Err(Error::SingularPoint(u, "zero of the ρ_s prefactor"));
    }
    let t = transfer_d22(u, spec);
    let s = ConjugationS::build(spec.n, spec.eta())?;
    let conj = &(&s * &t) * &s;
    let rhs = factorized_transfer(u, spec)?;
    Ok(FactorizationResidual {
        conjugated: relative_residual(&conj, &rhs)?,
        raw: relative_residual(&t, &rhs)?,
    })
}

pub fn factorization_residual_i(u: C64, spec: &ChainSpec) -> Result<FactorizationResidual> {
    StaggerPattern::Plain.check_class(spec.class())?;
    factorization_residual(u, spec)
}

pub fn factorization_residual_ii(u: C64, spec: &ChainSpec) -> Result<FactorizationResidual> {
    StaggerPattern::Shifted.check_class(spec.class())?;
    factorization_residual(u, spec)
}

/// First derivative at `u0` by the five-point stencil with h = 1e-3.
pub(crate) fn derivative<F: Fn(C64) -> DenseOperator>(f: F, u0: C64) -> DenseOperator {
    let h = 1e-3;
    let hc = c(h, 0.0);
    let a = f(u0 + 2.0 * hc);
    let b = f(u0 + hc);
    let cc = f(u0 - hc);
    let d = f(u0 - 2.0 * hc);
    let num = &(&(&b - &cc).scale(c(8.0, 0.0)) - &a) + &d;
    num.scale(c(1.0 / (12.0 * h), 0.0))
}

/// `H = Σ_k ρ(0)⁻¹ R′_{k,k+1}(0) R_{k,k+1}(0) + ½ K⁻_N(0)⁻¹ K⁻_N′(0)
///      + tr₀[K⁺₀(0) H₁₀] / tr K⁺(0)`, with `H₁₀ = ρ(0)⁻¹ R₁₀(0) R₁₀′(0)`.
///
/// Equals `½ t(0)⁻¹ t′(0) − tr K⁺′(0) / (2 tr K⁺(0))`.
pub fn hamiltonian(spec: &ChainSpec) -> Result<DenseOperator> {
    if spec.class() == BoundaryClass::II {
        return Err(Error::HamiltonianUnsupported);
    }
    let eta = spec.eta();
    let zero = c(0.0, 0.0);
    let bnd = spec.boundary();
    let layout = spec.quantum_layout();
    let rho0 = d22::rho_d22(zero, eta);
    let r0 = d22::r_d22(zero, eta);
    let dr0 = derivative(|w| d22::r_d22(w, eta), zero);

    let bulk = (&dr0 * &r0).scale(c(1.0, 0.0) / rho0);
    let mut h = DenseOperator::zeros(layout.clone());
    for k in 0..spec.n.saturating_sub(1) {
        h = &h + &DenseOperator::embed(&bulk, &[k, k + 1], &layout)?;
    }

    let km0 = d22::k_minus_d22(zero, bnd, eta);
    let dkm0 = derivative(|w| d22::k_minus_d22(w, bnd, eta), zero);
    let right = km0
        .solve(&dkm0)
        .map_err(|_| Error::SingularPoint(zero, "K⁻(0) is singular"))?;
    h = &h + &DenseOperator::embed(&right.scale(c(0.5, 0.0)), &[spec.n - 1], &layout)?;

    let kp0 = d22::k_plus_d22(zero, bnd, eta);
    let tr = kp0.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::HamiltonianUnsupported);
    }
    let pair = SiteLayout::uniform(4, 2);
    // (site 1, auxiliary) placed on the (auxiliary, site) pair
    let h10 = DenseOperator::embed(&(&r0 * &dr0).scale(c(1.0, 0.0) / rho0), &[1, 0], &pair)?;
    let left =
        (&kp0.kron(&DenseOperator::identity(SiteLayout::flat(4))) * &h10).partial_trace(0)?;
    h = &h + &DenseOperator::embed(&left.scale(c(1.0, 0.0) / tr), &[0], &layout)?;
    Ok(h)
}
