//! Assembly of the Yang-Baxter, unitarity, crossing and reflection identities
//! for any R-matrix on `V ⊗ V` and K-matrices on `V`. Every function returns a
//! relative Frobenius residual.

use crate::tensor::{permutation_operator, relative_residual, DenseOperator, SiteLayout, C64};

/// `R₂₁ = 𝒫 R₁₂ 𝒫`.
pub fn swap_spaces(r: &DenseOperator) -> DenseOperator {
    let d = r.layout().dims()[0];
    let p = permutation_operator(d);
    &(&p * r) * &p
}

fn pair_layout(d: usize) -> SiteLayout {
    SiteLayout::uniform(d, 2)
}

fn on(op: &DenseOperator, sites: &[usize], layout: &SiteLayout) -> DenseOperator {
    DenseOperator::embed(op, sites, layout).expect("local operator matches layout")
}

/// `R₁₂(u−v)R₁₃(u)R₂₃(v) = R₂₃(v)R₁₃(u)R₁₂(u−v)`.
pub fn yang_baxter<F: Fn(C64) -> DenseOperator>(r: F, d: usize, u: C64, v: C64) -> f64 {
    let layout = SiteLayout::uniform(d, 3);
    let r12 = on(&r(u - v), &[0, 1], &layout);
    let r13 = on(&r(u), &[0, 2], &layout);
    let r23 = on(&r(v), &[1, 2], &layout);
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}

/// `R₁₂(u)R₂₁(−u) = ρ(u)`.
pub fn unitarity<F: Fn(C64) -> DenseOperator>(r: F, rho: C64, u: C64) -> f64 {
    let lhs = &r(u) * &swap_spaces(&r(-u));
    let d = lhs.layout().dims()[0];
    let rhs = DenseOperator::identity(pair_layout(d)).scale(rho);
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}

/// `R₁₂(u)^{t₁} M₁ R₂₁(−u+4η)^{t₁} M₁⁻¹ = ρ(u−2η)`.
pub fn crossing_first<F: Fn(C64) -> DenseOperator>(
    r: F,
    m: &DenseOperator,
    rho_shifted: C64,
    u: C64,
    eta: C64,
) -> f64 {
    let d = m.dim();
    let id = DenseOperator::identity(SiteLayout::flat(d));
    let m1 = m.kron(&id);
    let m1_inv = m1.try_inverse().expect("M is invertible");
    let a = r(u).partial_transpose(0).expect("two factors");
    let b = swap_spaces(&r(-u + 4.0 * eta))
        .partial_transpose(0)
        .expect("two factors");
    let lhs = &(&(&a * &m1) * &b) * &m1_inv;
    let rhs = DenseOperator::identity(pair_layout(d)).scale(rho_shifted);
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}

/// `R₁₂(u)^{t₂} M₂⁻¹ R₂₁(−u+4η)^{t₂} M₂ = ρ(u−2η)`.
pub fn crossing_second<F: Fn(C64) -> DenseOperator>(
    r: F,
    m: &DenseOperator,
    rho_shifted: C64,
    u: C64,
    eta: C64,
) -> f64 {
    let d = m.dim();
    let id = DenseOperator::identity(SiteLayout::flat(d));
    let m2 = id.kron(m);
    let m2_inv = m2.try_inverse().expect("M is invertible");
    let a = r(u).partial_transpose(1).expect("two factors");
    let b = swap_spaces(&r(-u + 4.0 * eta))
        .partial_transpose(1)
        .expect("two factors");
    let lhs = &(&(&a * &m2_inv) * &b) * &m2;
    let rhs = DenseOperator::identity(pair_layout(d)).scale(rho_shifted);
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}

/// `R₁₂(u−v)K₁⁻(u)R₂₁(u+v)K₂⁻(v) = K₂⁻(v)R₁₂(u+v)K₁⁻(u)R₂₁(u−v)`.
pub fn reflection_minus<R, K>(r: R, k: K, u: C64, v: C64) -> f64
where
    R: Fn(C64) -> DenseOperator,
    K: Fn(C64) -> DenseOperator,
{
    let ku = k(u);
    let id = DenseOperator::identity(SiteLayout::flat(ku.dim()));
    let k1 = ku.kron(&id);
    let k2 = id.kron(&k(v));
    let lhs = &(&(&r(u - v) * &k1) * &swap_spaces(&r(u + v))) * &k2;
    let rhs = &(&(&k2 * &r(u + v)) * &k1) * &swap_spaces(&r(u - v));
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}

/// `R₁₂(−u+v)K₁⁺(u)M₁⁻¹R₂₁(−u−v+4η)M₁K₂⁺(v) = K₂⁺(v)M₁R₁₂(−u−v+4η)M₁⁻¹K₁⁺(u)R₂₁(−u+v)`.
pub fn reflection_plus<R, K>(r: R, k: K, m: &DenseOperator, u: C64, v: C64, eta: C64) -> f64
where
    R: Fn(C64) -> DenseOperator,
    K: Fn(C64) -> DenseOperator,
{
    let id = DenseOperator::identity(SiteLayout::flat(m.dim()));
    let m1 = m.kron(&id);
    let m1_inv = m1.try_inverse().expect("M is invertible");
    let k1 = k(u).kron(&id);
    let k2 = id.kron(&k(v));
    let w = -u - v + 4.0 * eta;
    let lhs = &(&(&(&(&r(v - u) * &k1) * &m1_inv) * &swap_spaces(&r(w))) * &m1) * &k2;
    let rhs = &(&(&(&(&k2 * &m1) * &r(w)) * &m1_inv) * &k1) * &swap_spaces(&r(v - u));
    relative_residual(&lhs, &rhs).expect("equal dimensions")
}
