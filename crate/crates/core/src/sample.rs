//! Seeded draws of generic model parameters and spectral points.

use std::f64::consts::PI;

use rand::Rng;

use crate::d22::{BoundaryClass, D22Boundary};
use crate::error::Result;
use crate::tensor::{c, C64};
use crate::transfer::ChainSpec;
use crate::xxz::{AnisotropyParam, XxzBoundary};

/// Point with |Re| ≤ 2 and |Im| ≤ π.
pub fn spectral_point<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-2.0..=2.0), rng.gen_range(-PI..=PI))
}

fn boundary_value<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-0.9..=0.9), rng.gen_range(-0.3..=0.3))
}

/// η with Re η ∈ [0.2, 0.9] and |Im η| ≤ 0.3.
pub fn eta<R: Rng>(rng: &mut R) -> AnisotropyParam {
    loop {
        let e = c(rng.gen_range(0.2..=0.9), rng.gen_range(-0.3..=0.3));
        if let Ok(p) = AnisotropyParam::new(e) {
            if e.cosh().re > 0.0 && e.sinh().norm() >= 1e-3 {
                return p;
            }
        }
    }
}

/// Boundary parameters with |s₁s₂|, |s′₁s′₂| ≥ 1e-3.
pub fn boundary<R: Rng>(rng: &mut R) -> XxzBoundary {
    loop {
        let mut v = [c(0.0, 0.0); 6];
        for x in &mut v {
            *x = boundary_value(rng);
        }
        let b = XxzBoundary {
            s: v[0],
            s1: v[1],
            s2: v[2],
            s_p: v[3],
            s1_p: v[4],
            s2_p: v[5],
        };
        if (b.s1 * b.s2).norm() >= 1e-3 && (b.s1_p * b.s2_p).norm() >= 1e-3 {
            return b;
        }
    }
}

pub fn chain<R: Rng>(rng: &mut R, n: usize, class: BoundaryClass) -> Result<ChainSpec> {
    let eta = eta(rng);
    let params = boundary(rng);
    ChainSpec::new(n, eta, D22Boundary { class, params })
}
