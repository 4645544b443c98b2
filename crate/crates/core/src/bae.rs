//! Multi-start damped Newton for the Bethe equations, canonical forms of
//! root sets, and classification against the exact spectrum.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{lambda_d22, TqModel};
use crate::tensor::{c, C64};
use crate::transfer::{transfer_d22, transfer_xxz_staggered, ChainSpec, StaggerPattern};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub starts: usize,
    pub max_iterations: usize,
    /// Smallest step fraction tried by the backtracking line search.
    pub min_damping: f64,
    /// Acceptance bound on the largest Bethe-equation residual.
    pub threshold: f64,
    pub dedup_tolerance: f64,
    pub seed: u64,
    pub form: ResidualForm,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            starts: 256,
            max_iterations: 200,
            min_damping: 1.0 / 1024.0,
            threshold: 1e-12,
            dedup_tolerance: 1e-7,
            seed: 20240101,
            form: ResidualForm::Both,
        }
    }
}

/// One solution {μ_l} in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub mus: Vec<C64>,
    /// Largest |left − right| of the Bethe equations.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Converged,
    /// No start converged to an admissible root set.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub roots: Vec<RootSet>,
    /// Starts that converged before deduplication.
    pub converged_starts: usize,
    pub starts: usize,
}

/// Roots further out than this have run off to infinity, where every term
/// underflows and the residual is meaninglessly small.
pub const MAX_ROOT_RE: f64 = 30.0;

/// Im μ reduced into (−π, π].
pub fn wrap(z: C64) -> C64 {
    let mut im = (z.im + PI).rem_euclid(2.0 * PI) - PI;
    if im <= -PI {
        im += 2.0 * PI;
    }
    c(z.re, im)
}

fn key_cmp(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Each μ wrapped into the strip and replaced by the smaller of {μ, 2η−μ};
/// the list is then sorted.
pub fn canonicalize(mus: &[C64], eta: C64) -> Vec<C64> {
    let mut out: Vec<C64> = mus
        .iter()
        .map(|&m| {
            let (a, b) = (wrap(m), wrap(2.0 * eta - m));
            if key_cmp(&a, &b) == Ordering::Greater {
                b
            } else {
                a
            }
        })
        .collect();
    out.sort_by(key_cmp);
    out
}

/// Roots at the trivial zeros of the undivided equations, or a Q double zero.
pub fn spurious(mus: &[C64], eta: C64) -> bool {
    let fixed = [
        c(0.0, 0.0),
        c(0.0, PI),
        2.0 * eta,
        2.0 * eta + c(0.0, PI),
        eta,
        eta + c(0.0, PI),
    ];
    if mus
        .iter()
        .any(|&m| fixed.iter().any(|&f| wrap(m - f).norm() < 1e-6))
    {
        return true;
    }
    for i in 0..mus.len() {
        for j in i + 1..mus.len() {
            if wrap(mus[i] - mus[j]).norm() < 1e-6
                || wrap(mus[i] + mus[j] - 2.0 * eta).norm() < 1e-6
            {
                return true;
            }
        }
    }
    false
}

/// Same orbit under per-root 2iπ shifts, μ → 2η−μ and permutations.
/// `cosh(μ−η)` is invariant under the first two, so compare those as multisets.
fn same_orbit(a: &[C64], b: &[C64], eta: C64, tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let za: Vec<C64> = a.iter().map(|m| (m - eta).cosh()).collect();
    let zb: Vec<C64> = b.iter().map(|m| (m - eta).cosh()).collect();
    let mut used = vec![false; zb.len()];
    za.iter().all(|x| {
        let hit = zb
            .iter()
            .enumerate()
            .find(|(k, y)| !used[*k] && (x - *y).norm() <= tol * (1.0 + x.norm()));
        match hit {
            Some((k, _)) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

/// Canonicalize, sort by canonical key and keep the first of each orbit.
pub fn dedup(sets: &[RootSet], eta: C64, tol: f64) -> Vec<RootSet> {
    let mut canon: Vec<RootSet> = sets
        .iter()
        .map(|r| RootSet {
            mus: canonicalize(&r.mus, eta),
            residual: r.residual,
        })
        .collect();
    canon.sort_by(|a, b| {
        a.mus
            .iter()
            .zip(&b.mus)
            .map(|(x, y)| key_cmp(x, y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.residual.total_cmp(&b.residual))
    });
    let mut out: Vec<RootSet> = Vec::new();
    for r in canon {
        if !out.iter().any(|o| same_orbit(&o.mus, &r.mus, eta, tol)) {
            out.push(r);
        }
    }
    out
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn finite_max(v: &[C64]) -> f64 {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        max_norm(v)
    } else {
        f64::INFINITY
    }
}

/// Which rescaling of the Bethe equations Newton iterates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualForm {
    /// Divided by sinh μ sinh(μ−2η); double poles where a(μ) or d(μ) vanish.
    Reduced,
    /// Reduced form times sinh(μ−η) a(μ) d(μ); entire.
    Entire,
    /// Every start is run under both forms.
    Both,
}

impl ResidualForm {
    fn eval(self, model: &TqModel, mus: &[C64]) -> Vec<C64> {
        match self {
            ResidualForm::Reduced => model.reduced_bae(mus),
            ResidualForm::Entire | ResidualForm::Both => model.entire_bae(mus),
        }
    }

    fn jacobian(self, model: &TqModel, mus: &[C64]) -> DMatrix<C64> {
        match self {
            ResidualForm::Reduced => model.reduced_bae_jacobian(mus).1,
            ResidualForm::Entire | ResidualForm::Both => model.entire_bae_jacobian(mus).1,
        }
    }
}

/// Damped Newton on `form` from `start`.
pub fn newton(
    model: &TqModel,
    start: &[C64],
    config: &SolveConfig,
    form: ResidualForm,
) -> Option<Vec<C64>> {
    let mut mus = start.to_vec();
    let mut h = form.eval(model, &mus);
    let mut norm = finite_max(&h);
    if !norm.is_finite() {
        return None;
    }
    for _ in 0..config.max_iterations {
        if max_norm(&model.bae_residuals(&mus)) <= config.threshold * 1e-2 {
            break;
        }
        let jac = form.jacobian(model, &mus);
        let rhs = DVector::from_iterator(h.len(), h.iter().map(|z| -z));
        let step = DMatrix::from(jac).lu().solve(&rhs)?;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= config.min_damping {
            let trial: Vec<C64> = mus
                .iter()
                .zip(step.iter())
                .map(|(m, d)| m + d * lambda)
                .collect();
            let ht = form.eval(model, &trial);
            let nt = finite_max(&ht);
            if nt < (1.0 - 1e-4 * lambda) * norm {
                accepted = Some((trial, ht, nt));
                break;
            }
            lambda /= 2.0;
        }
        match accepted {
            Some((m, ht, nt)) => {
                let moved = mus
                    .iter()
                    .zip(&m)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                mus = m;
                h = ht;
                norm = nt;
                if moved < 1e-15 * (1.0 + max_norm(&mus)) {
                    break;
                }
            }
            None => break,
        }
    }
    Some(mus)
}

fn draw_start(config: &SolveConfig, index: usize, count: usize) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    (0..count)
        .map(|_| {
            let re = rng.gen_range(-3.0..=3.0);
            // (−π, π]
            let im = PI - rng.gen::<f64>() * 2.0 * PI;
            c(re, im)
        })
        .collect()
}

/// Admissible certified root set reached from `start`, if any.
pub fn refine(model: &TqModel, start: &[C64], config: &SolveConfig) -> Vec<RootSet> {
    let forms: &[ResidualForm] = match config.form {
        ResidualForm::Both => &[ResidualForm::Reduced, ResidualForm::Entire],
        ResidualForm::Reduced => &[ResidualForm::Reduced],
        ResidualForm::Entire => &[ResidualForm::Entire],
    };
    forms
        .iter()
        .filter_map(|&f| refine_with(model, start, config, f))
        .collect()
}

fn refine_with(
    model: &TqModel,
    start: &[C64],
    config: &SolveConfig,
    form: ResidualForm,
) -> Option<RootSet> {
    let mus = newton(model, start, config, form)?;
    let eta = model.eta();
    if mus.iter().any(|m| m.re.abs() > MAX_ROOT_RE) || spurious(&mus, eta) {
        return None;
    }
    let residual = finite_max(&model.bae_residuals(&mus));
    if residual > config.threshold {
        return None;
    }
    let mus = canonicalize(&mus, eta);
    // re-certify after canonicalization
    let residual = finite_max(&model.bae_residuals(&mus));
    (residual <= config.threshold).then_some(RootSet { mus, residual })
}

/// Multi-start solve on the staggered chain of `spec`. Output depends only on
/// `config` and `spec`, not on thread scheduling.
pub fn solve_bae(
    config: &SolveConfig,
    spec: &ChainSpec,
    pattern: StaggerPattern,
) -> Result<(TqModel, SolveOutcome)> {
    let (model, _) = TqModel::staggered(spec, pattern)?;
    let count = model.root_count();
    let found: Vec<RootSet> = (0..config.starts)
        .into_par_iter()
        .flat_map_iter(|k| refine(&model, &draw_start(config, k, count), config))
        .collect();
    let converged_starts = found.len();
    let roots = dedup(&found, model.eta(), config.dedup_tolerance);
    let status = if roots.is_empty() {
        SolveStatus::Empty
    } else {
        SolveStatus::Converged
    };
    Ok((
        model,
        SolveOutcome {
            status,
            roots,
            converged_starts,
            starts: config.starts,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootClassification {
    /// Index into [`Coverage::branches`], if matched at every probe.
    pub branch: Option<usize>,
    /// Worst relative distance to that branch over the probes.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub probes: Vec<C64>,
    /// Distinct eigenvalues of t̃_s at the first probe.
    pub branches: Vec<C64>,
    pub roots: Vec<RootClassification>,
    pub matched: usize,
    pub fraction: f64,
}

/// Fixed probe points used when classifying root sets.
pub fn default_probes() -> Vec<C64> {
    (0..10)
        .map(|k| c(0.21 - 0.083 * k as f64, 0.33 + 0.271 * k as f64))
        .collect()
}

pub const MATCH_TOLERANCE: f64 = 1e-8;

/// Follows each eigenvalue branch of t̃_s across the probes through its
/// eigenvector at the first probe, and matches every root set's Λ̃ against it.
pub fn classify_roots(
    roots: &[RootSet],
    model: &TqModel,
    spec: &ChainSpec,
    pattern: StaggerPattern,
    probes: &[C64],
) -> Result<Coverage> {
    pattern.check_class(spec.class())?;
    let off = pattern.offset();
    let t0 = transfer_xxz_staggered(probes[0], spec, pattern);
    let spectrum = t0.eigen_spectrum()?;
    let scale0 = max_norm(&spectrum);
    let mut branches: Vec<C64> = Vec::new();
    for ev in spectrum {
        if !branches.iter().any(|b| (b - ev).norm() <= 1e-6 * scale0) {
            branches.push(ev);
        }
    }
    let vectors = branches
        .iter()
        .map(|&b| t0.eigenvector(b))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    // branch values and spectrum scale at each probe
    let mut track = Vec::with_capacity(probes.len());
    for &u in probes {
        let t = transfer_xxz_staggered(u, spec, pattern);
        let scale = max_norm(&t.eigen_spectrum()?);
        let values: Vec<C64> = vectors
            .iter()
            .map(|v| {
                let tv = t.matrix() * v;
                v.dotc(&tv) / v.dotc(v)
            })
            .collect();
        track.push((values, scale));
    }
    let mut classified = Vec::with_capacity(roots.len());
    for r in roots {
        let mut best: Option<(usize, f64)> = None;
        for b in 0..branches.len() {
            let mut worst: f64 = 0.0;
            for (&u, (values, scale)) in probes.iter().zip(&track) {
                let dist = match model.lambda(u + off, &r.mus) {
                    Ok(l) => (l - values[b]).norm() / scale,
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(dist);
            }
            if best.is_none_or(|(_, d)| worst < d) {
                best = Some((b, worst));
            }
        }
        let (b, d) = best.unwrap_or((0, f64::INFINITY));
        classified.push(RootClassification {
            branch: (d <= MATCH_TOLERANCE).then_some(b),
            distance: d,
        });
    }
    let mut hit = vec![false; branches.len()];
    for r in &classified {
        if let Some(b) = r.branch {
            hit[b] = true;
        }
    }
    let matched = hit.iter().filter(|h| **h).count();
    Ok(Coverage {
        probes: probes.to_vec(),
        fraction: matched as f64 / branches.len() as f64,
        branches,
        roots: classified,
        matched,
    })
}

/// Worst distance, over the probes, from the rebuilt D₂⁽²⁾ eigenvalue to the
/// nearest eigenvalue of t(u), relative to the largest eigenvalue modulus.
pub fn certify_d22(
    root: &RootSet,
    model: &TqModel,
    spec: &ChainSpec,
    pattern: StaggerPattern,
    probes: &[C64],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &u in probes {
        let spectrum = transfer_d22(u, spec).eigen_spectrum()?;
        let scale = max_norm(&spectrum).max(1e-300);
        let l = lambda_d22(u, spec, pattern, model, &root.mus)?;
        let d = spectrum
            .iter()
            .map(|e| (e - l).norm())
            .fold(f64::INFINITY, f64::min)
            / scale;
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d22::{BoundaryClass, D22Boundary};
    use crate::xxz::{AnisotropyParam, XxzBoundary};

    fn spec(class: BoundaryClass) -> ChainSpec {
        let params = XxzBoundary {
            s: c(0.23, 0.0),
            s1: c(0.51, 0.0),
            s2: c(-0.29, 0.0),
            s_p: c(0.41, 0.0),
            s1_p: c(-0.33, 0.0),
            s2_p: c(0.27, 0.0),
        };
        ChainSpec::new(
            1,
            AnisotropyParam::new(c(0.37, 0.0)).unwrap(),
            D22Boundary { class, params },
        )
        .unwrap()
    }

    #[test]
    fn wrap_and_canonical_form() {
        let eta = c(0.37, 0.0);
        assert!((wrap(c(0.5, 3.0 * PI)) - c(0.5, PI)).norm() < 1e-12);
        assert!((wrap(c(0.5, -PI)) - c(0.5, PI)).norm() < 1e-12);
        let a = [c(0.3, 0.2), c(-1.0, 1.0)];
        let b = [c(-1.0, 1.0 + 2.0 * PI), 2.0 * eta - c(0.3, 0.2)];
        assert_eq!(canonicalize(&a, eta), canonicalize(&b, eta));
    }

    #[test]
    fn dedup_collapses_orbits_and_is_idempotent() {
        let eta = c(0.37, 0.0);
        let mk = |m: Vec<C64>| RootSet {
            mus: m,
            residual: 0.0,
        };
        let sets = vec![
            mk(vec![c(0.3, 0.2), c(-1.0, 1.0)]),
            mk(vec![c(-1.0, 1.0 + 2.0 * PI), c(0.3, 0.2)]),
            mk(vec![2.0 * eta - c(0.3, 0.2), c(-1.0, 1.0)]),
            mk(vec![c(0.3, 0.2), c(-1.1, 1.0)]),
        ];
        let once = dedup(&sets, eta, 1e-7);
        assert_eq!(once.len(), 2);
        assert_eq!(dedup(&once, eta, 1e-7), once);
    }

    #[test]
    fn solve_covers_spectrum_both_classes() {
        let config = SolveConfig {
            starts: 128,
            ..SolveConfig::default()
        };
        for class in [BoundaryClass::I, BoundaryClass::II] {
            let spec = spec(class);
            let pattern = StaggerPattern::for_class(class);
            let (model, outcome) = solve_bae(&config, &spec, pattern).unwrap();
            assert_eq!(outcome.status, SolveStatus::Converged);
            for r in &outcome.roots {
                assert!(max_norm(&model.bae_residuals(&r.mus)) <= 1e-10);
            }
            let cov =
                classify_roots(&outcome.roots, &model, &spec, pattern, &default_probes()).unwrap();
            assert_eq!(cov.matched, cov.branches.len(), "{class:?}: {cov:?}");
            for (r, cl) in outcome.roots.iter().zip(&cov.roots) {
                if cl.branch.is_some() {
                    assert!(
                        certify_d22(r, &model, &spec, pattern, &default_probes()).unwrap() <= 1e-8
                    );
                }
            }
        }
    }

    #[test]
    fn perturbed_root_returns() {
        let spec = spec(BoundaryClass::I);
        let config = SolveConfig {
            starts: 64,
            ..SolveConfig::default()
        };
        let (model, outcome) = solve_bae(&config, &spec, StaggerPattern::Plain).unwrap();
        let root = &outcome.roots[0];
        let start: Vec<C64> = root.mus.iter().map(|m| m + c(1e-3, -1e-3)).collect();
        let again = refine(&model, &start, &config);
        assert!(!again.is_empty());
        for r in again {
            assert!(same_orbit(&r.mus, &root.mus, model.eta(), 1e-7));
        }
    }

    #[test]
    fn unconverged_vector_is_unmatched() {
        let spec = spec(BoundaryClass::I);
        let (model, _) = TqModel::staggered(&spec, StaggerPattern::Plain).unwrap();
        let junk = RootSet {
            mus: vec![c(0.4, 0.3), c(-0.2, 1.1)],
            residual: 1.0,
        };
        let cov = classify_roots(
            &[junk],
            &model,
            &spec,
            StaggerPattern::Plain,
            &default_probes(),
        )
        .unwrap();
        assert_eq!(cov.roots[0].branch, None);
    }

    #[test]
    fn rejects_pattern_mismatch() {
        assert!(solve_bae(
            &SolveConfig::default(),
            &spec(BoundaryClass::I),
            StaggerPattern::Shifted
        )
        .is_err());
    }
}
