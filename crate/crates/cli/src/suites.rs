//! Check suites. Each draws its random points from its own stream of the run
//! seed, so suites are independent of each other and of execution order.

use std::time::Instant;

use d22_core::bae::{certify_d22, classify_roots, default_probes, solve_bae, SolveStatus};
use d22_core::d22::{self, BoundaryClass, D22Boundary};
use d22_core::fusion::{
    asymptotic_value, exp_polynomial_fit_residual, fused_k_identities, fused_r_identity,
    scalar_residual, ConstraintKind, ConstraintSet,
};
use d22_core::tensor::{relative_residual, spectrum_distance};
use d22_core::transfer::{
    factorization_residual, factorized_transfer, transfer_d22, transfer_xxz_staggered, ChainSpec,
    ConjugationS, Inhomogeneities,
};
use d22_core::{c, sample, xxz, Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, Suite};
use crate::decimal::Decimal;
use crate::error::CliError;
use crate::report::{CheckRecord, RootRecord, SolutionReport, SuiteReport};

fn stream(seed: u64, suite: Suite) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(suite as u64);
    r
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, b| {
        if b.is_nan() || a.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    })
}

pub fn run_suite(
    suite: Suite,
    cfg: &RunConfig,
    spec: &ChainSpec,
) -> Result<(SuiteReport, Option<SolutionReport>), CliError> {
    let start = Instant::now();
    let mut rng = stream(cfg.seed(), suite);
    let mut solution = None;
    let records = match suite {
        Suite::Ybe => ybe(cfg, spec, &mut rng),
        Suite::Reflection => reflection(cfg, spec, &mut rng),
        Suite::Rfactor => rfactor(cfg, spec, &mut rng),
        Suite::Kfactor => kfactor(cfg, spec, &mut rng),
        Suite::TransferFactorization => transfer_factorization(cfg, spec, &mut rng)?,
        Suite::Fusion => fusion(cfg, spec, &mut rng)?,
        Suite::Constraints => constraints(cfg, spec)?,
        Suite::Tq => {
            let (records, sol) = tq(cfg, spec)?;
            solution = Some(sol);
            records
        }
    };
    let report = SuiteReport {
        suite,
        wall_clock_seconds: Decimal(start.elapsed().as_secs_f64()),
        records,
    };
    Ok((report, solution))
}

fn points(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Vec<(C64, C64)> {
    (0..cfg.samples)
        .map(|_| (sample::spectral_point(rng), sample::spectral_point(rng)))
        .collect()
}

fn ybe(cfg: &RunConfig, spec: &ChainSpec, rng: &mut ChaCha8Rng) -> Vec<CheckRecord> {
    let eta = spec.eta();
    let t = &cfg.tolerances;
    let pts = points(cfg, rng);
    let (c1, c2) = {
        let both: Vec<(f64, f64)> = pts
            .iter()
            .map(|&(u, _)| d22::crossing_residuals(u, eta))
            .collect();
        (
            worst(both.iter().map(|p| p.0)),
            worst(both.iter().map(|p| p.1)),
        )
    };
    vec![
        CheckRecord::new(
            "yang-baxter xxz",
            "R̃12(u−v) R̃13(u) R̃23(v) = R̃23(v) R̃13(u) R̃12(u−v)",
            worst(pts.iter().map(|&(u, v)| xxz::ybe_residual(u, v, eta))),
            t.ybe,
        ),
        CheckRecord::new(
            "yang-baxter d22",
            "R12(u−v) R13(u) R23(v) = R23(v) R13(u) R12(u−v)",
            worst(pts.iter().map(|&(u, v)| d22::ybe_residual(u, v, eta))),
            t.ybe,
        ),
        CheckRecord::new(
            "initial condition d22",
            "R(0) = ρ(0)^{1/2} 𝒫",
            d22::initial_condition_residual(eta),
            t.r_properties,
        ),
        CheckRecord::new(
            "unitarity d22",
            "R12(u) R21(−u) = ρ(u)",
            worst(pts.iter().map(|&(u, _)| d22::unitarity_residual(u, eta))),
            t.r_properties,
        ),
        CheckRecord::new(
            "crossing-unitarity d22 (t1)",
            "R12^{t1}(u) M1 R21^{t1}(−u+4η) M1⁻¹ = ρ(u−2η)",
            c1,
            t.r_properties,
        ),
        CheckRecord::new(
            "crossing-unitarity d22 (t2)",
            "R12^{t2}(u) M2⁻¹ R21^{t2}(−u+4η) M2 = ρ(u−2η)",
            c2,
            t.r_properties,
        ),
        CheckRecord::new(
            "initial condition xxz",
            "R̃(0) = sinh η 𝒫",
            xxz::initial_condition_residual(eta),
            t.r_properties,
        ),
        CheckRecord::new(
            "unitarity xxz",
            "R̃12(u) R̃21(−u) = ρ_s(u)",
            worst(pts.iter().map(|&(u, _)| xxz::unitarity_residual(u, eta))),
            t.r_properties,
        ),
        CheckRecord::new(
            "crossing-unitarity xxz",
            "R̃12^{t1}(u) M̃1 R̃21^{t1}(−u+4η) M̃1⁻¹ = ρ_s(u−2η)",
            worst(pts.iter().map(|&(u, _)| xxz::crossing_residual(u, eta))),
            t.r_properties,
        ),
        CheckRecord::new(
            "transpose symmetry xxz",
            "R̃(u)ᵀ = R̃21(u)",
            worst(pts.iter().map(|&(u, _)| xxz::pt_symmetry_residual(u, eta))),
            t.r_properties,
        ),
    ]
}

fn reflection(cfg: &RunConfig, spec: &ChainSpec, rng: &mut ChaCha8Rng) -> Vec<CheckRecord> {
    let eta = spec.eta();
    let tol = cfg.tolerances.reflection;
    let pts = points(cfg, rng);
    let params = *spec.params();
    let mut out = Vec::new();
    for class in [BoundaryClass::I, BoundaryClass::II] {
        let bnd = D22Boundary { class, params };
        out.push(CheckRecord::new(
            format!("reflection K⁻ class {class}"),
            "R12(u−v) K⁻1(u) R21(u+v) K⁻2(v) = K⁻2(v) R12(u+v) K⁻1(u) R21(u−v)",
            worst(
                pts.iter()
                    .map(|&(u, v)| d22::reflection_minus_residual(u, v, &bnd, eta)),
            ),
            tol,
        ));
        out.push(CheckRecord::new(
            format!("reflection K⁺ class {class}"),
            "R12(−u+v) K⁺1(u) M1⁻¹ R21(−u−v+4η) M1 K⁺2(v) = K⁺2(v) M1 R12(−u−v+4η) M1⁻¹ K⁺1(u) R21(−u+v)",
            worst(pts.iter().map(|&(u, v)| d22::reflection_plus_residual(u, v, &bnd, eta))),
            tol,
        ));
    }
    out.push(CheckRecord::new(
        "reflection K̃⁻ xxz",
        "R̃12(u−v) K̃⁻1(u) R̃21(u+v) K̃⁻2(v) = K̃⁻2(v) R̃12(u+v) K̃⁻1(u) R̃21(u−v)",
        worst(
            pts.iter()
                .map(|&(u, v)| xxz::reflection_minus_residual(u, v, eta, &params)),
        ),
        tol,
    ));
    out.push(CheckRecord::new(
        "reflection K̃⁺ xxz",
        "R̃12(−u+v) K̃⁺1(u) M̃1⁻¹ R̃21(−u−v+4η) M̃1 K̃⁺2(v) = K̃⁺2(v) M̃1 R̃12(−u−v+4η) M̃1⁻¹ K̃⁺1(u) R̃21(−u+v)",
        worst(pts.iter().map(|&(u, v)| xxz::reflection_plus_residual(u, v, eta, &params))),
        tol,
    ));
    out
}

fn rfactor(cfg: &RunConfig, spec: &ChainSpec, rng: &mut ChaCha8Rng) -> Vec<CheckRecord> {
    let eta = spec.eta();
    let pts = points(cfg, rng);
    vec![CheckRecord::new(
        "direct vs factorized R",
        "R(u) = 16 (S⊗S) R̃03(u+iπ) R̃02(u) R̃13(u) R̃12(u−iπ) (S⊗S)",
        worst(
            pts.iter()
                .map(|&(u, _)| d22::compare_r_constructions(u, eta, 1e-9).residual),
        ),
        cfg.tolerances.rfactor,
    )]
}

fn kfactor(cfg: &RunConfig, spec: &ChainSpec, rng: &mut ChaCha8Rng) -> Vec<CheckRecord> {
    let eta = spec.eta();
    let pts = points(cfg, rng);
    let mut out = Vec::new();
    for class in [BoundaryClass::I, BoundaryClass::II] {
        let bnd = D22Boundary {
            class,
            params: *spec.params(),
        };
        let checks: Vec<_> = pts
            .iter()
            .map(|&(u, _)| d22::k_factorization_check(u, &bnd, eta))
            .collect();
        out.push(CheckRecord::new(
            format!("K⁻ factorization class {class}"),
            "K⁻(u) = S · (K̃⁻ ⊗ 1) R̃21 (1 ⊗ K̃⁻) · S, shifts by class",
            worst(checks.iter().map(|k| k.minus)),
            cfg.tolerances.kfactor,
        ));
        out.push(CheckRecord::new(
            format!("K⁺ factorization class {class}"),
            "K⁺(u) = S · (1 ⊗ K̃⁺) M̃2⁻¹ R̃12 M̃2 (K̃⁺ ⊗ 1) · S, shifts by class",
            worst(checks.iter().map(|k| k.plus)),
            cfg.tolerances.kfactor,
        ));
    }
    out
}

fn transfer_factorization(
    cfg: &RunConfig,
    spec: &ChainSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckRecord>, CliError> {
    let t = &cfg.tolerances;
    let s = ConjugationS::build(spec.n(), spec.eta())?;
    let (mut conj, mut spectra, mut comm) = (Vec::new(), Vec::new(), Vec::new());
    let mut guard = 0;
    while conj.len() < cfg.samples {
        guard += 1;
        if guard > 100 * cfg.samples {
            return Err(CliError::Config(
                "could not find regular sample points".into(),
            ));
        }
        let (u, v) = (sample::spectral_point(rng), sample::spectral_point(rng));
        let fr = match factorization_residual(u, spec) {
            Ok(fr) => fr,
            Err(Error::SingularPoint(..)) => continue,
            Err(e) => return Err(e.into()),
        };
        conj.push(fr.conjugated);
        let tu = transfer_d22(u, spec);
        let tv = transfer_d22(v, spec);
        comm.push(relative_residual(&(&tu * &tv), &(&tv * &tu))?);
        let a = (&(&s * &tu) * &s).eigen_spectrum()?;
        let b = factorized_transfer(u, spec)?.eigen_spectrum()?;
        spectra.push(spectrum_distance(&a, &b));
    }
    Ok(vec![
        CheckRecord::new(
            "commutativity",
            "[t(u), t(v)] = 0",
            worst(comm),
            t.commutativity,
        ),
        CheckRecord::new(
            format!("factorization class {}", spec.class()),
            "𝒮 t(u) 𝒮 = 2^{8N} ρ_s(2u+σ−2η) t̃_s(u+iπ) t̃_s(u)",
            worst(conj),
            t.factorization,
        ),
        CheckRecord::new(
            "factorized spectrum",
            "spec t(u) = spec 2^{8N} ρ_s(2u+σ−2η) t̃_s(u+iπ) t̃_s(u)",
            worst(spectra),
            t.spectrum,
        ),
    ])
}

fn fusion(
    cfg: &RunConfig,
    spec: &ChainSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CheckRecord>, CliError> {
    let eta = spec.eta();
    let tol = cfg.tolerances.fusion;
    let pts = points(cfg, rng);
    let (mut ra, mut rb, mut kp, mut km) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &(u, _) in &pts {
        let (a, b) = fused_r_identity(u, eta)?;
        ra.push(a);
        rb.push(b);
        let (p, m) = fused_k_identities(u, spec.params(), eta)?;
        kp.push(p);
        km.push(m);
    }
    Ok(vec![
        CheckRecord::new(
            "fused R (auxiliary pair)",
            "P21 R̃13(u) R̃23(u+2η) P21 = −sinh(u/2+η) sinh(u/2−η) P21",
            worst(ra),
            tol,
        ),
        CheckRecord::new(
            "fused R (quantum pair)",
            "P12 R̃31(u) R̃32(u+2η) P12 = −sinh(u/2+η) sinh(u/2−η) P12",
            worst(rb),
            tol,
        ),
        CheckRecord::new(
            "fused K⁺",
            "P K̃⁺2(u+2η) M̃1 R̃12(−2u+2η) M̃1⁻¹ K̃⁺1(u) P21 = 2 sinh(u−2η)/α′ Π cosh½(u±α′i) P 𝒫̃",
            worst(kp),
            tol,
        ),
        CheckRecord::new(
            "fused K⁻",
            "P21 K̃⁻1(u) R̃21(2u+2η) K̃⁻2(u+2η) P = −2 sinh(u+2η)/α Π cosh½(u±αi) 𝒫̃ P",
            worst(km),
            tol,
        ),
    ])
}

fn constraints(cfg: &RunConfig, spec: &ChainSpec) -> Result<Vec<CheckRecord>, CliError> {
    let t = &cfg.tolerances;
    let thetas = Inhomogeneities::staggered(spec.n(), cfg.pattern());
    let set = ConstraintSet::new(&thetas, spec.eta(), spec.params())?;
    let res = set.check_operator()?;
    Ok(set
        .constraints
        .iter()
        .zip(res)
        .map(|(con, r)| {
            let (eq, tol) = match con.kind {
                ConstraintKind::QuantumDet { .. } => ("t̃(w) t̃(w+2η) = Δq(w), w = ±θj", t.quantum_det),
                ConstraintKind::Special => ("t̃(0) = t̃(2η) = 2 cosh η sinh s sinh s′ Π ρ_s(θj); t̃(iπ) = 2 cosh η cosh s cosh s′ Π ρ_s(θj+iπ)", t.special_values),
                ConstraintKind::Asymptotic { .. } => ("e^{∓(2N+2)(u−η)} t̃(u) → −2^{−4N−2}(e^{−η}s1s′2 + e^{η}s2s′1)", t.asymptotic),
            };
            CheckRecord::new(con.label(), eq, r, tol)
        })
        .collect())
}

/// Solve, classify, certify. Shared by the `tq` suite and the `solve` command.
pub fn tq(
    cfg: &RunConfig,
    spec: &ChainSpec,
) -> Result<(Vec<CheckRecord>, SolutionReport), CliError> {
    let t = &cfg.tolerances;
    let pattern = cfg.pattern();
    let (model, outcome) = solve_bae(&cfg.solve_config(), spec, pattern)?;
    let probes = default_probes();
    let coverage = classify_roots(&outcome.roots, &model, spec, pattern, &probes)?;
    let constraints = ConstraintSet::new(model.thetas(), spec.eta(), spec.params())?;
    let off = pattern.offset();
    let mut records = Vec::new();
    let mut roots = Vec::new();
    let asym = asymptotic_value(model.thetas().len(), spec.eta(), spec.params());
    let half = model.thetas().len() + 2;
    for (k, (root, cl)) in outcome.roots.iter().zip(&coverage.roots).enumerate() {
        let bae = worst(model.bae_residuals(&root.mus).iter().map(|z| z.norm()));
        let d22_distance = certify_d22(root, &model, spec, pattern, &probes)?;
        let cons = worst(constraints.check_eigenvalue(&model, &root.mus)?);
        let x_cons = worst(
            [1.0, -1.0].map(|s| scalar_residual(model.asymptotic_coefficient(s, &root.mus), asym)),
        );
        let fit = exp_polynomial_fit_residual(
            |u| {
                vec![model
                    .lambda(u + off, &root.mus)
                    .unwrap_or(c(f64::NAN, f64::NAN))]
            },
            half,
            2 * half + 5,
        );
        let tag = format!("root set {k}");
        records.push(CheckRecord::new(
            format!("{tag} bethe equations"),
            "Bethe equations, left − right",
            bae,
            t.bae,
        ));
        records.push(CheckRecord::new(
            format!("{tag} xxz eigenvalue"),
            "Λ̃(u) ∈ spec t̃_s(u) at 10 probes",
            cl.distance,
            t.eigenvalue,
        ));
        records.push(CheckRecord::new(
            format!("{tag} d22 eigenvalue"),
            "2^{8N} ρ_s(2u+σ−2η) Λ̃_s(u+iπ) Λ̃_s(u) ∈ spec t(u) at 10 probes",
            d22_distance,
            t.eigenvalue,
        ));
        records.push(CheckRecord::new(
            format!("{tag} functional constraints"),
            "Λ̃ satisfies the 4N+5 functional relations",
            cons,
            t.eigenvalue,
        ));
        records.push(CheckRecord::new(
            format!("{tag} asymptotic coefficient"),
            "e^{∓(2N+2)(u−η)} Λ̃(u) → −2^{−4N−2}(e^{−η}s1s′2 + e^{η}s2s′1)",
            x_cons,
            t.bae,
        ));
        records.push(CheckRecord::new(
            format!("{tag} polynomial degree"),
            "e^{(2N+2)u} Λ̃(u) is a polynomial of degree 4N+4 in e^u",
            fit,
            t.eigenvalue,
        ));
        roots.push(RootRecord {
            mus: root.mus.iter().map(|&m| m.into()).collect(),
            bae_residual: Decimal(bae),
            branch: cl.branch,
            xxz_distance: Decimal(cl.distance),
            d22_distance: Decimal(d22_distance),
        });
    }
    records.push(CheckRecord::new(
        "spectrum coverage",
        "every eigenvalue of t̃_s is some Λ̃ (1 − matched fraction)",
        1.0 - coverage.fraction,
        t.coverage,
    ));
    let solution = SolutionReport {
        status: match outcome.status {
            SolveStatus::Converged => "converged".into(),
            SolveStatus::Empty => "empty".into(),
        },
        starts: outcome.starts,
        converged_starts: outcome.converged_starts,
        branch_choice: model.branch().label(),
        eigenvalue_branches: coverage.branches.len(),
        matched_branches: coverage.matched,
        root_sets: roots,
    };
    Ok((records, solution))
}

/// Eigenvalues of t(u) and of the staggered t̃_s(u).
pub fn spectra(
    spec: &ChainSpec,
    cfg: &RunConfig,
    u: C64,
) -> Result<(Vec<C64>, Vec<C64>), CliError> {
    let d = transfer_d22(u, spec).eigen_spectrum()?;
    let x = transfer_xxz_staggered(u, spec, cfg.pattern()).eigen_spectrum()?;
    Ok((d, x))
}
