//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use d22_core::bae::{certify_d22, classify_roots, default_probes, solve_bae, SolveConfig};
use d22_core::d22::{self, BoundaryClass, D22Boundary};
use d22_core::fusion::{ConstraintKind, ConstraintSet};
use d22_core::tensor::{permutation_operator, relative_residual, spectrum_distance};
use d22_core::transfer::{
    factorization_residual, factorized_transfer, hamiltonian, transfer_d22, transfer_xxz,
    ChainSpec, ConjugationS, Inhomogeneities, StaggerPattern,
};
use d22_core::xxz::{self, AnisotropyParam, XxzBoundary};
use d22_core::{c, sample, DenseOperator, Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240101;

struct Verdict {
    pass: bool,
    detail: String,
}

fn rng(criterion: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(criterion);
    r
}

fn defaults() -> XxzBoundary {
    XxzBoundary {
        s: c(0.23, 0.0),
        s1: c(0.51, 0.0),
        s2: c(-0.29, 0.0),
        s_p: c(0.41, 0.0),
        s1_p: c(-0.33, 0.0),
        s2_p: c(0.27, 0.0),
    }
}

fn default_eta() -> AnisotropyParam {
    AnisotropyParam::new(c(0.37, 0.0)).unwrap()
}

fn default_spec(n: usize, class: BoundaryClass) -> ChainSpec {
    ChainSpec::new(
        n,
        default_eta(),
        D22Boundary {
            class,
            params: defaults(),
        },
    )
    .unwrap()
}

/// η in the same box as u, avoiding the excluded points and cosh η ≈ 0.
fn wide_eta<R: Rng>(r: &mut R) -> C64 {
    loop {
        let e = sample::spectral_point(r);
        if AnisotropyParam::new(e).is_ok() && e.cosh().norm() > 0.05 && e.sinh().norm() > 1e-3 {
            return e;
        }
    }
}

/// Worst value and a bound check.
struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(0.0)
    }
    fn add(&mut self, r: f64) {
        self.0 = if r.is_nan() {
            f64::INFINITY
        } else {
            self.0.max(r)
        };
    }
}

fn criterion_1() -> Verdict {
    let mut r = rng(1);
    let (mut xxz_w, mut d22_w) = (Worst::new(), Worst::new());
    let start = Instant::now();
    for _ in 0..100 {
        let (u, v, e) = (
            sample::spectral_point(&mut r),
            sample::spectral_point(&mut r),
            wide_eta(&mut r),
        );
        xxz_w.add(xxz::ybe_residual(u, v, e));
        d22_w.add(d22::ybe_residual(u, v, e));
    }
    let t = start.elapsed();
    Verdict {
        pass: xxz_w.0 <= 1e-10 && d22_w.0 <= 1e-10 && t < Duration::from_secs(5),
        detail: format!(
            "max XXZ {:.2e}, D22 {:.2e} over 100 draws, {:.2?}",
            xxz_w.0, d22_w.0, t
        ),
    }
}

fn criterion_2() -> Verdict {
    let mut r = rng(2);
    let mut w = Worst::new();
    for _ in 0..50 {
        let (u, e) = (sample::spectral_point(&mut r), sample::eta(&mut r).value());
        w.add(d22::unitarity_residual(u, e));
        let (t1, t2) = d22::crossing_residuals(u, e);
        w.add(t1);
        w.add(t2);
        w.add(xxz::unitarity_residual(u, e));
        w.add(xxz::crossing_residual(u, e));
        w.add(xxz::pt_symmetry_residual(u, e));
    }
    let mut init = Worst::new();
    let mut rr = rng(22);
    for _ in 0..10 {
        let e = sample::eta(&mut rr).value();
        // ρ(0)^{1/2} P with the root fixed by R(0) itself on its diagonal
        let r0 = d22::r_d22(c(0.0, 0.0), e);
        let root = d22::rho_d22(c(0.0, 0.0), e).sqrt();
        let p = permutation_operator(4);
        let sign = if (r0.get(0, 0) - root).norm() <= (r0.get(0, 0) + root).norm() {
            1.0
        } else {
            -1.0
        };
        init.add(relative_residual(&r0, &p.scale(root * sign)).unwrap());
        init.add(d22::initial_condition_residual(e));
        init.add(xxz::initial_condition_residual(e));
    }
    Verdict {
        pass: w.0 <= 1e-10 && init.0 <= 1e-12,
        detail: format!(
            "max unitarity/crossing {:.2e} at 50 points; initial condition {:.2e}",
            w.0, init.0
        ),
    }
}

fn criterion_3() -> Verdict {
    let mut r = rng(3);
    let mut w = Worst::new();
    let mut report = String::new();
    for _ in 0..20 {
        let u = sample::spectral_point(&mut r);
        let cmp = d22::compare_r_constructions(u, c(0.37, 0.0), 1e-9);
        w.add(cmp.residual);
        if cmp.residual > 1e-9 && report.is_empty() {
            report = format!("\n{cmp}");
        }
    }
    Verdict {
        pass: w.0 <= 1e-9,
        detail: format!("max residual {:.2e} at 20 points{report}", w.0),
    }
}

fn criterion_4() -> Verdict {
    let mut worst = Vec::new();
    for (k, class) in [BoundaryClass::I, BoundaryClass::II]
        .into_iter()
        .enumerate()
    {
        let mut r = rng(40 + k as u64);
        let (mut refl, mut fact) = (Worst::new(), Worst::new());
        for _ in 0..50 {
            let e = sample::eta(&mut r).value();
            let params = sample::boundary(&mut r);
            let bnd = D22Boundary { class, params };
            let (u, v) = (
                sample::spectral_point(&mut r),
                sample::spectral_point(&mut r),
            );
            refl.add(d22::reflection_minus_residual(u, v, &bnd, e));
            refl.add(d22::reflection_plus_residual(u, v, &bnd, e));
            refl.add(xxz::reflection_minus_residual(u, v, e, &params));
            refl.add(xxz::reflection_plus_residual(u, v, e, &params));
            let kf = d22::k_factorization_check(u, &bnd, e);
            fact.add(kf.plus);
            fact.add(kf.minus);
        }
        worst.push((class, refl.0, fact.0));
    }
    let pass = worst.iter().all(|(_, a, b)| *a <= 1e-9 && *b <= 1e-9);
    let detail = worst
        .iter()
        .map(|(cl, a, b)| format!("class {cl}: reflection {a:.2e}, K factorization {b:.2e}"))
        .collect::<Vec<_>>()
        .join("; ");
    Verdict { pass, detail }
}

fn criterion_5() -> Verdict {
    let mut r = rng(5);
    let mut w = Worst::new();
    for n in [1, 2] {
        for class in [BoundaryClass::I, BoundaryClass::II] {
            let spec = default_spec(n, class);
            for _ in 0..3 {
                let (u, v) = (
                    sample::spectral_point(&mut r),
                    sample::spectral_point(&mut r),
                );
                let (a, b) = (transfer_d22(u, &spec), transfer_d22(v, &spec));
                w.add(relative_residual(&(&a * &b), &(&b * &a)).unwrap());
            }
        }
        let th = Inhomogeneities::new(
            (0..2 * n)
                .map(|_| sample::spectral_point(&mut r) * 0.3)
                .collect(),
        )
        .unwrap();
        let (u, v) = (
            sample::spectral_point(&mut r),
            sample::spectral_point(&mut r),
        );
        let e = c(0.37, 0.0);
        let (a, b) = (
            transfer_xxz(u, &th, e, &defaults()),
            transfer_xxz(v, &th, e, &defaults()),
        );
        w.add(relative_residual(&(&a * &b), &(&b * &a)).unwrap());
    }
    Verdict {
        pass: w.0 <= 1e-9,
        detail: format!(
            "max [t(u),t(v)] residual {:.2e}, N ≤ 2, both classes and XXZ",
            w.0
        ),
    }
}

fn criterion_6() -> Verdict {
    let mut r = rng(6);
    let mut lines = Vec::new();
    let mut pass = true;
    for n in [1, 2] {
        let start = Instant::now();
        let tol = if n == 1 { 1e-9 } else { 1e-8 };
        for class in [BoundaryClass::I, BoundaryClass::II] {
            let spec = default_spec(n, class);
            let s = ConjugationS::build(n, spec.eta()).unwrap();
            let (mut res, mut spec_w, mut raw) = (Worst::new(), Worst::new(), Worst::new());
            let mut done = 0;
            while done < 20 {
                let u = sample::spectral_point(&mut r);
                let fr = match factorization_residual(u, &spec) {
                    Ok(fr) => fr,
                    Err(Error::SingularPoint(..)) => continue,
                    Err(e) => panic!("{e}"),
                };
                res.add(fr.conjugated);
                raw.add(fr.raw);
                let t = transfer_d22(u, &spec);
                let conj = &(&s * &t) * &s;
                let a = conj.eigen_spectrum().unwrap();
                let b = factorized_transfer(u, &spec)
                    .unwrap()
                    .eigen_spectrum()
                    .unwrap();
                spec_w.add(spectrum_distance(&a, &b));
                done += 1;
            }
            pass &= res.0 <= tol && spec_w.0 <= 1e-8;
            lines.push(format!(
                "N={n} class {class}: 𝒮-conjugated {:.2e}, spectra {:.2e} (raw {:.2e})",
                res.0, spec_w.0, raw.0
            ));
        }
        let t = start.elapsed();
        if n == 2 {
            pass &= t < Duration::from_secs(60);
            lines.push(format!("N=2 time {t:.2?}"));
        }
    }
    Verdict {
        pass,
        detail: lines.join("; "),
    }
}

fn criterion_7() -> Verdict {
    let mut r = rng(7);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut cases: Vec<(String, Inhomogeneities)> = vec![
        (
            "N=1 plain stagger".into(),
            Inhomogeneities::staggered(1, StaggerPattern::Plain),
        ),
        (
            "N=1 shifted stagger".into(),
            Inhomogeneities::staggered(1, StaggerPattern::Shifted),
        ),
    ];
    for n in [1, 2] {
        let th = (0..2 * n)
            .map(|_| c(r.gen_range(-0.6..0.6), r.gen_range(-0.6..0.6)))
            .collect();
        cases.push((
            format!("N={n} generic θ"),
            Inhomogeneities::new(th).unwrap(),
        ));
    }
    for (label, th) in cases {
        let set = ConstraintSet::new(&th, 0.37.into(), &defaults()).unwrap();
        let res = set.check_operator().unwrap();
        let (mut q, mut sp, mut asy) = (Worst::new(), Worst::new(), Worst::new());
        for (con, v) in set.constraints.iter().zip(res) {
            match con.kind {
                ConstraintKind::QuantumDet { .. } => q.add(v),
                ConstraintKind::Special => sp.add(v),
                ConstraintKind::Asymptotic { .. } => asy.add(v),
            }
        }
        pass &= q.0 <= 1e-9 && sp.0 <= 1e-9 && asy.0 <= 1e-6;
        lines.push(format!(
            "{label}: qdet {:.2e}, special {:.2e}, asymptotic {:.2e}",
            q.0, sp.0, asy.0
        ));
    }
    Verdict {
        pass,
        detail: lines.join("; "),
    }
}

/// Criteria 8 and 9: solve, classify against t̃_s, certify through t(u).
fn tq_pipeline(criterion: u64, class: BoundaryClass, draws: usize) -> Verdict {
    let mut r = rng(criterion);
    let pattern = StaggerPattern::for_class(class);
    let probes = default_probes();
    let mut covered = 0;
    let mut pass = true;
    let mut notes = Vec::new();
    let (mut worst_cert, mut worst_bae, mut slowest) = (Worst::new(), Worst::new(), Duration::ZERO);
    for draw in 0..draws {
        let spec = sample::chain(&mut r, 1, class).unwrap();
        let start = Instant::now();
        let config = SolveConfig {
            seed: SEED + draw as u64,
            ..SolveConfig::default()
        };
        let (model, outcome) = match solve_bae(&config, &spec, pattern) {
            Ok(x) => x,
            Err(e) => {
                notes.push(format!("draw {draw}: {e}"));
                continue;
            }
        };
        let cov = classify_roots(&outcome.roots, &model, &spec, pattern, &probes).unwrap();
        for root in &outcome.roots {
            worst_bae.add(
                model
                    .bae_residuals(&root.mus)
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            );
            worst_cert.add(certify_d22(root, &model, &spec, pattern, &probes).unwrap());
        }
        let t = start.elapsed();
        slowest = slowest.max(t);
        if cov.matched == cov.branches.len() && cov.branches.len() == 4 {
            covered += 1;
        } else {
            notes.push(format!(
                "draw {draw} (solver seed {}): {}/{} eigenvalues",
                config.seed,
                cov.matched,
                cov.branches.len()
            ));
        }
    }
    let fraction = covered as f64 / draws as f64;
    pass &= fraction >= 0.9
        && worst_cert.0 <= 1e-8
        && worst_bae.0 <= 1e-10
        && slowest < Duration::from_secs(120);
    let mut detail = format!(
        "full coverage {covered}/{draws}; worst Λ vs spectrum of t(u) {:.2e}; worst BAE {:.2e}; slowest draw {:.2?}",
        worst_cert.0, worst_bae.0, slowest
    );
    if !notes.is_empty() {
        detail.push_str(&format!(" [{}]", notes.join(", ")));
    }
    Verdict { pass, detail }
}

fn criterion_10() -> Verdict {
    let mut r = rng(10);
    let (mut fd, mut comm) = (Worst::new(), Worst::new());
    let zero = c(0.0, 0.0);
    for n in [1, 2] {
        let spec = default_spec(n, BoundaryClass::I);
        let h = hamiltonian(&spec).unwrap();
        // H = ½ t(0)⁻¹ t′(0) − tr K⁺′(0) / (2 tr K⁺(0))
        let step = 1e-4;
        let hs = c(step, 0.0);
        let d = |f: &dyn Fn(C64) -> DenseOperator| {
            let num = &(&(&f(hs) - &f(-hs)).scale(c(8.0, 0.0)) - &f(2.0 * hs)) + &f(-2.0 * hs);
            num.scale(c(1.0 / (12.0 * step), 0.0))
        };
        let dt = d(&|w| transfer_d22(w, &spec));
        let bnd = spec.boundary();
        let e = spec.eta();
        let trp = d22::k_plus_d22(zero, bnd, e).trace();
        let dtrp = d(&|w| d22::k_plus_d22(w, bnd, e)).trace();
        let oracle = &transfer_d22(zero, &spec)
            .solve(&dt)
            .unwrap()
            .scale(c(0.5, 0.0))
            - &DenseOperator::identity(spec.quantum_layout()).scale(dtrp / (2.0 * trp));
        fd.add(relative_residual(&h, &oracle).unwrap());
        for _ in 0..3 {
            let t = transfer_d22(sample::spectral_point(&mut r), &spec);
            comm.add(h.commutator(&t).frobenius_norm() / (h.frobenius_norm() * t.frobenius_norm()));
        }
    }
    let rejected = matches!(
        hamiltonian(&default_spec(1, BoundaryClass::II)),
        Err(Error::HamiltonianUnsupported)
    );
    Verdict {
        pass: fd.0 <= 1e-6 && comm.0 <= 1e-8 && rejected,
        detail: format!(
            "finite-difference {:.2e}, [H,t(v)] {:.2e}, class II rejected: {rejected}",
            fd.0, comm.0
        ),
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 Yang-Baxter", criterion_1),
        ("2 R-matrix properties", criterion_2),
        ("3 direct vs factorized R", criterion_3),
        ("4 reflection equations and K factorization", criterion_4),
        ("5 transfer-matrix commutativity", criterion_5),
        ("6 factorization identities", criterion_6),
        ("7 fusion constraint set", criterion_7),
        ("8 T-Q certification, class I", || {
            tq_pipeline(8, BoundaryClass::I, 20)
        }),
        ("9 T-Q certification, class II", || {
            tq_pipeline(9, BoundaryClass::II, 5)
        }),
        ("10 Hamiltonian", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "{status} criterion {name} ({:.2?}): {}",
            start.elapsed(),
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
