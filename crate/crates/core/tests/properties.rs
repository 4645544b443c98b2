use d22_core::bae::{dedup, RootSet};
use d22_core::fusion::{scalar_residual, BranchChoice, TqModel};
use d22_core::tensor::{permutation_operator, relative_residual};
use d22_core::transfer::Inhomogeneities;
use d22_core::xxz::XxzBoundary;
use d22_core::{c, d22, xxz, DenseOperator, SiteLayout, C64};
use proptest::prelude::*;

fn complex(range: f64) -> impl Strategy<Value = C64> {
    (-range..range, -range..range).prop_map(|(re, im)| c(re, im))
}

fn spectral() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -3.1..3.1f64).prop_map(|(re, im)| c(re, im))
}

fn eta() -> impl Strategy<Value = C64> {
    (0.2..0.9f64, -0.3..0.3f64).prop_map(|(re, im)| c(re, im))
}

fn matrix(layout: SiteLayout) -> impl Strategy<Value = DenseOperator> {
    let n = layout.total();
    proptest::collection::vec(complex(1.0), n * n)
        .prop_map(move |v| DenseOperator::from_fn(layout.clone(), |i, j| v[i * n + j]))
}

fn default_boundary() -> XxzBoundary {
    XxzBoundary {
        s: c(0.23, 0.0),
        s1: c(0.51, 0.0),
        s2: c(-0.29, 0.0),
        s_p: c(0.41, 0.0),
        s1_p: c(-0.33, 0.0),
        s2_p: c(0.27, 0.0),
    }
}

/// Multi-index oracle for the partial trace over factor `f`.
fn trace_oracle(m: &DenseOperator, dims: &[usize], f: usize) -> Vec<C64> {
    let n: usize = dims.iter().product();
    let digits = |mut i: usize| {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = i % dims[k];
            i /= dims[k];
        }
        d
    };
    let reduced: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != f)
        .map(|(_, d)| *d)
        .collect();
    let rn: usize = reduced.iter().product();
    let mut out = vec![c(0.0, 0.0); rn * rn];
    for i in 0..n {
        for j in 0..n {
            let (di, dj) = (digits(i), digits(j));
            if di[f] != dj[f] {
                continue;
            }
            let flat = |d: &[usize]| {
                d.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != f)
                    .fold(0, |acc, (k, x)| acc * dims[k] + x)
            };
            out[flat(&di) * rn + flat(&dj)] += m.get(i, j);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kron_is_associative(a in matrix(SiteLayout::flat(2)), b in matrix(SiteLayout::flat(3)), m in matrix(SiteLayout::flat(2))) {
        let left = a.kron(&b).kron(&m);
        let right = a.kron(&b.kron(&m));
        prop_assert!((left.matrix() - right.matrix()).norm() < 1e-13);
    }

    #[test]
    fn partial_trace_matches_oracle(m in matrix(SiteLayout::new(vec![2, 3, 2]).unwrap()), f in 0usize..3) {
        let got = m.partial_trace(f).unwrap();
        let want = trace_oracle(&m, &[2, 3, 2], f);
        let n = got.dim();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((got.get(i, j) - want[i * n + j]).norm() < 1e-13);
            }
        }
        prop_assert!((got.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution(m in matrix(SiteLayout::new(vec![2, 4]).unwrap()), f in 0usize..2) {
        let twice = m.partial_transpose(f).unwrap().partial_transpose(f).unwrap();
        prop_assert!(relative_residual(&twice, &m).unwrap() == 0.0);
    }

    #[test]
    fn permutation_conjugation_swaps(m in matrix(SiteLayout::uniform(2, 2))) {
        let p = permutation_operator(2);
        let swapped = &(&p * &m) * &p;
        let idx = |i: usize| (i % 2) * 2 + i / 2;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((swapped.get(i, j) - m.get(idx(i), idx(j))).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn eigenvalues_are_roots_of_the_characteristic_polynomial(m in matrix(SiteLayout::flat(8))) {
        let norm = m.frobenius_norm();
        let id = DenseOperator::identity(SiteLayout::flat(8));
        let spectrum = m.eigen_spectrum().unwrap();
        prop_assert_eq!(spectrum.len(), 8);
        for l in spectrum {
            let det = (&m - &id.scale(l)).determinant();
            prop_assert!(det.norm() <= 1e-8 * (1.0 + norm).powi(8));
        }
    }

    #[test]
    fn xxz_yang_baxter(u in spectral(), v in spectral(), e in eta()) {
        prop_assert!(xxz::ybe_residual(u, v, e) <= 1e-10);
    }

    #[test]
    fn lambda_is_crossing_symmetric(mu1 in complex(2.0), mu2 in complex(2.0), u in spectral()) {
        let th = Inhomogeneities::new(vec![c(0.13, 0.21), c(-0.37, 0.4)]).unwrap();
        let e = c(0.37, 0.0);
        let model = TqModel::new(&th, e, &default_boundary(), BranchChoice::PRINCIPAL).unwrap();
        let mus = [mu1, mu2];
        let a = model.lambda_unchecked(u, &mus);
        let b = model.lambda_unchecked(2.0 * e - u, &mus);
        prop_assert!(scalar_residual(a, b) < 1e-9);
    }

    #[test]
    fn bae_residuals_invariant_under_reflection(mu1 in complex(2.0), mu2 in complex(2.0)) {
        let th = Inhomogeneities::new(vec![c(0.13, 0.21), c(-0.37, 0.4)]).unwrap();
        let e = c(0.37, 0.0);
        let model = TqModel::new(&th, e, &default_boundary(), BranchChoice::PRINCIPAL).unwrap();
        let a = model.bae_residuals(&[mu1, mu2]);
        let b = model.bae_residuals(&[2.0 * e - mu1, mu2]);
        prop_assert!(scalar_residual(a[0], b[0]) < 1e-9);
        prop_assert!(scalar_residual(a[1], b[1]) < 1e-9);
    }

    #[test]
    fn dedup_is_idempotent(raw in proptest::collection::vec((complex(2.0), complex(2.0), 0usize..3), 1..12)) {
        let e = c(0.37, 0.0);
        let sets: Vec<RootSet> = raw
            .iter()
            .map(|&(a, b, k)| {
                let mus = match k {
                    0 => vec![a, b],
                    1 => vec![b, 2.0 * e - a],
                    _ => vec![a + c(0.0, 2.0 * std::f64::consts::PI), b],
                };
                RootSet { mus, residual: 0.0 }
            })
            .collect();
        let once = dedup(&sets, e, 1e-7);
        prop_assert_eq!(dedup(&once, e, 1e-7), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn d22_yang_baxter(u in spectral(), v in spectral(), e in eta()) {
        prop_assert!(d22::ybe_residual(u, v, e) <= 1e-10);
    }
}
