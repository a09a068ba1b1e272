mod common;

use common::*;
use lstreg::lts::{concentration_step, LtsConfig};
use lstreg::{
    index_set, ls_fit, lst_fit, lts_fit, lts_objective, mad, median, objective_q, outlyingness,
    residuals, CoefficientVector, Dataset, LstConfig, Rows,
};
use proptest::prelude::*;

fn shifted(d: &Dataset, b: &[f64]) -> Dataset {
    let y = (0..d.n())
        .map(|i| d.y(i) + design_row(d, i).iter().zip(b).map(|(w, c)| w * c).sum::<f64>())
        .collect();
    d.with_responses(y).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, 1..50)
}

proptest! {
    #[test]
    fn residuals_are_affine_in_beta(seed in any::<u64>(), n in 3usize..30, p in 2usize..5,
                                    b1 in prop::collection::vec(-5.0..5.0f64, 5),
                                    b2 in prop::collection::vec(-5.0..5.0f64, 5)) {
        let d = messy_dataset(seed, n, p);
        let c1 = CoefficientVector::new(b1[..p].to_vec()).unwrap();
        let c2 = CoefficientVector::new(b2[..p].to_vec()).unwrap();
        let sum = CoefficientVector::new(b1[..p].iter().zip(&b2[..p]).map(|(a, b)| a + b).collect()).unwrap();
        let (r1, r2, r12) = (residuals(&d, &c1).unwrap(), residuals(&d, &c2).unwrap(), residuals(&d, &sum).unwrap());
        for i in 0..n {
            let lhs = r12.as_slice()[i];
            let rhs = r1.as_slice()[i] + r2.as_slice()[i] - d.y(i);
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }

    #[test]
    fn duplicated_row_duplicates_residual(seed in any::<u64>(), n in 3usize..20, pick in 0usize..20) {
        let d = messy_dataset(seed, n, 3);
        let k = pick % n;
        let mut rows: Vec<(Vec<f64>, f64)> = d.rows().map(|(x, y)| (x.to_vec(), y)).collect();
        rows.push(rows[k].clone());
        let dd = Dataset::from_rows(rows).unwrap();
        let beta = CoefficientVector::new(vec![0.3, -1.0, 2.0]).unwrap();
        let r = residuals(&dd, &beta).unwrap();
        prop_assert_eq!(r.as_slice()[n], r.as_slice()[k]);
        let base = residuals(&d, &beta).unwrap();
        prop_assert_eq!(&r.as_slice()[..n], base.as_slice());
    }

    #[test]
    fn location_statistics_match_sort_reference(v in values()) {
        prop_assert_eq!(median(&v).unwrap(), ref_median(&v));
        prop_assert_eq!(mad(&v).unwrap(), ref_mad(&v));
    }

    #[test]
    fn outlyingness_is_location_and_scale_invariant(v in prop::collection::vec(-100.0..100.0f64, 3..40),
                                                    c in -50.0..50.0f64, s in 0.1..10.0f64, flip in any::<bool>()) {
        let o = outlyingness(&v).unwrap();
        let s = if flip { -s } else { s };
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let scaled: Vec<f64> = v.iter().map(|x| x * s).collect();
        let os = outlyingness(&shifted).unwrap();
        let ok = outlyingness(&scaled).unwrap();
        for i in 0..v.len() {
            prop_assert!(close(o.as_slice()[i], os.as_slice()[i], 1e-6));
            prop_assert!(close(o.as_slice()[i], ok.as_slice()[i], 1e-9));
        }
    }

    #[test]
    fn majority_identical_values_have_unit_mad(n in 1usize..30, value in -10.0..10.0f64,
                                               rest in prop::collection::vec(-10.0..10.0f64, 30)) {
        let same = n.div_ceil(2);
        let mut v = vec![value; same];
        v.extend_from_slice(&rest[..n - same]);
        prop_assert_eq!(mad(&v).unwrap(), 1.0);
        let scaled: Vec<f64> = v.iter().map(|x| x * 3.0).collect();
        prop_assert_eq!(mad(&scaled).unwrap(), 1.0);
    }

    #[test]
    fn ls_residuals_are_orthogonal_to_design(seed in any::<u64>(), n in 6usize..40, p in 2usize..5) {
        let d = messy_dataset(seed, n, p);
        let rows: Vec<usize> = (0..n).filter(|i| i % 3 != 1).collect();
        let sol = ls_fit(&d, Rows::Subset(&rows)).unwrap();
        let r = residuals(&d, &sol.beta).unwrap();
        for k in 0..p {
            let dot: f64 = rows.iter().map(|&i| r.as_slice()[i] * design_row(&d, i)[k]).sum();
            let scale: f64 = rows.iter().map(|&i| (r.as_slice()[i] * design_row(&d, i)[k]).abs()).sum::<f64>().max(1.0);
            prop_assert!(dot.abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn ls_is_regression_equivariant_and_idempotent(seed in any::<u64>(), n in 6usize..40, p in 2usize..5,
                                                   b in prop::collection::vec(-5.0..5.0f64, 5)) {
        let d = messy_dataset(seed, n, p);
        let fit = ls_fit(&d, Rows::All).unwrap();
        let moved = ls_fit(&shifted(&d, &b[..p]), Rows::All).unwrap();
        for j in 0..p {
            prop_assert!(close(moved.beta[j], fit.beta[j] + b[j], 1e-8));
        }
        let rows: Vec<usize> = (0..n).step_by(2).chain([1]).collect();
        let once = ls_fit(&d, Rows::Subset(&rows)).unwrap();
        let sub = d.select(&rows).unwrap();
        let twice = ls_fit(&sub, Rows::All).unwrap();
        for j in 0..p {
            prop_assert!(close(once.beta[j], twice.beta[j], 1e-9));
        }
        if let Some((beta, _)) = ref_ls(&d, &(0..n).collect::<Vec<_>>()) {
            for j in 0..p {
                prop_assert!(close(fit.beta[j], beta[j], 1e-6));
            }
        }
    }

    #[test]
    fn index_set_is_monotone_and_objective_bounded(seed in any::<u64>(), n in 3usize..40, p in 2usize..5,
                                                   a1 in 1.0..6.0f64, extra in 0.0..6.0f64,
                                                   b in prop::collection::vec(-3.0..3.0f64, 5)) {
        let d = messy_dataset(seed, n, p);
        let beta = CoefficientVector::new(b[..p].to_vec()).unwrap();
        let (Ok(small), Ok(large)) = (index_set(&d, &beta, a1), index_set(&d, &beta, a1 + extra)) else {
            return Ok(());
        };
        prop_assert!(small.iter().all(|i| large.contains(i)));
        let q = objective_q(&d, &beta, a1).unwrap();
        prop_assert!(q <= residuals(&d, &beta).unwrap().sum_of_squares());
    }

    #[test]
    fn lst_is_deterministic_and_refit_consistent(seed in any::<u64>(), n in 5usize..40, p in 2usize..4, fit_seed in any::<u64>()) {
        let d = messy_dataset(seed, n, p);
        let cfg = LstConfig { seed: fit_seed, restarts: 3, ..LstConfig::default() };
        let Ok(a) = lst_fit(&d, &cfg) else { return Ok(()); };
        let b = lst_fit(&d, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let refit = ls_fit(&d, Rows::Subset(&a.retained)).unwrap();
        prop_assert!(close(a.objective, refit.ss, 1e-9));
    }

    #[test]
    fn lst_without_trimming_is_least_squares(seed in any::<u64>(), n in 5usize..40, p in 2usize..4) {
        let d = messy_dataset(seed, n, p);
        let cfg = LstConfig { alpha: f64::INFINITY, restarts: 2, ..LstConfig::default() };
        let Ok(f) = lst_fit(&d, &cfg) else { return Ok(()); };
        let ls = ls_fit(&d, Rows::All).unwrap();
        prop_assert_eq!(f.retained.len(), n);
        for j in 0..p {
            prop_assert!(close(f.beta[j], ls.beta[j], 1e-9));
        }
    }

    #[test]
    fn concentration_steps_never_increase_objective(seed in any::<u64>(), n in 6usize..40, p in 2usize..4,
                                                    b in prop::collection::vec(-3.0..3.0f64, 4)) {
        let d = messy_dataset(seed, n, p);
        let h = LtsConfig::for_problem(n, p).h;
        let mut beta = b[..p].to_vec();
        let mut obj = lts_objective(&d, &CoefficientVector::new(beta.clone()).unwrap(), h).unwrap();
        for _ in 0..8 {
            beta = concentration_step(&d, &beta, h).unwrap().solution.beta.into_vec();
            let next = lts_objective(&d, &CoefficientVector::new(beta.clone()).unwrap(), h).unwrap();
            prop_assert!(next <= obj * (1.0 + 1e-12) + 1e-12);
            obj = next;
        }
    }

    #[test]
    fn lts_objective_grows_with_coverage(seed in any::<u64>(), n in 4usize..40,
                                         b in prop::collection::vec(-3.0..3.0f64, 3)) {
        let d = messy_dataset(seed, n, 3);
        let beta = CoefficientVector::new(b).unwrap();
        let mut last = 0.0;
        for h in n.div_ceil(2)..=n {
            let v = lts_objective(&d, &beta, h).unwrap();
            prop_assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn lts_is_deterministic(seed in any::<u64>(), n in 6usize..30, fit_seed in any::<u64>()) {
        let d = messy_dataset(seed, n, 2);
        let cfg = LtsConfig { starts: 20, seed: fit_seed, ..LtsConfig::for_problem(n, 2) };
        prop_assert_eq!(lts_fit(&d, &cfg).unwrap(), lts_fit(&d, &cfg).unwrap());
    }
}
