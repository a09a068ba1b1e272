mod common;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use lstreg::sim::{contamination_count, emse, generate_sample, mean_vector, replicate, svar};
use lstreg::{run_study, CoefficientVector, Contamination, Design, EstimatorSettings, Method, SimulationScenario};

fn scenario(p: usize, rate: f64, reps: usize) -> SimulationScenario {
    SimulationScenario {
        n: 100,
        p,
        design: Design::Equicorrelated { rho: 0.9 },
        beta0: None,
        contamination: Contamination::corner(rate, p, 7.0),
        replications: reps,
        seed: 11,
    }
}

fn quick() -> EstimatorSettings {
    let mut s = EstimatorSettings::default();
    s.lts.starts = 20;
    s
}

#[test]
fn sample_covariance_matches_equicorrelation() {
    let s = SimulationScenario { n: 100_000, ..scenario(5, 0.0, 1) };
    let d = generate_sample(&s, 0).unwrap();
    let cols: Vec<Vec<f64>> = (0..5)
        .map(|k| (0..d.n()).map(|i| if k < 4 { d.x(i)[k] } else { d.y(i) }).collect())
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    for a in 0..5 {
        for b in 0..5 {
            let (ma, mb) = (mean(&cols[a]), mean(&cols[b]));
            let cov = cols[a].iter().zip(&cols[b]).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (d.n() - 1) as f64;
            let target = if a == b { 1.0 } else { 0.9 };
            assert!((cov - target).abs() < 0.02, "({a}, {b}): {cov}");
        }
    }
}

#[test]
fn bias_variance_identity_holds() {
    let s = scenario(3, 0.1, 40);
    let study = run_study(&s, &Method::ALL, &quick()).unwrap();
    let r = s.replications as f64;
    for m in Method::ALL {
        let est = study.estimates(m);
        let mean = mean_vector(&est).unwrap();
        let bias: f64 = mean.iter().map(|v| v * v).sum();
        let row = study.table.row(m).unwrap();
        let rhs = row.svar.unwrap() * (r - 1.0) / r + bias;
        assert!((row.emse - rhs).abs() <= 1e-9 * row.emse, "{m}: {} vs {rhs}", row.emse);
        assert_eq!(row.emse, emse(&est, &[0.0; 3]));
        assert_eq!(row.svar, svar(&est));
    }
}

#[test]
fn studies_are_pure_functions_of_their_inputs() {
    let s = scenario(3, 0.05, 12);
    let a = run_study(&s, &Method::ALL, &quick()).unwrap();
    let b = run_study(&s, &Method::ALL, &quick()).unwrap();
    assert_eq!(a.table.to_csv(), b.table.to_csv());
    assert_eq!(a.squared_deviation_csv(), b.squared_deviation_csv());
    let other = run_study(&SimulationScenario { seed: 12, ..s }, &Method::ALL, &quick()).unwrap();
    assert_ne!(a.squared_deviation_csv(), other.squared_deviation_csv());
}

#[test]
fn replications_draw_distinct_datasets() {
    let s = scenario(4, 0.1, 200);
    let mut seen = HashSet::new();
    for rep in 0..s.replications {
        let r = replicate(&s, rep).unwrap();
        let mut h = DefaultHasher::new();
        for (x, y) in r.data.rows() {
            x.iter().chain([&y]).for_each(|v| v.to_bits().hash(&mut h));
        }
        assert!(seen.insert(h.finish()), "rep {rep} repeats an earlier dataset");
        assert_eq!(r.contaminated_rows.len(), 10);
        for &i in &r.contaminated_rows {
            assert_eq!(r.data.x(i), &[7.0, 7.0, 7.0]);
            assert_eq!(r.data.y(i), -7.0);
        }
    }
}

#[test]
fn contamination_uses_the_ceiling() {
    assert_eq!(contamination_count(50, 0.05), 3);
    assert_eq!(contamination_count(100, 0.1), 10);
    assert_eq!(contamination_count(100, 0.07), 7);
    assert_eq!(contamination_count(300, 0.05), 15);
    assert_eq!(contamination_count(80, 0.3), 24);
}

#[test]
fn fixed_coefficients_are_recovered_by_least_squares() {
    let beta0 = vec![1.0, 1.0, -1.0, -1.0];
    let s = SimulationScenario {
        design: Design::IidStandard,
        beta0: Some(CoefficientVector::new(beta0.clone()).unwrap()),
        contamination: Contamination::none(4),
        ..scenario(4, 0.0, 300)
    };
    let study = run_study(&s, &[Method::Ls], &quick()).unwrap();
    let mean = mean_vector(&study.estimates(Method::Ls)).unwrap();
    for (m, b) in mean.iter().zip(&beta0) {
        assert!((m - b).abs() < 0.03, "{mean:?}");
    }
    // unbiased, so EMSE and SVAR agree up to sampling noise
    let row = study.table.row(Method::Ls).unwrap();
    assert!((row.emse - row.svar.unwrap()).abs() < 0.01);
}

#[test]
fn clean_least_squares_cell_matches_published_table() {
    // published: EMSE 0.2786, SVAR 0.0417 (p = 5, n = 100, 1000 samples)
    let s = scenario(5, 0.0, 1000);
    let study = run_study(&s, &[Method::Ls], &quick()).unwrap();
    let row = study.table.row(Method::Ls).unwrap();
    assert!((row.emse - 0.2786).abs() / 0.2786 < 0.08, "EMSE {}", row.emse);
    assert!((row.svar.unwrap() - 0.0417).abs() / 0.0417 < 0.12, "SVAR {:?}", row.svar);
}
