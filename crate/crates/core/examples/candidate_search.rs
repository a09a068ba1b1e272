//! The finite candidate scheme behind the LST search: one sampled pair gives
//! two base coefficient vectors and their perturbations.

use lstreg::{candidate_betas, lst_fit, residuals, Dataset, LstConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), lstreg::Error> {
    let data = Dataset::from_rows((0..15).map(|i| {
        let a = (1.1 * i as f64).sin() * 2.0;
        let b = (0.4 * i as f64).cos() + 0.1 * i as f64;
        (vec![a, b], 0.5 + a - 2.0 * b + 0.1 * (3.3 * i as f64).sin())
    }))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = candidate_betas(&data, &mut rng, 0.5)?;
    let (i, j) = set.pair;
    println!("pair ({i}, {j}), component {}, slope {:.4}", set.component, set.slope);
    for (c, beta) in set.betas.iter().enumerate() {
        let r = residuals(&data, beta)?;
        println!("candidate {c:>2}: {:?}  r_i - r_j = {:+.1e}", beta.as_slice(), r.as_slice()[i] - r.as_slice()[j]);
    }

    for restarts in [1, 5, 25] {
        let f = lst_fit(&data, &LstConfig { restarts, seed: 3, ..LstConfig::default() })?;
        println!(
            "restarts {restarts:>2}: beta {:?}  SS {:.5}  skipped {}/{}",
            f.beta.as_slice().iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>(),
            f.objective,
            f.diagnostics.skipped,
            f.diagnostics.evaluated
        );
    }
    Ok(())
}
