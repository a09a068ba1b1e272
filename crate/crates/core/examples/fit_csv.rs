//! Load a delimited file, fit it, and do the same through the `lst fit`
//! command.

use lstreg::estimator::fit;
use lstreg::ingest::{load_csv, ColumnRef, ColumnSpec};
use lstreg::{EstimatorSettings, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("lstreg-fit-csv");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("air.csv");
    let mut text = String::from("day,no2,cars,temp,wind\n");
    for i in 0..60 {
        let cars = 6.0 + (0.37 * i as f64).sin();
        let temp = 10.0 * (0.11 * i as f64).cos();
        let wind = 3.0 + (1.9 * i as f64).sin();
        let mut no2 = 1.0 + 0.6 * cars - 0.02 * temp - 0.3 * wind + 0.1 * (4.1 * i as f64).cos();
        if i % 15 == 0 {
            no2 += 6.0;
        }
        let cell = if i == 42 { "NA".to_string() } else { format!("{no2:.4}") };
        text += &format!("{i},{cell},{cars:.4},{temp:.4},{wind:.4}\n");
    }
    std::fs::write(&path, text)?;

    let mut spec = ColumnSpec::new(ColumnRef::Name("no2".into()), vec![ColumnRef::Index(3), ColumnRef::Name("temp".into()), ColumnRef::Index(5)]);
    spec.skip_header = true;
    spec.drop_incomplete = true;
    let loaded = load_csv(&path, &spec)?;
    println!("columns {:?}, dropped lines {:?}", loaded.names, loaded.dropped_lines);
    for m in [Method::Lst, Method::Ls] {
        let f = fit(&loaded.dataset, m, &EstimatorSettings::default(), 0)?;
        println!("{:<4} {:.4?}", m.as_str(), f.beta.as_slice());
    }

    let out = dir.join("out");
    let args = ["lst", "fit", path.to_str().unwrap(), "--header", "--drop-incomplete", "--response", "no2", "--predictors", "3-5", "--methods", "lst,ls", "--out-dir", out.to_str().unwrap()];
    let code = lstreg::cli::run(args, &mut std::io::stdout(), &mut std::io::stderr());
    println!("exit code {code}, artifacts in {}", out.display());
    Ok(())
}
