//! Reference implementations used as oracles by the integration tests.
//! Deliberately naive: full sorts, normal equations, exhaustive search.
#![allow(dead_code)]

use lstreg::Dataset;

pub fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s
}

pub fn ref_median(v: &[f64]) -> f64 {
    let s = sorted(v);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn ref_mad(v: &[f64]) -> f64 {
    let n = v.len();
    let majority = (n + 1) / 2;
    for a in v {
        if v.iter().filter(|b| *b == a).count() >= majority {
            return 1.0;
        }
    }
    let m = ref_median(v);
    let dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
    ref_median(&dev)
}

pub fn ref_outlyingness(v: &[f64]) -> Vec<f64> {
    let m = ref_median(v);
    let s = ref_mad(v);
    v.iter().map(|x| (x - m).abs() / s).collect()
}

pub fn design_row(d: &Dataset, i: usize) -> Vec<f64> {
    std::iter::once(1.0).chain(d.x(i).iter().copied()).collect()
}

pub fn ref_residuals(d: &Dataset, beta: &[f64]) -> Vec<f64> {
    (0..d.n())
        .map(|i| d.y(i) - design_row(d, i).iter().zip(beta).map(|(w, b)| w * b).sum::<f64>())
        .collect()
}

/// Least squares on `rows` through the normal equations, solved by Gaussian
/// elimination with partial pivoting. `None` when singular.
pub fn ref_ls(d: &Dataset, rows: &[usize]) -> Option<(Vec<f64>, f64)> {
    let p = d.p();
    let mut a = vec![vec![0.0; p + 1]; p];
    for &i in rows {
        let w = design_row(d, i);
        for r in 0..p {
            for c in 0..p {
                a[r][c] += w[r] * w[c];
            }
            a[r][p] += w[r] * d.y(i);
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..p {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..p).map(|r| a[r][p] / a[r][r]).collect();
    let r = ref_residuals(d, &beta);
    let ss = rows.iter().map(|&i| r[i] * r[i]).sum();
    Some((beta, ss))
}

/// Exhaustive LTS optimum: least squares on every `h`-subset.
pub fn exhaustive_lts(d: &Dataset, h: usize) -> f64 {
    fn walk(d: &Dataset, h: usize, start: usize, cur: &mut Vec<usize>, best: &mut f64) {
        if cur.len() == h {
            if let Some((_, ss)) = ref_ls(d, cur) {
                *best = best.min(ss);
            }
            return;
        }
        for i in start..d.n() {
            if d.n() - i < h - cur.len() {
                break;
            }
            cur.push(i);
            walk(d, h, i + 1, cur, best);
            cur.pop();
        }
    }
    let mut best = f64::INFINITY;
    walk(d, h, 0, &mut Vec::new(), &mut best);
    best
}

/// SplitMix64, independent of the library's generators.
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Roughly normal, by summing uniforms.
    pub fn gauss(&mut self) -> f64 {
        (0..12).map(|_| self.uniform()).sum::<f64>() - 6.0
    }
}

/// Linear data with heavy-tailed noise and a few gross outliers.
pub fn messy_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let mut g = Mix(seed);
    let beta: Vec<f64> = (0..p).map(|_| g.gauss() * 2.0).collect();
    Dataset::from_rows((0..n).map(|_| {
        let x: Vec<f64> = (1..p).map(|_| g.gauss() * 3.0).collect();
        let mut y = beta[0] + x.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>() + g.gauss();
        if g.uniform() < 0.15 {
            y += 20.0 + 10.0 * g.uniform();
        }
        (x, y)
    }))
    .unwrap()
}
