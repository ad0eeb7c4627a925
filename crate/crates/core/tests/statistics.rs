//! Ensemble checks of the path generator and the stationary noises.

use nlrd_core::ensemble::Pool;
use nlrd_core::noise::StationaryNoise;
use nlrd_core::{NoiseKind, NoiseVariant, WienerPath};

const H: f64 = 1.0 / 1024.0;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn path_variance_grows_like_time() {
    let seeds: Vec<u64> = (0..1200).collect();
    let values = Pool::default().map(&seeds, |&s| {
        let p = WienerPath::sample(s, -2.0, 2.0, H).unwrap();
        [0.5, 1.0, 2.0, -1.0].map(|t| p.eval(t).unwrap())
    });
    for (j, t) in [0.5f64, 1.0, 2.0, -1.0].iter().enumerate() {
        let col: Vec<f64> = values.iter().map(|v| v[j]).collect();
        let (_, var) = mean_var(&col);
        let ratio = var / t.abs();
        assert!((0.85..=1.15).contains(&ratio), "t = {t}: var {var}");
    }
}

#[test]
fn increments_are_uncorrelated() {
    let p = WienerPath::sample(3, -64.0, 64.0, H).unwrap();
    let inc: Vec<f64> = p.values().windows(2).map(|w| w[1] - w[0]).collect();
    let (_, var) = mean_var(&inc);
    assert!((var / H - 1.0).abs() < 0.02, "increment variance {var}");
    let n = inc.len() - 1;
    let lag1 = (0..n).map(|i| inc[i] * inc[i + 1]).sum::<f64>() / n as f64 / var;
    // 131k pairs: the standard error of the correlation is about 0.003.
    assert!(lag1.abs() < 0.015, "lag-one correlation {lag1}");
}

#[test]
fn ou_time_average_variance() {
    // ξ solves dξ = −ξ/δ dt + dW/δ, whose stationary variance is 1/(2δ).
    let delta = 0.1;
    let noise = NoiseKind::ou(delta).unwrap();
    for seed in [1, 2, 3] {
        let p = WienerPath::sample(seed, -25.0, 20.0, 2.5e-4).unwrap();
        let lo = p.index_of(-20.0).unwrap();
        let hi = p.index_of(20.0).unwrap();
        let z = noise.track(&p, lo, hi).unwrap();
        let (_, var) = mean_var(&z.values);
        assert!((var / 5.0 - 1.0).abs() < 0.2, "seed {seed}: variance {var}");
    }
}

#[test]
fn noises_are_stationary_in_law() {
    let seeds: Vec<u64> = (0..600).collect();
    for v in NoiseVariant::ALL {
        let noise = NoiseKind::new(v, 0.125).unwrap();
        let pairs = Pool::default().map(&seeds, |&s| {
            let p = WienerPath::sample(s, -6.0, 2.0, H).unwrap();
            (noise.eval(&p, 0.0).unwrap(), noise.eval(&p, 1.0).unwrap())
        });
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        let n = seeds.len() as f64;
        // Welch statistic; 600 samples put it in the normal regime.
        let z = (ma - mb) / (va / n + vb / n).sqrt();
        assert!(z.abs() < 2.576, "{}: z = {z}", v.name());
        let ratio = va / vb;
        assert!((0.75..1.33).contains(&ratio), "{}: variance ratio {ratio}", v.name());
    }
}

#[test]
fn ou_matches_its_langevin_recursion() {
    // For a path linear on each grid cell, dξ = −ξ/δ dt + dω/δ integrates
    // exactly to ξ' = e^{−h/δ}ξ + (1 − e^{−h/δ})·Δω/h.
    let h = 2.5e-4;
    for delta in [0.05, 0.1, 0.25] {
        let noise = NoiseKind::ou(delta).unwrap();
        let p = WienerPath::sample(9, -12.0, 2.0, h).unwrap();
        let lo = p.index_of(-1.0).unwrap();
        let hi = p.index_of(2.0).unwrap();
        let z = noise.track(&p, lo, hi).unwrap();
        let decay = (-h / delta).exp();
        let v = p.values();
        let mut xi = z.at(lo);
        let mut worst = 0.0f64;
        for i in lo..hi {
            xi = decay * xi + (1.0 - decay) * (v[i + 1] - v[i]) / h;
            worst = worst.max((xi - z.at(i + 1)).abs());
        }
        let sd = (0.5 / delta).sqrt();
        assert!(worst < 1e-3 * sd, "delta {delta}: {worst}");
    }
}
