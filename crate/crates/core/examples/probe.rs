use spikeglass_core::{
    detection_experiment, estimate_tv_multi, fluctuation_scan, mmse_exact, nishimori_residual,
    overlap_moment_exact, Prior,
};
use std::time::Instant;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn main() {
    let priors = [Prior::rademacher()];
    let n_list = [6usize, 8, 10, 12, 14];

    let t0 = Instant::now();
    let mut lx = Vec::new();
    let mut lr2 = Vec::new();
    for &n in &n_list {
        let est = overlap_moment_exact(n, 3, &priors, &[0.5], 1, 150, 11).unwrap();
        lx.push((n as f64).ln());
        lr2.push(est[0].value.ln());
        println!("n={n}: E<R^2> = {:.5} +- {:.5}", est[0].value, est[0].stderr);
    }
    println!("overlap slope = {:.3} [{:?}]", slope(&lx, &lr2), t0.elapsed());

    let t0 = Instant::now();
    let rows = fluctuation_scan(&n_list, 3, &priors[0], 0.5, 150, 13).unwrap();
    let lv: Vec<f64> = rows.iter().map(|r| r.variance.ln()).collect();
    for r in &rows {
        println!("n={}: var F = {:.3e}", r.n, r.variance);
    }
    println!("fluctuation slope = {:.3} [{:?}]", slope(&lx, &lv), t0.elapsed());

    let t0 = Instant::now();
    for &n in &[6usize, 8, 10, 12] {
        let rep = detection_experiment(n, 3, &priors, &[2.5], 150, 17).unwrap();
        println!(
            "detect n={n}: type1 = {:.3}, type2 = {:.3}, total = {:.3}",
            rep.type1, rep.type2, rep.total_error
        );
    }
    println!("detect [{:?}]", t0.elapsed());

    let t0 = Instant::now();
    for beta in [0.5, 2.5] {
        let est = mmse_exact(8, 3, &priors, &[beta], 1.0, 150, 19).unwrap();
        println!(
            "mmse beta={beta}: ratio = {:.4} +- {:.4}",
            est.mmse / est.dmse,
            est.stderr / est.dmse
        );
    }
    println!("mmse [{:?}]", t0.elapsed());

    let t0 = Instant::now();
    let rep = nishimori_residual(5, 3, &priors, &[1.0], 0.7, 500, 23).unwrap();
    println!("nishimori z = {:.2} (lhs {:.4}, rhs {:.4}) [{:?}]", rep.z, rep.lhs, rep.rhs, t0.elapsed());
    let both = [Prior::rademacher(), Prior::rademacher()];
    let rep = nishimori_residual(4, 3, &both, &[1.0, 0.8], 0.6, 500, 29).unwrap();
    for pair in &rep.pairs {
        println!(
            "  k=2 pair ({}, {}): lhs {:.4} rhs {:.4} z {:.2}",
            pair.r, pair.r_prime, pair.lhs, pair.rhs, pair.z
        );
    }

    let t0 = Instant::now();
    let decay: Vec<Vec<f64>> = vec![vec![0.5]];
    for &n in &[6usize, 8, 10, 12] {
        let est = estimate_tv_multi(n, 3, &priors, &decay, 800, 31).unwrap();
        println!("tv(0.5) n={n}: {:.4} +- {:.4}", est[0].value, est[0].stderr);
    }
    println!("tv decay [{:?}]", t0.elapsed());
}
