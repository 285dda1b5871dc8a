//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's own special functions.

use std::f64::consts::FRAC_PI_2;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Two-tailed Student t tail probability by quadrature of the density.
///
/// With x = sqrt(df)·tan θ the density becomes proportional to
/// cos^(df−1) θ on [0, π/2), so both the tail and the normalizer are
/// integrals of a bounded smooth function.
pub fn t_two_tailed_quadrature(t: f64, df: f64) -> f64 {
    let k = df - 1.0;
    let f = |th: f64| th.cos().powf(k);
    let theta = (t.abs() / df.sqrt()).atan();
    let total = simpson(f, 0.0, FRAC_PI_2, 200_000);
    let tail = simpson(f, theta, FRAC_PI_2, 200_000);
    tail / total
}

/// p-value for Pearson r on n pairs, through the t statistic.
pub fn pearson_p_quadrature(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    t_two_tailed_quadrature(t, df)
}
