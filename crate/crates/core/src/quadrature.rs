//! Quadrature kernels shared by the noise, conjugation and radius code.
//!
//! Everything here works on uniformly spaced samples. History integrals of
//! the form `∫_{-L}^0 e^{rate·s} g(t+s) ds` are evaluated with the trapezoid
//! rule, either pointwise ([`exp_history_direct`]) or for a whole series at
//! once ([`exp_history_series`]); both compute the same weighted sum.

/// `h Σ_{j=0}^{J} w_j e^{-rate·j·h} series[i-j]` with trapezoid weights
/// (`w_0 = w_J = 1/2`). Requires `i >= j_max`.
pub fn exp_history_direct(series: &[f64], i: usize, h: f64, rate: f64, j_max: usize) -> f64 {
    debug_assert!(i >= j_max);
    let mut acc = 0.5 * series[i];
    for j in 1..j_max {
        acc += (-rate * j as f64 * h).exp() * series[i - j];
    }
    if j_max > 0 {
        acc += 0.5 * (-rate * j_max as f64 * h).exp() * series[i - j_max];
    } else {
        acc = 0.0;
    }
    h * acc
}

/// [`exp_history_direct`] for every admissible index of `series`.
///
/// Entry `k` of the result belongs to `series[k + j_max]`. Uses the running
/// exponential sum `E_i = s_i + r E_{i-1} - r^{J+1} s_{i-J-1}`, which
/// reproduces the direct sum to round-off since `r < 1` damps errors.
pub fn exp_history_series(series: &[f64], h: f64, rate: f64, j_max: usize) -> Vec<f64> {
    if series.len() <= j_max {
        return Vec::new();
    }
    if j_max == 0 {
        return vec![0.0; series.len()];
    }
    let r = (-rate * h).exp();
    let r_j = (-rate * j_max as f64 * h).exp();
    let r_j1 = r_j * r;
    let start = j_max;
    let mut e = 0.0;
    for j in 0..=j_max {
        e += (-rate * j as f64 * h).exp() * series[start - j];
    }
    let mut out = Vec::with_capacity(series.len() - j_max);
    out.push(h * (e - 0.5 * series[start] - 0.5 * r_j * series[start - j_max]));
    for i in (start + 1)..series.len() {
        e = series[i] + r * e - r_j1 * series[i - 1 - j_max];
        out.push(h * (e - 0.5 * series[i] - 0.5 * r_j * series[i - j_max]));
    }
    out
}

/// Trapezoid weight sum `h Σ w_j e^{-rate·j·h}`, i.e. the truncated
/// quadrature of `∫_{-L}^0 e^{rate·s} ds` on the same nodes.
pub fn exp_weight_sum(h: f64, rate: f64, j_max: usize) -> f64 {
    if j_max == 0 {
        return 0.0;
    }
    let mut acc = 0.5;
    for j in 1..j_max {
        acc += (-rate * j as f64 * h).exp();
    }
    acc += 0.5 * (-rate * j_max as f64 * h).exp();
    h * acc
}

/// Running trapezoid integral: `out[k] = ∫_{x_0}^{x_k} g` for samples `g`
/// with spacing `h`; `out[0] = 0`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    if values.is_empty() {
        return out;
    }
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Plain trapezoid rule on uniform samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * values[0] + values[1..n - 1].iter().sum::<f64>() + 0.5 * values[n - 1]),
    }
}

/// Product trapezoid rule for `∫_{s_0}^{s_0 + n h} e^{γ s} g(s) ds` where
/// `g` is sampled at `s_0 + j h` and taken piecewise linear. The exponential
/// weight is integrated exactly on every cell, so the rule is exact for
/// piecewise-linear `g` (in particular for constants).
pub fn product_trapezoid_exp(gamma: f64, s0: f64, h: f64, g: &[f64]) -> f64 {
    if g.len() < 2 {
        return 0.0;
    }
    // On [a, a+h]: ∫ e^{γs} ds = e^{γa} I0, ∫ e^{γs} (s-a)/h ds = e^{γa} I1.
    let gh = gamma * h;
    let (i0, i1) = if gh.abs() < 1e-8 {
        (h * (1.0 + 0.5 * gh), h * (0.5 + gh / 3.0))
    } else {
        let em1 = gh.exp_m1();
        let i0 = em1 / gamma;
        let i1 = ((gh - 1.0) * em1 + gh) / (gamma * gh);
        (i0, i1)
    };
    let mut acc = 0.0;
    for (j, w) in g.windows(2).enumerate() {
        let a = s0 + j as f64 * h;
        let ea = (gamma * a).exp();
        acc += ea * (w[0] * (i0 - i1) + w[1] * i1);
    }
    acc
}

/// Adaptive Simpson quadrature of a smooth scalar function.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}
