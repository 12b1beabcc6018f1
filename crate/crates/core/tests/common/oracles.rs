//! Direct reimplementations of the regression formulas, written for
//! clarity rather than speed.

use std::collections::HashMap;

fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

fn pop_std(x: &[f64]) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m).powi(2);
    }
    (s / x.len() as f64).sqrt()
}

pub fn mse(p: &[f64], t: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += (p[i] - t[i]).powi(2);
    }
    s / p.len() as f64
}

pub fn mae(p: &[f64], t: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        s += (p[i] - t[i]).abs();
    }
    s / p.len() as f64
}

pub fn rmse(p: &[f64], t: &[f64]) -> f64 {
    mse(p, t).sqrt()
}

pub fn max_error(p: &[f64], t: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..p.len() {
        let e = (p[i] - t[i]).abs();
        if e > worst {
            worst = e;
        }
    }
    worst
}

pub fn stde(p: &[f64], t: &[f64]) -> f64 {
    (pop_std(t) - pop_std(p)).abs()
}

/// Piecewise form: flat at `a` until `t/T = b`, exponential decay after.
pub fn weight_p(t: u64, total: u64, a: f64, b: f64, c: f64) -> f64 {
    let x = t as f64 / total as f64;
    if x <= b {
        a
    } else {
        a * (-c * (x - b)).exp()
    }
}

pub fn combined(p: &[f64], t: &[f64], weight: f64) -> f64 {
    weight * stde(p, t) + (1.0 - weight) * mse(p, t)
}

/// `1 − SS_res / SS` with `SS` around the mean of `centre`.
pub fn r2(p: &[f64], t: &[f64], centre: &[f64]) -> f64 {
    let m = mean(centre);
    let mut ss = 0.0;
    for v in centre {
        ss += (v - m).powi(2);
    }
    1.0 - mse(p, t) * p.len() as f64 / ss
}

/// Cosine of two bags of words given as already-split term lists.
pub fn cosine(a: &[&str], b: &[&str]) -> f64 {
    let count = |terms: &[&str]| {
        let mut m: HashMap<String, f64> = HashMap::new();
        for t in terms {
            *m.entry(t.to_string()).or_default() += 1.0;
        }
        m
    };
    let (ca, cb) = (count(a), count(b));
    let dot: f64 = ca.iter().map(|(k, v)| v * cb.get(k).copied().unwrap_or(0.0)).sum();
    let norm = |m: &HashMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    dot / (norm(&ca) * norm(&cb))
}

pub fn close(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs().max(1.0)
}
