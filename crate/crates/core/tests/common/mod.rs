//! Independent numerical oracles shared by the integration tests. Nothing
//! here touches jets: everything is plain `f64` evaluation plus finite
//! differences and explicit ODE integration.
#![allow(dead_code)]

use kvloc_core::calculus::FormField;
use kvloc_core::form::FormValue;
use kvloc_core::geometry::{metric_at, Scenario, VectorField};
use kvloc_core::C64;
use nalgebra::DMatrix;

/// Sixth-order central first-derivative stencil: offsets ±1, ±2, ±3.
pub const STENCIL: [(f64, f64); 6] =
    [(-3.0, -1.0), (-2.0, 9.0), (-1.0, -45.0), (1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
pub const JACOBIAN_STEP: f64 = 5e-3;
pub const FLOW_STEP: f64 = 1e-2;

/// Classical RK4 integration of the flow of `v` for time `t`.
pub fn flow(v: &VectorField, p: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let mut x = p.to_vec();
    let axpy = |x: &[f64], a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + a * k).collect() };
    for _ in 0..steps {
        let k1 = v.at(&x);
        let k2 = v.at(&axpy(&x, h / 2.0, &k1));
        let k3 = v.at(&axpy(&x, h / 2.0, &k2));
        let k4 = v.at(&axpy(&x, h, &k3));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

/// Jacobian `∂φ_t^i/∂x^j` of the time-`t` flow by central differences.
pub fn flow_jacobian(v: &VectorField, p: &[f64], t: f64, steps: usize) -> DMatrix<f64> {
    let n = p.len();
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        for &(k, w) in &STENCIL {
            let mut q = p.to_vec();
            q[j] += k * JACOBIAN_STEP;
            let y = flow(v, &q, t, steps);
            for i in 0..n {
                jac[(i, j)] += w * y[i] / (60.0 * JACOBIAN_STEP);
            }
        }
    }
    jac
}

fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.determinant()
    }
}

fn axes(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// `(φ_t^* ω)_p` assembled from minors of the flow Jacobian.
pub fn pullback(form: &FormField, v: &VectorField, p: &[f64], t: f64) -> FormValue {
    let n = p.len();
    let steps = 16;
    let q = flow(v, p, t, steps);
    let jac = flow_jacobian(v, p, t, steps);
    let w = form.value(&q).expect("oracle points are regular");
    let mut out = FormValue::real_zero(n);
    for src in 0u32..(1 << n) {
        let cols = axes(src, n);
        let mut acc = C64::new(0.0, 0.0);
        for dst in 0u32..(1 << n) {
            if dst.count_ones() != src.count_ones() {
                continue;
            }
            let coeff = *w.get(dst);
            if coeff == C64::new(0.0, 0.0) {
                continue;
            }
            let rows = axes(dst, n);
            let minor = DMatrix::from_fn(rows.len(), cols.len(), |a, b| jac[(rows[a], cols[b])]);
            acc += coeff * det(&minor);
        }
        out.set(src, acc);
    }
    out
}

/// `L_V ω` at `p` as `d/dt φ_t^* ω |_{t=0}` with the sixth-order stencil.
pub fn lie_by_flow(form: &FormField, v: &VectorField, p: &[f64]) -> FormValue {
    let n = p.len();
    let mut out = FormValue::real_zero(n);
    for &(k, w) in &STENCIL {
        let pb = pullback(form, v, p, k * FLOW_STEP);
        for mask in 0u32..(1 << n) {
            let cur = *out.get(mask);
            out.set(mask, cur + pb.get(mask) * (w / (60.0 * FLOW_STEP)));
        }
    }
    out
}

/// Christoffel symbols from central differences of the metric, step `h`.
pub fn christoffel_fd(s: &Scenario, p: &[f64], h: f64) -> Vec<f64> {
    let n = p.len();
    let g = metric_at(s, p).unwrap();
    let ginv = g.clone().try_inverse().unwrap();
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            (metric_at(s, &a).unwrap() - metric_at(s, &b).unwrap()) / (2.0 * h)
        })
        .collect();
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += 0.5 * ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]);
                }
                out[k * n * n + i * n + j] = acc;
            }
        }
    }
    out
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> C64, a: f64, b: f64, m: usize) -> C64 {
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + i as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// `2π (e^a − e^{−a}) / a`, the integral of `e^{−a cos θ}` over the round sphere.
pub fn sphere_dh(a: C64) -> C64 {
    2.0 * std::f64::consts::PI * (a.exp() - (-a).exp()) / a
}
