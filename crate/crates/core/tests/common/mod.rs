#![allow(dead_code)]

use hle_core::params::{existence_status, jl_status, Existence, DEFAULT_EQ_TOL};
use hle_core::SystemParams;
use proptest::prelude::*;

/// Any valid parameter set.
pub fn any_params() -> impl Strategy<Value = SystemParams> {
    (3u32..=30, 0.0f64..4.0, 0.0f64..4.0, 1.0f64..40.0, 1.0f64..40.0)
        .prop_filter_map("p q > 1", |(n, k, l, p, q)| SystemParams::new(n, k, l, p, q).ok())
}

/// Parameter sets with strict existence and strict JL.
pub fn stable_params() -> impl Strategy<Value = SystemParams> {
    (11u32..=30, 0.0f64..3.0, 0.0f64..3.0, 3.0f64..40.0, 3.0f64..40.0).prop_filter_map(
        "existence and JL strict",
        |(n, k, l, p, q)| {
            let params = SystemParams::new(n, k, l, p, q).ok()?;
            let ok = existence_status(&params) == Existence::Strict
                && jl_status(&params, DEFAULT_EQ_TOL) == hle_core::params::JlStatus::Strict;
            ok.then_some(params)
        },
    )
}

/// Plain bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Direct radial Laplacian `f'' + (n-1) f'/r` by central differences.
pub fn fd_laplacian(f: impl Fn(f64) -> f64, r: f64, n: f64, h: f64) -> f64 {
    let (fm, f0, fp) = (f(r - h), f(r), f(r + h));
    (fp - 2.0 * f0 + fm) / (h * h) + (n - 1.0) / r * (fp - fm) / (2.0 * h)
}
