//! Regenerate `constants.txt` (the repository's high-precision
//! fourth-moment inputs) from the library's own routes:
//!
//! * `gamma_V8`, `gamma_V7`: deterministic Fourier-side quadratures,
//! * `T_D`: 3d kernel cubature,
//! * `gamma_V5`: long sector Monte Carlo (the only route it has),
//! * `zeta_f`: the trigamma closed form.
//!
//! The file is written to standard out; diagnostics go to standard
//! error.  Usage:
//!
//! ```text
//! cargo run --release --example gen_constants [V5_SAMPLES [SEED]] > constants.txt
//! ```

use silt::integrals::{gamma_v, gamma_v7_by_quadrature, gamma_v8_by_quadrature, t_d, VGraph};
use silt::specfun::zeta_f;
use std::time::Instant;

fn main() {
    let mut args = std::env::args().skip(1);
    let v5_samples: u64 = args
        .next()
        .map(|s| s.parse().expect("V5_SAMPLES must be an integer"))
        .unwrap_or(1 << 28);
    let seed: u64 = args
        .next()
        .map(|s| s.parse().expect("SEED must be an integer"))
        .unwrap_or(2024);

    let t0 = Instant::now();
    let v8 = gamma_v8_by_quadrature(1e-12).expect("V8 quadrature");
    eprintln!(
        "gamma_V8 = {} +- {:.1e}  ({} evaluations, {:.1} s)",
        v8.value,
        v8.error,
        v8.evaluations,
        t0.elapsed().as_secs_f64()
    );

    let t1 = Instant::now();
    let v7 = gamma_v7_by_quadrature(1e-10).expect("V7 quadrature");
    eprintln!(
        "gamma_V7 = {} +- {:.1e}  ({} evaluations, {:.1} s)",
        v7.value,
        v7.error,
        v7.evaluations,
        t1.elapsed().as_secs_f64()
    );

    let t2 = Instant::now();
    let td = t_d(1e-5).expect("T_D cubature");
    eprintln!(
        "T_D = {} +- {:.1e}  ({} evaluations, {:.1} s)",
        td.value,
        td.error,
        td.evaluations,
        t2.elapsed().as_secs_f64()
    );

    let t3 = Instant::now();
    let v5 = gamma_v(VGraph::V5, v5_samples, seed).expect("V5 sector MC");
    eprintln!(
        "gamma_V5 = {} +- {:.1e}  ({} samples, {:.1} s)",
        v5.value,
        v5.error,
        v5_samples,
        t3.elapsed().as_secs_f64()
    );

    println!("# Fourth-moment inputs, regenerated by:");
    println!("#   cargo run --release --example gen_constants {v5_samples} {seed}");
    println!("# gamma_V8, gamma_V7: deterministic quadrature (rel tol 1e-12 / 1e-10)");
    println!(
        "# T_D: 3d cubature, rel tol 1e-5 (error bound {:.1e})",
        td.error
    );
    println!(
        "# gamma_V5: sector Monte Carlo, {v5_samples} samples, seed {seed}, sigma {:.1e}",
        v5.error
    );
    println!("gamma_V5 {}", v5.value);
    println!("gamma_V7 {}", v7.value);
    println!("gamma_V8 {}", v8.value);
    println!("T_D {}", td.value);
    println!("zeta_f {}", zeta_f());
}
