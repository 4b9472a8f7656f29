//! Scratch harness (not part of the deliverable; deleted before release).

use mompca_core::matrix::DataMatrix;
use mompca_core::metrics::max_principal_angle;
use mompca_core::mompca::{fit, FitConfig};
use mompca_core::rng::CounterRng;
use mompca_core::{gram_schmidt_orthonormalize, Basis};

fn separable_case() -> (DataMatrix<f64>, Vec<bool>, Basis<f64>) {
    let p = 6;
    let mut rng = CounterRng::new(2024, 1);
    let span_cols: Vec<f64> = (0..p * 6).map(|_| rng.next_gaussian()).collect();
    let frame: Basis<f64> = gram_schmidt_orthonormalize(p, 6, &span_cols).unwrap();

    let mut rows = Vec::with_capacity(1000);
    let mut truth = vec![false; 1000];
    for i in 0..1000 {
        let mut row = vec![0.0; p];
        for (k, scale) in [(0usize, 3.0), (1, 2.0), (2, 1.0)] {
            let c = scale * rng.next_gaussian();
            for (r, &b) in row.iter_mut().zip(frame.column(k)) {
                *r += c * b;
            }
        }
        if i % 20 == 19 {
            truth[i] = true;
            for k in 3..6 {
                let c = 20.0 + 5.0 * rng.next_f64();
                let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
                for (r, &b) in row.iter_mut().zip(frame.column(k)) {
                    *r += sign * c * b;
                }
            }
        }
        rows.push(row);
    }
    let clean3 = gram_schmidt_orthonormalize(
        p,
        3,
        &frame.columns_flat()[..p * 3],
    )
    .unwrap();
    (DataMatrix::from_rows(&rows).unwrap(), truth, clean3)
}

fn main() {
    let (x, _truth, clean) = separable_case();
    for l in [20usize, 60, 100, 160, 200] {
        let model = fit(&x, &FitConfig::new(3, l).with_seed(9)).unwrap();
        let angle = max_principal_angle(model.basis(), &clean).unwrap();
        let r = model.report();
        println!(
            "L={l:4} iters={:3} converged={} eta={:.3e} init_obj={:.3e} final={:.3e} best={:.3e} angle={:.4}",
            r.iterations_run,
            r.converged,
            model.resolved_eta(),
            r.initial_objective().unwrap(),
            r.final_objective().unwrap(),
            r.best_objective().unwrap(),
            angle
        );
    }
}
