use trijunction::functional::{evaluate_with_fields, GConfig};
use trijunction::geometry::{Point, SourceJunction, TargetTriangle};
use trijunction::optimizer::steiner_initial;
use trijunction::verifier::{convergence_ladder, strip_area, build_geometry};

fn main() {
    let t = TargetTriangle::new([
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5, 3f64.sqrt() / 2.0),
    ])
    .unwrap();
    let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
    let conn = steiner_initial(&t);
    let angles = [2.0 * std::f64::consts::PI / 3.0; 3];
    for grid in [64usize, 128] {
        let cfg = GConfig { n_s: grid, n_t: grid, ..Default::default() };
        let t0 = std::time::Instant::now();
        let (eval, fields) = evaluate_with_fields(&conn, &source, &t, &cfg).unwrap();
        let ladder = convergence_ladder(&eval, &fields, &source, angles, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
        println!("grid {grid}: G = {:.8}, target = {:.8}, slope = {:.3}, fitted C = {:.4} ({:?})",
            eval.g_total, ladder.target, ladder.slope, ladder.fitted_c, t0.elapsed());
        for p in &ladder.points {
            println!("  eps {:.4}  value {:.10}  err {:.3e}  bound {:.3e}", p.epsilon, p.value, p.error, p.bound);
        }
        // strip limit: per-side strip area -> discrete area
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let geom = build_geometry(&source, angles, eps).unwrap();
            let sa = strip_area(&geom, trijunction::geometry::Side::S12, &fields[0]).unwrap();
            println!("  eps {eps:.4}: strip12 {:.8}  A12 {:.8}  |diff| {:.3e}", sa, eval.areas[0], (sa - eval.areas[0]).abs());
        }
    }
}
