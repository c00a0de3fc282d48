use trijunction::functional::GConfig;
use trijunction::geometry::{Point, SourceJunction, TargetTriangle};
use trijunction::optimizer::{brute_force_p_grid, minimize, steiner_initial, OptimizationSpec};

fn main() {
    let t = TargetTriangle::new([
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.5, 3f64.sqrt() / 2.0),
    ])
    .unwrap();
    let source = SourceJunction::new([1.0, 1.0, 1.0], 1.0).unwrap();
    let spec = OptimizationSpec::default();

    let t0 = std::time::Instant::now();
    let result = minimize(&spec, &source, &t).unwrap();
    let dt = t0.elapsed();
    let bary = t.barycenter();
    println!(
        "best p = ({:.6}, {:.6})  dist to barycenter {:.2e}",
        result.best_connection.triple_point.x,
        result.best_connection.triple_point.y,
        result.best_connection.triple_point.dist(bary)
    );
    println!(
        "G = {:.10}  areas = {:?}",
        result.best_eval.g_total, result.best_eval.areas
    );
    println!(
        "candidates {}  skipped {}  cache hits {}  time {dt:?}",
        result.candidates_evaluated, result.candidates_skipped, result.cache_hits
    );
    let st = steiner_initial(&t);
    let st_eval = trijunction::functional::evaluate(&st, &source, &t, &spec.eval).unwrap();
    println!("steiner G = {:.10}  best <= steiner + 1e-9: {}", st_eval.g_total,
        result.best_eval.g_total <= st_eval.g_total + 1e-9);

    let t1 = std::time::Instant::now();
    let cfg33 = GConfig { n_s: 32, n_t: 32, ..Default::default() };
    let (bp, bg) = brute_force_p_grid(21, &source, &t, &cfg33).unwrap();
    println!("brute 21 @32: best p ({:.4},{:.4}) G {:.8}  time {:?}", bp.x, bp.y, bg, t1.elapsed());
}
