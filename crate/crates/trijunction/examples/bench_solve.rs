use trijunction::geometry::{Side, SideFunction};
use trijunction::plateau::{solve, solve_nested, solve_with_init, PlateauProblem, SolverConfig};

fn main() {
    let cfg = SolverConfig { newton_tol: 1e-10, ..Default::default() };
    for cells in [32usize, 64, 128, 256] {
        let tent = SideFunction::new(Side::S12, vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.0], 0.5).unwrap();
        let p = PlateauProblem::new(tent, 1.0, cells, cells).unwrap();
        let t0 = std::time::Instant::now();
        let f = solve(&p, &cfg).unwrap();
        let d0 = t0.elapsed();
        let t1 = std::time::Instant::now();
        let g = solve_nested(&p, &cfg).unwrap();
        let d1 = t1.elapsed();
        let diff = f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        println!(
            "cells {cells:4}  area {:.10}  direct {:?} ({} its)  nested {:?} ({} its)  diff {:.1e}",
            f.area(), d0, f.newton_iterations, d1, g.newton_iterations, diff
        );
        // warm-start re-solve with perturbed data (criterion-4 pattern)
        let tent2 = SideFunction::new(Side::S12, vec![0.0, 0.5, 1.0], vec![0.0, 0.51, 0.0], 0.5).unwrap();
        let p2 = PlateauProblem::new(tent2, 1.0, cells, cells).unwrap();
        let t2 = std::time::Instant::now();
        let h = solve_with_init(&p2, &cfg, Some(&g.values)).unwrap();
        println!("      perturbed warm resolve {:?} ({} its) area {:.10}", t2.elapsed(), h.newton_iterations, h.area());
    }
}
