//! Minimal deterministic Nelder-Mead simplex search.

pub struct NelderMead {
    pub max_iterations: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { max_iterations: 200, f_tol: 1e-9, x_tol: 1e-10 }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` with per-coordinate initial steps `scale`.
    /// Returns (best point, best value, evaluations).
    pub fn minimize(
        &self,
        x0: &[f64],
        scale: &[f64],
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> (Vec<f64>, f64, usize) {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            f(x)
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += scale[i];
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

        const ALPHA: f64 = 1.0; // reflection
        const GAMMA: f64 = 2.0; // expansion
        const RHO: f64 = 0.5; // contraction
        const SIGMA: f64 = 0.5; // shrink

        for _ in 0..self.max_iterations {
            // order ascending by value (stable for determinism)
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
            let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
            simplex = reordered;
            values = revalues;

            let spread = values[n] - values[0];
            let width = (0..n)
                .map(|d| {
                    simplex
                        .iter()
                        .map(|x| (x[d] - simplex[0][d]).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0f64, f64::max);
            if spread.abs() <= self.f_tol && width <= self.x_tol.max(1e-14) {
                break;
            }

            // centroid of all but the worst
            let mut centroid = vec![0.0; n];
            for x in simplex.iter().take(n) {
                for d in 0..n {
                    centroid[d] += x[d] / n as f64;
                }
            }
            let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
                (0..n).map(|d| a[d] + t * (b[d] - a[d])).collect()
            };

            let reflected = lerp(&centroid, &simplex[n], -ALPHA);
            let fr = eval(&reflected, &mut evals);
            if fr < values[0] {
                let expanded = lerp(&centroid, &simplex[n], -ALPHA * GAMMA);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[n] = expanded;
                    values[n] = fe;
                } else {
                    simplex[n] = reflected;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = reflected;
                values[n] = fr;
            } else {
                let contracted = if fr < values[n] {
                    lerp(&centroid, &simplex[n], -ALPHA * RHO)
                } else {
                    lerp(&centroid, &simplex[n], RHO)
                };
                let fc = eval(&contracted, &mut evals);
                if fc < values[n].min(fr) {
                    simplex[n] = contracted;
                    values[n] = fc;
                } else {
                    // shrink toward the best
                    for i in 1..=n {
                        let shrunk = lerp(&simplex[0], &simplex[i], SIGMA);
                        simplex[i] = shrunk;
                        values[i] = eval(&simplex[i], &mut evals);
                    }
                }
            }
        }
        let mut best = 0;
        for i in 1..=n {
            if values[i] < values[best] {
                best = i;
            }
        }
        (simplex[best].clone(), values[best], evals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let nm = NelderMead { max_iterations: 400, ..Default::default() };
        let (x, v, _) = nm.minimize(&[2.0, -3.0], &[0.5, 0.5], |x| {
            (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2)
        });
        assert!(v < 1e-8);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn handles_infinite_regions() {
        // objective is infinite outside the unit disk
        let nm = NelderMead { max_iterations: 400, ..Default::default() };
        let (x, v, _) = nm.minimize(&[0.4, 0.4], &[0.2, 0.2], |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 > 1.0 {
                f64::INFINITY
            } else {
                (x[0] - 0.2).powi(2) + (x[1] - 0.1).powi(2)
            }
        });
        assert!(v < 1e-7);
        assert!((x[0] - 0.2).abs() < 1e-3 && (x[1] - 0.1).abs() < 1e-3);
    }
}
