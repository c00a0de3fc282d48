//! Discrete area functional on a rectangle lattice: per cell, the gradient is
//! the average of the one-sided differences at the four corners, and the cell
//! contributes h_s*h_t*sqrt(1 + p^2 + q^2). The total is a smooth convex
//! function of the nodal values, minimized exactly by the solver.

/// Uniform rectangle lattice: n_s x n_t cells, (n_s+1) x (n_t+1) nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub n_s: usize,
    pub n_t: usize,
    pub h_s: f64,
    pub h_t: f64,
}

impl Lattice {
    pub fn new(width: f64, height: f64, n_s: usize, n_t: usize) -> Self {
        Lattice { n_s, n_t, h_s: width / n_s as f64, h_t: height / n_t as f64 }
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize) -> usize {
        b * (self.n_s + 1) + a
    }

    pub fn node_count(&self) -> usize {
        (self.n_s + 1) * (self.n_t + 1)
    }

    pub fn cell_area(&self) -> f64 {
        self.h_s * self.h_t
    }
}

/// Cell gradient (p, q) from the four corner values.
#[inline]
fn cell_gradient(l: &Lattice, f: &[f64], a: usize, b: usize) -> (f64, f64) {
    let f00 = f[l.idx(a, b)];
    let f10 = f[l.idx(a + 1, b)];
    let f01 = f[l.idx(a, b + 1)];
    let f11 = f[l.idx(a + 1, b + 1)];
    let p = (f10 - f00 + f11 - f01) / (2.0 * l.h_s);
    let q = (f01 - f00 + f11 - f10) / (2.0 * l.h_t);
    (p, q)
}

/// Total discrete area of the graph over the lattice.
pub fn discrete_area(l: &Lattice, f: &[f64]) -> f64 {
    let area = l.cell_area();
    let mut acc = 0.0;
    for b in 0..l.n_t {
        for a in 0..l.n_s {
            let (p, q) = cell_gradient(l, f, a, b);
            acc += area * (1.0 + p * p + q * q).sqrt();
        }
    }
    acc
}

/// Gradient of the discrete area with respect to every nodal value.
pub fn energy_gradient(l: &Lattice, f: &[f64], grad: &mut [f64]) {
    grad.fill(0.0);
    let area = l.cell_area();
    let cs = 1.0 / (2.0 * l.h_s);
    let ct = 1.0 / (2.0 * l.h_t);
    for b in 0..l.n_t {
        for a in 0..l.n_s {
            let (p, q) = cell_gradient(l, f, a, b);
            let w = (1.0 + p * p + q * q).sqrt();
            let gp = area * p / w;
            let gq = area * q / w;
            grad[l.idx(a, b)] += -gp * cs - gq * ct;
            grad[l.idx(a + 1, b)] += gp * cs - gq * ct;
            grad[l.idx(a, b + 1)] += -gp * cs + gq * ct;
            grad[l.idx(a + 1, b + 1)] += gp * cs + gq * ct;
        }
    }
}

/// 9-point stencil offsets; k = (db+1)*3 + (da+1). Offsets 0..4 are the
/// lexicographically lower neighbors plus the diagonal at k = 4.
pub const STENCIL_OFFSETS: [(isize, isize); 9] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (0, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Sparse SPD Hessian of the discrete area restricted to free nodes,
/// stored as a 9-point stencil per free node.
pub struct StencilMatrix {
    /// free index of each stencil neighbor, -1 when fixed or outside
    pub neighbors: Vec<[i32; 9]>,
    pub coeffs: Vec<[f64; 9]>,
}

/// Marks which nodes are unknowns. `free_of_node[node] = -1` for Dirichlet
/// nodes, otherwise the contiguous free index.
pub struct FreeMap {
    pub free_of_node: Vec<i32>,
    pub node_of_free: Vec<usize>,
}

impl FreeMap {
    pub fn new(l: &Lattice, is_free: impl Fn(usize, usize) -> bool) -> Self {
        let mut free_of_node = vec![-1i32; l.node_count()];
        let mut node_of_free = Vec::new();
        for b in 0..=l.n_t {
            for a in 0..=l.n_s {
                if is_free(a, b) {
                    free_of_node[l.idx(a, b)] = node_of_free.len() as i32;
                    node_of_free.push(l.idx(a, b));
                }
            }
        }
        FreeMap { free_of_node, node_of_free }
    }

    pub fn free_count(&self) -> usize {
        self.node_of_free.len()
    }
}

/// Assembles the Hessian stencil at the current iterate.
pub fn assemble_hessian(l: &Lattice, f: &[f64], map: &FreeMap, out: &mut StencilMatrix) {
    let nf = map.free_count();
    out.neighbors.clear();
    out.coeffs.clear();
    out.neighbors.resize(nf, [-1i32; 9]);
    out.coeffs.resize(nf, [0.0; 9]);

    // neighbor indices are static for the lattice
    let ns1 = l.n_s as isize + 1;
    for fi in 0..nf {
        let node = map.node_of_free[fi];
        let a = (node % (l.n_s + 1)) as isize;
        let b = (node / (l.n_s + 1)) as isize;
        for (k, &(da, db)) in STENCIL_OFFSETS.iter().enumerate() {
            let (na, nb) = (a + da, b + db);
            if na < 0 || nb < 0 || na > l.n_s as isize || nb > l.n_t as isize {
                continue;
            }
            out.neighbors[fi][k] = map.free_of_node[(nb * ns1 + na) as usize];
        }
    }

    let area = l.cell_area();
    let cs = 1.0 / (2.0 * l.h_s);
    let ct = 1.0 / (2.0 * l.h_t);
    // per-corner weights of p and q within a cell, corner order 00,10,01,11
    let cp = [-cs, cs, -cs, cs];
    let cq = [-ct, -ct, ct, ct];
    for b in 0..l.n_t {
        for a in 0..l.n_s {
            let (p, q) = cell_gradient(l, f, a, b);
            let w2 = 1.0 + p * p + q * q;
            let w3 = w2 * w2.sqrt();
            let hpp = area * (1.0 + q * q) / w3;
            let hqq = area * (1.0 + p * p) / w3;
            let hpq = area * (-p * q) / w3;
            let corners = [
                (a, b),
                (a + 1, b),
                (a, b + 1),
                (a + 1, b + 1),
            ];
            for (u, &(ua, ub)) in corners.iter().enumerate() {
                let fu = map.free_of_node[l.idx(ua, ub)];
                if fu < 0 {
                    continue;
                }
                for (v, &(va, vb)) in corners.iter().enumerate() {
                    if map.free_of_node[l.idx(va, vb)] < 0 {
                        continue;
                    }
                    let da = va as isize - ua as isize;
                    let db = vb as isize - ub as isize;
                    let k = ((db + 1) * 3 + (da + 1)) as usize;
                    let h = hpp * cp[u] * cp[v] + hqq * cq[u] * cq[v]
                        + hpq * (cp[u] * cq[v] + cq[u] * cp[v]);
                    out.coeffs[fu as usize][k] += h;
                }
            }
        }
    }
}

impl StencilMatrix {
    pub fn new() -> Self {
        StencilMatrix { neighbors: Vec::new(), coeffs: Vec::new() }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, (nbs, cfs)) in self.neighbors.iter().zip(self.coeffs.iter()).enumerate() {
            let mut acc = 0.0;
            for k in 0..9 {
                let j = nbs[k];
                if j >= 0 {
                    acc += cfs[k] * x[j as usize];
                }
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self, d: &mut Vec<f64>) {
        d.clear();
        d.extend(self.coeffs.iter().map(|c| c[4]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_area_is_exact() {
        let l = Lattice::new(1.0, 1.0, 128, 128);
        let f = vec![0.0; l.node_count()];
        assert_eq!(discrete_area(&l, &f), 1.0);
    }

    #[test]
    fn affine_area_is_sqrt2() {
        let l = Lattice::new(1.0, 1.0, 64, 64);
        let mut f = vec![0.0; l.node_count()];
        for b in 0..=l.n_t {
            for a in 0..=l.n_s {
                f[l.idx(a, b)] = a as f64 * l.h_s;
            }
        }
        assert!((discrete_area(&l, &f) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let l = Lattice::new(1.3, 0.7, 5, 4);
        let mut f: Vec<f64> = (0..l.node_count())
            .map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 * 0.3)
            .collect();
        let mut grad = vec![0.0; l.node_count()];
        energy_gradient(&l, &f, &mut grad);
        let e0 = discrete_area(&l, &f);
        let h = 1e-7;
        for i in (0..l.node_count()).step_by(7) {
            let old = f[i];
            f[i] = old + h;
            let e1 = discrete_area(&l, &f);
            f[i] = old;
            let fd = (e1 - e0) / h;
            assert!(
                (fd - grad[i]).abs() < 1e-5 * (1.0 + grad[i].abs()),
                "node {i}: fd {fd} vs grad {}",
                grad[i]
            );
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let l = Lattice::new(1.0, 1.0, 4, 4);
        let mut f: Vec<f64> = (0..l.node_count())
            .map(|i| ((i * 1103515245 + 12345) % 997) as f64 / 997.0 * 0.4)
            .collect();
        let map = FreeMap::new(&l, |a, b| a > 0 && a < 4 && b > 0 && b < 4);
        let mut h = StencilMatrix::new();
        assemble_hessian(&l, &f, &map, &mut h);

        let nf = map.free_count();
        let mut g0 = vec![0.0; l.node_count()];
        energy_gradient(&l, &f, &mut g0);
        let eps = 1e-6;
        for fj in 0..nf {
            let node = map.node_of_free[fj];
            let old = f[node];
            f[node] = old + eps;
            let mut g1 = vec![0.0; l.node_count()];
            energy_gradient(&l, &f, &mut g1);
            f[node] = old;
            // column fj of H vs finite difference of the gradient
            let mut x = vec![0.0; nf];
            x[fj] = 1.0;
            let mut hx = vec![0.0; nf];
            h.apply(&x, &mut hx);
            for fi in 0..nf {
                let ni = map.node_of_free[fi];
                let fd = (g1[ni] - g0[ni]) / eps;
                assert!(
                    (fd - hx[fi]).abs() < 1e-4 * (1.0 + hx[fi].abs()),
                    "H[{fi},{fj}]: fd {fd} vs {}",
                    hx[fi]
                );
            }
        }
    }
}
