//! Preconditioned conjugate gradients with an SSOR preconditioner for the
//! SPD Newton systems arising from the discrete area functional.

use super::energy::StencilMatrix;

pub struct PcgWorkspace {
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
    diag: Vec<f64>,
}

impl PcgWorkspace {
    pub fn new() -> Self {
        PcgWorkspace { r: Vec::new(), z: Vec::new(), p: Vec::new(), ap: Vec::new(), diag: Vec::new() }
    }
}

const SSOR_OMEGA: f64 = 1.7;

/// z = M^{-1} r with M the SSOR preconditioner (D + wL) D^{-1} (D + wU) / (w(2-w)).
fn apply_ssor(m: &StencilMatrix, diag: &[f64], r: &[f64], z: &mut [f64]) {
    let n = r.len();
    let w = SSOR_OMEGA;
    // forward: (D + wL) z = r, lower neighbors are stencil slots 0..4
    for i in 0..n {
        let nbs = &m.neighbors[i];
        let cfs = &m.coeffs[i];
        let mut acc = r[i];
        for k in 0..4 {
            let j = nbs[k];
            if j >= 0 {
                acc -= w * cfs[k] * z[j as usize];
            }
        }
        z[i] = acc / diag[i];
    }
    // scale by D
    for i in 0..n {
        z[i] *= diag[i];
    }
    // backward: (D + wU) z = z, upper neighbors are slots 5..9
    for i in (0..n).rev() {
        let nbs = &m.neighbors[i];
        let cfs = &m.coeffs[i];
        let mut acc = z[i];
        for k in 5..9 {
            let j = nbs[k];
            if j >= 0 {
                acc -= w * cfs[k] * z[j as usize];
            }
        }
        z[i] = acc / diag[i];
    }
    let scale = w * (2.0 - w);
    for v in z.iter_mut() {
        *v *= scale;
    }
}

/// Solves A x = b to relative residual `rel_tol`, overwriting `x` (initial
/// guess). Returns (achieved relative residual, iterations).
pub fn pcg(
    a: &StencilMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
    ws: &mut PcgWorkspace,
) -> (f64, usize) {
    let n = b.len();
    if n == 0 {
        return (0.0, 0);
    }
    ws.r.resize(n, 0.0);
    ws.z.resize(n, 0.0);
    ws.p.resize(n, 0.0);
    ws.ap.resize(n, 0.0);
    a.diagonal(&mut ws.diag);

    let norm_b = norm2(b).max(f64::MIN_POSITIVE);
    a.apply(x, &mut ws.ap);
    for i in 0..n {
        ws.r[i] = b[i] - ws.ap[i];
    }
    let mut res = norm2(&ws.r) / norm_b;
    if res <= rel_tol {
        return (res, 0);
    }
    apply_ssor(a, &ws.diag, &ws.r, &mut ws.z);
    ws.p.copy_from_slice(&ws.z);
    let mut rz = dot(&ws.r, &ws.z);
    for iter in 1..=max_iter {
        a.apply(&ws.p, &mut ws.ap);
        let pap = dot(&ws.p, &ws.ap);
        if pap <= 0.0 {
            // numerically lost positive definiteness; bail with current x
            return (res, iter);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * ws.p[i];
            ws.r[i] -= alpha * ws.ap[i];
        }
        res = norm2(&ws.r) / norm_b;
        if res <= rel_tol {
            return (res, iter);
        }
        apply_ssor(a, &ws.diag, &ws.r, &mut ws.z);
        let rz_new = dot(&ws.r, &ws.z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            ws.p[i] = ws.z[i] + beta * ws.p[i];
        }
    }
    (res, max_iter)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
