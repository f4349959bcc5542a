//! Reference computations that share no code path with the library.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qudit_bloch::{CMatrix, OperatorTuple};

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// embedding `[[A, −B], [B, A]]` of `A + iB`. Ascending.
pub fn jacobi_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.nrows();
    let m = 2 * n;
    let mut s = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            s[(i, j)] = z.re;
            s[(i + n, j + n)] = z.re;
            s[(i, j + n)] = -z.im;
            s[(i + n, j)] = z.im;
        }
    }
    let scale = s.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[(i, j)] * s[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (s[(q, q)] - s[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let skp = s[(k, p)];
                    let skq = s[(k, q)];
                    s[(k, p)] = cs * skp - sn * skq;
                    s[(k, q)] = sn * skp + cs * skq;
                }
                for k in 0..m {
                    let spk = s[(p, k)];
                    let sqk = s[(q, k)];
                    s[(p, k)] = cs * spk - sn * sqk;
                    s[(q, k)] = sn * spk + cs * sqk;
                }
            }
        }
    }
    let mut all: Vec<f64> = (0..m).map(|i| s[(i, i)]).collect();
    all.sort_by(f64::total_cmp);
    // every eigenvalue appears twice in the embedding
    all.iter().step_by(2).copied().collect()
}

pub fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut squarings = 0;
    while norm / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{−iHt} ρ e^{iHt}`.
pub fn conjugate_evolution(h: &CMatrix, rho: &CMatrix, t: f64) -> CMatrix {
    let u = expm(&(h * Complex64::new(0.0, -t)));
    &u * rho * u.adjoint()
}

pub fn lindblad_action(h: &CMatrix, terms: &[(f64, CMatrix)], rho: &CMatrix) -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    let mut out = (h * rho - rho * h) * (-i);
    for (gamma, l) in terms {
        let ld = l.adjoint();
        let ldl = &ld * l;
        let g = Complex64::new(*gamma, 0.0);
        out += (l * rho * &ld - (&ldl * rho + rho * &ldl) * Complex64::new(0.5, 0.0)) * g;
    }
    out
}

/// `e^{t𝓛} ρ` for the Lindblad generator `𝓛`, built as a `d² × d²` matrix on
/// row-major vectorized density matrices.
pub fn lindblad_evolution(h: &CMatrix, terms: &[(f64, CMatrix)], rho: &CMatrix, t: f64) -> CMatrix {
    let d = rho.nrows();
    let mut sup = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let mut e = CMatrix::zeros(d, d);
            e[(a, b)] = Complex64::new(1.0, 0.0);
            let img = lindblad_action(h, terms, &e);
            for i in 0..d {
                for j in 0..d {
                    sup[(i * d + j, a * d + b)] = img[(i, j)];
                }
            }
        }
    }
    let prop = expm(&(sup * Complex64::new(t, 0.0)));
    let vec = CMatrix::from_fn(d * d, 1, |k, _| rho[(k / d, k % d)]);
    let out = prop * vec;
    CMatrix::from_fn(d, d, |i, j| out[(i * d + j, 0)])
}

fn tr_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// `r_k = √(d/(2(d−1))) tr(ρ Υᵏ)`.
pub fn state_coords(rho: &CMatrix, t: &OperatorTuple) -> Vec<f64> {
    let d = rho.nrows() as f64;
    let s = (d / (2.0 * (d - 1.0))).sqrt();
    t.elements()
        .iter()
        .map(|e| s * tr_prod(rho, e).re)
        .collect()
}

/// `I/d + √((d−1)/(2d)) Σ r_k Υᵏ`.
pub fn state_matrix(r: &[f64], t: &OperatorTuple) -> CMatrix {
    let d = t.dim();
    let s = ((d as f64 - 1.0) / (2.0 * d as f64)).sqrt();
    let mut m = CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0);
    for (x, e) in r.iter().zip(t.elements()) {
        m += e * Complex64::new(s * x, 0.0);
    }
    m
}

/// `n_k = √(1/(2d)) tr(X Υᵏ)`.
pub fn observable_coords(x: &CMatrix, t: &OperatorTuple) -> Vec<f64> {
    let d = x.nrows() as f64;
    let s = (1.0 / (2.0 * d)).sqrt();
    t.elements().iter().map(|e| s * tr_prod(x, e).re).collect()
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    tr_prod(a, b)
}

/// Rotation of `r` by angle `θ` about unit axis `k` (Rodrigues).
pub fn rotate(r: [f64; 3], k: [f64; 3], theta: f64) -> [f64; 3] {
    let (c, s) = (theta.cos(), theta.sin());
    let dot = k[0] * r[0] + k[1] * r[1] + k[2] * r[2];
    let cross = [
        k[1] * r[2] - k[2] * r[1],
        k[2] * r[0] - k[0] * r[2],
        k[0] * r[1] - k[1] * r[0],
    ];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = r[i] * c + cross[i] * s + k[i] * dot * (1.0 - c);
    }
    out
}

/// `ρ₁ = M M†` and `ρ₂ = Mᵀ M̄` for `M[i₁][i₂] = ψ[i₁ d₂ + i₂]`.
pub fn reductions(psi: &[Complex64], d1: usize, d2: usize) -> (CMatrix, CMatrix) {
    let m = CMatrix::from_fn(d1, d2, |i, j| psi[i * d2 + j]);
    let rho1 = &m * m.adjoint();
    let rho2 = m.transpose() * m.map(|z| z.conj());
    (rho1, rho2)
}
