//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::oracle;
use common::{c, dist, max_abs, rng};
use num_complex::Complex64;
use qudit_bloch::basis::{
    change_of_basis, gell_mann_tuple, random_tuple, structure_constants, transform_constants,
};
use qudit_bloch::bloch::{
    expectation, is_observable_bloch, is_state, observable_to_bloch, positivity_coefficients,
    state_to_bloch, BlochRole, BlochVector, DensityMatrix, Observable, TOL_POS,
};
use qudit_bloch::dynamics::{
    evolve_closed, evolve_open, evolve_unitary_coefficients, reconstruct_unitary, Dissipator,
    DissipatorSpec, HamiltonianSpec, TimeGrid,
};
use qudit_bloch::entanglement::{
    concurrence, partial_trace, product_vector, reduced_norm_relation, BipartiteState,
    ConcurrenceNorm, Keep,
};
use qudit_bloch::ode::IntegratorSettings;
use qudit_bloch::{random, CMatrix, OperatorTuple};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn traceless(m: CMatrix) -> CMatrix {
    let d = m.nrows();
    let shift = m.trace() / c(d as f64);
    m - CMatrix::identity(d, d) * shift
}

fn basis_axioms() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 2..=8 {
        let t = gell_mann_tuple(d).unwrap();
        for (k, a) in t.elements().iter().enumerate() {
            worst = worst.max(max_abs(&(a - a.adjoint())));
            worst = worst.max(a.trace().norm());
            for (m, b) in t.elements().iter().enumerate() {
                let expected = if k == m { 2.0 } else { 0.0 };
                worst = worst.max((oracle::trace_product(a, b) - c(expected)).norm());
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("d = 2..8, worst residual {worst:.2e}"),
    )
}

fn direct_constants(t: &OperatorTuple) -> (Vec<f64>, Vec<f64>) {
    let n = t.len();
    let mut f = vec![0.0; n * n * n];
    let mut g = vec![0.0; n * n * n];
    let els = t.elements();
    for k in 0..n {
        for m in 0..n {
            let km = &els[k] * &els[m];
            for l in 0..n {
                let z = oracle::trace_product(&km, &els[l]) * 0.5;
                f[(k * n + m) * n + l] = z.im;
                g[(k * n + m) * n + l] = z.re;
            }
        }
    }
    (f, g)
}

fn structure_constant_checks() -> Outcome {
    let sc2 = structure_constants(&gell_mann_tuple(2).unwrap()).unwrap();
    let mut pauli: f64 = 0.0;
    for k in 0..3i64 {
        for m in 0..3i64 {
            for l in 0..3i64 {
                let eps = ((k - m) * (m - l) * (l - k) / 2) as f64;
                let (ku, mu, lu) = (k as usize, m as usize, l as usize);
                pauli = pauli.max((sc2.f(ku, mu, lu) - eps).abs());
                pauli = pauli.max(sc2.g(ku, mu, lu).abs());
            }
        }
    }

    let mut recon: f64 = 0.0;
    for d in [3, 4] {
        let t = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&t).unwrap();
        let n = t.len();
        let els = t.elements();
        for k in 0..n {
            for m in 0..n {
                let mut rhs = CMatrix::zeros(d, d);
                if k == m {
                    rhs += CMatrix::identity(d, d) * c(2.0 / d as f64);
                }
                for l in 0..n {
                    rhs += &els[l] * Complex64::new(sc.g(k, m, l), sc.f(k, m, l));
                }
                recon = recon.max(max_abs(&(&els[k] * &els[m] - rhs)));
            }
        }
    }

    let mut moved: f64 = 0.0;
    let mut r = rng(2);
    for d in [3, 4] {
        let base = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&base).unwrap();
        let n = base.len();
        for i in 0..20 {
            let o = random::haar_orthogonal(n, &mut r);
            let rotated = base.rotated(&o, format!("rot-{i}")).unwrap();
            let via = transform_constants(&sc, &change_of_basis(&base, &rotated).unwrap()).unwrap();
            let (f, g) = direct_constants(&rotated);
            for k in 0..n {
                for m in 0..n {
                    for l in 0..n {
                        let idx = (k * n + m) * n + l;
                        moved = moved.max((via.f(k, m, l) - f[idx]).abs());
                        moved = moved.max((via.g(k, m, l) - g[idx]).abs());
                    }
                }
            }
        }
    }
    outcome(
        pauli <= 1e-12 && recon <= 1e-9 && moved <= 1e-9,
        format!(
            "Levi-Civita {pauli:.1e}, product reconstruction {recon:.1e}, 40 rotations {moved:.1e}"
        ),
    )
}

fn membership_equivalence() -> Outcome {
    let mut r = rng(3);
    let mut disagree_state = 0;
    let mut disagree_coeff = 0;
    let mut members = 0;
    let mut banded = 0;
    for d in 2..=5 {
        let t = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&t).unwrap();
        let n = t.len();
        for i in 0..1000 {
            let coords = if i % 2 == 0 {
                let radius = r.random_range(0.0..1.1);
                random::unit_vector(n, &mut r)
                    .into_iter()
                    .map(|x| x * radius)
                    .collect()
            } else {
                let k = r.random_range(1..=d);
                let g = random::ginibre(d, k, &mut r);
                let m = &g * g.adjoint();
                let rho = &m / m.trace();
                let noise = traceless(random::hermitian(d, &mut r)) * c(1e-3);
                oracle::state_coords(&(rho + noise), &t)
            };
            let p = BlochVector::new(d, BlochRole::State, coords.clone()).unwrap();
            let check = is_state(&p, &t, TOL_POS).unwrap();
            let lambda_min = oracle::jacobi_eigenvalues(&oracle::state_matrix(&coords, &t))[0];
            let truth = lambda_min >= -1e-9;
            members += usize::from(truth);
            if check.margin.abs() < 1e-8 {
                banded += 1;
                continue;
            }
            if check.member != truth {
                disagree_state += 1;
            }
            let a = positivity_coefficients(&p, &sc).unwrap();
            if a.all_nonnegative(1e-14) != truth {
                disagree_coeff += 1;
            }
        }
    }
    outcome(
        disagree_state == 0 && disagree_coeff == 0,
        format!(
            "4000 operators ({members} states, {banded} in margin band): \
             {disagree_state} negative-part and {disagree_coeff} coefficient disagreements"
        ),
    )
}

fn ball_inclusions() -> Outcome {
    let mut r = rng(4);
    let mut failures = 0;
    for d in 2..=6 {
        let t = gell_mann_tuple(d).unwrap();
        let n = t.len();
        for _ in 0..1000 {
            let u = random::unit_vector(n, &mut r);
            let state_r = 1.0 / (d as f64 - 1.0);
            let obs_r = 1.0 / (d as f64 - 1.0).sqrt();
            let p = BlochVector::new(d, BlochRole::State, u.iter().map(|x| x * state_r).collect())
                .unwrap();
            let q = BlochVector::new(
                d,
                BlochRole::Observable,
                u.iter().map(|x| x * obs_r).collect(),
            )
            .unwrap();
            if !is_state(&p, &t, TOL_POS).unwrap().member {
                failures += 1;
            }
            if !is_observable_bloch(&q, &t, TOL_POS).unwrap() {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("5000 directions, {failures} failures"),
    )
}

fn observable_vector(x: &CMatrix, t: &OperatorTuple) -> BlochVector {
    observable_to_bloch(&Observable::new(x.clone()).unwrap(), t).unwrap()
}

fn parity_law() -> Outcome {
    let mut witness: f64 = 0.0;
    for d in 2..=6 {
        let t = gell_mann_tuple(d).unwrap();
        let half = d / 2;
        let x = CMatrix::from_fn(d, d, |i, j| {
            if i != j {
                c(0.0)
            } else if i < half {
                c(1.0)
            } else if i < 2 * half {
                c(-1.0)
            } else {
                c(0.0)
            }
        });
        let n = observable_vector(&x, &t);
        let expected = if d % 2 == 0 {
            1.0
        } else {
            ((d as f64 - 1.0) / d as f64).sqrt()
        };
        let valid = is_observable_bloch(&n, &t, TOL_POS).unwrap();
        let err = if valid {
            (n.norm() - expected).abs()
        } else {
            f64::INFINITY
        };
        witness = witness.max(err);
    }

    let mut r = rng(5);
    let mut exceed = 0;
    let mut best: f64 = 0.0;
    for d in [3, 5] {
        let t = gell_mann_tuple(d).unwrap();
        let bound = ((d as f64 - 1.0) / d as f64).sqrt();
        for i in 0..10_000 {
            let x = if i % 2 == 0 {
                let mut spec: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
                let mean = spec.iter().sum::<f64>() / d as f64;
                spec.iter_mut().for_each(|s| *s -= mean);
                let top = spec.iter().fold(0.0f64, |a, s| a.max(s.abs()));
                let u = random::unitary(d, &mut r);
                let diag =
                    CMatrix::from_fn(d, d, |a, b| if a == b { c(spec[a] / top) } else { c(0.0) });
                &u * diag * u.adjoint()
            } else {
                let h = traceless(random::hermitian(d, &mut r));
                let top = oracle::jacobi_eigenvalues(&h)
                    .iter()
                    .fold(0.0f64, |a, s| a.max(s.abs()));
                h / c(top)
            };
            let n = observable_vector(&x, &t);
            if !is_observable_bloch(&n, &t, TOL_POS).unwrap() {
                continue;
            }
            best = best.max(n.norm() / bound);
            if n.norm() > bound + 1e-9 {
                exceed += 1;
            }
        }
    }
    outcome(
        witness <= 1e-10 && exceed == 0,
        format!(
            "witness error {witness:.1e}; 20000 odd-d samples, {exceed} above bound \
             (largest ratio {best:.6})"
        ),
    )
}

fn closed_dynamics() -> Outcome {
    let mut r = rng(6);
    let mut worst_end: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let t1 = 10.0;
    let grid = TimeGrid::uniform(0.0, t1, t1 / 8.0).unwrap();
    let settings = IntegratorSettings::default();
    for d in 2..=4 {
        let t = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&t).unwrap();
        for _ in 0..100 {
            let h = random::hermitian(d, &mut r) * c(0.5);
            let rho0 = random::mixed_density_matrix(d, &mut r);
            let r0 =
                BlochVector::new(d, BlochRole::State, oracle::state_coords(&rho0, &t)).unwrap();
            let ham = HamiltonianSpec::from_matrix(&h, &t).unwrap();
            let traj = evolve_closed(&r0, &ham, &t, &sc, &grid, &settings).unwrap();
            let expected = oracle::state_coords(&oracle::conjugate_evolution(&h, &rho0, t1), &t);
            worst_end = worst_end.max(dist(traj.last().coords(), &expected));
            for p in &traj.points {
                worst_drift = worst_drift.max((p.norm() - r0.norm()).abs());
            }
        }
    }

    // qubit precession about h: rotation by 2|h|t
    let t = gell_mann_tuple(2).unwrap();
    let sc = structure_constants(&t).unwrap();
    let mut precession: f64 = 0.0;
    for _ in 0..20 {
        let h: Vec<f64> = (0..3).map(|_| random::gaussian(&mut r)).collect();
        let hn = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        let axis = [h[0] / hn, h[1] / hn, h[2] / hn];
        let u = random::unit_vector(3, &mut r);
        let r0 = BlochVector::new(2, BlochRole::State, u.clone()).unwrap();
        let ham = HamiltonianSpec::constant(2, 0.0, h.clone()).unwrap();
        let traj = evolve_closed(&r0, &ham, &t, &sc, &grid, &settings).unwrap();
        for (time, p) in traj.times.iter().zip(&traj.points) {
            let expected = oracle::rotate([u[0], u[1], u[2]], axis, 2.0 * hn * time);
            precession = precession.max(dist(p.coords(), &expected));
        }
    }
    outcome(
        worst_end <= 1e-8 && worst_drift <= 1e-8 && precession <= 1e-8,
        format!(
            "300 runs: endpoint {worst_end:.1e}, norm drift {worst_drift:.1e}; \
             precession {precession:.1e}"
        ),
    )
}

fn random_normal(d: usize, r: &mut impl Rng) -> CMatrix {
    let u = random::unitary(d, r);
    let diag = CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            random::complex_gaussian(r) * 0.5
        } else {
            c(0.0)
        }
    });
    &u * diag * u.adjoint()
}

fn open_dynamics() -> Outcome {
    let mut r = rng(7);
    let t1 = 3.0;
    let grid = TimeGrid::uniform(0.0, t1, t1 / 16.0).unwrap();
    let settings = IntegratorSettings::default();
    let mut worst_end: f64 = 0.0;
    let mut worst_rise = f64::NEG_INFINITY;
    for d in [2, 3] {
        let t = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&t).unwrap();
        for run in 0..50 {
            let normal = run % 2 == 1;
            let h = random::hermitian(d, &mut r) * c(0.5);
            let count = r.random_range(1..=3);
            let terms: Vec<(f64, CMatrix)> = (0..count)
                .map(|_| {
                    let l = if normal {
                        random_normal(d, &mut r)
                    } else {
                        random::ginibre(d, d, &mut r) * c(0.5)
                    };
                    (r.random_range(0.0..1.0), l)
                })
                .collect();
            let rho0 = random::mixed_density_matrix(d, &mut r);
            let r0 =
                BlochVector::new(d, BlochRole::State, oracle::state_coords(&rho0, &t)).unwrap();
            let ham = HamiltonianSpec::from_matrix(&h, &t).unwrap();
            let dis = DissipatorSpec::new(
                d,
                terms
                    .iter()
                    .map(|(g, l)| Dissipator::constant(*g, l.clone()))
                    .collect(),
            )
            .unwrap();
            let traj = evolve_open(&r0, &ham, &dis, &t, &sc, &grid, &settings).unwrap();
            let expected =
                oracle::state_coords(&oracle::lindblad_evolution(&h, &terms, &rho0, t1), &t);
            worst_end = worst_end.max(dist(traj.last().coords(), &expected));
            if normal {
                for w in traj.points.windows(2) {
                    worst_rise = worst_rise.max(w[1].norm() - w[0].norm());
                }
            }
        }
    }

    // amplitude damping L = |0⟩⟨1| with rate γ
    let t = gell_mann_tuple(2).unwrap();
    let sc = structure_constants(&t).unwrap();
    let gamma = 0.7;
    let lower = CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(0.), c(0.)]);
    let dis = DissipatorSpec::new(2, vec![Dissipator::constant(gamma, lower)]).unwrap();
    let r0 = [0.3, -0.4, -0.5];
    let start = BlochVector::new(2, BlochRole::State, r0.to_vec()).unwrap();
    let grid = TimeGrid::uniform(0.0, 5.0, 5.0 / 32.0).unwrap();
    let traj = evolve_open(
        &start,
        &HamiltonianSpec::zero(2),
        &dis,
        &t,
        &sc,
        &grid,
        &settings,
    )
    .unwrap();
    let mut damping: f64 = 0.0;
    for (time, p) in traj.times.iter().zip(&traj.points) {
        let half = (-gamma * time / 2.0).exp();
        let full = (-gamma * time).exp();
        let expected = [r0[0] * half, r0[1] * half, 1.0 - (1.0 - r0[2]) * full];
        damping = damping.max(dist(p.coords(), &expected));
    }
    outcome(
        worst_end <= 1e-8 && worst_rise <= 1e-7 && damping <= 1e-6,
        format!(
            "100 runs: endpoint {worst_end:.1e}; normal-L largest norm increase {worst_rise:.1e}; \
             amplitude damping {damping:.1e}"
        ),
    )
}

fn unitary_coefficients() -> Outcome {
    let mut r = rng(8);
    let t1 = 5.0;
    let grid = TimeGrid::uniform(0.0, t1, t1 / 8.0).unwrap();
    let settings = IntegratorSettings::default();
    let mut normalization: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let mut consistency: f64 = 0.0;
    let mut vs_expm: f64 = 0.0;
    for d in 2..=4 {
        let t = gell_mann_tuple(d).unwrap();
        let sc = structure_constants(&t).unwrap();
        for _ in 0..20 {
            let h = random::hermitian(d, &mut r) * c(0.5);
            let ham = HamiltonianSpec::from_matrix(&h, &t).unwrap();
            let coeffs = evolve_unitary_coefficients(&ham, &sc, &grid, &settings).unwrap();
            let rho0 = random::mixed_density_matrix(d, &mut r);
            let r0 =
                BlochVector::new(d, BlochRole::State, oracle::state_coords(&rho0, &t)).unwrap();
            let traj = evolve_closed(&r0, &ham, &t, &sc, &grid, &settings).unwrap();
            for (sample, point) in coeffs.samples.iter().zip(&traj.points) {
                normalization = normalization.max(sample.normalization_defect().abs());
                let u = reconstruct_unitary(sample, &t, settings.tol).unwrap();
                let id = CMatrix::identity(d, d);
                unitarity = unitarity.max(max_abs(&(&u * u.adjoint() - id)));
                let moved = oracle::state_coords(&(&u * &rho0 * u.adjoint()), &t);
                consistency = consistency.max(dist(&moved, point.coords()));
                let exact = oracle::expm(&(&h * Complex64::new(0.0, -sample.time)));
                vs_expm = vs_expm.max(max_abs(&(u - exact)));
            }
        }
    }
    outcome(
        normalization <= 1e-7 && unitarity <= 1e-8 && consistency <= 1e-8,
        format!(
            "60 runs: normalization {normalization:.1e}, unitarity {unitarity:.1e}, \
             vs closed evolution {consistency:.1e}, vs exp(-iHt) {vs_expm:.1e}"
        ),
    )
}

fn concurrence_checks() -> Outcome {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = BipartiteState::from_pure_vector((2, 2), &[c(s), c(0.), c(0.), c(s)]).unwrap();
    let bell_err = (concurrence(&bell, ConcurrenceNorm::Normalized)
        .unwrap()
        .value
        - 1.0)
        .abs();

    let mut r = rng(9);
    let mut product: f64 = 0.0;
    let mut purity_gap: f64 = 0.0;
    let mut relation: f64 = 0.0;
    let mut reduction: f64 = 0.0;
    for (d1, d2) in [(2, 2), (2, 3), (3, 4)] {
        for _ in 0..100 {
            let a = random::pure_state_vector(d1, &mut r);
            let b = random::pure_state_vector(d2, &mut r);
            let st = BipartiteState::from_pure_vector(
                (d1, d2),
                &product_vector(a.as_slice(), b.as_slice()),
            )
            .unwrap();
            product = product.max(concurrence(&st, ConcurrenceNorm::Normalized).unwrap().value);

            let psi = random::pure_state_vector(d1 * d2, &mut r);
            let st = BipartiteState::from_pure_vector((d1, d2), psi.as_slice()).unwrap();
            let rho1 = partial_trace(&st, Keep::First);
            let rho2 = partial_trace(&st, Keep::Second);
            purity_gap = purity_gap.max((rho1.purity() - rho2.purity()).abs());
            relation = relation.max(reduced_norm_relation(&st).unwrap());
            let (o1, o2) = oracle::reductions(psi.as_slice(), d1, d2);
            reduction = reduction
                .max(max_abs(&(rho1.matrix() - o1)))
                .max(max_abs(&(rho2.matrix() - o2)));
        }
    }

    let mut schmidt: f64 = 0.0;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let mut psi = vec![c(0.0); 6];
        psi[0] = c(p.sqrt());
        psi[4] = c((1.0 - p).sqrt());
        let st = BipartiteState::from_pure_vector((2, 3), &psi).unwrap();
        let value = concurrence(&st, ConcurrenceNorm::Normalized).unwrap().value;
        schmidt = schmidt.max((value - 2.0 * (p * (1.0 - p)).sqrt()).abs());
    }
    outcome(
        bell_err <= 1e-10
            && product <= 1e-9
            && schmidt <= 1e-10
            && purity_gap <= 1e-10
            && relation <= 1e-10
            && reduction <= 1e-12,
        format!(
            "Bell {bell_err:.1e}; products max C {product:.1e}; Schmidt family {schmidt:.1e}; \
             reduced purity gap {purity_gap:.1e}, norm relation {relation:.1e}, \
             partial trace vs oracle {reduction:.1e}"
        ),
    )
}

fn basis_independence() -> Outcome {
    let mut r = rng(10);
    let mut spread: f64 = 0.0;
    for d in 2..=4 {
        let rho = DensityMatrix::new(random::mixed_density_matrix(d, &mut r), TOL_POS).unwrap();
        let norms: Vec<f64> = (0..20)
            .map(|seed| {
                state_to_bloch(&rho, &random_tuple(d, 100 + seed).unwrap())
                    .unwrap()
                    .norm()
            })
            .collect();
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
    }

    let mut worst: f64 = 0.0;
    for i in 0..500u64 {
        let d = 2 + (i % 4) as usize;
        let t = random_tuple(d, 1000 + i).unwrap();
        let rho_m = random::mixed_density_matrix(d, &mut r);
        let x = traceless(random::hermitian(d, &mut r));
        let rv = state_to_bloch(&DensityMatrix::new(rho_m.clone(), TOL_POS).unwrap(), &t).unwrap();
        let nv = observable_vector(&x, &t);
        let value = expectation(&rv, &nv).unwrap();
        worst = worst.max((value - oracle::trace_product(&rho_m, &x).re).abs());
    }
    outcome(
        spread <= 1e-10 && worst <= 1e-10,
        format!("norm spread over 60 tuples {spread:.1e}; 500 expectations {worst:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("basis axioms", basis_axioms),
        ("structure constants", structure_constant_checks),
        ("membership equivalence", membership_equivalence),
        ("ball inclusions", ball_inclusions),
        ("parity law", parity_law),
        ("closed dynamics", closed_dynamics),
        ("open dynamics", open_dynamics),
        ("unitary coefficients", unitary_coefficients),
        ("concurrence", concurrence_checks),
        ("basis independence", basis_independence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!(
            "criterion {:>2} {verdict}  {name}: {} [{:.1}s]",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
