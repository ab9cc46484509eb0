//! Acceptance suite: one PASS/FAIL line per criterion, with timing.
//! Runs sequentially (no test harness) so the timings are meaningful.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use varsample::bounds::{complex_pr_bounds, complex_pr_family, real_pr_bounds};
use varsample::coords::{CoordSpace, SpaceKind};
use varsample::injectivity::{
    admissibility_probe, certify, complement_property, minor_residual, recheck_refutation, samplers,
    verify_kernel_minor_system, MinorSearchConfig, SearchConfig, VerdictStatus,
};
use varsample::linalg::{elementary, frobenius, inner, SortedSvd};
use varsample::recovery::{equivalence_distance, random_low_rank, random_sparse, recover_phase, recover_sparse, RecoveryConfig};
use varsample::reference::{eleven_matrix_ensemble, embedded_data_matches, skew_corner, ELEVEN_MATRICES};
use varsample::rng::{self, StreamRng};
use varsample::sampling::{
    gaussian_element, gen_gaussian_matrices, gen_gaussian_vectors, gen_rank_one_lifts, lift_rank_one, tau, tau_inverse,
};
use varsample::varieties::{membership, project};
use varsample::{DenseMatrix, Field, Shape, VarietySpec, C64};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn bounds_reproduction() -> Outcome {
    let complex = [(5, 16), (6, 18), (7, 23), (9, 32), (15, 54), (2, 3)];
    for (d, want) in complex {
        let got = ok(complex_pr_bounds(d))?.exact;
        ensure(got == Some(want), format!("complex d={d}: {got:?} != {want}"))?;
    }
    for (d, want) in [(5, 9), (6, 10)] {
        let got = ok(real_pr_bounds(d))?.exact;
        ensure(got == Some(want), format!("real d={d}: {got:?} != {want}"))?;
    }
    let mut exact_count = 0;
    for d in 5..=4098 {
        let r = ok(complex_pr_bounds(d))?;
        ensure(r.lower <= r.upper, format!("d={d}: lower {} > upper {}", r.lower, r.upper))?;
        if let Some((v, _)) = complex_pr_family(d) {
            exact_count += 1;
            ensure(r.lower <= v && v <= r.upper, format!("d={d}: exact {v} outside [{}, {}]", r.lower, r.upper))?;
        }
    }
    Ok(format!("spot values match; {exact_count} exact values inside their intervals for d in [5, 4098]"))
}

fn low_rank_threshold() -> Outcome {
    let w = ok(VarietySpec::low_rank(4, 1, Field::Complex))?;
    let mut worst_witness = 0.0f64;
    let mut min_margin = f64::INFINITY;
    for seed in 1..=5u64 {
        let cfg = SearchConfig { seed, restarts: 200, ..Default::default() };
        let e = ok(gen_gaussian_matrices(4, 11, Field::Complex, seed))?;
        let v = ok(certify(&e, &w, &cfg))?;
        ensure(v.status == VerdictStatus::RefutedWithWitness, format!("m=11 seed={seed}: {:?}", v.status))?;
        ensure(v.restarts <= 200, format!("m=11 seed={seed}: {} restarts", v.restarts))?;
        let res = v.witness.as_ref().map_or(f64::INFINITY, |w| w.residual);
        ensure(res < 1e-8, format!("m=11 seed={seed}: witness residual {res:e}"))?;
        worst_witness = worst_witness.max(res);

        let e = ok(gen_gaussian_matrices(4, 12, Field::Complex, seed))?;
        let v = ok(certify(&e, &w, &cfg))?;
        ensure(v.status == VerdictStatus::NoWitnessFound, format!("m=12 seed={seed}: {:?}", v.status))?;
        let margin = v.margin.unwrap_or(0.0);
        ensure(margin > 1e-6, format!("m=12 seed={seed}: margin {margin:e}"))?;
        min_margin = min_margin.min(margin);
    }
    Ok(format!("m=11 worst witness residual {worst_witness:.2e}; m=12 smallest margin {min_margin:.3e}"))
}

/// Third, independent transcription of the eleven matrices.
const PRINTED: [[i8; 16]; 11] = [
    [-4, 1, 3, 4, -4, 4, 4, 3, 4, -3, 0, -3, 0, -4, 2, 1],
    [0, 3, -1, -1, 0, -2, -1, 2, 0, 3, -2, 3, 1, -1, -3, 2],
    [-1, -4, -1, -1, 4, 0, -1, 1, -2, 0, 0, 2, 0, -1, 2, 2],
    [-2, -2, 4, 1, -2, 0, 2, 3, 1, -2, -4, 3, -3, 3, 4, -2],
    [4, 2, -4, -4, -4, -3, 0, 0, 1, -4, 4, -2, 3, 0, 2, 0],
    [2, 2, 3, 4, 2, -4, 3, 1, 0, -2, 1, -2, -1, 0, -1, -4],
    [2, 1, 4, 0, -1, -3, 0, -1, 4, -1, -4, 3, 0, 3, 0, 4],
    [0, 3, -1, 2, 4, 2, 1, 1, -2, -1, 3, 4, 3, 0, 3, 3],
    [2, -1, 4, -4, -2, 2, 3, -1, -1, 1, 4, -1, -3, -4, 4, 3],
    [-4, 2, 0, -1, 4, 1, 0, 4, -1, -3, 4, 1, -3, 2, 4, -4],
    [1, 1, -2, 0, 3, 0, -2, -4, 2, -4, -2, 4, 4, 3, 2, -2],
];

fn eleven_matrices() -> Outcome {
    for (j, flat) in PRINTED.iter().enumerate() {
        for i in 0..4 {
            for k in 0..4 {
                ensure(ELEVEN_MATRICES[j][i][k] == flat[4 * i + k], format!("A{} entry ({}, {}) differs", j + 1, i + 1, k + 1))?;
            }
        }
    }
    ensure(embedded_data_matches(), "embedded array and text transcription differ")?;
    let e = eleven_matrix_ensemble();
    for (j, a) in e.operators().iter().enumerate() {
        for i in 0..4 {
            for k in 0..4 {
                ensure(a[(i, k)] == C64::new(f64::from(PRINTED[j][4 * i + k]), 0.0), format!("A{} as loaded differs", j + 1))?;
            }
        }
    }
    let report = ok(verify_kernel_minor_system(&e, 2, &MinorSearchConfig { restarts: 500, ..Default::default() }))?;
    ensure(report.restarts >= 500, "fewer than 500 restarts")?;
    ensure(report.min_residual > 1e-6, format!("min minor residual {:e}", report.min_residual))?;
    let v = ok(certify(&e, &ok(VarietySpec::low_rank(4, 1, Field::Real))?, &SearchConfig::default()))?;
    ensure(v.status == VerdictStatus::NoWitnessFound, format!("certify: {:?}", v.status))?;
    Ok(format!(
        "entries exact; min minor residual {:.3e} over {} restarts (kernel dim {}); certify margin {:.3e}",
        report.min_residual,
        report.restarts,
        report.kernel_dim,
        v.margin.unwrap_or(f64::NAN)
    ))
}

fn real_rank(rows: &[&DenseMatrix]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let d = rows[0].nrows();
    let m = DMatrix::from_fn(rows.len(), d, |j, i| rows[j][i].re);
    let s = m.singular_values();
    let top = s.iter().copied().fold(0.0, f64::max);
    s.iter().filter(|&&v| v > 1e-9 * top).count()
}

fn complement_property_threshold() -> Outcome {
    let mut checked = 0;
    for d in 2..=5usize {
        for t in 0..50u64 {
            let seed = rng::derive(d as u64, t);
            let e = ok(gen_gaussian_vectors(d, 2 * d - 1, Field::Real, seed))?;
            let out = ok(complement_property(e.operators()))?;
            ensure(out.holds, format!("d={d} t={t}: m=2d-1 failed"))?;

            let e = ok(gen_gaussian_vectors(d, 2 * d - 2, Field::Real, seed))?;
            let out = ok(complement_property(e.operators()))?;
            ensure(!out.holds, format!("d={d} t={t}: m=2d-2 passed"))?;
            let s = out.failing_subset.ok_or("no failing subset")?;
            let ops = e.operators();
            let inside: Vec<&DenseMatrix> = s.iter().map(|&j| &ops[j]).collect();
            let outside: Vec<&DenseMatrix> = (0..ops.len()).filter(|j| !s.contains(j)).map(|j| &ops[j]).collect();
            ensure(
                real_rank(&inside) < d && real_rank(&outside) < d,
                format!("d={d} t={t}: subset {s:?} is not a valid failure"),
            )?;
            checked += 2;
        }
    }
    Ok(format!("{checked} ensembles classified correctly"))
}

fn sparse_threshold() -> Outcome {
    let cfg = RecoveryConfig::default();
    let mut worst = 0.0f64;
    for t in 0..100u64 {
        let seed = rng::derive(8, t);
        let e = ok(gen_gaussian_vectors(8, 4, Field::Real, seed))?;
        let x = random_sparse(&mut rng::stream(seed, u64::MAX), 8, 2);
        let out = ok(recover_sparse(&e, &ok(e.apply(&x))?, 2, &cfg))?;
        let err = frobenius(&(&out.estimate - &x)) / frobenius(&x);
        ensure(out.converged && !out.ambiguous && err < 1e-10, format!("trial {t}: relative error {err:e}"))?;
        worst = worst.max(err);
    }
    let e = ok(gen_gaussian_vectors(8, 3, Field::Real, 3))?;
    let signal = ok(VarietySpec::sparse(8, 2, Field::Real))?;
    let v = ok(certify(&e, &signal, &SearchConfig { seed: 3, ..Default::default() }))?;
    ensure(v.status == VerdictStatus::RefutedWithWitness, format!("m=3: {:?}", v.status))?;
    let w = v.witness.as_ref().ok_or("no witness")?;
    let nnz = w.element.iter().filter(|z| z.norm() > 1e-12).count();
    ensure(nnz <= 4, format!("witness has {nnz} nonzeros"))?;
    ensure(ok(membership(&w.element, &ok(VarietySpec::sparse(8, 4, Field::Real))?, 1e-10))?, "witness not 4-sparse")?;
    ensure(ok(e.apply(&w.element))?.norm() < 1e-8, "witness not in the kernel")?;
    ensure(ok(recheck_refutation(&e, &signal, &v, 1e-8))?, "collision does not re-verify")?;
    Ok(format!("100/100 recovered (worst error {worst:.2e}); m=3 witness with {nnz} nonzeros"))
}

fn phase_retrieval() -> Outcome {
    let e = ok(gen_rank_one_lifts(3, 5, Field::Real, 1))?;
    let cfg = RecoveryConfig { seed: 1, ..Default::default() };
    let mut good = 0;
    let mut flagged = 0;
    for t in 0..50u64 {
        let mut r = rng::stream(2, t);
        let x = gaussian_element(&mut r, Shape::Vector(3), Field::Real);
        let y = ok(e.apply(&lift_rank_one(&x)))?;
        let out = ok(recover_phase(&e, &y, &RecoveryConfig { seed: t, ..cfg }))?;
        let dist = equivalence_distance(&out.estimate, &x, Field::Real);
        if out.converged {
            ensure(dist < 1e-6 * frobenius(&x).max(1.0), format!("trial {t}: converged but distance {dist:e}"))?;
            good += 1;
        } else {
            flagged += 1;
        }
    }
    ensure(good >= 48, format!("only {good}/50 recovered"))?;
    Ok(format!("{good}/50 recovered, {flagged} flagged non-converged, none wrong-but-converged"))
}

fn random_variety(r: &mut StreamRng, case: usize) -> VarietySpec {
    let d = 2 + case % 4;
    let field = if case.is_multiple_of(2) { Field::Real } else { Field::Complex };
    let p = 1 + (case / 2) % d;
    match case % 5 {
        0 => VarietySpec::sparse(d, p, field).unwrap(),
        1 | 2 => VarietySpec::low_rank(d, p, field).unwrap(),
        3 => VarietySpec::sym_low_rank(d, p, field).unwrap(),
        _ => {
            let _ = r;
            VarietySpec::lifted_phase(d, field)
        }
    }
}

fn property_suites() -> Outcome {
    // Projection idempotence and Eckart-Young.
    for case in 0..200 {
        let mut r = rng::stream(70, case as u64);
        let w = random_variety(&mut r, case);
        let x = gaussian_element(&mut r, w.ambient(), w.field);
        let p = ok(project(&x, &w))?;
        let pp = ok(project(&p, &w))?;
        ensure(frobenius(&(&pp - &p)) <= 1e-10 * frobenius(&p).max(1.0), format!("case {case}: not idempotent on {w:?}"))?;
        ensure(ok(membership(&p, &w, 1e-8))?, format!("case {case}: projection leaves {w:?}"))?;
        if w.kind == varsample::VarietyKind::LowRank {
            let svd = SortedSvd::new(&x);
            let tail: f64 = svd.singular_values.iter().skip(w.k_or_r).map(|s| s * s).sum();
            let dist2 = frobenius(&(&x - &p)).powi(2);
            ensure((dist2 - tail).abs() <= 1e-9 * frobenius(&x).powi(2), format!("case {case}: Eckart-Young gap"))?;
        }
    }
    // tau round trips.
    for case in 0..100u64 {
        let mut r = rng::stream(71, case);
        let a = gaussian_element(&mut r, Shape::Matrix(1 + case as usize % 5), Field::Real);
        let h = ok(tau(&a))?;
        ensure(frobenius(&(ok(tau_inverse(&h))? - &a)) <= 1e-12 * frobenius(&a).max(1.0), "tau round trip")?;
        ensure((frobenius(&h) - frobenius(&a)).abs() <= 1e-12 * frobenius(&a).max(1.0), "tau is not isometric")?;
    }
    // Lift identity.
    for case in 0..100u64 {
        let mut r = rng::stream(72, case);
        let d = 1 + case as usize % 6;
        let field = if case % 2 == 0 { Field::Real } else { Field::Complex };
        let a = gaussian_element(&mut r, Shape::Vector(d), field);
        let x = gaussian_element(&mut r, Shape::Vector(d), field);
        let lhs = inner(&a, &x).norm_sqr();
        let rhs = inner(&lift_rank_one(&a), &lift_rank_one(&x));
        ensure((lhs - rhs.re).abs() + rhs.im.abs() <= 1e-10 * lhs.max(1.0), format!("lift identity case {case}"))?;
    }
    // Every refuted verdict re-verifies.
    let mut refuted = 0;
    let cases: Vec<(varsample::MeasurementEnsemble, VarietySpec)> = vec![
        (ok(gen_gaussian_matrices(4, 11, Field::Complex, 1))?, ok(VarietySpec::low_rank(4, 1, Field::Complex))?),
        (ok(gen_gaussian_matrices(3, 7, Field::Real, 2))?, ok(VarietySpec::low_rank(3, 1, Field::Real))?),
        (ok(gen_gaussian_vectors(8, 3, Field::Real, 3))?, ok(VarietySpec::sparse(8, 2, Field::Real))?),
        (ok(gen_gaussian_vectors(3, 4, Field::Real, 4))?, VarietySpec::lifted_phase(3, Field::Real)),
        (ok(gen_gaussian_vectors(3, 6, Field::Complex, 5))?, VarietySpec::lifted_phase(3, Field::Complex)),
    ];
    for (i, (e, w)) in cases.iter().enumerate() {
        let v = ok(certify(e, w, &SearchConfig { seed: i as u64, ..Default::default() }))?;
        if v.is_refuted() {
            refuted += 1;
            ensure(ok(recheck_refutation(e, w, &v, 1e-8))?, format!("refutation {i} on {w:?} does not re-verify"))?;
        }
    }
    ensure(refuted >= 4, format!("only {refuted} refutations produced"))?;
    // minor_residual vanishes exactly on rank <= r.
    for case in 0..200u64 {
        let mut r = rng::stream(73, case);
        let d = 2 + case as usize % 4;
        let rank = case as usize % (d + 1);
        let probe_r = (case as usize / 5) % d;
        let field = if case % 3 == 0 { Field::Complex } else { Field::Real };
        let q = random_low_rank(&mut r, d, rank, field);
        let q = if frobenius(&q) > 0.0 { q.unscale(frobenius(&q)) } else { q };
        let res = minor_residual(&q, probe_r);
        let low = ok(membership(&q, &ok(VarietySpec::low_rank(d, probe_r, field))?, 1e-10))?;
        ensure((res < 1e-20) == low, format!("case {case}: residual {res:e} vs membership {low} (rank {rank}, r {probe_r})"))?;
    }
    // equivalence_distance is a pseudometric.
    for case in 0..100u64 {
        let mut r = rng::stream(74, case);
        let field = if case % 2 == 0 { Field::Real } else { Field::Complex };
        let d = 1 + case as usize % 5;
        let [x, y, z] = [0, 1, 2].map(|_| gaussian_element(&mut r, Shape::Vector(d), field));
        let dxy = equivalence_distance(&x, &y, field);
        ensure((dxy - equivalence_distance(&y, &x, field)).abs() <= 1e-12, "not symmetric")?;
        ensure(dxy <= equivalence_distance(&x, &z, field) + equivalence_distance(&z, &y, field) + 1e-10, "triangle")?;
        let phase = match field {
            Field::Real => C64::new(-1.0, 0.0),
            Field::Complex => C64::from_polar(1.0, rng::normal(&mut r)),
        };
        ensure(equivalence_distance(&x, &x.map(|v| v * phase), field) < 1e-7, "zero on the orbit")?;
        ensure(equivalence_distance(&x, &y, field) > 0.0, "positive off the orbit")?;
    }
    let _ = CoordSpace::new(Shape::Matrix(2), SpaceKind::Hermitian).dim();
    Ok(format!("200 projections, 100 tau, 100 lifts, {refuted} refutations, 200 minor cases, 100 triples"))
}

fn admissibility() -> Outcome {
    for d in [2usize, 4, 8] {
        let out = ok(admissibility_probe(samplers::symmetric(d), &ok(skew_corner(d))?, 10_000, d as u64))?;
        ensure(out.vanishes(), format!("d={d}: skew functional does not vanish"))?;
        let contrast = ok(admissibility_probe(samplers::symmetric(d), &elementary(d, 0, 0), 10_000, d as u64))?;
        ensure(!contrast.vanishes(), format!("d={d}: E11 vanished"))?;
    }
    Ok("skew corner vanishes on 10^4 symmetric samples for d in {2, 4, 8}; E11 nondegenerate".into())
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 bounds reproduction", Duration::from_secs(1), bounds_reproduction),
        ("2 low-rank threshold d=4 r=1", Duration::from_secs(120), low_rank_threshold),
        ("3 eleven-matrix ensemble", Duration::from_secs(120), eleven_matrices),
        ("4 complement property", Duration::from_secs(30), complement_property_threshold),
        ("5 sparse threshold d=8 k=2", Duration::from_secs(10), sparse_threshold),
        ("6 phase retrieval d=3 m=5", Duration::from_secs(60), phase_retrieval),
        ("7 property suites", Duration::from_secs(30), property_suites),
        ("8 admissibility counterexample", Duration::from_secs(5), admissibility),
    ];
    // Argument filter, e.g. `cargo test --test acceptance -- 3`.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, limit, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, limit {limit:?}")),
            Err(e) => (false, e),
        };
        failed += usize::from(!pass);
        println!("{} criterion {name} ({:.2?}): {detail}", if pass { "PASS" } else { "FAIL" }, took);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
