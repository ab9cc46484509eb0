//! End-to-end checks over the compiled-in reference data, the low-rank
//! threshold and the bounds tables. Each check reports pass or fail with a
//! short detail string.

use std::time::Instant;

use serde::Serialize;

use crate::bounds::{bounds_sweep, complex_pr_family, SweepKind};
use crate::error::Result;
use crate::injectivity::{admissibility_probe, certify, samplers, verify_kernel_minor_system, MinorSearchConfig, SearchConfig, VerdictStatus};
use crate::linalg::{elementary, Field};
use crate::reference::{eleven_matrix_ensemble, embedded_data_matches, skew_corner};
use crate::sampling::gen_gaussian_matrices;
use crate::varieties::VarietySpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckGroup {
    Data,
    Minors,
    Certify,
    Threshold,
    Bounds,
    Admissibility,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 6] = [
        CheckGroup::Data,
        CheckGroup::Minors,
        CheckGroup::Certify,
        CheckGroup::Threshold,
        CheckGroup::Bounds,
        CheckGroup::Admissibility,
    ];

    pub fn parse(s: &str) -> Option<CheckGroup> {
        CheckGroup::ALL.into_iter().find(|g| g.name() == s)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckGroup::Data => "data",
            CheckGroup::Minors => "minors",
            CheckGroup::Certify => "certify",
            CheckGroup::Threshold => "threshold",
            CheckGroup::Bounds => "bounds",
            CheckGroup::Admissibility => "admissibility",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub group: CheckGroup,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub seed: u64,
    pub restarts: usize,
    pub minor_restarts: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 0, restarts: 200, minor_restarts: 500 }
    }
}

fn timed(group: CheckGroup, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult { group, name: name.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_checks(groups: &[CheckGroup], opts: &CheckOptions) -> CheckReport {
    let mut checks = Vec::new();
    for &g in groups {
        match g {
            CheckGroup::Data => checks.push(timed(g, "embedded matrices match transcription", || {
                Ok((embedded_data_matches(), "11 integer 4x4 matrices".to_string()))
            })),
            CheckGroup::Minors => checks.push(timed(g, "kernel minor system has no real unit solution", || {
                let cfg = MinorSearchConfig { restarts: opts.minor_restarts.max(500), seed: opts.seed, ..Default::default() };
                let r = verify_kernel_minor_system(&eleven_matrix_ensemble(), 2, &cfg)?;
                Ok((r.min_residual > 1e-6, format!("min residual {:e} over {} restarts, kernel dim {}", r.min_residual, r.restarts, r.kernel_dim)))
            })),
            CheckGroup::Certify => checks.push(timed(g, "eleven matrices: no rank-one collision found", || {
                let cfg = SearchConfig { restarts: opts.restarts, seed: opts.seed, ..Default::default() };
                let v = certify(&eleven_matrix_ensemble(), &VarietySpec::low_rank(4, 1, Field::Real)?, &cfg)?;
                Ok((v.status == VerdictStatus::NoWitnessFound, format!("{:?}, margin {:e}", v.status, v.margin.unwrap_or(f64::NAN))))
            })),
            CheckGroup::Threshold => {
                let w = VarietySpec::low_rank(4, 1, Field::Complex).expect("valid");
                for (m, want) in [(11, VerdictStatus::RefutedWithWitness), (12, VerdictStatus::NoWitnessFound)] {
                    for seed in 1..=5u64 {
                        let name = format!("complex d=4 r=1 m={m} seed={seed}");
                        checks.push(timed(g, &name, || {
                            let e = gen_gaussian_matrices(4, m, Field::Complex, seed)?;
                            let cfg = SearchConfig { restarts: opts.restarts, seed, ..Default::default() };
                            let v = certify(&e, &w, &cfg)?;
                            let detail = match &v.witness {
                                Some(wit) => format!("{:?}, witness residual {:e}", v.status, wit.residual),
                                None => format!("{:?}, margin {:e}", v.status, v.margin.unwrap_or(f64::NAN)),
                            };
                            let ok = v.status == want && v.witness.as_ref().is_none_or(|w| w.residual < 1e-8);
                            Ok((ok, detail))
                        }));
                    }
                }
            }
            CheckGroup::Bounds => checks.push(timed(g, "phase retrieval intervals consistent for d in [5, 4098]", || {
                let mut bad = Vec::new();
                for r in bounds_sweep(SweepKind::ComplexPr, 5..=4098)?.iter().chain(&bounds_sweep(SweepKind::RealPr, 2..=4098)?) {
                    if !r.is_consistent() {
                        bad.push(format!("{:?}", r.setting));
                    }
                }
                for d in 5..=4098 {
                    if let Some((v, _)) = complex_pr_family(d) {
                        let r = crate::bounds::complex_pr_bounds(d)?;
                        if !(r.lower <= v && v <= r.upper) {
                            bad.push(format!("complex d={d}"));
                        }
                    }
                }
                Ok((bad.is_empty(), if bad.is_empty() { "all consistent".into() } else { bad.join(", ") }))
            })),
            CheckGroup::Admissibility => {
                for d in [2usize, 4, 8] {
                    checks.push(timed(g, &format!("skew corner functional vanishes on symmetric d={d}"), || {
                        let out = admissibility_probe(samplers::symmetric(d), &skew_corner(d)?, 10_000, opts.seed)?;
                        Ok((out.vanishes(), format!("{out:?}").chars().take(80).collect()))
                    }));
                }
                checks.push(timed(g, "E11 functional is nondegenerate on symmetric d=4", || {
                    let out = admissibility_probe(samplers::symmetric(4), &elementary(4, 0, 0), 10_000, opts.seed)?;
                    Ok((!out.vanishes(), "nonzero value found".to_string()))
                }));
            }
        }
    }
    let all_passed = checks.iter().all(|c| c.passed);
    CheckReport { checks, all_passed }
}
