//! Minimal numbers of samples: exact values where they are known, intervals
//! otherwise. Everything here is integer arithmetic.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::linalg::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Setting {
    Sparse { d: usize, k: usize },
    LowRank { d: usize, r: usize, field: Field },
    RealPr { d: usize },
    ComplexPr { d: usize },
    StandardPr { d: usize },
    GenericVariety { dim_w: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub setting: Setting,
    pub lower: usize,
    pub upper: usize,
    pub exact: Option<usize>,
    /// A specific ensemble size known to work, when smaller than `upper`.
    pub achievable: Option<usize>,
    pub regime: String,
    /// Codimension `m - dim W + 1` of the set of bad ensembles.
    pub codim_bad_set: Option<usize>,
    pub notes: Vec<String>,
}

impl BoundsReport {
    fn new(setting: Setting, lower: usize, upper: usize, regime: &str) -> BoundsReport {
        BoundsReport {
            setting,
            lower,
            upper,
            exact: None,
            achievable: None,
            regime: regime.to_string(),
            codim_bad_set: None,
            notes: Vec::new(),
        }
    }

    fn exactly(setting: Setting, value: usize, regime: &str) -> BoundsReport {
        BoundsReport { exact: Some(value), ..BoundsReport::new(setting, value, value, regime) }
    }

    fn note(mut self, text: &str) -> BoundsReport {
        self.notes.push(text.to_string());
        self
    }

    /// `lower <= exact <= upper`, and `achievable` within `[lower, upper]`.
    pub fn is_consistent(&self) -> bool {
        self.lower <= self.upper
            && self.exact.is_none_or(|e| self.lower <= e && e <= self.upper)
            && self.achievable.is_none_or(|a| self.lower <= a && a <= self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BinaryProfile {
    pub n: u64,
    pub alpha: u32,
}

impl BinaryProfile {
    pub fn new(n: u64) -> BinaryProfile {
        BinaryProfile { n, alpha: alpha(n) }
    }
}

/// Number of ones in the binary expansion of `n`.
pub fn alpha(n: u64) -> u32 {
    n.count_ones()
}

/// Samples that suffice for a generic ensemble on a variety of dimension `dim_w`.
pub fn generic_minimum(dim_w: usize) -> usize {
    dim_w
}

/// Codimension `m - dim_w + 1` of the bad-ensemble set; needs `m >= dim_w`.
pub fn codim_bad_set(m: usize, dim_w: usize) -> Result<usize> {
    if m < dim_w {
        return Err(domain(format!("m = {m} is below the variety dimension {dim_w}")));
    }
    Ok(m - dim_w + 1)
}

pub fn generic_variety(dim_w: usize, m: usize) -> BoundsReport {
    let setting = Setting::GenericVariety { dim_w, m };
    let mut r = BoundsReport::new(setting, 1, generic_minimum(dim_w).max(1), "generic ensembles, m >= dim W");
    r.codim_bad_set = codim_bad_set(m, dim_w).ok();
    r.note("lower bound not determined by the dimension alone")
}

pub fn sparse_minimal(d: usize, k: usize) -> Result<BoundsReport> {
    if 2 * k > d {
        return Err(domain(format!("sparse bounds need 2k <= d, got k = {k}, d = {d}")));
    }
    let setting = Setting::Sparse { d, k };
    let r = BoundsReport::exactly(setting, 2 * k, "sparse: dimension of 2k-sparse differences");
    Ok(if k == 0 { r.note("k = 0: only the zero vector, no samples needed") } else { r })
}

fn is_power_of_two_at_least(n: usize, min_exp: u32) -> bool {
    n.is_power_of_two() && n.trailing_zeros() >= min_exp
}

pub fn lowrank_minimal(d: usize, r: usize, field: Field) -> Result<BoundsReport> {
    if r == 0 || 2 * r > d {
        return Err(domain(format!("low-rank bounds need 1 <= r <= d/2, got r = {r}, d = {d}")));
    }
    let setting = Setting::LowRank { d, r, field };
    let count = 4 * d * r - 4 * r * r;
    Ok(match field {
        Field::Complex => BoundsReport::exactly(setting, count, "complex low rank: dimension of rank-2r differences"),
        Field::Real => {
            let power_form = d > r && (d - r).is_power_of_two();
            if power_form || d == 2 * r + 1 {
                let tag = if power_form { "real low rank: d = 2^k + r" } else { "real low rank: d = 2r + 1" };
                BoundsReport::exactly(setting, count, tag)
            } else {
                let mut rep = BoundsReport::new(setting, 1, count, "real low rank: generic upper bound only")
                    .note("tightness of 4dr - 4r^2 for this (d, r) is open")
                    .note("no lower bound known in this regime");
                if (d, r) == (4, 1) {
                    rep.achievable = Some(11);
                    rep = rep.note("an explicit ensemble of 11 integer matrices is injective");
                }
                rep
            }
        }
    })
}

/// Generalized real phase retrieval with symmetric measurements.
pub fn real_pr_bounds(d: usize) -> Result<BoundsReport> {
    if d < 2 {
        return Err(domain("phase retrieval bounds need d >= 2"));
    }
    let setting = Setting::RealPr { d };
    let upper = if d % 2 == 1 { 2 * d - 1 } else { 2 * d - 2 };
    let (lower, lower_note) = if d >= 5 {
        let log = |n: usize| (usize::BITS - 1 - n.leading_zeros()) as i64;
        let di = d as i64;
        let v = if d % 2 == 1 { 2 * di - 6 * log(d - 1) + 6 } else { 2 * di - 6 * log(d - 2) + 4 };
        (v.max(1) as usize, None)
    } else {
        (1, Some("no lower bound formula for d < 5"))
    };
    let exact = if is_power_of_two_at_least(d - 1, 1) {
        Some((2 * d - 1, "real pr: exact, d = 2^k + 1"))
    } else if d >= 2 && is_power_of_two_at_least(d - 2, 1) {
        Some((2 * d - 2, "real pr: exact, d = 2^k + 2"))
    } else {
        None
    };
    let regime = exact.map_or("real pr: interval", |e| e.1);
    let mut rep = BoundsReport::new(setting, lower, upper, regime);
    rep.exact = exact.map(|e| e.0);
    if let Some(n) = lower_note {
        rep = rep.note(n);
    }
    Ok(rep)
}

/// Which exact-value family `d` belongs to for complex generalized phase
/// retrieval, with the value.
pub fn complex_pr_family(d: usize) -> Option<(usize, &'static str)> {
    if d < 3 {
        return None;
    }
    let n = d - 1;
    if is_power_of_two_at_least(n, 2) {
        return Some((4 * d - 4, "complex pr: exact, d = 2^k + 1"));
    }
    if is_power_of_two_at_least(d - 2, 2) {
        return Some((4 * d - 6, "complex pr: exact, d = 2^k + 2"));
    }
    // d - 1 even with two or three bits: the powers are all at least 2.
    if n.is_multiple_of(2) {
        match n.count_ones() {
            2 => return Some((4 * d - 5, "complex pr: exact, d = 2^k + 2^j + 1")),
            3 => return Some((4 * d - 6, "complex pr: exact, d = 2^k + 2^j + 2^l + 1")),
            _ => {}
        }
    }
    None
}

/// Generalized complex phase retrieval with Hermitian measurements.
pub fn complex_pr_bounds(d: usize) -> Result<BoundsReport> {
    if d < 2 {
        return Err(domain("phase retrieval bounds need d >= 2"));
    }
    let setting = Setting::ComplexPr { d };
    if d == 2 {
        let mut rep = BoundsReport::new(setting, 1, 4 * d - 4, "complex pr: exact, d = 2");
        rep.exact = Some(3);
        return Ok(rep.note("no interval formula for d <= 4"));
    }
    if d <= 4 {
        return Ok(BoundsReport::new(setting, 1, 4 * d - 4, "complex pr: generic upper bound only")
            .note("no interval formula for d <= 4"));
    }
    let a = alpha((d - 1) as u64) as usize;
    let odd = d % 2 == 1;
    let eps = match (odd, a % 4) {
        (true, 3) => 2,
        (true, 2) => 1,
        _ => 0,
    };
    let delta = usize::from(!odd);
    let lower = 4 * d - 2 - 2 * a + eps;
    let upper = 4 * d - 3 - a - delta;
    let family = complex_pr_family(d);
    let mut rep = BoundsReport::new(setting, lower, upper, family.map_or("complex pr: interval from binary expansion of d - 1", |f| f.1));
    rep.exact = family.map(|f| f.0);
    Ok(rep)
}

/// Standard complex phase retrieval with rank-one measurements `a a*`.
pub fn standard_pr_facts(d: usize) -> Result<BoundsReport> {
    if d < 2 {
        return Err(domain("phase retrieval bounds need d >= 2"));
    }
    let setting = Setting::StandardPr { d };
    let a = alpha((d - 1) as u64) as usize;
    let lower = (4 * d).saturating_sub(3 + 2 * a).max(1);
    let upper = 4 * d - 4;
    let exact = is_power_of_two_at_least(d - 1, 1);
    let mut rep = BoundsReport::new(
        setting,
        lower,
        upper,
        if exact { "standard pr: exact, d = 2^k + 1" } else { "standard pr: generic upper bound, embedding lower bound" },
    );
    if exact {
        rep.exact = Some(upper);
    }
    if d == 4 {
        rep.achievable = Some(11);
        rep = rep.note("an explicit ensemble of 11 = 4d - 5 vectors is phase retrievable");
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    RealPr,
    ComplexPr,
    StandardPr,
}

impl SweepKind {
    pub fn parse(s: &str) -> Option<SweepKind> {
        Some(match s {
            "real_pr" => SweepKind::RealPr,
            "complex_pr" => SweepKind::ComplexPr,
            "standard_pr" => SweepKind::StandardPr,
            _ => return None,
        })
    }

    pub fn report(&self, d: usize) -> Result<BoundsReport> {
        match self {
            SweepKind::RealPr => real_pr_bounds(d),
            SweepKind::ComplexPr => complex_pr_bounds(d),
            SweepKind::StandardPr => standard_pr_facts(d),
        }
    }
}

pub fn bounds_sweep(kind: SweepKind, ds: std::ops::RangeInclusive<usize>) -> Result<Vec<BoundsReport>> {
    ds.map(|d| kind.report(d)).collect()
}

/// Columns `d,lower,upper,exact,regime`; `exact` is empty when unknown.
pub fn sweep_to_csv(reports: &[BoundsReport]) -> String {
    let mut out = String::from("d,lower,upper,exact,regime\n");
    for r in reports {
        let d = match r.setting {
            Setting::RealPr { d } | Setting::ComplexPr { d } | Setting::StandardPr { d } => d,
            Setting::Sparse { d, .. } | Setting::LowRank { d, .. } => d,
            Setting::GenericVariety { dim_w, .. } => dim_w,
        };
        let exact = r.exact.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!("{d},{},{},{exact},\"{}\"\n", r.lower, r.upper, r.regime));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(3), 2);
        assert_eq!(alpha(4), 1);
        assert_eq!(alpha(14), 3);
        assert_eq!(BinaryProfile::new(11).alpha, 3);
    }

    #[test]
    fn generic_and_codim() {
        assert_eq!(codim_bad_set(12, 12).unwrap(), 1);
        assert!(codim_bad_set(11, 12).is_err());
        assert_eq!(generic_variety(12, 14).codim_bad_set, Some(3));
        assert_eq!(generic_variety(12, 10).codim_bad_set, None);
    }

    #[test]
    fn sparse_examples() {
        assert_eq!(sparse_minimal(8, 2).unwrap().exact, Some(4));
        assert_eq!(sparse_minimal(100, 7).unwrap().exact, Some(14));
        assert_eq!(sparse_minimal(5, 0).unwrap().exact, Some(0));
        assert!(sparse_minimal(5, 3).is_err());
    }

    #[test]
    fn lowrank_examples() {
        assert_eq!(lowrank_minimal(4, 1, Field::Complex).unwrap().exact, Some(12));
        let r = lowrank_minimal(5, 1, Field::Real).unwrap();
        assert_eq!(r.exact, Some(16));
        assert!(r.regime.contains("2^k + r"));
        let r = lowrank_minimal(4, 1, Field::Real).unwrap();
        assert_eq!((r.upper, r.achievable, r.exact), (12, Some(11), None));
        assert!(r.is_consistent());
        // d = 2r + 1.
        assert_eq!(lowrank_minimal(7, 3, Field::Real).unwrap().exact, Some(48));
        // d = 2^0 + r.
        assert_eq!(lowrank_minimal(2, 1, Field::Real).unwrap().exact, Some(4));
    }

    #[test]
    fn real_pr_examples() {
        assert_eq!(real_pr_bounds(5).unwrap().exact, Some(9));
        assert_eq!(real_pr_bounds(6).unwrap().exact, Some(10));
        let r = real_pr_bounds(7).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (8, 13, None));
        assert_eq!(real_pr_bounds(3).unwrap().exact, Some(5));
        assert_eq!(real_pr_bounds(4).unwrap().lower, 1);
    }

    #[test]
    fn complex_pr_examples() {
        let r = complex_pr_bounds(5).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (16, 16, Some(16)));
        let r = complex_pr_bounds(7).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (23, 23, Some(23)));
        let r = complex_pr_bounds(12).unwrap();
        assert_eq!((r.lower, r.upper, r.exact), (40, 41, None));
        assert_eq!(complex_pr_bounds(6).unwrap().exact, Some(18));
        assert_eq!(complex_pr_bounds(9).unwrap().exact, Some(32));
        assert_eq!(complex_pr_bounds(15).unwrap().exact, Some(54));
        assert_eq!(complex_pr_bounds(2).unwrap().exact, Some(3));
        assert_eq!(complex_pr_bounds(4).unwrap().lower, 1);
    }

    #[test]
    fn standard_pr_examples() {
        let r = standard_pr_facts(4).unwrap();
        assert_eq!((r.lower, r.upper, r.achievable), (9, 12, Some(11)));
        assert_eq!(standard_pr_facts(5).unwrap().exact, Some(16));
        let r = standard_pr_facts(3).unwrap();
        assert_eq!((r.lower, r.upper), (7, 8));
    }

    #[test]
    fn csv_layout() {
        let rows = bounds_sweep(SweepKind::ComplexPr, 5..=6).unwrap();
        let csv = sweep_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("d,lower,upper,exact,regime"));
        assert!(lines.next().unwrap().starts_with("5,16,16,16,"));
    }
}
