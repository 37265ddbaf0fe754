//! Yield sweeps, comparisons against hashing, crossover search and the
//! large-block limit of the AEPP closed form.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{binary_entropy, parity_prob_from_infidelity, werner};
use crate::error::{check_fidelity, Error, Result};
use crate::protocols::{
    hashing_yield, hashing_yield_raw, theorem_yield, yield_at, Family, ProtocolSpec, MAX_EXPONENT, THEOREM_MAX_EXPONENT,
};

/// Evenly spaced fidelities `min, …, max` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        check_fidelity(min)?;
        check_fidelity(max)?;
        let ok = match count {
            0 => false,
            1 => min == max,
            _ => min < max,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "grid {min}:{max}:{count} needs min < max and count >= 2, or min = max and count = 1"
            )));
        }
        Ok(Grid { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

impl Default for Grid {
    /// 200 points over `[0.5, 1]`.
    fn default() -> Self {
        Grid {
            min: 0.5,
            max: 1.0,
            count: 200,
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `min:max:count`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Domain(format!(
                "malformed grid {s:?}; expected min:max:count, e.g. 0.5:1.0:200"
            ))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(bad());
        };
        Grid::new(
            min.trim().parse().map_err(|_| bad())?,
            max.trim().parse().map_err(|_| bad())?,
            count.trim().parse().map_err(|_| bad())?,
        )
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

/// Something with a yield curve: a single protocol or the AEPP(a, 2^n)
/// envelope over `n = 1..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Protocol(ProtocolSpec),
    Envelope { n_max: u32 },
}

impl Target {
    pub fn envelope(n_max: u32) -> Result<Self> {
        if !(1..=MAX_EXPONENT).contains(&n_max) {
            return Err(Error::Domain(format!(
                "envelope needs n_max in 1..={MAX_EXPONENT}, got {n_max}"
            )));
        }
        Ok(Target::Envelope { n_max })
    }

    pub fn yield_at(&self, fidelity: f64) -> Result<f64> {
        match self {
            Target::Protocol(spec) => Ok(yield_at(spec, fidelity)?.yield_value),
            Target::Envelope { n_max } => aepp_envelope_yield(fidelity, *n_max),
        }
    }
}

impl From<ProtocolSpec> for Target {
    fn from(spec: ProtocolSpec) -> Self {
        Target::Protocol(spec)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Protocol(spec) => spec.fmt(f),
            Target::Envelope { n_max } => write!(f, "envelope-n{n_max}"),
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    /// Protocol names, plus `envelope` (n ≤ 6) and `envelope-nK`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "envelope" {
            return Target::envelope(MAX_EXPONENT);
        }
        if let Some(n) = s.strip_prefix("envelope-n") {
            let n = n
                .parse()
                .map_err(|_| Error::Domain(format!("malformed envelope name {s:?}")))?;
            return Target::envelope(n);
        }
        Ok(Target::Protocol(s.parse()?))
    }
}

/// Best floored AEPP(a, 2^n) yield over `n = 1..=n_max`.
pub fn aepp_envelope_yield(fidelity: f64, n_max: u32) -> Result<f64> {
    Target::envelope(n_max)?;
    let mut best = 0.0f64;
    for n in 1..=n_max {
        best = best.max(yield_at(&ProtocolSpec::aepp_a(n)?, fidelity)?.yield_value);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fidelity: f64,
    #[serde(rename = "yield")]
    pub yield_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldCurve {
    pub target: Target,
    pub grid: Grid,
    pub points: Vec<CurvePoint>,
}

impl YieldCurve {
    pub fn yields(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.yield_value).collect()
    }
}

/// Exact yields of `target` on every grid point, computed in parallel and
/// returned in grid order.
pub fn sweep(target: &Target, grid: &Grid) -> Result<YieldCurve> {
    let points = grid
        .points()
        .into_par_iter()
        .map(|f| {
            Ok(CurvePoint {
                fidelity: f,
                yield_value: target.yield_at(f)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(YieldCurve {
        target: *target,
        grid: *grid,
        points,
    })
}

/// Sweeps several targets over the same grid.
pub fn compare(targets: &[Target], grid: &Grid) -> Result<Vec<YieldCurve>> {
    targets.iter().map(|t| sweep(t, grid)).collect()
}

/// Grid intervals `[first, last]` on which `upper` falls below `lower` by
/// more than `tol`.
pub fn ordering_violations(upper: &YieldCurve, lower: &YieldCurve, tol: f64) -> Result<Vec<(f64, f64)>> {
    if upper.grid != lower.grid {
        return Err(Error::Domain("curves are on different grids".into()));
    }
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let mut open = false;
    for (u, l) in upper.points.iter().zip(&lower.points) {
        if u.yield_value < l.yield_value - tol {
            match (open, runs.last_mut()) {
                (true, Some(run)) => run.1 = u.fidelity,
                _ => runs.push((u.fidelity, u.fidelity)),
            }
            open = true;
        } else {
            open = false;
        }
    }
    Ok(runs)
}

/// Default bisection bracket for [`find_crossover`].
pub const CROSSOVER_RANGE: (f64, f64) = (0.9, 0.9999);
/// Default final bracket width.
pub const CROSSOVER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverResult {
    pub target: Target,
    pub f_cross: f64,
    /// Bracket `(lo, hi)` across which `yield − hashing` changes sign.
    pub bracket: (f64, f64),
    pub iterations: u32,
}

impl CrossoverResult {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

fn hashing_gap(target: &Target, fidelity: f64) -> Result<f64> {
    Ok(target.yield_at(fidelity)? - hashing_yield(&werner(fidelity)?))
}

/// Fidelity in `(lo, hi)` at which the yield of `target` meets the hashing
/// yield, by bisection down to a bracket of width `tol`.
pub fn find_crossover(target: &Target, lo: f64, hi: f64, tol: f64) -> Result<CrossoverResult> {
    check_fidelity(lo)?;
    check_fidelity(hi)?;
    if lo >= hi || tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("bad bracket ({lo}, {hi}) or tolerance {tol}")));
    }
    let (mut a, mut b) = (lo, hi);
    let ga = hashing_gap(target, a)?;
    let gb = hashing_gap(target, b)?;
    if ga == 0.0 || gb == 0.0 || ga.signum() == gb.signum() {
        return Err(Error::NoCrossover { lo, hi });
    }
    let left_positive = ga > 0.0;
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let g = hashing_gap(target, mid)?;
        if (g > 0.0) == left_positive {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(CrossoverResult {
        target: *target,
        f_cross: 0.5 * (a + b),
        bracket: (a, b),
        iterations,
    })
}

/// `p* = (1 + e^{−4/3}) / 2`, the limit of the even-parity probability at
/// `F = 1 − 2^{−n}`, `K = 2^n`.
pub fn p_star() -> f64 {
    0.5 * (1.0 + (-4.0f64 / 3.0).exp())
}

/// Largest `n` for [`asymptotic_check`].
pub const ASYMPTOTIC_MAX_EXPONENT: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u32,
    pub fidelity: f64,
    pub p: f64,
    /// `p − p*`
    pub deviation: f64,
}

/// Even-parity probability along `F = (2^n − 1)/2^n`, `K = 2^n` for
/// `n = 1..=n_max`.
pub fn asymptotic_check(n_max: u32) -> Result<Vec<AsymptoticRow>> {
    if !(1..=ASYMPTOTIC_MAX_EXPONENT).contains(&n_max) {
        return Err(Error::Domain(format!(
            "n_max must be in 1..={ASYMPTOTIC_MAX_EXPONENT}, got {n_max}"
        )));
    }
    let target = p_star();
    (1..=n_max)
        .map(|n| {
            let infidelity = (-f64::from(n)).exp2();
            let p = parity_prob_from_infidelity(infidelity, 1u64 << n)?;
            Ok(AsymptoticRow {
                n,
                fidelity: 1.0 - infidelity,
                p,
                deviation: p - target,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HashingAdvantage {
    pub n: u32,
    pub fidelity: f64,
    pub theorem_yield: f64,
    /// `1 − H(F,G,G,G)`, unfloored.
    pub hashing_yield: f64,
    /// `1 − H(F,G,G,G) + (H(p*) − p*)/N`
    pub bound: f64,
    pub margin_over_hashing: f64,
    pub margin_over_bound: f64,
    /// `n = 1` is far from the large-`n` regime and only reported.
    pub informational: bool,
}

/// Closed-form AEPP(a, 2^n) yield at `F = (2^n − 1)/2^n` next to hashing
/// and the large-`n` lower bound.
pub fn hashing_advantage_bound(n: u32) -> Result<HashingAdvantage> {
    if !(1..=THEOREM_MAX_EXPONENT).contains(&n) {
        return Err(Error::Domain(format!(
            "n must be in 1..={THEOREM_MAX_EXPONENT}, got {n}"
        )));
    }
    let block = (1u64 << n) as f64;
    let fidelity = (block - 1.0) / block;
    let ty = theorem_yield(n, fidelity)?;
    let hashing = hashing_yield_raw(&werner(fidelity)?);
    let ps = p_star();
    let bound = hashing + (binary_entropy(ps) - ps) / block;
    Ok(HashingAdvantage {
        n,
        fidelity,
        theorem_yield: ty,
        hashing_yield: hashing,
        bound,
        margin_over_hashing: ty - hashing,
        margin_over_bound: ty - bound,
        informational: n == 1,
    })
}

/// The usual comparison set: AEPP(a, 2^n) for
/// `n = 2..=6`, the earlier protocols, AEPP*(a,4) and hashing.
pub fn comparison_targets() -> Vec<Target> {
    let mut out: Vec<Target> = (2..=MAX_EXPONENT)
        .map(|n| Target::Protocol(ProtocolSpec::aepp_a(n).expect("exponent in range")))
        .collect();
    for family in [
        Family::Recurrence,
        Family::ModifiedRecurrence,
        Family::LeungShor,
        Family::AeppStar4,
        Family::Hashing,
    ] {
        out.push(Target::Protocol(ProtocolSpec::of(family)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_hit_both_ends() {
        let g: Grid = "0.5:1.0:200".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 200);
        assert_eq!(p[0], 0.5);
        assert_eq!(p[199], 1.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!("0.5:1.0".parse::<Grid>().is_err());
        assert!("1.0:0.5:10".parse::<Grid>().is_err());
        assert!("0.5:1.5:10".parse::<Grid>().is_err());
        assert_eq!("0.7:0.7:1".parse::<Grid>().unwrap().points(), vec![0.7]);
    }

    #[test]
    fn target_names() {
        assert_eq!("envelope".parse::<Target>().unwrap(), Target::Envelope { n_max: 6 });
        assert_eq!("envelope-n3".parse::<Target>().unwrap().to_string(), "envelope-n3");
        assert_eq!("hashing".parse::<Target>().unwrap().to_string(), "hashing");
        assert!("envelope-n9".parse::<Target>().is_err());
    }

    #[test]
    fn hashing_against_itself_has_no_crossover() {
        let t = Target::Protocol(ProtocolSpec::of(Family::Hashing));
        assert!(matches!(
            find_crossover(&t, 0.9, 0.9999, 1e-6),
            Err(Error::NoCrossover { .. })
        ));
    }

    #[test]
    fn first_asymptotic_row_is_five_ninths() {
        let rows = asymptotic_check(3).unwrap();
        assert!((rows[0].p - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(rows[0].fidelity, 0.5);
        assert!(asymptotic_check(61).is_err());
    }

    #[test]
    fn bound_correction_is_positive() {
        let ps = p_star();
        assert!(binary_entropy(ps) - ps > 0.0);
        assert!(hashing_advantage_bound(1).unwrap().informational);
    }

    #[test]
    fn violations_group_consecutive_points() {
        let grid = Grid::new(0.0, 0.4, 5).unwrap();
        let mk = |ys: [f64; 5]| YieldCurve {
            target: Target::Envelope { n_max: 1 },
            grid,
            points: grid
                .points()
                .into_iter()
                .zip(ys)
                .map(|(fidelity, yield_value)| CurvePoint { fidelity, yield_value })
                .collect(),
        };
        let upper = mk([1.0, 0.0, 0.0, 1.0, 0.0]);
        let lower = mk([0.5; 5]);
        let v = ordering_violations(&upper, &lower, 0.0).unwrap();
        assert_eq!(v, vec![(0.1, 0.2), (0.4, 0.4)]);
    }
}
