use aepp_core::analysis::{
    asymptotic_check, comparison_targets, find_crossover, hashing_advantage_bound, sweep, Grid, Target,
    ASYMPTOTIC_MAX_EXPONENT,
};
use aepp_core::montecarlo::{estimate, DEFAULT_SIGMA};
use aepp_core::protocols::{
    aepp, evaluate_dense, evaluate_structural, evaluate_yield, theorem_yield, yield_at, Accounting, Family,
    ProtocolSpec, THEOREM_MAX_EXPONENT,
};
use aepp_core::{bell::werner, bell::Axis, Error};
use anyhow::{bail, Result};

use crate::args::{AsymptoteArgs, Command, CompareArgs, CrossoverArgs, McArgs, Selection, SweepArgs, YieldArgs};
use crate::output::{CrossoverRow, Document, McRow, McSummary, Params, PointRow};

/// Result of a command: the document and whether its own checks passed.
pub struct Run {
    pub document: Document,
    pub checks_passed: bool,
}

pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Sweep(_) => "sweep",
        Command::Yield(_) => "yield",
        Command::Crossover(_) => "crossover",
        Command::Mc(_) => "mc",
        Command::Asymptote(_) => "asymptote",
        Command::Compare(_) => "compare",
    }
}

pub fn execute(command: &Command) -> Result<Run> {
    let document = match command {
        Command::Sweep(a) => run_sweep(a)?,
        Command::Yield(a) => run_yield(a)?,
        Command::Crossover(a) => run_crossover(a)?,
        Command::Mc(a) => {
            let doc = run_mc(a)?;
            let passed = doc.mc.iter().flatten().all(|m| m.within_4_sigma);
            return Ok(Run {
                document: doc,
                checks_passed: passed,
            });
        }
        Command::Asymptote(a) => run_asymptote(a)?,
        Command::Compare(a) => run_compare(a)?,
    };
    let in_range = document
        .points
        .iter()
        .flatten()
        .all(|p| p.yield_value.is_finite() && (0.0..=1.0).contains(&p.yield_value));
    Ok(Run {
        document,
        checks_passed: in_range,
    })
}

/// A bad protocol selection; reported like a command-line usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn targets(selection: &Selection) -> Result<Vec<Target>> {
    selection.targets().map_err(|e| UsageError(e).into())
}

fn names(targets: &[Target]) -> Vec<String> {
    targets.iter().map(Target::to_string).collect()
}

fn curve_rows(targets: &[Target], grid: &Grid) -> Result<Vec<PointRow>> {
    let mut rows = Vec::new();
    for t in targets {
        let curve = sweep(t, grid)?;
        rows.extend(curve.points.iter().map(|p| PointRow {
            fidelity: p.fidelity,
            protocol: t.to_string(),
            yield_value: p.yield_value,
        }));
    }
    Ok(rows)
}

fn run_sweep(a: &SweepArgs) -> Result<Document> {
    let targets = targets(&a.selection)?;
    let mut doc = Document::new(
        "sweep",
        Params {
            protocols: names(&targets),
            grid: Some(a.grid),
            ..Params::default()
        },
    );
    doc.points = Some(curve_rows(&targets, &a.grid)?);
    Ok(doc)
}

fn run_yield(a: &YieldArgs) -> Result<Document> {
    let targets = targets(&a.selection)?;
    let mut points = Vec::new();
    let mut yields = Vec::new();
    for t in &targets {
        let y = t.yield_at(a.fidelity)?;
        points.push(PointRow {
            fidelity: a.fidelity,
            protocol: t.to_string(),
            yield_value: y,
        });
        if let Target::Protocol(spec) = t {
            yields.push(yield_at(spec, a.fidelity)?);
        }
    }
    let mut doc = Document::new(
        "yield",
        Params {
            protocols: names(&targets),
            fidelity: Some(a.fidelity),
            ..Params::default()
        },
    );
    doc.points = Some(points);
    doc.yields = Some(yields);
    Ok(doc)
}

fn run_crossover(a: &CrossoverArgs) -> Result<Document> {
    let targets = targets(&a.selection)?;
    let mut rows = Vec::new();
    for t in &targets {
        let row = match find_crossover(t, a.lo, a.hi, a.tol) {
            Ok(c) => CrossoverRow {
                protocol: t.to_string(),
                found: true,
                f_cross: Some(c.f_cross),
                lo: Some(c.bracket.0),
                hi: Some(c.bracket.1),
                iterations: Some(c.iterations),
            },
            Err(Error::NoCrossover { lo, hi }) => {
                eprintln!("{t}: no crossover in range ({lo}, {hi})");
                CrossoverRow {
                    protocol: t.to_string(),
                    found: false,
                    f_cross: None,
                    lo: None,
                    hi: None,
                    iterations: None,
                }
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(row);
    }
    let mut doc = Document::new(
        "crossover",
        Params {
            protocols: names(&targets),
            bracket: Some((a.lo, a.hi)),
            tol: Some(a.tol),
            ..Params::default()
        },
    );
    doc.crossovers = Some(rows);
    Ok(doc)
}

fn run_mc(a: &McArgs) -> Result<Document> {
    let targets = targets(&a.selection)?;
    let mut branches = Vec::new();
    let mut summaries = Vec::new();
    for t in &targets {
        let Target::Protocol(spec) = t else {
            bail!("{t} is not a single protocol and cannot be sampled");
        };
        let report = estimate(spec, a.fidelity, a.shots, a.seed)?;
        let name = spec.to_string();
        branches.extend(report.branches.iter().map(|b| McRow {
            protocol: name.clone(),
            key: b.key.clone(),
            count: b.count,
            trials: b.trials,
            frequency: b.frequency,
            exact: b.exact,
            z: b.z.is_finite().then_some(b.z),
        }));
        let max_z = report.max_abs_z();
        summaries.push(McSummary {
            protocol: name,
            fidelity: a.fidelity,
            shots: a.shots,
            seed: a.seed,
            empirical_yield: report.empirical_yield,
            exact_yield: yield_at(spec, a.fidelity)?.yield_value,
            max_abs_z: max_z.is_finite().then_some(max_z),
            within_4_sigma: report.within(DEFAULT_SIGMA),
        });
    }
    let mut doc = Document::new(
        "mc",
        Params {
            protocols: names(&targets),
            fidelity: Some(a.fidelity),
            shots: Some(a.shots),
            seed: Some(a.seed),
            ..Params::default()
        },
    );
    doc.branches = Some(branches);
    doc.mc = Some(summaries);
    Ok(doc)
}

fn run_asymptote(a: &AsymptoteArgs) -> Result<Document> {
    let mut doc = Document::new(
        "asymptote",
        Params {
            n_max: Some(a.n_max),
            ..Params::default()
        },
    );
    if a.advantage {
        if !(1..=THEOREM_MAX_EXPONENT).contains(&a.n_max) {
            bail!("--advantage needs --n-max in 1..={THEOREM_MAX_EXPONENT}");
        }
        doc.advantage = Some(
            (1..=a.n_max)
                .map(hashing_advantage_bound)
                .collect::<aepp_core::Result<_>>()?,
        );
    } else {
        if !(1..=ASYMPTOTIC_MAX_EXPONENT).contains(&a.n_max) {
            bail!("--n-max must be in 1..={ASYMPTOTIC_MAX_EXPONENT}");
        }
        doc.asymptote = Some(asymptotic_check(a.n_max)?);
    }
    Ok(doc)
}

fn run_compare(a: &CompareArgs) -> Result<Document> {
    let targets = if a.protocol.is_empty() {
        let mut t = comparison_targets();
        t.push(Target::envelope(a.n_max)?);
        t
    } else {
        targets(&Selection {
            protocol: a.protocol.clone(),
            n: a.n.clone(),
            n_max: a.n_max,
        })?
    };
    let points = curve_rows(&targets, &a.grid)?;
    let grid = a.grid.points();
    let best = grid
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            // rows are grouped by target, each in grid order
            let winner = (0..targets.len())
                .map(|k| &points[k * grid.len() + i])
                .fold(None::<&PointRow>, |best, p| match best {
                    Some(b) if b.yield_value >= p.yield_value => Some(b),
                    _ => Some(p),
                })
                .expect("at least one target");
            PointRow {
                fidelity: f,
                protocol: winner.protocol.clone(),
                yield_value: winner.yield_value,
            }
        })
        .collect();
    let mut doc = Document::new(
        "compare",
        Params {
            protocols: names(&targets),
            grid: Some(a.grid),
            n_max: Some(a.n_max),
            ..Params::default()
        },
    );
    doc.points = Some(points);
    doc.best = Some(best);
    Ok(doc)
}

/// Outcome of one self-check.
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Cross-evaluator and Monte-Carlo self-checks.
pub fn self_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for n in 1..=3 {
        for i in 0..=50 {
            let f = 0.5 + 0.01 * f64::from(i);
            let tree = evaluate_dense(&aepp(n, Axis::Z)?, &werner(f)?)?;
            let exact = evaluate_yield(&tree, 1 << n, Accounting::Raw)?;
            worst = worst.max((exact - theorem_yield(n, f)?).abs());
        }
    }
    checks.push(Check {
        name: "tree vs closed form".into(),
        passed: worst <= 1e-9,
        detail: format!("max deviation {worst:.2e}"),
    });

    let mut worst = 0.0f64;
    for n in 1..=3 {
        for f in [0.6, 0.8, 0.95] {
            let p = aepp(n, Axis::Z)?;
            let dense = evaluate_dense(&p, &werner(f)?)?;
            let structural = evaluate_structural(&p, &werner(f)?)?;
            let d = evaluate_yield(&dense, 1 << n, Accounting::Raw)?;
            let s = evaluate_yield(&structural, 1 << n, Accounting::Raw)?;
            worst = worst.max((d - s).abs());
        }
    }
    checks.push(Check {
        name: "dense vs structural evaluation".into(),
        passed: worst <= 1e-9,
        detail: format!("max deviation {worst:.2e}"),
    });

    let specs = [
        ProtocolSpec::aepp_a(3)?,
        ProtocolSpec::aepp_p(2)?,
        ProtocolSpec::maneva_smolin(2)?,
        ProtocolSpec::of(Family::LeungShor),
        ProtocolSpec::of(Family::AeppStar4),
        ProtocolSpec::of(Family::Recurrence),
        ProtocolSpec::of(Family::ModifiedRecurrence),
    ];
    for spec in specs {
        for f in [0.7, 0.85, 0.95] {
            let r = estimate(&spec, f, 200_000, 7)?;
            checks.push(Check {
                name: format!("Monte-Carlo {spec} at F={f}"),
                passed: r.within(DEFAULT_SIGMA),
                detail: format!("max |z| {:.2}", r.max_abs_z()),
            });
        }
    }
    Ok(checks)
}
