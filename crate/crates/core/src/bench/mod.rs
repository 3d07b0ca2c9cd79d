//! The f₀/g₀ protocol, the measure tables, and the registered experiments
//! whose reports back the command-line tool.

mod probe;
mod report;

use num_traits::{One, Zero};
use serde::Deserialize;

pub use probe::{
    choose_t, majority_probe, make_f0, make_g0, probe_trial, run_probe, worst_case_input, worst_case_weights,
    ProbeAnswer, ProbeConfig, ProbeSummary, ProbeTrial,
};
pub use report::{render, significant, Format, Provenance, Row};

use crate::conflict::{chi_search, chibar_lower_bound, default_candidates, sabotage, ChiSearchConfig};
use crate::dist::Dist;
use crate::dtree::{distributional_opt, optimal_depth, TreeSearchBudget};
use crate::error::{Error, Result};
use crate::function::PartialFunction;
use crate::games::{randomized_complexity, DEFAULT_MAX_ROUNDS};
use crate::scalar::{rational_text, Scalar};
use crate::verify::{self, catalog, SuiteConfig};
use crate::Rational;

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "QCLAB_THREADS";

/// Runs `f` on a pool of at most `QCLAB_THREADS` workers when the variable
/// is set, otherwise on the global pool.
pub fn with_workers<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(f()),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_VAR} must be a positive integer")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasureOptions {
    pub epsilon: Rational,
    /// Input distribution for `D^μ_ε`.
    pub mu: Option<Dist<Rational>>,
    pub budget: TreeSearchBudget,
    pub max_rounds: usize,
    pub search: ChiSearchConfig,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions {
            epsilon: Rational::ratio(1, 3),
            mu: None,
            budget: TreeSearchBudget::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            search: ChiSearchConfig::default(),
        }
    }
}

/// A value row, or a budget row when the search hit a cap.
fn cell(experiment: &str, instance: &str, quantity: &str, result: Result<(String, Provenance)>) -> Result<Row> {
    match result {
        Ok((v, p)) => Ok(Row::new(experiment, instance, quantity, v, p)),
        Err(e @ Error::Budget { .. }) => Ok(Row::new(
            experiment,
            instance,
            quantity,
            e.to_string(),
            Provenance::Budget,
        )),
        Err(e) => Err(e),
    }
}

fn certified(ok: bool) -> Provenance {
    if ok {
        Provenance::Exact
    } else {
        Provenance::NonCertified
    }
}

/// Rows for `D`, `D^μ_ε`, the `R_ε` bracket, `RS`, and the `χ` and `χ̄`
/// lower bounds of `g`.
pub fn measure_rows(experiment: &str, name: &str, g: &PartialFunction, opts: &MeasureOptions) -> Result<Vec<Row>> {
    let eps = &opts.epsilon;
    let b = &opts.budget;
    let eps_text = rational_text(eps);
    let mut rows = vec![cell(
        experiment,
        name,
        "D",
        optimal_depth(g, b).map(|(d, _)| (d.to_string(), Provenance::Exact)),
    )?];
    if let Some(mu) = &opts.mu {
        let dmu = (|| {
            let (d, _) = optimal_depth(g, b)?;
            for depth in 0..=d {
                if distributional_opt(g, mu, depth, b)?.0 <= *eps {
                    return Ok((depth.to_string(), Provenance::Exact));
                }
            }
            Err(Error::Defect("an exact tree has zero error".into()))
        })();
        rows.push(cell(experiment, name, &format!("D^mu_{eps_text}"), dmu)?);
    }
    match randomized_complexity(g, eps, b, opts.max_rounds) {
        Ok(r) => {
            let lower = r.per_depth.iter().find(|d| d.lo <= *eps).map_or(r.value, |d| d.depth);
            let p = certified(r.certified);
            rows.push(Row::new(
                experiment,
                name,
                format!("R_{eps_text} lower"),
                lower.to_string(),
                p,
            ));
            rows.push(Row::new(
                experiment,
                name,
                format!("R_{eps_text} upper"),
                r.value.to_string(),
                p,
            ));
        }
        Err(e) => rows.push(cell(experiment, name, &format!("R_{eps_text}"), Err(e))?),
    }
    rows.push(cell(
        experiment,
        name,
        "RS",
        sabotage::<Rational>(g, b).map(|s| (rational_text(&s.value), certified(s.certified))),
    )?);
    rows.push(cell(
        experiment,
        name,
        "chi lower bound",
        chi_search::<Rational>(g, &opts.search, b).map(|s| (rational_text(&s.value), Provenance::LowerBound)),
    )?);
    let chibar = default_candidates::<Rational>(g).and_then(|c| chibar_lower_bound(g, &c, b));
    rows.push(cell(
        experiment,
        name,
        "chibar lower bound",
        chibar.map(|c| {
            let p = if c.certified {
                Provenance::LowerBound
            } else {
                Provenance::NonCertified
            };
            (rational_text(&c.value), p)
        }),
    )?);
    Ok(rows)
}

/// An experiment request, read from JSON.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub n: Option<usize>,
    pub epsilon: Option<String>,
}

pub const EXPERIMENTS: &[&str] = &[
    "measure-catalog",
    "simulation-check",
    "direct-sum",
    "composition",
    "f0g0",
];

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    fn epsilon(&self) -> Result<Rational> {
        self.epsilon
            .as_deref()
            .map_or(Ok(Rational::ratio(1, 3)), Rational::parse)
    }
}

fn suite_rows(experiment: &str, suite: &str, spec: &ExperimentSpec) -> Result<Vec<Row>> {
    let cfg = SuiteConfig {
        seed: spec.seed,
        samples: spec.samples.or(spec.trials),
        ..SuiteConfig::default()
    };
    let out = verify::run_suite(suite, &cfg)?;
    let mut rows = vec![
        Row::count(experiment, suite, "checks", out.checks),
        Row::count(experiment, suite, "failed", out.failed),
        Row::count(experiment, suite, "all hold", out.passed()),
    ];
    for c in out.counterexamples {
        rows.push(Row::new(experiment, suite, "counterexample", c, Provenance::Exact));
    }
    Ok(rows)
}

/// Rows of the f₀∘g₀ protocol run.
pub fn probe_rows(cfg: &ProbeConfig) -> Result<Vec<Row>> {
    let s = run_probe(cfg)?;
    let inst = format!("n={}, epsilon={}, seed={}", cfg.n, significant(cfg.epsilon), cfg.seed);
    let e = "f0g0";
    Ok(vec![
        Row::count(e, inst.clone(), "t", cfg.t),
        Row::count(e, inst.clone(), "trials", cfg.trials),
        Row::count(e, inst.clone(), "failures", s.failures),
        Row::monte_carlo(e, inst.clone(), "error rate", s.error_rate(), s.sigma()),
        Row::count(e, inst.clone(), "worst wrong blocks", s.worst_wrong),
        Row::count(
            e,
            inst.clone(),
            "probes per trial",
            s.probes_per_trial.map_or("varies".to_string(), |p| p.to_string()),
        ),
        Row::count(e, inst, "within epsilon + 3 sigma", s.within_gate()),
    ])
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    match spec.experiment.as_str() {
        "measure-catalog" => {
            let opts = MeasureOptions {
                epsilon: spec.epsilon()?,
                search: ChiSearchConfig {
                    seed: spec.seed,
                    ..ChiSearchConfig::default()
                },
                ..MeasureOptions::default()
            };
            let mut rows = Vec::new();
            for (name, g) in catalog() {
                rows.extend(measure_rows("measure-catalog", name, &g, &opts)?);
            }
            Ok(rows)
        }
        "simulation-check" => suite_rows("simulation-check", "simulation", spec),
        "direct-sum" => suite_rows("direct-sum", "direct-sum", spec),
        "composition" => {
            let run = verify::composition_run(&TreeSearchBudget::default())?;
            let e = "composition";
            let inst = "parity2 o OR2";
            let mut rows = vec![
                Row::count(e, inst, "depth of A'", run.depth),
                Row::new(
                    e,
                    inst,
                    "chibar lower bound",
                    rational_text(&run.chibar),
                    Provenance::LowerBound,
                ),
                Row::exact(e, inst, "query bound", &run.bound()),
            ];
            for (z, ok, q) in &run.per_z {
                rows.push(Row::exact(e, format!("z={z}"), "success probability", ok));
                rows.push(Row::exact(e, format!("z={z}"), "expected z-queries", q));
            }
            let holds = run.per_z.iter().all(|(_, ok, q)| ok.is_one() && *q <= run.bound());
            rows.push(Row::count(e, inst, "all hold", holds));
            Ok(rows)
        }
        "f0g0" => {
            let eps = spec.epsilon()?;
            if eps <= Rational::zero() {
                return Err(Error::Domain("epsilon must be positive".into()));
            }
            let cfg = ProbeConfig::new(
                spec.n.unwrap_or(1600),
                eps.to_f64(),
                spec.trials.unwrap_or(200),
                spec.seed,
            )?;
            probe_rows(&cfg)
        }
        other => Err(Error::Config(format!(
            "unknown experiment `{other}` (known: {})",
            EXPERIMENTS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value<'a>(rows: &'a [Row], inst: &str, q: &str) -> &'a Row {
        rows.iter()
            .find(|r| r.instance == inst && r.quantity == q)
            .unwrap_or_else(|| panic!("no {inst}/{q}"))
    }

    #[test]
    fn catalog_table() {
        let spec = ExperimentSpec {
            experiment: "measure-catalog".into(),
            ..ExperimentSpec::default()
        };
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(value(&rows, "OR2", "RS").value, "3/2");
        assert_eq!(value(&rows, "OR2", "RS").provenance, Provenance::Exact);
        assert_eq!(value(&rows, "g0(4)", "D").value, "1");
        assert_eq!(value(&rows, "g0(4)", "RS").value, "1/1");
        assert_eq!(value(&rows, "XOR2", "R_1/3 upper").value, "2");
        assert_eq!(
            value(&rows, "OR2", "chi lower bound").provenance,
            Provenance::LowerBound
        );
        assert_eq!(run_experiment(&spec).unwrap(), rows);
    }

    #[test]
    fn other_experiments() {
        let spec = ExperimentSpec::from_json(r#"{"experiment": "simulation-check", "seed": 2, "samples": 5}"#).unwrap();
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(value(&rows, "simulation", "all hold").value, "true");
        let comp = run_experiment(&ExperimentSpec {
            experiment: "composition".into(),
            ..ExperimentSpec::default()
        })
        .unwrap();
        assert_eq!(value(&comp, "parity2 o OR2", "all hold").value, "true");
        let infeasible = ExperimentSpec::from_json(r#"{"experiment": "f0g0", "n": 400}"#).unwrap();
        assert!(matches!(
            run_experiment(&infeasible),
            Err(Error::Infeasible { min_n: 441, .. })
        ));
        assert!(matches!(
            run_experiment(&ExperimentSpec {
                experiment: "nope".into(),
                ..ExperimentSpec::default()
            }),
            Err(Error::Config(_))
        ));
        assert!(ExperimentSpec::from_json(r#"{"experiment": "f0g0", "bogus": 1}"#).is_err());
    }

    #[test]
    fn measure_with_distribution() {
        let g = PartialFunction::or(2);
        let mu = Dist::point("00".parse().unwrap());
        let opts = MeasureOptions {
            mu: Some(mu),
            ..MeasureOptions::default()
        };
        let rows = measure_rows("measure", "OR2", &g, &opts).unwrap();
        assert_eq!(value(&rows, "OR2", "D^mu_1/3").value, "0");
        let tight = MeasureOptions {
            budget: TreeSearchBudget::new(3, 100_000, 2).unwrap(),
            ..MeasureOptions::default()
        };
        let rows = measure_rows("measure", "MAJ3", &PartialFunction::majority(3), &tight).unwrap();
        assert_eq!(value(&rows, "MAJ3", "D").provenance, Provenance::Budget);
    }

    #[test]
    fn thread_cap_variable() {
        assert_eq!(with_workers(|| 5).unwrap(), 5);
    }
}
