//! Named property suites. Each suite draws its instances from per-instance
//! substreams of a master seed and reports every counterexample found.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{FromPrimitive, One, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::bits::{BitString, Subcube};
use crate::conflict::{
    chi_mixture, chibar_lower_bound, default_candidates, is_full, min_chi_mixture, sabotage, singleton_candidates,
    walk_chart,
};
use crate::dist::{Dist, DistPair, PairMixture};
use crate::dtree::{
    distributional_opt, enumerate_trees, min_chi_tree, min_sep_tree, optimal_depth, DecisionTree, TreeSearchBudget,
};
use crate::error::{Error, Result};
use crate::function::{bit_label, compose, Label, PartialFunction, QueryProblem, Relation};
use crate::gen;
use crate::infoth;
use crate::io;
use crate::scalar::{rational_text, Scalar};
use crate::simproc::{
    append_subtrees, completing_attachments, exact_process_chart, gamma_pushforward, is_full_composed, truncate,
    ChartOptions, RandomizedAlgorithm,
};
use crate::Rational;

type Q = Rational;

/// Registered suites with their default sample counts.
pub const SUITES: &[(&str, usize)] = &[
    ("simulation", 200),
    ("walk", 500),
    ("point-pairs", 100),
    ("sabotage", 20),
    ("direct-sum", 50),
    ("single-block", 200),
    ("truncation", 24),
    ("composition", 1),
    ("pinsker", 10_000),
    ("mutin", 10_000),
    ("chain-rule", 1_000),
    ("oracle", 100),
    ("compose", 40),
    ("conditioning", 200),
];

/// Counterexamples kept verbatim per suite.
pub const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the suite's default sample count.
    pub samples: Option<usize>,
    pub budget: TreeSearchBudget,
    pub state_cap: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            samples: None,
            budget: TreeSearchBudget::default(),
            state_cap: crate::simproc::ChartOptions::default().state_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub suite: String,
    /// Individual checks made.
    pub checks: usize,
    pub failed: usize,
    /// At most [`MAX_REPORTED`] serialized counterexamples.
    pub counterexamples: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for SuiteOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} checks, {} failed)",
            self.suite,
            if self.passed() { "pass" } else { "FAIL" },
            self.checks,
            self.failed
        )
    }
}

/// Outcome of one instance: checks made and counterexamples.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn absorb(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failures.extend(other.failures);
    }
}

fn finish(suite: &str, tallies: Vec<Tally>) -> SuiteOutcome {
    let mut all = Tally::default();
    for t in tallies {
        all.absorb(t);
    }
    SuiteOutcome {
        suite: suite.to_string(),
        checks: all.checks,
        failed: all.failures.len(),
        counterexamples: all.failures.into_iter().take(MAX_REPORTED).collect(),
    }
}

/// Runs `body` on instances `0..n`, each with its own substream, in
/// parallel; results are merged in instance order.
fn sweep<F>(suite: &str, cfg: &SuiteConfig, n: usize, body: F) -> Result<SuiteOutcome>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Tally> + Sync,
{
    let tallies = (0..n)
        .into_par_iter()
        .map(|k| body(&mut gen::substream(cfg.seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish(suite, tallies))
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let default = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| Error::Config(format!("unknown suite `{name}`")))?;
    let n = cfg.samples.unwrap_or(default);
    match name {
        "simulation" => simulation(cfg, n),
        "walk" => walk(cfg, n),
        "point-pairs" => point_pairs(cfg, n),
        "sabotage" => sabotage_suite(cfg, n),
        "direct-sum" => direct_sum(cfg, n),
        "single-block" => single_block(cfg, n),
        "truncation" => truncation(cfg, n),
        "composition" => composition(cfg),
        "pinsker" => pinsker(cfg, n),
        "mutin" => mutin(cfg, n),
        "chain-rule" => chain_rule(cfg, n),
        "oracle" => oracle(cfg, n),
        "compose" => compose_suite(cfg, n),
        "conditioning" => conditioning(cfg, n),
        _ => unreachable!("registered above"),
    }
}

fn show_case(tree: &DecisionTree, q: &PairMixture<Q>, z: &BitString) -> String {
    format!("tree={} mixture={} z={}", tree, io::mixture_to_json(q), z)
}

fn show_pair(tree: &DecisionTree, p: &DistPair<Q>) -> String {
    format!("tree={} pair={}", tree, io::pair_to_json(p))
}

fn uint(n: usize) -> Q {
    Q::from_usize(n).expect("fits")
}

fn chart_options(cfg: &SuiteConfig) -> ChartOptions {
    ChartOptions {
        z_budget: None,
        state_cap: cfg.state_cap,
    }
}

/// Random `(B, Q)` with `t ≤ 3` blocks of `m ≤ 3` bits and depth at most 6.
fn composed_instance<R: Rng>(rng: &mut R) -> Result<(DecisionTree, PairMixture<Q>, usize)> {
    let t = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=3);
    let g = gen::partial_function(m, rng);
    let q = gen::mixture(&g, 3, 3, rng)?;
    Ok((gen::tree(t * m, 6, 0.15, rng), q, t))
}

fn simulation(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("simulation", cfg, n, |rng| {
        let (tree, q, t) = composed_instance(rng)?;
        let mut tally = Tally::default();
        for z in BitString::all(t) {
            let chart = exact_process_chart(&tree, &q, &z, &chart_options(cfg))?;
            let push = gamma_pushforward(&tree, &q, &z)?;
            tally.check(chart.leaves == push, || show_case(&tree, &q, &z));
        }
        Ok(tally)
    })
}

fn walk(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("walk", cfg, n, |rng| {
        let m = rng.gen_range(1..=4);
        let g = gen::partial_function(m, rng);
        let tree = gen::computing_tree(&g, m, rng)?;
        let pair = gen::pair(&g, 4, rng)?;
        let chart = walk_chart(&tree, &pair)?;
        let mut tally = Tally::default();
        tally.check(chart.mass == Q::one(), || show_pair(&tree, &pair));
        Ok(tally)
    })
}

/// `tree` with leaves labeled by `g`, if every leaf holds valid inputs of
/// one value only.
pub fn label_to_compute(tree: &DecisionTree, g: &PartialFunction) -> Result<Option<DecisionTree>> {
    let valid = g.valid_inputs()?;
    let cubes = tree.subcubes();
    let mut labels = BTreeMap::new();
    for leaf in tree.leaves() {
        let mut values = valid
            .iter()
            .filter(|x| cubes[leaf].contains(x))
            .filter_map(|x| g.value(x));
        let first = values.next().unwrap_or(false);
        if values.any(|v| v != first) {
            return Ok(None);
        }
        labels.insert(leaf, bit_label(first));
    }
    Ok(Some(tree.relabel(|v| labels.get(&v).cloned())))
}

fn point_pairs(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("point-pairs", cfg, n, |rng| {
        let m = rng.gen_range(1..=3);
        let g = gen::partial_function(m, rng);
        let pairs = crate::conflict::cross_pairs(&g)?;
        let mut tally = Tally::default();
        for tree in enumerate_trees(m, m, &cfg.budget)? {
            let Some(tree) = label_to_compute(&tree, &g)? else {
                continue;
            };
            for (x, y) in &pairs {
                let pair = DistPair::points(x.clone(), y.clone())?;
                let chi = walk_chart(&tree, &pair)?.total;
                tally.check(chi == uint(tree.sep(x, y)?), || show_pair(&tree, &pair));
            }
        }
        Ok(tally)
    })
}

/// The functions on which sabotage and the candidate bounds are compared.
pub fn catalog() -> Vec<(&'static str, PartialFunction)> {
    vec![
        ("OR2", PartialFunction::or(2)),
        ("AND2", PartialFunction::and(2)),
        ("XOR2", PartialFunction::xor(2)),
        ("MAJ3", PartialFunction::majority(3)),
        ("g0(4)", PartialFunction::hamming_gap(4).expect("n > 0")),
    ]
}

fn sabotage_suite(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    let funcs = catalog();
    let tallies = funcs
        .par_iter()
        .enumerate()
        .map(|(k, (name, g))| {
            let mut tally = Tally::default();
            let rs = sabotage::<Q>(g, &cfg.budget)?;
            let singles = singleton_candidates::<Q>(g)?;
            let lb = chibar_lower_bound(g, &singles, &cfg.budget)?;
            tally.check(lb.value == rs.value, || {
                format!("{name}: singleton bound {} vs RS {}", lb.value, rs.value)
            });
            // Grow the candidate set one random candidate at a time.
            let pool = default_candidates::<Q>(g)?;
            let mut rng = gen::substream(cfg.seed, k as u64);
            let mut set = singles.clone();
            let mut last = lb.value.clone();
            for _ in 0..n {
                set.push(pool[rng.gen_range(0..pool.len())].clone());
                let v = chibar_lower_bound(g, &set, &cfg.budget)?.value;
                tally.check(v >= last, || format!("{name}: bound fell from {last} to {v}"));
                last = v;
            }
            let wide = chibar_lower_bound(g, &pool, &cfg.budget)?.value;
            tally.check(wide >= rs.value, || format!("{name}: wide bound {wide} below RS"));
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish("sabotage", tallies))
}

/// A full `(H, Q)` on two blocks, built by completing `g` on every block
/// still undecided at each leaf of a random `A′`.
fn full_pair_instance<R: Rng>(rng: &mut R) -> Result<(PartialFunction, DecisionTree, PairMixture<Q>)> {
    let m = rng.gen_range(1..=2);
    let g = gen::partial_function(m, rng);
    let q = gen::mixture(&g, 3, 3, rng)?;
    let aprime = gen::tree(2 * m, 2, 0.2, rng);
    let att = completing_attachments(&aprime, &g)?;
    Ok((g, append_subtrees(&aprime, &att, m)?, q))
}

fn direct_sum(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("direct-sum", cfg, n, |rng| {
        let (g, h, q) = full_pair_instance(rng)?;
        let mut tally = Tally::default();
        tally.check(is_full_composed(&h, &q, 2)?, || {
            format!("not full: {}", show_case(&h, &q, &BitString::zeros(2)))
        });
        let (best, _) = min_chi_mixture(&g, &q, &cfg.budget)?;
        let bound = uint(2) * best;
        for z in BitString::all(2) {
            let chart = exact_process_chart(&h, &q, &z, &chart_options(cfg))?;
            let total = chart.total_count();
            tally.check(total >= bound, || {
                format!("{} (Σ E[N_i] = {total} < {bound})", show_case(&h, &q, &z))
            });
        }
        Ok(tally)
    })
}

fn single_block(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("single-block", cfg, n, |rng| {
        let m = rng.gen_range(1..=3);
        let g = gen::partial_function(m, rng);
        let tree = gen::computing_tree(&g, m, rng)?;
        let q = gen::mixture(&g, 3, 3, rng)?;
        let chi = chi_mixture(&tree, &q)?;
        let mut tally = Tally::default();
        let mut seen = Vec::new();
        for z in BitString::all(1) {
            let e = exact_process_chart(&tree, &q, &z, &chart_options(cfg))?.expected_counts[0].clone();
            tally.check(e == chi, || {
                format!("{} (E[N_1] = {e}, χ = {chi})", show_case(&tree, &q, &z))
            });
            seen.push(e);
        }
        tally.check(seen[0] == seen[1], || show_case(&tree, &q, &BitString::zeros(1)));
        Ok(tally)
    })
}

/// `(1 − w) μ₀ + w μ₁`.
pub fn blend(pair: &DistPair<Q>, w: &Q) -> Result<Dist<Q>> {
    let pts: Vec<(BitString, Q)> = pair
        .mu0
        .iter()
        .map(|(x, p)| (x.clone(), p.clone() * (Q::one() - w.clone())))
        .chain(pair.mu1.iter().map(|(x, p)| (x.clone(), p.clone() * w.clone())))
        .collect();
    Dist::new(pair.arity(), pts)
}

/// `Pr_{x∼μ}[T(x) ≠ g(x)]`; unlabeled leaves count as errors.
pub fn tree_error(tree: &DecisionTree, mu: &Dist<Q>, g: &PartialFunction) -> Result<Q> {
    let mut acc = Q::zero();
    for (x, p) in mu.iter() {
        let want = g.value(x).map(bit_label);
        if tree.eval(x)?.1.cloned() != want {
            acc += p.clone();
        }
    }
    Ok(acc)
}

fn truncation(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("truncation", cfg, n, |rng| {
        let g = if rng.gen_bool(0.5) {
            PartialFunction::or(2)
        } else {
            PartialFunction::majority(3)
        };
        let pair = gen::pair(&g, 4, rng)?;
        let w = Q::ratio(rng.gen_range(1..gen::MAX_DENOMINATOR), gen::MAX_DENOMINATOR);
        let mu = blend(&pair, &w)?;
        let (chi, witness) = min_chi_tree(&pair, &cfg.budget)?;
        let d: usize = chi
            .ceil()
            .to_integer()
            .try_into()
            .map_err(|_| Error::Defect("χ overflow".into()))?;
        let tree = witness.extend_to_compute(&g)?;
        let cut = truncate(&tree, 10 * d * d, &mu, &g)?;
        let err = tree_error(&cut, &mu, &g)?;
        let mut tally = Tally::default();
        tally.check(err < Q::ratio(1, 2), || {
            format!(
                "tree={} mu={} error={}",
                tree,
                io::dist_to_json(&mu),
                rational_text(&err)
            )
        });
        Ok(tally)
    })
}

/// The composition experiment: parity∘OR² with a depth-optimal `A′` and the
/// candidate-bound witness mixture.
#[derive(Debug, Clone)]
pub struct CompositionRun {
    pub depth: usize,
    pub chibar: Q,
    /// Per `z`: success probability and expected z-queries.
    pub per_z: Vec<(BitString, Q, Q)>,
}

impl CompositionRun {
    pub fn bound(&self) -> Q {
        uint(self.depth) / self.chibar.clone()
    }
}

pub fn composition_run(budget: &TreeSearchBudget) -> Result<CompositionRun> {
    let f = Relation::parity(2);
    let g = PartialFunction::or(2);
    let fg = compose(&f, &g, 2)?;
    let (depth, aprime) = optimal_depth(
        &fg,
        &TreeSearchBudget {
            max_depth: 4,
            ..*budget
        },
    )?;
    let lb = chibar_lower_bound(&g, &default_candidates::<Q>(&g)?, budget)?;
    let alg = RandomizedAlgorithm::build(aprime, lb.witness, 2)?;
    let per_z = BitString::all(2)
        .map(|z| {
            let ok = alg.success_probability(&f, &z)?;
            let e = alg.expected_queries(&z)?;
            Ok((z, ok, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositionRun {
        depth,
        chibar: lb.value,
        per_z,
    })
}

fn composition(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let run = composition_run(&cfg.budget)?;
    let mut tally = Tally::default();
    let bound = run.bound();
    for (z, ok, e) in &run.per_z {
        tally.check(ok.is_one(), || format!("z={z}: success probability {ok}"));
        tally.check(*e <= bound, || format!("z={z}: expected z-queries {e} > {bound}"));
    }
    Ok(finish("composition", vec![tally]))
}

fn pinsker(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("pinsker", cfg, n, |rng| {
        let k = rng.gen_range(1..=6);
        let p = infoth::random_distribution(k, true, rng);
        let q = infoth::random_distribution(k, false, rng);
        let c = infoth::pinsker_check(&p, &q)?;
        let mut tally = Tally::default();
        tally.check(c.holds, || format!("P={p:?} Q={q:?} lhs={} rhs={}", c.lhs, c.rhs));
        Ok(tally)
    })
}

fn mutin(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("mutin", cfg, n, |rng| {
        let (pb0, p0, p1): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let c = infoth::mutin_check(pb0, p0, p1)?;
        let mut tally = Tally::default();
        tally.check(c.holds, || {
            format!("pb0={pb0} p0={p0} p1={p1} I={} bound={}", c.lhs, c.rhs)
        });
        Ok(tally)
    })
}

fn chain_rule(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("chain-rule", cfg, n, |rng| {
        let t = infoth::random_table(&[2, 3, 2], rng);
        let mi = |x: &[usize], y: &[usize], z: &[usize]| infoth::mutual_information(&t, x, y, z);
        let joint = mi(&[0, 1], &[2], &[])?;
        let sum = mi(&[0], &[2], &[])? + mi(&[1], &[2], &[0])?;
        let mut tally = Tally::default();
        tally.check((joint - sum).abs() <= infoth::SLACK, || format!("chain rule: {t:?}"));

        let pair = t.marginal(&[0, 2])?;
        let product = infoth::JointTable::product(&[t.marginal(&[0])?.dense(), t.marginal(&[2])?.dense()])?;
        let direct = mi(&[0], &[2], &[])?;
        let div = infoth::kl(&pair.dense(), &product.dense())?;
        tally.check((direct - div).abs() <= infoth::SLACK, || format!("I vs D: {t:?}"));
        Ok(tally)
    })
}

/// Smallest depth over enumerated trees that can be labeled to compute `h`.
fn brute_depth<P: QueryProblem + ?Sized>(h: &P, budget: &TreeSearchBudget) -> Result<usize> {
    let k = h.arity();
    let outputs = h.outputs()?;
    let constrained = h.constrained_inputs()?;
    let mut best = usize::MAX;
    for tree in enumerate_trees(k, k, budget)? {
        let cubes = tree.subcubes();
        let mut ok = true;
        for leaf in tree.leaves() {
            let inside: Vec<&BitString> = constrained.iter().filter(|x| cubes[leaf].contains(x)).collect();
            let mut any = false;
            for s in &outputs {
                let mut all = true;
                for x in &inside {
                    all &= h.accepts(x, s)?;
                }
                any |= all;
            }
            ok &= any;
        }
        if ok {
            best = best.min(tree.depth());
        }
    }
    Ok(best)
}

/// Smallest `Pr_μ[error]` over enumerated trees of depth at most `depth`,
/// each leaf taking its most accepted output.
fn brute_distributional<P: QueryProblem + ?Sized>(
    h: &P,
    mu: &Dist<Q>,
    depth: usize,
    budget: &TreeSearchBudget,
) -> Result<Q> {
    let outputs = h.outputs()?;
    let mut best: Option<Q> = None;
    for tree in enumerate_trees(h.arity(), depth, budget)? {
        let cubes = tree.subcubes();
        let mut err = Q::zero();
        for leaf in tree.leaves() {
            let inside: Vec<(&BitString, &Q)> = mu.iter().filter(|(x, _)| cubes[leaf].contains(x)).collect();
            let mass: Q = inside.iter().map(|(_, p)| (*p).clone()).sum();
            let mut right = Q::zero();
            for s in &outputs {
                let mut r = Q::zero();
                for (x, p) in &inside {
                    if h.accepts(x, s)? {
                        r += (*p).clone();
                    }
                }
                if r > right {
                    right = r;
                }
            }
            err += mass - right;
        }
        if best.as_ref().is_none_or(|b| err < *b) {
            best = Some(err);
        }
    }
    best.ok_or_else(|| Error::Defect("no trees enumerated".into()))
}

fn brute_sep(g: &PartialFunction, p: &[(Q, BitString, BitString)], budget: &TreeSearchBudget) -> Result<Q> {
    let mut best: Option<Q> = None;
    for tree in enumerate_trees(g.arity(), g.arity(), budget)? {
        let Some(tree) = label_to_compute(&tree, g)? else {
            continue;
        };
        let mut v = Q::zero();
        for (w, x, y) in p {
            v += w.clone() * uint(tree.sep(x, y)?);
        }
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best.ok_or_else(|| Error::Defect("no computing tree enumerated".into()))
}

fn brute_chi(pair: &DistPair<Q>, budget: &TreeSearchBudget) -> Result<Q> {
    let mut best: Option<Q> = None;
    let m = pair.arity();
    for tree in enumerate_trees(m, m, budget)? {
        if !is_full(&tree, pair)? {
            continue;
        }
        let v = walk_chart(&tree, pair)?.total;
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best.ok_or_else(|| Error::Defect("no full tree enumerated".into()))
}

/// Every partial function on `m` bits, as a base-3 code per point.
fn all_functions(m: usize) -> impl Iterator<Item = PartialFunction> {
    let points: Vec<BitString> = BitString::all(m).collect();
    let total = 3usize.pow(points.len() as u32);
    (0..total).map(move |mut code| {
        let (mut zeros, mut ones) = (Vec::new(), Vec::new());
        for x in &points {
            match code % 3 {
                1 => zeros.push(x.clone()),
                2 => ones.push(x.clone()),
                _ => {}
            }
            code /= 3;
        }
        PartialFunction::explicit(m, zeros, ones).expect("disjoint by construction")
    })
}

fn oracle(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    let budget = cfg.budget;
    // Exhaustive over every function with m ≤ 3.
    let functions: Vec<PartialFunction> = (1..=3).flat_map(all_functions).collect();
    let depth_tallies = functions
        .par_iter()
        .map(|g| {
            let mut tally = Tally::default();
            let (d, tree) = optimal_depth(g, &budget)?;
            let brute = brute_depth(g, &budget)?;
            tally.check(d == brute && tree.depth() == d && tree.computes(g)?, || {
                format!("optimal_depth on {g}: {d}, enumeration {brute}")
            });
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    let sampled = sweep("oracle", cfg, n, |rng| {
        let m = rng.gen_range(1..=3);
        let g = gen::partial_function(m, rng);
        let mut tally = Tally::default();

        let h = if rng.gen_bool(0.5) {
            Relation::from_function(&g)
        } else {
            let outs = vec!["a".to_string(), "b".to_string(), "c".to_string()];
            let table: Vec<Vec<bool>> = (0..1usize << m)
                .map(|_| loop {
                    let row: Vec<bool> = (0..3).map(|_| rng.gen_bool(0.4)).collect();
                    if row.iter().any(|b| *b) {
                        break row;
                    }
                })
                .collect();
            let pairs = BitString::all(m).enumerate().flat_map(|(i, z)| {
                outs.iter()
                    .enumerate()
                    .filter(|(j, _)| table[i][*j])
                    .map(|(_, s)| (z.clone(), s.clone()))
                    .collect::<Vec<_>>()
            });
            Relation::explicit(m, outs.clone(), pairs)?
        };
        let mu = gen::dist_on(m, &BitString::all(m).collect::<Vec<_>>(), 4, rng);
        let depth = rng.gen_range(0..=m);
        let (err, tree) = distributional_opt(&h, &mu, depth, &budget)?;
        let brute = brute_distributional(&h, &mu, depth, &budget)?;
        tally.check(err == brute && tree.depth() <= depth, || {
            format!(
                "distributional_opt depth {depth} mu={}: {err} vs {brute}",
                io::dist_to_json(&mu)
            )
        });
        let (hd, _) = optimal_depth(&h, &budget)?;
        tally.check(hd == brute_depth(&h, &budget)?, || {
            "optimal_depth on a relation".to_string()
        });

        let pairs = crate::conflict::cross_pairs(&g)?;
        let k = rng.gen_range(1..=pairs.len().min(4));
        let total = rng.gen_range(k as i64..=gen::MAX_DENOMINATOR);
        let mut weights = vec![1i64; k];
        for _ in 0..total - k as i64 {
            weights[rng.gen_range(0..k)] += 1;
        }
        let p: Vec<(Q, BitString, BitString)> = pairs
            .iter()
            .take(k)
            .zip(&weights)
            .map(|((x, y), w)| (Q::ratio(*w, total), x.clone(), y.clone()))
            .collect();
        let (sep, tree) = min_sep_tree(&g, &p, &budget)?;
        let brute = brute_sep(&g, &p, &budget)?;
        tally.check(sep == brute && tree.computes(&g)?, || {
            format!("min_sep_tree on {g}: {sep} vs {brute}")
        });

        let pair = gen::pair(&g, 3, rng)?;
        let (chi, tree) = min_chi_tree(&pair, &budget)?;
        let brute = brute_chi(&pair, &budget)?;
        tally.check(chi == brute && walk_chart(&tree, &pair)?.total == chi, || {
            format!("min_chi_tree pair={}: {chi} vs {brute}", io::pair_to_json(&pair))
        });
        Ok(tally)
    })?;
    let mut out = finish("oracle", depth_tallies);
    out.checks += sampled.checks;
    out.failed += sampled.failed;
    out.counterexamples.extend(sampled.counterexamples);
    out.counterexamples.truncate(MAX_REPORTED);
    Ok(out)
}

/// Membership in `f∘gⁿ` transcribed directly: any invalid block accepts
/// every output, otherwise `f` decides on the vector of block values.
fn composed_member(f: &Relation, g: &PartialFunction, x: &BitString, s: &Label) -> Result<bool> {
    let mut values = Vec::new();
    for block in x.blocks(g.arity()) {
        match g.value(&block) {
            None => return Ok(true),
            Some(b) => values.push(b),
        }
    }
    f.contains(&BitString::new(values), s)
}

fn compose_suite(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("compose", cfg, n, |rng| {
        let blocks = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=8 / blocks).min(3);
        let g = gen::partial_function(m, rng);
        let f = match rng.gen_range(0..3) {
            0 => Relation::parity(blocks),
            1 => Relation::identity(blocks),
            _ => Relation::from_fn(blocks, vec!["0".into(), "1".into()], |z| bit_label(z.bit(1)))?,
        };
        let h = compose(&f, &g, blocks)?;
        let mut tally = Tally::default();
        for x in BitString::all(blocks * m) {
            for s in f.outputs()? {
                let want = composed_member(&f, &g, &x, &s)?;
                tally.check(h.contains(&x, &s)? == want, || {
                    format!("{g} blocks={blocks} x={x} s={s}")
                });
            }
        }
        Ok(tally)
    })
}

fn conditioning(cfg: &SuiteConfig, n: usize) -> Result<SuiteOutcome> {
    sweep("conditioning", cfg, n, |rng| {
        let m = rng.gen_range(1..=4);
        let mu = gen::dist_on(m, &BitString::all(m).collect::<Vec<_>>(), 6, rng);
        let mut fixed: Vec<(usize, bool)> = Vec::new();
        for j in 1..=m {
            if rng.gen_bool(0.4) {
                fixed.push((j, rng.gen()));
            }
        }
        let cube = Subcube::from_assignment(m, &fixed)?;
        let mut tally = Tally::default();
        match mu.condition(&cube) {
            Ok(c) => {
                tally.check(c.total().is_one(), || {
                    format!("mass of {} | {cube}", io::dist_to_json(&mu))
                });
                let again = c.condition(&cube)?;
                tally.check(again == c, || format!("{} | {cube}", io::dist_to_json(&mu)));
            }
            Err(Error::EmptyConditioning) => {
                tally.check(mu.mass_in(&cube).is_zero(), || {
                    format!("{} | {cube}", io::dist_to_json(&mu))
                });
            }
            Err(e) => return Err(e),
        }
        Ok(tally)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_on_a_small_sample() {
        let cfg = SuiteConfig {
            seed: 11,
            samples: Some(6),
            ..SuiteConfig::default()
        };
        for (name, _) in SUITES {
            if *name == "oracle" {
                continue;
            }
            let out = run_suite(name, &cfg).unwrap();
            assert!(out.passed(), "{out}: {:?}", out.counterexamples);
            assert!(out.checks > 0, "{name}");
        }
        assert!(matches!(run_suite("nope", &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn suites_are_deterministic() {
        let cfg = SuiteConfig {
            seed: 3,
            samples: Some(5),
            ..SuiteConfig::default()
        };
        assert_eq!(
            run_suite("simulation", &cfg).unwrap(),
            run_suite("simulation", &cfg).unwrap()
        );
    }

    #[test]
    fn brute_oracles_on_known_values() {
        let b = TreeSearchBudget::default();
        assert_eq!(brute_depth(&PartialFunction::or(2), &b).unwrap(), 2);
        assert_eq!(brute_depth(&PartialFunction::majority(3), &b).unwrap(), 3);
        assert_eq!(all_functions(1).count(), 9);
        let pair = DistPair::points("00".parse().unwrap(), "11".parse().unwrap()).unwrap();
        assert_eq!(brute_chi(&pair, &b).unwrap(), Q::one());
    }

    #[test]
    fn composition_run_values() {
        let run = composition_run(&TreeSearchBudget::default()).unwrap();
        assert_eq!(run.depth, 4);
        assert!(run.chibar >= Q::ratio(3, 2));
        assert_eq!(run.per_z.len(), 4);
    }
}
