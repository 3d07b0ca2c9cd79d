use std::collections::BTreeMap;

use num_traits::{FromPrimitive, One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::conflict::{chi_mixture, min_chi_mixture};
use crate::dist::{Dist, DistPair};
use crate::dtree::{distributional_opt, min_chi_tree, TreeSearchBudget};
use crate::function::{bit_label, compose, Label, PartialFunction, Relation};
use crate::gen;
use crate::Rational;

type Q = Rational;

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

fn b(s: &str) -> BitString {
    s.parse().unwrap()
}

fn tree(s: &str, m: usize) -> DecisionTree {
    DecisionTree::parse(s, Some(m)).unwrap()
}

fn bit_pair() -> PairMixture<Q> {
    PairMixture::singleton(DistPair::points(b("0"), b("1")).unwrap())
}

fn frequency<F: FnMut(&mut ChaCha8Rng) -> bool>(n: usize, seed: u64, mut f: F) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).filter(|_| f(&mut rng)).count() as f64 / n as f64
}

#[test]
fn bitsampler_examples() {
    let n = 20_000;
    // Equal probabilities never touch z.
    let fair = frequency(n, 1, |rng| {
        let (bit, queried) = bitsampler(&q(1, 2), &q(1, 2), || panic!("z read"), rng).unwrap();
        assert!(!queried);
        !bit
    });
    assert!((fair - 0.5).abs() < 0.02);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for z in [false, true] {
        for _ in 0..100 {
            assert_eq!(bitsampler(&q(1, 1), &q(0, 1), || z, &mut rng).unwrap(), (z, true));
        }
    }

    let band = frequency(n, 3, |rng| bitsampler(&q(1, 4), &q(3, 4), || true, rng).unwrap().1);
    assert!((band - 0.5).abs() < 0.02);
    for z in [false, true] {
        let zero = frequency(n, 4, |rng| !bitsampler(&q(1, 4), &q(3, 4), || z, rng).unwrap().0);
        let expect = if z { 0.75 } else { 0.25 };
        assert!((zero - expect).abs() < 0.02, "z = {z}: {zero}");
    }

    assert!(matches!(
        bitsampler(&q(3, 2), &q(0, 1), || true, &mut rng),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        bitsampler(&q(-1, 2), &q(0, 1), || true, &mut rng),
        Err(Error::Domain(_))
    ));
}

#[test]
fn run_process_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let one = tree("(q 1 (leaf 0) (leaf 1))", 1);
    for z in ["0", "1"] {
        let r = run_process(&one, &bit_pair(), &b(z), ProcessOptions::default(), &mut rng).unwrap();
        assert_eq!(r.leaf, Some(if z == "0" { 1 } else { 2 }));
        assert_eq!(r.state.counts, vec![1]);
        assert_eq!(r.state.queried, vec![true]);
    }

    let two = tree("(q 1 (q 2 (leaf) (leaf)) (q 2 (leaf) (leaf)))", 2);
    let opts = ProcessOptions {
        z_budget: None,
        log: true,
    };
    for z in BitString::all(2) {
        let r = run_process(&two, &bit_pair(), &z, opts, &mut rng).unwrap();
        let leaf = r.leaf.unwrap();
        assert!(two.subcubes()[leaf].contains(&z));
        assert_eq!(r.state.counts, vec![1, 1]);
        assert_eq!(r.steps.len(), 2);
        assert_eq!(r.steps[0].to_string(), format!("0, 1, 1, {}", z.bit(1) as u8));
    }

    // A z-budget of one stops exactly at the second z-query.
    let stopped = run_process(
        &two,
        &bit_pair(),
        &b("00"),
        ProcessOptions {
            z_budget: Some(1),
            log: false,
        },
        &mut rng,
    )
    .unwrap();
    assert_eq!(stopped.leaf, None);
    assert_eq!(stopped.state.counts, vec![1, 1]);
    assert_eq!(stopped.state.z_queries(), 1);
}

#[test]
fn sample_gamma_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let q2 = PairMixture::singleton(DistPair::<Q>::points(b("00"), b("11")).unwrap());
    assert_eq!(sample_gamma(&b("010"), &q2, &mut rng), b("001100"));

    let mu0: Dist<Q> = Dist::new(2, vec![(b("00"), q(1, 4)), (b("01"), q(3, 4))]).unwrap();
    let pair = DistPair::new(mu0, Dist::point(b("11"))).unwrap();
    let mix = PairMixture::singleton(pair);
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| sample_gamma(&b("0"), &mix, &mut rng) == b("01"))
        .count();
    let p = 0.75;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((hits as f64 / n as f64 - p).abs() < 4.0 * sigma);
}

#[test]
fn chart_examples() {
    let two = tree("(q 1 (q 2 (leaf) (leaf)) (q 2 (leaf) (leaf)))", 2);
    let c = exact_process_chart(&two, &bit_pair(), &b("10"), &ChartOptions::default()).unwrap();
    assert_eq!(c.leaves.len(), 1);
    assert_eq!(c.query_probs, vec![q(1, 1), q(1, 1)]);
    assert_eq!(c.expected_queries(), q(2, 1));
    assert_eq!(c.expected_counts, vec![q(1, 1), q(1, 1)]);
    assert!(is_full_composed(&two, &bit_pair(), 2).unwrap());

    // A leaf touches no block.
    let leaf = DecisionTree::leaf(2, None);
    let c = exact_process_chart(&leaf, &bit_pair(), &b("01"), &ChartOptions::default()).unwrap();
    assert_eq!(c.leaves, BTreeMap::from([(0, q(1, 1))]));
    assert!(!is_full_composed(&leaf, &bit_pair(), 2).unwrap());

    let tight = ChartOptions {
        z_budget: None,
        state_cap: 2,
    };
    assert!(matches!(
        exact_process_chart(&two, &bit_pair(), &b("10"), &tight),
        Err(Error::Budget { .. })
    ));
}

#[test]
fn monte_carlo_matches_chart() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = PartialFunction::or(2);
    let mix = gen::mixture(&g, 3, 3, &mut rng).unwrap();
    let t = gen::tree(4, 4, 0.1, &mut rng);
    let z = b("01");
    let chart = exact_process_chart(&t, &mix, &z, &ChartOptions::default()).unwrap();
    let n = 100_000;
    let mut counts: BTreeMap<NodeId, usize> = BTreeMap::new();
    for _ in 0..n {
        let r = run_process(&t, &mix, &z, ProcessOptions::default(), &mut rng).unwrap();
        *counts.entry(r.leaf.unwrap()).or_default() += 1;
    }
    for leaf in t.leaves() {
        let p = chart.leaves.get(&leaf).map_or(0.0, |p| p.to_f64());
        let f = *counts.get(&leaf).unwrap_or(&0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((f - p).abs() <= 4.0 * sigma + 1e-12, "leaf {leaf}: {f} vs {p}");
    }
}

#[test]
fn algorithm_examples() {
    // A′ computes parity∘OR² exactly.
    let g = PartialFunction::or(2);
    let f = Relation::parity(2);
    let fg = compose(&f, &g, 2).unwrap();
    let aprime = exact_tree_for(&fg, 4);
    let mix = PairMixture::singleton(DistPair::points(b("00"), b("11")).unwrap());
    let alg = RandomizedAlgorithm::build(aprime.clone(), mix.clone(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for z in BitString::all(2) {
        assert_eq!(alg.success_probability(&f, &z).unwrap(), q(1, 1));
        assert_eq!(alg.run(&z, &mut rng).unwrap().output, bit_label(z.weight() % 2 == 1));
        let chart = alg.chart(&z).unwrap();
        assert_eq!(
            alg.expected_queries(&z).unwrap(),
            chart.query_probs.iter().cloned().sum::<Q>()
        );
    }

    let fallback = default_fallback(&f).unwrap();
    assert_eq!(fallback, Label::from("0"));
    let never = alg.truncate_runtime(0, fallback.clone());
    for z in BitString::all(2) {
        let out = never.output_distribution(&z).unwrap();
        assert_eq!(out, BTreeMap::from([(fallback.clone(), q(1, 1))]));
        assert!(never.run(&z, &mut rng).unwrap().stopped);
    }
    let unbounded = alg.truncate_runtime(usize::MAX, fallback);
    for z in BitString::all(2) {
        assert_eq!(
            unbounded.output_distribution(&z).unwrap(),
            alg.output_distribution(&z).unwrap()
        );
    }

    assert!(RandomizedAlgorithm::build(aprime, mix, 3).is_err());
}

/// The complete depth-`n` tree labeled by `h` at each leaf.
fn exact_tree_for(h: &Relation, n: usize) -> DecisionTree {
    let indices: Vec<usize> = (1..=n).collect();
    let t = DecisionTree::complete(n, &indices).unwrap();
    let cubes = t.subcubes();
    t.relabel(|leaf| {
        let x = cubes[leaf].points().pop().unwrap();
        h.outputs().unwrap().into_iter().find(|s| h.contains(&x, s).unwrap())
    })
}

#[test]
fn append_examples() {
    let aprime = tree("(q 1 (leaf 0) (leaf 1))", 4);
    assert_eq!(append_subtrees(&aprime, &BTreeMap::new(), 2).unwrap(), aprime);

    let block = tree("(q 2 (leaf) (leaf))", 2);
    let att = BTreeMap::from([
        ((1, 2), block.clone()),
        ((1, 1), block.clone()),
        ((2, 2), block.clone()),
    ]);
    let h = append_subtrees(&aprime, &att, 2).unwrap();
    let depths = h.node_depths();
    // Leaf 1 of A′ (depth 2) gains two one-query attachments.
    assert_eq!(h.depth(), 3);
    assert_eq!(*depths.iter().max().unwrap(), 4);
    assert_eq!(h.eval(&b("0101")).unwrap().1, Some(&Label::from("0")));
    assert_eq!(h.eval(&b("1000")).unwrap().1, Some(&Label::from("1")));

    let repeat = BTreeMap::from([((2, 1), tree("(q 1 (leaf) (leaf))", 2))]);
    assert!(matches!(
        append_subtrees(&aprime, &repeat, 2),
        Err(Error::Structural(_))
    ));
    let inner = BTreeMap::from([((0, 1), block)]);
    assert!(matches!(append_subtrees(&aprime, &inner, 2), Err(Error::Structural(_))));
}

#[test]
fn truncate_examples() {
    let g = PartialFunction::majority(3);
    let mu: Dist<Q> = Dist::new(3, vec![(b("001"), q(1, 4)), (b("110"), q(1, 4)), (b("111"), q(1, 2))]).unwrap();
    let full = DecisionTree::complete(3, &[1, 2, 3])
        .unwrap()
        .extend_to_compute(&g)
        .unwrap();
    assert_eq!(truncate(&full, 3, &mu, &g).unwrap(), full);
    let stub = truncate(&full, 0, &mu, &g).unwrap();
    assert_eq!(stub, DecisionTree::labeled_leaf(3, bit_label(true)));
    // Ties go to 0.
    let even: Dist<Q> = Dist::uniform(&[b("000"), b("111")]).unwrap();
    assert_eq!(
        truncate(&full, 0, &even, &g).unwrap(),
        DecisionTree::labeled_leaf(3, bit_label(false))
    );
    // After one query the cut at x₁ = 0 holds only 001 and the cut at x₁ = 1
    // only 1-inputs.
    let one = truncate(&full, 1, &mu, &g).unwrap();
    assert_eq!(one.depth(), 1);
    assert_eq!(one.eval(&b("000")).unwrap().1, Some(&bit_label(false)));
    assert_eq!(one.eval(&b("100")).unwrap().1, Some(&bit_label(true)));

    let invalid: Dist<Q> = Dist::point(b("000"));
    assert!(truncate(
        &full,
        1,
        &invalid,
        &PartialFunction::hamming_gap(4)
            .map(|_| PartialFunction::and(3))
            .unwrap()
    )
    .is_ok());
    let gap = PartialFunction::explicit(3, vec![b("000")], vec![b("111")]).unwrap();
    let off: Dist<Q> = Dist::point(b("010"));
    assert!(matches!(truncate(&full, 1, &off, &gap), Err(Error::Domain(_))));
}

#[test]
fn truncation_meets_error_bound() {
    let budget = TreeSearchBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in [PartialFunction::or(2), PartialFunction::majority(3)] {
        for _ in 0..10 {
            let pair = gen::pair(&g, 4, &mut rng).unwrap();
            let w = q(rng.gen_range(1..8), 8);
            let mu = mix_sides(&pair, &w);
            let (chi, witness) = min_chi_tree(&pair, &budget).unwrap();
            let d = ceil(&chi);
            let cut = truncate(&witness, 10 * d * d, &mu, &g).unwrap();
            assert!(tree_error(&cut, &mu, &g) < q(1, 2));
        }
    }
}

fn mix_sides(pair: &DistPair<Q>, w: &Q) -> Dist<Q> {
    let pts = pair
        .mu0
        .iter()
        .map(|(x, p)| (x.clone(), p.clone() * (Q::one() - w.clone())))
        .chain(pair.mu1.iter().map(|(x, p)| (x.clone(), p.clone() * w.clone())));
    Dist::new(pair.arity(), pts.collect::<Vec<_>>()).unwrap()
}

fn ceil(x: &Q) -> usize {
    x.ceil().to_integer().try_into().unwrap()
}

fn tree_error(t: &DecisionTree, mu: &Dist<Q>, g: &PartialFunction) -> Q {
    mu.iter()
        .filter(|(x, _)| t.eval(x).unwrap().1 != Some(&bit_label(g.value(x).unwrap())))
        .map(|(_, p)| p.clone())
        .sum()
}

/// Leaf distribution of `B(x)` over `x ∼ γ_z(Q)` by enumerating every
/// pair tuple and every block string.
fn brute_pushforward(t: &DecisionTree, mix: &PairMixture<Q>, z: &BitString) -> BTreeMap<NodeId, Q> {
    let mut acc: Vec<(BitString, Q)> = vec![(BitString::new(vec![]), q(1, 1))];
    for i in 1..=z.len() {
        let mut next = Vec::new();
        for (prefix, p) in &acc {
            for (w, pair) in mix.entries() {
                for (x, px) in pair.side(z.bit(i)).iter() {
                    next.push((
                        BitString::concat(&[prefix.clone(), x.clone()]),
                        p.clone() * w.clone() * px.clone(),
                    ));
                }
            }
        }
        acc = next;
    }
    let mut out: BTreeMap<NodeId, Q> = BTreeMap::new();
    for (x, p) in acc {
        let leaf = t.eval(&x).unwrap().0;
        *out.entry(leaf).or_insert_with(Q::zero) += p;
    }
    out
}

/// A random `(B, Q)` on `t` blocks of a random `g` on `m` bits.
fn instance(rng: &mut ChaCha8Rng, t: usize, m: usize, depth: usize) -> (PartialFunction, DecisionTree, PairMixture<Q>) {
    let g = gen::partial_function(m, rng);
    let mix = gen::mixture(&g, 3, 3, rng).unwrap();
    (g, gen::tree(t * m, depth, 0.2, rng), mix)
}

/// `(H, Q)` with `H` built from a random `A′` by completing `g` on every
/// block still undecided at each leaf.
fn full_instance(rng: &mut ChaCha8Rng, t: usize, m: usize) -> (PartialFunction, DecisionTree, PairMixture<Q>) {
    let (g, aprime, mix) = instance(rng, t, m, 2);
    let att = completing_attachments(&aprime, &g).unwrap();
    (g, append_subtrees(&aprime, &att, m).unwrap(), mix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulation_theorem(seed in any::<u64>(), t in 1usize..=3, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, tree, mix) = instance(&mut rng, t, m, 6);
        for z in BitString::all(t) {
            let chart = exact_process_chart(&tree, &mix, &z, &ChartOptions::default()).unwrap();
            let push = gamma_pushforward(&tree, &mix, &z).unwrap();
            prop_assert_eq!(&chart.leaves, &push);
            prop_assert_eq!(&push, &brute_pushforward(&tree, &mix, &z));
            prop_assert_eq!(chart.leaves.values().cloned().sum::<Q>(), q(1, 1));
        }
    }

    #[test]
    fn counts_match_chi_on_one_block(seed in any::<u64>(), m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gen::partial_function(m, &mut rng);
        let tree = gen::computing_tree(&g, m, &mut rng).unwrap();
        let mix = gen::mixture(&g, 3, 3, &mut rng).unwrap();
        let chi = chi_mixture(&tree, &mix).unwrap();
        for z in ["0", "1"] {
            let chart = exact_process_chart(&tree, &mix, &b(z), &ChartOptions::default()).unwrap();
            prop_assert_eq!(&chart.expected_counts[0], &chi);
        }
    }

    #[test]
    fn direct_sum(seed in any::<u64>(), m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, h, mix) = full_instance(&mut rng, 2, m);
        prop_assert!(is_full_composed(&h, &mix, 2).unwrap());
        let (best, _) = min_chi_mixture(&g, &mix, &TreeSearchBudget::default()).unwrap();
        for z in BitString::all(2) {
            let chart = exact_process_chart(&h, &mix, &z, &ChartOptions::default()).unwrap();
            prop_assert!(chart.total_count() >= Q::from_usize(2).unwrap() * best.clone());
        }
    }

    #[test]
    fn unqueried_states_ignore_z(seed in any::<u64>(), t in 1usize..=3, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, tree, mix) = instance(&mut rng, t, m, 5);
        for z in BitString::all(t) {
            let base = exact_process_chart(&tree, &mix, &z, &ChartOptions::default()).unwrap();
            for i in 1..=t {
                let mut flipped = z.clone();
                flipped.set(i, !z.bit(i));
                let other = exact_process_chart(&tree, &mix, &flipped, &ChartOptions::default()).unwrap();
                let bit = 1u64 << (i - 1);
                let keep = |c: &ProcessChart<Q>| -> BTreeMap<(NodeId, u64), Q> {
                    c.states.iter().filter(|((_, s), _)| s & bit == 0).map(|(k, v)| (*k, v.clone())).collect()
                };
                prop_assert_eq!(keep(&base), keep(&other));
            }
        }
    }

    #[test]
    fn markov_bound_on_stopping(seed in any::<u64>(), m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, h, mix) = full_instance(&mut rng, 2, m);
        let labeled = h.relabel(|_| Some(bit_label(false)));
        let alg = RandomizedAlgorithm::build(labeled, mix, 2).unwrap();
        for z in BitString::all(2) {
            let e = alg.expected_queries(&z).unwrap();
            for budget in 1..=2usize {
                let stop = alg.truncate_runtime(budget, bit_label(true)).chart(&z).unwrap().stopped;
                prop_assert!(stop * Q::from_usize(budget + 1).unwrap() <= e.clone());
            }
        }
    }

    #[test]
    fn distributional_trees_truncate_within_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = PartialFunction::majority(3);
        let pair = gen::pair(&g, 4, &mut rng).unwrap();
        let mu = mix_sides(&pair, &q(1, 2));
        let h = Relation::from_function(&g);
        let (_, opt) = distributional_opt(&h, &mu, 3, &TreeSearchBudget::default()).unwrap();
        // A tree of error e keeps error e when cut at its own depth.
        let cut = truncate(&opt, opt.depth(), &mu, &g).unwrap();
        prop_assert_eq!(tree_error(&cut, &mu, &g), tree_error(&opt, &mu, &g));
    }
}
