//! The f₀/g₀ tightness instance and its majority-of-probes protocol.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::function::{weight_at_least_high, weight_at_most_low, PartialFunction, Relation};
use crate::gen;

/// `(a, z) ∈ f₀` iff `|a ⊕ z| ≤ n/2 − √n`.
pub fn make_f0(n: usize) -> Result<Relation> {
    Relation::xor_distance(n)
}

/// `g₀(x) = 0` for `|x| ≤ n/2 − √n`, `1` for `|x| ≥ n/2 + √n`.
pub fn make_g0(n: usize) -> Result<PartialFunction> {
    PartialFunction::hamming_gap(n)
}

fn chernoff(t: usize) -> f64 {
    let a = t as f64 / 8.0 - 1.0;
    (-0.5 * a * a).exp()
}

/// Smallest odd `t` with `exp(−½ (t/8 − 1)²) ≤ ε`, provided `t ≤ √n`.
pub fn choose_t(epsilon: f64, n: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon {epsilon} is outside (0, 1)")));
    }
    // The bound decreases for t ≥ 8 and tends to 0.
    let t = (1..)
        .step_by(2)
        .find(|&t| chernoff(t) <= epsilon)
        .expect("bound tends to 0");
    let min_n = (t * t) as u64;
    if (n as u64) < min_n {
        return Err(Error::Infeasible {
            reason: format!("t = {t} needs t ≤ √n but n = {n}"),
            min_n,
        });
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Number of blocks and bits per block.
    pub n: usize,
    pub epsilon: f64,
    /// Odd probe count per block.
    pub t: usize,
    pub trials: usize,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(n: usize, epsilon: f64, trials: usize, seed: u64) -> Result<Self> {
        Ok(ProbeConfig {
            n,
            epsilon,
            t: choose_t(epsilon, n)?,
            trials,
            seed,
        })
    }
}

/// The largest valid 0-weight and the smallest valid 1-weight of `g₀`.
pub fn worst_case_weights(n: usize) -> Result<(usize, usize)> {
    let low = (0..=n).rev().find(|&w| weight_at_most_low(w, n));
    let high = (0..=n).find(|&w| weight_at_least_high(w, n));
    match (low, high) {
        (Some(l), Some(h)) => Ok((l, h)),
        _ => Err(Error::Domain(format!(
            "g0 on {n} bits has no valid input of some value"
        ))),
    }
}

/// Blocks with `g₀(x_i) = z_i` placed at the gap boundary, ones at random
/// positions.
pub fn worst_case_input<R: Rng + ?Sized>(z: &BitString, n: usize, rng: &mut R) -> Result<Vec<BitString>> {
    let (low, high) = worst_case_weights(n)?;
    Ok(z.bits()
        .iter()
        .map(|&zi| {
            let w = if zi { high } else { low };
            let mut bits: Vec<bool> = (0..n).map(|j| j < w).collect();
            bits.shuffle(rng);
            BitString::new(bits)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeAnswer {
    pub answer: BitString,
    pub probes: u64,
}

/// `a_i` is the majority of `t` independently, uniformly probed bits of
/// block `i`.
pub fn majority_probe<R: Rng + ?Sized>(x: &[BitString], t: usize, rng: &mut R) -> Result<ProbeAnswer> {
    if t.is_multiple_of(2) {
        return Err(Error::Domain(format!("probe count {t} is even")));
    }
    let mut probes = 0u64;
    let answer = x
        .iter()
        .map(|block| {
            if block.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            let ones = (0..t).filter(|_| block.bit(rng.gen_range(1..=block.len()))).count();
            probes += t as u64;
            Ok(2 * ones > t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeAnswer {
        answer: BitString::new(answer),
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeTrial {
    pub wrong_blocks: usize,
    /// `(z, a) ∈ f₀`.
    pub correct: bool,
    pub probes: u64,
}

/// Trial `k`: a uniform `z`, a worst-case `x` with `g₀(x_i) = z_i`, and the
/// protocol's answer.
pub fn probe_trial(cfg: &ProbeConfig, k: u64) -> Result<ProbeTrial> {
    let mut rng = gen::substream(cfg.seed, k);
    let z = BitString::new((0..cfg.n).map(|_| rng.gen()).collect());
    let x = worst_case_input(&z, cfg.n, &mut rng)?;
    let a = majority_probe(&x, cfg.t, &mut rng)?;
    let wrong = a.answer.xor(&z)?.weight();
    Ok(ProbeTrial {
        wrong_blocks: wrong,
        correct: weight_at_most_low(wrong, cfg.n),
        probes: a.probes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSummary {
    pub config: ProbeConfig,
    pub failures: usize,
    /// Largest number of wrong blocks in any trial.
    pub worst_wrong: usize,
    /// Probe counts, when every trial made the same number.
    pub probes_per_trial: Option<u64>,
}

impl ProbeSummary {
    pub fn error_rate(&self) -> f64 {
        self.failures as f64 / self.config.trials.max(1) as f64
    }

    /// Binomial standard error of the error rate.
    pub fn sigma(&self) -> f64 {
        let p = self.error_rate();
        (p * (1.0 - p) / self.config.trials.max(1) as f64).sqrt()
    }

    /// Binomial standard deviation of the empirical rate at the target ε.
    pub fn gate_sigma(&self) -> f64 {
        let e = self.config.epsilon;
        (e * (1.0 - e) / self.config.trials.max(1) as f64).sqrt()
    }

    /// Empirical error at most `ε + 3σ`.
    pub fn within_gate(&self) -> bool {
        self.error_rate() <= self.config.epsilon + 3.0 * self.gate_sigma()
    }
}

/// Runs all trials in parallel; trial `k` uses substream `k`.
pub fn run_probe(cfg: &ProbeConfig) -> Result<ProbeSummary> {
    let trials = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| probe_trial(cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let probes = trials.first().map(|t| t.probes);
    Ok(ProbeSummary {
        config: *cfg,
        failures: trials.iter().filter(|t| !t.correct).count(),
        worst_wrong: trials.iter().map(|t| t.wrong_blocks).max().unwrap_or(0),
        probes_per_trial: probes.filter(|p| trials.iter().all(|t| t.probes == *p)),
    })
}
