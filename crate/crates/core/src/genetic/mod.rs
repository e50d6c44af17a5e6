//! Real-valued priority genetic algorithm for joint transmit/receive antenna selection.
//!
//! A chromosome is a priority vector: one real gene per receive antenna
//! followed by one gene per transmit antenna. Decoding keeps the `L_U`
//! highest-priority receive antennas and the `L_s` highest-priority transmit
//! antennas, so any real vector maps to a valid subset and crossover never
//! needs a repair step.
//!
//! One generation is: score the population, carry the `elite_count` best
//! over unchanged, take the `mating_pool_size` best as parents, pair them at
//! random, blend-crossover each pair and mutate the children until the
//! population is refilled.

mod exhaustive;

pub use exhaustive::{
    binomial, exhaustive_multicast, exhaustive_search, ExhaustiveOutcome, MulticastExhaustive,
    DEFAULT_ENUMERATION_CAP,
};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::capacity::{
    multicast_rate, receiver_capacity, AntennaSubset, RateSummary, ReceiverSubset, SelectionSpec, SnrParams,
    TransmissionMode,
};
use crate::channel::{ChannelRealization, MulticastChannel, SystemDims};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    priorities: Vec<f64>,
    fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(priorities: Vec<f64>) -> Result<Self> {
        if priorities.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("chromosome priorities must be finite"));
        }
        Ok(Chromosome {
            priorities,
            fitness: None,
        })
    }

    pub fn priorities(&self) -> &[f64] {
        &self.priorities
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn len(&self) -> usize {
        self.priorities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priorities.is_empty()
    }
}

/// Hyperparameters of one GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub mating_pool_size: usize,
    pub generations: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    /// Standard deviation of the initial Gaussian priorities.
    pub priority_std: f64,
    /// Standard deviation of the additive mutation noise.
    pub mutation_std: f64,
    pub elite_count: usize,
    pub seed: u64,
}

impl GaConfig {
    /// 4T4R to 2T2R preset: P=20, T=8, G=12, p_m=0.09, p_c=0.75.
    pub fn paper_4t4r_2t2r() -> Self {
        GaConfig {
            population_size: 20,
            mating_pool_size: 8,
            generations: 12,
            ..Self::base()
        }
    }

    /// 8T8R to 3T3R preset: P=40, T=16, G=24, p_m=0.09, p_c=0.75.
    pub fn paper_8t8r_3t3r() -> Self {
        GaConfig {
            population_size: 40,
            mating_pool_size: 16,
            generations: 24,
            ..Self::base()
        }
    }

    fn base() -> Self {
        GaConfig {
            population_size: 20,
            mating_pool_size: 8,
            generations: 12,
            mutation_prob: 0.09,
            crossover_prob: 0.75,
            priority_std: 1.0,
            mutation_std: 2.0,
            elite_count: 2,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::domain(m));
        if self.population_size == 0 {
            return fail("population_size must be at least 1".into());
        }
        if self.mating_pool_size == 0 || self.mating_pool_size > self.population_size {
            return fail(format!(
                "mating_pool_size = {} must lie in 1..={}",
                self.mating_pool_size, self.population_size
            ));
        }
        if self.generations == 0 {
            return fail("generations must be at least 1".into());
        }
        if self.elite_count == 0 || self.elite_count > self.population_size {
            return fail(format!(
                "elite_count = {} must lie in 1..={}",
                self.elite_count, self.population_size
            ));
        }
        for (name, p) in [("mutation_prob", self.mutation_prob), ("crossover_prob", self.crossover_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is not a probability"));
            }
        }
        for (name, s) in [("priority_std", self.priority_std), ("mutation_std", self.mutation_std)] {
            if !(s >= 0.0 && s.is_finite()) {
                return fail(format!("{name} = {s} must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

impl Default for GaConfig {
    fn default() -> Self {
        Self::paper_4t4r_2t2r()
    }
}

/// Result of one GA run on a single receiver link.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub best_subset: ReceiverSubset,
    pub best_capacity: f64,
    /// Best fitness of each generation, first entry is the initial population.
    pub fitness_history: Vec<f64>,
    pub evaluations: u64,
}

/// Result of a multicast selection in either transmission mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticastOutcome {
    pub mode: TransmissionMode,
    /// One entry per receiver. In synchronous mode all share `tx_indices`.
    pub subsets: Vec<ReceiverSubset>,
    pub summary: RateSummary,
    /// One history per GA run (R runs asynchronous, one run synchronous).
    pub fitness_histories: Vec<Vec<f64>>,
    pub evaluations: u64,
}

fn normal(std: f64) -> Normal<f64> {
    // validate() guarantees a finite, non-negative std.
    Normal::new(0.0, std).expect("validated standard deviation")
}

pub(crate) fn init_population_with(cfg: &GaConfig, chromosome_len: usize, rng: &mut SimRng) -> Vec<Chromosome> {
    let dist = normal(cfg.priority_std);
    (0..cfg.population_size)
        .map(|_| Chromosome {
            priorities: (0..chromosome_len).map(|_| dist.sample(rng)).collect(),
            fitness: None,
        })
        .collect()
}

/// `population_size` chromosomes with N(0, σ²) genes, seeded by `cfg.seed`.
pub fn init_population(cfg: &GaConfig, chromosome_len: usize) -> Result<Vec<Chromosome>> {
    cfg.validate()?;
    Ok(init_population_with(cfg, chromosome_len, &mut rng_from_seed(cfg.seed)))
}

/// Indices of the `k` largest values, ties to the lower index, returned ascending.
pub(crate) fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

fn decode_link(priorities: &[f64], num_rx: usize, l_u: usize, l_s: usize, receiver: usize) -> ReceiverSubset {
    ReceiverSubset {
        receiver,
        rx_indices: top_k(&priorities[..num_rx], l_u),
        tx_indices: top_k(&priorities[num_rx..], l_s),
    }
}

/// Decode a single-receiver chromosome `[rx genes | tx genes]` for `receiver`.
pub fn decode(c: &Chromosome, spec: &SelectionSpec, dims: &SystemDims, receiver: usize) -> Result<ReceiverSubset> {
    let n = dims.num_rx(receiver)?;
    if c.len() != n + dims.num_tx {
        return Err(Error::domain(format!(
            "chromosome length {} does not match N + M = {}",
            c.len(),
            n + dims.num_tx
        )));
    }
    let l_u = spec.num_rx_selected(receiver)?;
    Ok(decode_link(&c.priorities, n, l_u, spec.num_tx_selected, receiver))
}

/// Decode a synchronous chromosome `[rx genes of receiver 0 | ... | rx genes of receiver R-1 | tx genes]`.
pub fn decode_synchronous(c: &Chromosome, spec: &SelectionSpec, dims: &SystemDims) -> Result<AntennaSubset> {
    let total_rx: usize = dims.num_rx_per_receiver.iter().sum();
    if c.len() != total_rx + dims.num_tx {
        return Err(Error::domain(format!(
            "chromosome length {} does not match ΣN + M = {}",
            c.len(),
            total_rx + dims.num_tx
        )));
    }
    let mut offset = 0;
    let mut rx = Vec::with_capacity(dims.num_receivers());
    for (r, &n) in dims.num_rx_per_receiver.iter().enumerate() {
        rx.push(top_k(&c.priorities[offset..offset + n], spec.num_rx_selected(r)?));
        offset += n;
    }
    Ok(AntennaSubset {
        tx_indices: top_k(&c.priorities[total_rx..], spec.num_tx_selected),
        rx_indices_per_receiver: rx,
    })
}

/// Receive-selection size for `h_r`, checked against the link shape.
fn link_selection(h_r: &ChannelRealization, spec: &SelectionSpec) -> Result<usize> {
    let l_u = spec.num_rx_selected(h_r.receiver_id)?;
    if spec.num_tx_selected == 0 || spec.num_tx_selected > h_r.num_tx() || l_u == 0 || l_u > h_r.num_rx() {
        return Err(Error::domain(format!(
            "cannot select {}x{} from a {}x{} link",
            l_u,
            spec.num_tx_selected,
            h_r.num_rx(),
            h_r.num_tx()
        )));
    }
    Ok(l_u)
}

/// Capacity of the decoded sub-channel; cached into the chromosome.
pub fn score(c: &mut Chromosome, h_r: &ChannelRealization, spec: &SelectionSpec, snr: SnrParams) -> Result<f64> {
    let l_u = link_selection(h_r, spec)?;
    if c.len() != h_r.num_rx() + h_r.num_tx() {
        return Err(Error::domain(format!(
            "chromosome length {} does not match N + M = {}",
            c.len(),
            h_r.num_rx() + h_r.num_tx()
        )));
    }
    let sub = decode_link(&c.priorities, h_r.num_rx(), l_u, spec.num_tx_selected, h_r.receiver_id);
    let f = receiver_capacity(h_r, &sub, snr)?;
    c.fitness = Some(f);
    Ok(f)
}

fn ranked(population: &[Chromosome]) -> Result<Vec<usize>> {
    let mut fit = Vec::with_capacity(population.len());
    for (i, c) in population.iter().enumerate() {
        fit.push(
            c.fitness
                .ok_or_else(|| Error::Contract(format!("chromosome {i} has not been scored")))?,
        );
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    // Stable: equal fitness keeps population order.
    order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]));
    Ok(order)
}

/// The `t` fittest chromosomes, ties toward lower population index.
pub fn select_mating_pool(population: &[Chromosome], t: usize) -> Result<Vec<Chromosome>> {
    if t > population.len() {
        return Err(Error::domain(format!(
            "mating pool of {t} from a population of {}",
            population.len()
        )));
    }
    Ok(ranked(population)?
        .into_iter()
        .take(t)
        .map(|i| population[i].clone())
        .collect())
}

/// Blend crossover: with probability `p_c`, child genes are `α p1 + (1−α) p2`
/// and `(1−α) p1 + α p2` with a fresh `α ~ U[0, 1]` per gene; otherwise the
/// children are copies of the parents.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    p_c: f64,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if p1.len() != p2.len() {
        return Err(Error::domain(format!(
            "crossover of chromosomes with lengths {} and {}",
            p1.len(),
            p2.len()
        )));
    }
    if !rng.random_bool(p_c.clamp(0.0, 1.0)) {
        return Ok((p1.clone(), p2.clone()));
    }
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for (&a, &b) in p1.priorities.iter().zip(&p2.priorities) {
        let alpha: f64 = rng.random();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d = a - b;
        c1.push((b + alpha * d).clamp(lo, hi));
        c2.push((a - alpha * d).clamp(lo, hi));
    }
    Ok((
        Chromosome {
            priorities: c1,
            fitness: None,
        },
        Chromosome {
            priorities: c2,
            fitness: None,
        },
    ))
}

/// Add N(0, mutation_std²) to each gene independently with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, p_m: f64, mutation_std: f64, rng: &mut R) -> Chromosome {
    let mut out = c.clone();
    if mutation_std <= 0.0 || !mutation_std.is_finite() {
        return out;
    }
    let dist = normal(mutation_std);
    let p_m = p_m.clamp(0.0, 1.0);
    let mut changed = false;
    for g in out.priorities.iter_mut() {
        if rng.random_bool(p_m) {
            let noise = dist.sample(rng);
            if noise != 0.0 {
                *g += noise;
                changed = true;
            }
        }
    }
    if changed {
        out.fitness = None;
    }
    out
}

/// Best chromosome of the final generation plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GaRun {
    pub best: Chromosome,
    pub fitness_history: Vec<f64>,
    pub evaluations: u64,
}

/// Generic elitist GA loop over priority vectors of length `chromosome_len`.
pub fn run_ga<F>(chromosome_len: usize, cfg: &GaConfig, mut fitness: F) -> Result<GaRun>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut population = init_population_with(cfg, chromosome_len, &mut rng);
    let mut history = Vec::with_capacity(cfg.generations);
    let mut evaluations = 0u64;

    for generation in 0..cfg.generations {
        for c in population.iter_mut().filter(|c| c.fitness.is_none()) {
            c.fitness = Some(fitness(&c.priorities)?);
            evaluations += 1;
        }
        let order = ranked(&population)?;
        history.push(population[order[0]].fitness.expect("scored above"));
        if generation + 1 == cfg.generations {
            let best = population.swap_remove(order[0]);
            return Ok(GaRun {
                best,
                fitness_history: history,
                evaluations,
            });
        }

        let mut next: Vec<Chromosome> = order[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        let mut pool: Vec<&Chromosome> = order[..cfg.mating_pool_size].iter().map(|&i| &population[i]).collect();
        'fill: while next.len() < cfg.population_size {
            pool.shuffle(&mut rng);
            let pairs: Vec<(&Chromosome, &Chromosome)> = if pool.len() == 1 {
                vec![(pool[0], pool[0])]
            } else {
                pool.chunks_exact(2).map(|p| (p[0], p[1])).collect()
            };
            for (a, b) in pairs {
                let (c1, c2) = crossover(a, b, cfg.crossover_prob, &mut rng)?;
                for child in [c1, c2] {
                    if next.len() == cfg.population_size {
                        break 'fill;
                    }
                    next.push(mutate(&child, cfg.mutation_prob, cfg.mutation_std, &mut rng));
                }
            }
        }
        population = next;
    }
    unreachable!("generations >= 1 is validated")
}

/// Seed of GA run `index` within a multicast selection seeded by `seed`.
pub fn run_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, &[index as u64])
}

/// GA selection for one receiver link `h_r`.
pub fn evolve(h_r: &ChannelRealization, spec: &SelectionSpec, snr: SnrParams, cfg: &GaConfig) -> Result<SelectionOutcome> {
    let l_u = link_selection(h_r, spec)?;
    let (n, l_s, receiver) = (h_r.num_rx(), spec.num_tx_selected, h_r.receiver_id);
    let run = run_ga(n + h_r.num_tx(), cfg, |p| {
        receiver_capacity(h_r, &decode_link(p, n, l_u, l_s, receiver), snr)
    })?;
    Ok(SelectionOutcome {
        best_subset: decode_link(&run.best.priorities, n, l_u, l_s, receiver),
        best_capacity: *run.fitness_history.last().expect("non-empty history"),
        fitness_history: run.fitness_history,
        evaluations: run.evaluations,
    })
}

/// GA selection for every receiver of a multicast channel.
///
/// Asynchronous: one independent run per receiver (seed `run_seed(cfg.seed, r)`),
/// transmit subsets may differ. Synchronous: one run over the concatenated
/// chromosome with a shared transmit segment (seed `run_seed(cfg.seed, 0)`),
/// fitness is the minimum receiver capacity.
pub fn evolve_multicast(
    channel: &MulticastChannel,
    spec: &SelectionSpec,
    snr: SnrParams,
    cfg: &GaConfig,
    mode: TransmissionMode,
) -> Result<MulticastOutcome> {
    let dims = channel.dims();
    spec.validate(dims)?;
    cfg.validate()?;
    match mode {
        TransmissionMode::Asynchronous => {
            let mut subsets = Vec::new();
            let mut caps = Vec::new();
            let mut histories = Vec::new();
            let mut evaluations = 0;
            for r in 0..dims.num_receivers() {
                let run_cfg = cfg.clone().with_seed(run_seed(cfg.seed, r));
                let out = evolve(channel.receiver(r)?, spec, snr, &run_cfg)?;
                subsets.push(out.best_subset);
                caps.push(out.best_capacity);
                histories.push(out.fitness_history);
                evaluations += out.evaluations;
            }
            Ok(MulticastOutcome {
                mode,
                subsets,
                summary: multicast_rate(&caps, mode)?,
                fitness_histories: histories,
                evaluations,
            })
        }
        TransmissionMode::Synchronous => {
            let len = dims.num_rx_per_receiver.iter().sum::<usize>() + dims.num_tx;
            let run_cfg = cfg.clone().with_seed(run_seed(cfg.seed, 0));
            let min_rate = |p: &[f64]| -> Result<f64> {
                let c = Chromosome {
                    priorities: p.to_vec(),
                    fitness: None,
                };
                let subset = decode_synchronous(&c, spec, dims)?;
                let mut worst = f64::INFINITY;
                for sub in subset.per_receiver() {
                    worst = worst.min(receiver_capacity(channel.receiver(sub.receiver)?, &sub, snr)?);
                }
                Ok(worst)
            };
            let run = run_ga(len, &run_cfg, min_rate)?;
            let subset = decode_synchronous(&run.best, spec, dims)?;
            let subsets = subset.per_receiver();
            let caps = subsets
                .iter()
                .map(|s| receiver_capacity(channel.receiver(s.receiver)?, s, snr))
                .collect::<Result<Vec<_>>>()?;
            Ok(MulticastOutcome {
                mode,
                subsets,
                summary: multicast_rate(&caps, mode)?,
                fitness_histories: vec![run.fitness_history],
                evaluations: run.evaluations,
            })
        }
    }
}
