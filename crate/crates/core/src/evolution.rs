//! Population-level NEAT: speciation, explicit fitness sharing, offspring
//! allocation, stagnation, elitism and the generation loop.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::NeatConfig;
use crate::genome::{crossover, partition, Genome, InnovationRegistry};

/// Fitness assigned when an evaluator returns a non-finite value.
pub const INVALID_FITNESS: f64 = -1.0e6;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("every species went extinct and reset_on_extinction is off")]
    Extinction,
    #[error("building worker pool: {0}")]
    Workers(String),
}

/// SplitMix64 finaliser folded over `parts`; stable across platforms and releases.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

/// `c1·E/N + c2·D/N + c3·W̄` over connection genes.
///
/// `N` is the larger genome's connection count, or 1 when both genomes have
/// fewer than 20 genes. `W̄` is 0 when no genes match. Excess and disjoint
/// genes share one coefficient.
pub fn compatibility_distance(a: &Genome, b: &Genome, cfg: &NeatConfig) -> f64 {
    let p = partition(a, b);
    let (na, nb) = (a.connections.len(), b.connections.len());
    let n = if na < 20 && nb < 20 { 1.0 } else { na.max(nb) as f64 };
    let c = cfg.compatibility_disjoint_coefficient;
    c * p.excess.len() as f64 / n + c * p.disjoint.len() as f64 / n
        + cfg.compatibility_weight_coefficient * p.mean_weight_diff
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub id: u64,
    pub representative: Genome,
    /// Member genome keys, ascending.
    pub members: Vec<u64>,
    pub created: usize,
    pub last_improved: usize,
    pub best_fitness: Option<f64>,
    pub fitness_history: Vec<f64>,
}

impl Species {
    pub fn stagnation(&self, generation: usize) -> usize {
        generation.saturating_sub(self.last_improved)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSet {
    /// Sorted by id.
    pub species: Vec<Species>,
    pub next_id: u64,
}

impl SpeciesSet {
    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    pub fn species_of(&self, key: u64) -> Option<&Species> {
        self.species.iter().find(|s| s.members.binary_search(&key).is_ok())
    }

    /// Partitions `population` into species.
    ///
    /// Each genome joins the first species (by id) whose representative lies
    /// within the compatibility threshold, else founds a new species. Each
    /// surviving species then takes as its next representative the member
    /// closest to its previous one; empty species are dropped.
    pub fn speciate(&mut self, population: &[Genome], cfg: &NeatConfig, generation: usize) {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.species.len()];
        for (gi, g) in population.iter().enumerate() {
            let home = self
                .species
                .iter()
                .position(|s| compatibility_distance(&s.representative, g, cfg) < cfg.compatibility_threshold);
            match home {
                Some(si) => members[si].push(gi),
                None => {
                    self.species.push(Species {
                        id: self.next_id,
                        representative: g.clone(),
                        members: Vec::new(),
                        created: generation,
                        last_improved: generation,
                        best_fitness: None,
                        fitness_history: Vec::new(),
                    });
                    self.next_id += 1;
                    members.push(vec![gi]);
                }
            }
        }
        let old = std::mem::take(&mut self.species);
        for (mut s, idx) in old.into_iter().zip(members) {
            if idx.is_empty() {
                continue;
            }
            let rep = idx
                .iter()
                .map(|&i| (compatibility_distance(&s.representative, &population[i], cfg), population[i].key, i))
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
                .expect("non-empty")
                .2;
            s.representative = population[rep].clone();
            s.members = idx.iter().map(|&i| population[i].key).collect();
            s.members.sort_unstable();
            self.species.push(s);
        }
    }
}

/// Shared fitness `f_i / n_s`.
///
/// The sharing function is 1 inside the compatibility threshold and 0
/// outside, so with the speciation partition each denominator is simply the
/// size of the genome's species.
pub fn adjusted_fitness(species: &SpeciesSet, population: &[Genome]) -> BTreeMap<u64, f64> {
    let by_key: BTreeMap<u64, &Genome> = population.iter().map(|g| (g.key, g)).collect();
    let mut out = BTreeMap::new();
    for s in &species.species {
        let n = s.members.len() as f64;
        for k in &s.members {
            let f = by_key.get(k).and_then(|g| g.fitness).unwrap_or(INVALID_FITNESS);
            out.insert(*k, f / n);
        }
    }
    out
}

/// Splits `total` proportionally to non-negative `weights` with
/// largest-remainder rounding; ties go to the earlier entry. Equal shares
/// when all weights are zero.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = if sum > 0.0 && sum.is_finite() {
        weights.iter().map(|w| total as f64 * w / sum).collect()
    } else {
        vec![total as f64 / weights.len() as f64; weights.len()]
    };
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    // Floors never exceed the total, so the deficit is below the entry count.
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Offspring per species, proportional to each species' adjusted-fitness
/// sum shifted by the population minimum raw fitness.
pub fn allocate_offspring(
    species: &SpeciesSet,
    adjusted: &BTreeMap<u64, f64>,
    min_fitness: f64,
    pop_size: usize,
) -> BTreeMap<u64, usize> {
    let sums: Vec<f64> = species
        .species
        .iter()
        .map(|s| {
            let sum: f64 = s.members.iter().map(|k| adjusted.get(k).copied().unwrap_or(0.0)).sum();
            // Σ (f_i - f_min) / n_s over the species.
            (sum - min_fitness).max(0.0)
        })
        .collect();
    let counts = largest_remainder(&sums, pop_size);
    species.species.iter().map(|s| s.id).zip(counts).collect()
}

/// Updates species fitness/stagnation and drops stagnant species, keeping
/// the `species_elitism` best. Returns the removed species ids.
pub fn remove_stagnant(
    species: &mut SpeciesSet,
    population: &[Genome],
    cfg: &NeatConfig,
    generation: usize,
) -> Vec<u64> {
    let by_key: BTreeMap<u64, &Genome> = population.iter().map(|g| (g.key, g)).collect();
    let mut scored: Vec<(f64, u64)> = Vec::new();
    for s in &mut species.species {
        let fits: Vec<f64> = s
            .members
            .iter()
            .map(|k| by_key.get(k).and_then(|g| g.fitness).unwrap_or(INVALID_FITNESS))
            .collect();
        let f = cfg.species_fitness_func.reduce(&fits);
        if s.best_fitness.is_none_or(|b| f > b) {
            s.best_fitness = Some(f);
            s.last_improved = generation;
        }
        s.fitness_history.push(f);
        scored.push((f, s.id));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let protected: Vec<u64> = scored.iter().take(cfg.species_elitism).map(|&(_, id)| id).collect();
    let mut removed = Vec::new();
    species.species.retain(|s| {
        let stale = s.stagnation(generation) > cfg.max_stagnation && !protected.contains(&s.id);
        if stale {
            removed.push(s.id);
        }
        !stale
    });
    removed
}

/// Ranking used everywhere: fitness descending, then key ascending.
fn rank(a: &Genome, b: &Genome) -> std::cmp::Ordering {
    let fa = a.fitness.unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness.unwrap_or(f64::NEG_INFINITY);
    fb.total_cmp(&fa).then(a.key.cmp(&b.key))
}

/// Size of the parent pool for a species of `n` members.
pub fn parent_pool_size(n: usize, survival_threshold: f64) -> usize {
    ((n as f64 * survival_threshold).ceil() as usize).clamp(1, n.max(1))
}

/// Builds the next generation from `allocation`.
///
/// Per species: the top `elitism` members are copied verbatim, the rest are
/// children of parents drawn from the top `survival_threshold` fraction,
/// followed by the mutation pass.
pub fn reproduce<R: Rng + ?Sized>(
    species: &SpeciesSet,
    population: &[Genome],
    allocation: &BTreeMap<u64, usize>,
    registry: &mut InnovationRegistry,
    next_key: &mut u64,
    cfg: &NeatConfig,
    rng: &mut R,
) -> Vec<Genome> {
    let by_key: BTreeMap<u64, &Genome> = population.iter().map(|g| (g.key, g)).collect();
    let mut out = Vec::new();
    for s in &species.species {
        let quota = allocation.get(&s.id).copied().unwrap_or(0);
        if quota == 0 {
            continue;
        }
        let mut members: Vec<&Genome> = s.members.iter().filter_map(|k| by_key.get(k).copied()).collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by(|a, b| rank(a, b));
        let elites = cfg.elitism.min(quota).min(members.len());
        out.extend(members[..elites].iter().map(|g| (*g).clone()));

        let pool = &members[..parent_pool_size(members.len(), cfg.survival_threshold)];
        for _ in elites..quota {
            let p1 = *pool.choose(rng).expect("non-empty pool");
            let p2 = *pool.choose(rng).expect("non-empty pool");
            let key = *next_key;
            *next_key += 1;
            let mut child = if p1.key == p2.key {
                let mut c = p1.clone();
                c.key = key;
                c.fitness = None;
                c
            } else {
                let (fitter, other) = match rank(p1, p2) {
                    std::cmp::Ordering::Less => (p1, p2),
                    _ if p1.fitness == p2.fitness => match p1.connections.len().cmp(&p2.connections.len()) {
                        std::cmp::Ordering::Less => (p1, p2),
                        std::cmp::Ordering::Greater => (p2, p1),
                        std::cmp::Ordering::Equal if rng.random::<bool>() => (p1, p2),
                        std::cmp::Ordering::Equal => (p2, p1),
                    },
                    _ => (p2, p1),
                };
                crossover(fitter, other, key, rng)
            };
            child.mutate(cfg, registry, rng);
            out.push(child);
        }
    }
    out
}

/// Per-evaluation context handed to the fitness function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalContext {
    pub generation: usize,
    pub genome_key: u64,
    /// `mix_seed(run_seed, generation, genome_key)`.
    pub seed: u64,
}

/// Maps a genome to raw fitness. Must be a pure function of its arguments
/// so that serial and parallel schedules agree.
pub trait Evaluator: Sync {
    fn evaluate(&self, genome: &Genome, ctx: EvalContext) -> f64;
}

impl<F> Evaluator for F
where
    F: Fn(&Genome, EvalContext) -> f64 + Sync,
{
    fn evaluate(&self, genome: &Genome, ctx: EvalContext) -> f64 {
        self(genome, ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub species_count: usize,
    pub best_key: u64,
    pub best_genome_size: usize,
    pub mean_genome_size: f64,
    pub best_ever_fitness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    /// Fitness threshold reached during this generation.
    Solved,
}

/// Full evolutionary state; serialising it yields a resumable checkpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Population {
    pub config: NeatConfig,
    pub seed: u64,
    /// Index of the generation about to be evaluated.
    pub generation: usize,
    pub genomes: Vec<Genome>,
    pub species: SpeciesSet,
    pub registry: InnovationRegistry,
    pub next_key: u64,
    pub rng: ChaCha8Rng,
    pub best: Option<Genome>,
    pub log: Vec<GenerationStats>,
    pub solved: bool,
}

impl Population {
    pub fn new(config: NeatConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut registry = InnovationRegistry::new(&config);
        let genomes: Vec<Genome> = (0..config.pop_size as u64)
            .map(|k| Genome::new_initial(k, &config, &mut registry, &mut rng))
            .collect();
        let mut species = SpeciesSet::default();
        species.speciate(&genomes, &config, 0);
        Self {
            next_key: config.pop_size as u64,
            config,
            seed,
            generation: 0,
            genomes,
            species,
            registry,
            rng,
            best: None,
            log: Vec::new(),
            solved: false,
        }
    }

    fn evaluate<E: Evaluator + ?Sized>(&mut self, evaluator: &E, workers: usize) -> Result<(), EvolutionError> {
        let generation = self.generation;
        let seed = self.seed;
        let eval_one = |g: &Genome| {
            let ctx = EvalContext {
                generation,
                genome_key: g.key,
                seed: mix_seed(&[seed, generation as u64, g.key]),
            };
            let f = evaluator.evaluate(g, ctx);
            if f.is_finite() {
                f
            } else {
                INVALID_FITNESS
            }
        };
        let fits = evaluate_all(&self.genomes, &eval_one, workers)?;
        for (g, f) in self.genomes.iter_mut().zip(fits) {
            g.fitness = Some(f);
        }
        Ok(())
    }

    /// Evaluates the current generation and, unless solved, breeds the next.
    pub fn step<E: Evaluator + ?Sized>(&mut self, evaluator: &E, workers: usize) -> Result<StepOutcome, EvolutionError> {
        self.evaluate(evaluator, workers)?;

        let fits: Vec<f64> = self.genomes.iter().map(|g| g.fitness.unwrap_or(INVALID_FITNESS)).collect();
        let champ = self.genomes.iter().min_by(|a, b| rank(a, b)).expect("non-empty population").clone();
        let champ_fit = champ.fitness.unwrap_or(INVALID_FITNESS);
        if self.best.as_ref().is_none_or(|b| champ_fit > b.fitness.unwrap_or(INVALID_FITNESS)) {
            self.best = Some(champ.clone());
        }
        let sizes: Vec<usize> = self.genomes.iter().map(Genome::parameter_count).collect();
        self.log.push(GenerationStats {
            generation: self.generation,
            best_fitness: champ_fit,
            mean_fitness: fits.iter().sum::<f64>() / fits.len() as f64,
            species_count: self.species.len(),
            best_key: champ.key,
            best_genome_size: champ.parameter_count(),
            mean_genome_size: sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
            best_ever_fitness: self.best.as_ref().and_then(|b| b.fitness).unwrap_or(champ_fit),
        });

        if !self.config.no_fitness_termination
            && self.config.fitness_criterion.reduce(&fits) >= self.config.fitness_threshold
        {
            self.solved = true;
            return Ok(StepOutcome::Solved);
        }

        self.breed()?;
        Ok(StepOutcome::Continue)
    }

    fn breed(&mut self) -> Result<(), EvolutionError> {
        let cfg = &self.config;
        remove_stagnant(&mut self.species, &self.genomes, cfg, self.generation);
        let next = if self.species.is_empty() {
            if !cfg.reset_on_extinction {
                return Err(EvolutionError::Extinction);
            }
            self.fresh_genomes()
        } else {
            let adjusted = adjusted_fitness(&self.species, &self.genomes);
            let min_fitness = self
                .species
                .species
                .iter()
                .flat_map(|s| s.members.iter())
                .filter_map(|k| self.genomes.iter().find(|g| g.key == *k).and_then(|g| g.fitness))
                .fold(f64::INFINITY, f64::min);
            let allocation = allocate_offspring(&self.species, &adjusted, min_fitness, cfg.pop_size);
            reproduce(
                &self.species,
                &self.genomes,
                &allocation,
                &mut self.registry,
                &mut self.next_key,
                cfg,
                &mut self.rng,
            )
        };
        self.generation += 1;
        self.genomes = next;
        self.species.speciate(&self.genomes, &self.config, self.generation);
        Ok(())
    }

    fn fresh_genomes(&mut self) -> Vec<Genome> {
        (0..self.config.pop_size)
            .map(|_| {
                let key = self.next_key;
                self.next_key += 1;
                Genome::new_initial(key, &self.config, &mut self.registry, &mut self.rng)
            })
            .collect()
    }

    /// Runs until `max_generations` have been evaluated in total or the
    /// fitness threshold is met. `on_generation` sees the state after each
    /// generation (checkpoint hook).
    pub fn run<E, F>(
        &mut self,
        evaluator: &E,
        max_generations: usize,
        workers: usize,
        mut on_generation: F,
    ) -> Result<RunSummary, EvolutionError>
    where
        E: Evaluator + ?Sized,
        F: FnMut(&Population),
    {
        while !self.solved && self.log.len() < max_generations {
            self.step(evaluator, workers)?;
            on_generation(self);
        }
        Ok(RunSummary {
            champion: self.best.clone().expect("at least one generation evaluated"),
            log: self.log.clone(),
            solved: self.solved,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub champion: Genome,
    pub log: Vec<GenerationStats>,
    pub solved: bool,
}

/// Convenience wrapper: fresh population, run, champion plus log.
pub fn run<E: Evaluator + ?Sized>(
    evaluator: &E,
    config: &NeatConfig,
    max_generations: usize,
    seed: u64,
    workers: usize,
) -> Result<RunSummary, EvolutionError> {
    Population::new(config.clone(), seed).run(evaluator, max_generations.max(1), workers, |_| {})
}

#[cfg(feature = "parallel")]
fn evaluate_all<F>(genomes: &[Genome], f: &F, workers: usize) -> Result<Vec<f64>, EvolutionError>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return Ok(genomes.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EvolutionError::Workers(e.to_string()))?;
    Ok(pool.install(|| genomes.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all<F>(genomes: &[Genome], f: &F, _workers: usize) -> Result<Vec<f64>, EvolutionError>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    Ok(genomes.iter().map(f).collect())
}
