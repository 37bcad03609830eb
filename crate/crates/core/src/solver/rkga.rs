//! Random-key genetic algorithm with two-level local improvement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::local::{lin_kernighan_nodes, to_nodes, to_path, two_opt_nodes, CostTable};
use super::{GaConfig, SolveStats, SolverError};
use crate::gtsp::{compose_key, decode, encode, fitness, Chromosome, DrawingPath, GtspError, GtspInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub fitness: f64,
    /// Lin-Kernighan was applied when this individual was produced.
    pub improved: bool,
}

impl Individual {
    pub fn new(inst: &GtspInstance, chromosome: Chromosome) -> Result<Self, GtspError> {
        let path = decode(&chromosome)?;
        if !path.is_valid_for(inst.len()) {
            return Err(GtspError::LengthMismatch {
                expected: inst.len(),
                got: chromosome.len(),
            });
        }
        Ok(Self {
            fitness: fitness(inst, &path.tour),
            chromosome,
            improved: false,
        })
    }
}

/// Independent stream per (generation, slot), so offspring do not depend
/// on evaluation order.
fn slot_rng(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

/// Picks `k` individuals uniformly with replacement and returns the fittest.
pub fn tournament_select<'a, R: Rng + ?Sized>(pop: &'a [Individual], k: usize, rng: &mut R) -> &'a Individual {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k {
        let other = &pop[rng.gen_range(0..pop.len())];
        if other.fitness < best.fitness {
            best = other;
        }
    }
    best
}

/// Key transform that reverses the encoded tour and flips every direction.
/// A zero decimal part stays zero.
pub fn reverse_keys(c: &Chromosome) -> Chromosome {
    let keys = (0..c.len())
        .map(|i| {
            let frac = c.fraction(i);
            let flipped_frac = if frac == 0.0 { 0.0 } else { 1.0 - frac };
            compose_key(1 - c.bit(i), flipped_frac)
        })
        .collect();
    Chromosome { keys }
}

pub fn uniform_crossover<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<Chromosome, GtspError> {
    if p1.len() != p2.len() {
        return Err(GtspError::LengthMismatch {
            expected: p1.len(),
            got: p2.len(),
        });
    }
    let first = if rng.gen_bool(cfg.reverse_p) {
        reverse_keys(p1)
    } else {
        p1.clone()
    };
    let keys = first
        .keys
        .iter()
        .zip(&p2.keys)
        .map(|(&a, &b)| if rng.gen_bool(cfg.key_inherit_p) { a } else { b })
        .collect();
    Ok(Chromosome { keys })
}

/// Index-shuffle of the decimal parts, then independent direction-bit flips.
pub fn mutate<R: Rng + ?Sized>(c: &Chromosome, cfg: &GaConfig, rng: &mut R) -> Chromosome {
    let n = c.len();
    let mut fracs: Vec<f64> = (0..n).map(|i| c.fraction(i)).collect();
    if rng.gen_bool(cfg.shuffle_p) {
        fracs.shuffle(rng);
    }
    let keys = (0..n)
        .map(|i| {
            let bit = if rng.gen_bool(cfg.flip_p) { 1 - c.bit(i) } else { c.bit(i) };
            compose_key(bit, fracs[i])
        })
        .collect();
    Chromosome { keys }
}

/// Fitness of the parent at the `threshold` percentile, 1-based rank
/// `ceil(threshold * N)` in ascending order.
fn threshold_fitness(sorted: &[Individual], threshold: f64) -> f64 {
    let n = sorted.len();
    let rank = ((threshold * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1].fitness
}

struct Improved {
    ind: Individual,
    lk: bool,
    evaluations: usize,
}

fn improve_with(table: &CostTable, inst: &GtspInstance, c: &Chromosome, gate: f64, use_lk: bool) -> Improved {
    let path = decode(c).expect("GA keeps chromosomes valid");
    let mut nodes = to_nodes(&path);
    two_opt_nodes(table, &mut nodes);
    let mut path = to_path(&nodes);
    let mut f = fitness(inst, &path.tour);
    let mut evaluations = 1;
    let lk = use_lk && f < gate;
    if lk {
        lin_kernighan_nodes(table, &mut nodes);
        path = to_path(&nodes);
        f = fitness(inst, &path.tour);
        evaluations += 1;
    }
    Improved {
        ind: Individual {
            chromosome: encode(&path),
            fitness: f,
            improved: lk,
        },
        lk,
        evaluations,
    }
}

/// Level-one 2-opt, then Lin-Kernighan if the result beats the parent at
/// the current threshold percentile (`use_lk` only). The improved path is
/// written back into the chromosome. The flag in the result tells whether
/// Lin-Kernighan ran.
pub fn improve(
    ind: &Individual,
    parents: &[Individual],
    stall: usize,
    cfg: &GaConfig,
    inst: &GtspInstance,
    use_lk: bool,
) -> (Individual, bool) {
    let mut sorted = parents.to_vec();
    sorted.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    let gate = threshold_fitness(&sorted, cfg.threshold(stall));
    let table = CostTable::new(inst);
    let out = improve_with(&table, inst, &ind.chromosome, gate, use_lk);
    (out.ind, out.lk)
}

fn random_chromosome<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Chromosome {
    let keys = (0..k)
        .map(|_| {
            let bit = u8::from(rng.gen_bool(0.5));
            compose_key(bit, rng.gen::<f64>())
        })
        .collect();
    Chromosome { keys }
}

fn sort_population(pop: &mut [Individual]) {
    pop.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
}

/// Runs the GA. `use_lk` enables the second improvement level. Results
/// depend only on the instance and config, never on the thread count.
pub fn run_rkga(inst: &GtspInstance, cfg: &GaConfig, use_lk: bool) -> Result<(DrawingPath, SolveStats), SolverError> {
    cfg.validate()?;
    let table = CostTable::new(inst);
    let k = inst.len();
    let n = cfg.population_size;
    let mut stats = SolveStats::default();

    // Initial individuals get level-one improvement like every later child.
    let init: Vec<Improved> = (0..n)
        .into_par_iter()
        .map(|slot| {
            let mut rng = slot_rng(cfg.seed, 0, slot);
            let c = random_chromosome(k, &mut rng);
            improve_with(&table, inst, &c, f64::NEG_INFINITY, false)
        })
        .collect();
    let mut pop: Vec<Individual> = Vec::with_capacity(n);
    for r in init {
        stats.evaluations += r.evaluations;
        pop.push(r.ind);
    }
    sort_population(&mut pop);
    let mut best = pop[0].fitness;
    stats.best_fitness_per_generation.push(best);

    let mut stall = 0;
    for generation in 1..=cfg.max_generations {
        if stall >= cfg.stall_limit {
            break;
        }
        let gate = threshold_fitness(&pop, cfg.threshold(stall));
        let parents = &pop;
        let children: Vec<Improved> = (0..n - cfg.elite_count)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_rng(cfg.seed, generation, slot);
                let a = tournament_select(parents, cfg.tournament_k, &mut rng);
                let b = tournament_select(parents, cfg.tournament_k, &mut rng);
                let (p1, p2) = if b.fitness < a.fitness { (b, a) } else { (a, b) };
                let mut child = if rng.gen_bool(cfg.p_crossover) {
                    uniform_crossover(&p1.chromosome, &p2.chromosome, cfg, &mut rng).expect("equal lengths")
                } else {
                    p1.chromosome.clone()
                };
                if rng.gen_bool(cfg.p_mutation) {
                    child = mutate(&child, cfg, &mut rng);
                }
                improve_with(&table, inst, &child, gate, use_lk)
            })
            .collect();

        let mut next: Vec<Individual> = pop[..cfg.elite_count].to_vec();
        for r in children {
            stats.evaluations += r.evaluations;
            stats.lk_invocations += usize::from(r.lk);
            next.push(r.ind);
        }
        sort_population(&mut next);
        pop = next;

        if pop[0].fitness < best - 1e-9 {
            best = pop[0].fitness;
            stall = 0;
        } else {
            stall += 1;
        }
        // Elitism keeps the best; record the running minimum regardless.
        let recorded = stats.best_fitness_per_generation.last().copied().unwrap_or(f64::INFINITY);
        stats.best_fitness_per_generation.push(pop[0].fitness.min(recorded));
    }

    let path = decode(&pop[0].chromosome).expect("GA keeps chromosomes valid");
    Ok((path, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtsp::{build_instance, Direction, Point};
    use crate::synth::random_instance;
    use crate::trace::LineSegment;
    use Direction::{Forward as F, Reverse as R};

    fn individual(f: f64) -> Individual {
        Individual {
            chromosome: Chromosome { keys: vec![1.5] },
            fitness: f,
            improved: false,
        }
    }

    #[test]
    fn tournament_k2_favours_best() {
        let pop: Vec<Individual> = [3.0, 1.0, 4.0, 2.0].into_iter().map(individual).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let best = (0..draws)
            .filter(|_| tournament_select(&pop, 2, &mut rng).fitness == 1.0)
            .count();
        // P(best) = 1 - (3/4)^2 = 7/16
        let p = best as f64 / draws as f64;
        assert!((p - 7.0 / 16.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn tournament_full_coverage_returns_best() {
        let pop: Vec<Individual> = [3.0, 1.0, 4.0, 2.0].into_iter().map(individual).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(tournament_select(&pop, 64, &mut rng).fitness == 1.0);
        }
    }

    fn fig_keys() -> Chromosome {
        Chromosome::new(vec![1.42, 0.17, 1.05, 0.88]).unwrap()
    }

    #[test]
    fn reversed_keys_decode_to_reversed_tour() {
        let c = fig_keys();
        let fwd = decode(&c).unwrap();
        assert_eq!(fwd.tour, vec![(2, F), (1, R), (0, F), (3, R)]);
        let rev = decode(&reverse_keys(&c)).unwrap();
        assert_eq!(rev, fwd.reversed());
    }

    #[test]
    fn crossover_extremes() {
        let p1 = fig_keys();
        let p2 = Chromosome::new(vec![0.3, 1.9, 0.6, 1.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let keep = GaConfig {
            key_inherit_p: 1.0,
            reverse_p: 0.0,
            ..GaConfig::default()
        };
        assert_eq!(uniform_crossover(&p1, &p2, &keep, &mut rng).unwrap(), p1);
        let other = GaConfig {
            key_inherit_p: 0.0,
            ..GaConfig::default()
        };
        assert_eq!(uniform_crossover(&p1, &p2, &other, &mut rng).unwrap(), p2);
        let short = Chromosome::new(vec![0.5]).unwrap();
        assert!(uniform_crossover(&p1, &short, &keep, &mut rng).is_err());
    }

    #[test]
    fn mutation_extremes() {
        let c = fig_keys();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let none = GaConfig {
            shuffle_p: 0.0,
            flip_p: 0.0,
            ..GaConfig::default()
        };
        assert_eq!(mutate(&c, &none, &mut rng), c);

        let flip = GaConfig {
            shuffle_p: 0.0,
            flip_p: 1.0,
            ..GaConfig::default()
        };
        let flipped = decode(&mutate(&c, &flip, &mut rng)).unwrap();
        let orig = decode(&c).unwrap();
        for (a, b) in orig.tour.iter().zip(&flipped.tour) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.flipped(), b.1);
        }

        let shuffle = GaConfig {
            shuffle_p: 1.0,
            flip_p: 0.0,
            ..GaConfig::default()
        };
        let shuffled = mutate(&c, &shuffle, &mut rng);
        assert!(decode(&shuffled).unwrap().is_valid_for(4));
        for i in 0..4 {
            assert_eq!(shuffled.bit(i), c.bit(i));
        }
    }

    #[test]
    fn threshold_rank_is_one_based_ceiling() {
        let pop: Vec<Individual> = (1..=100).map(|f| individual(f as f64)).collect();
        assert_eq!(threshold_fitness(&pop, 0.05), 5.0);
        assert_eq!(threshold_fitness(&pop, 0.10), 10.0);
        assert_eq!(threshold_fitness(&pop[..10], 0.05), 1.0);
    }

    #[test]
    fn improve_gates_lk_on_threshold() {
        let inst = random_instance(20, 80, 11);
        let cfg = GaConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let parents: Vec<Individual> = (0..20)
            .map(|_| Individual::new(&inst, random_chromosome(20, &mut rng)).unwrap())
            .collect();
        let ind = Individual::new(&inst, random_chromosome(20, &mut rng)).unwrap();
        // An unbeatable population: nothing passes the gate.
        let strong: Vec<Individual> = parents.iter().map(|p| Individual { fitness: 0.0, ..p.clone() }).collect();
        let (out, lk) = improve(&ind, &strong, 0, &cfg, &inst, true);
        assert!(!lk && !out.improved);
        assert!(out.fitness <= ind.fitness + 1e-9);
        // A hopeless population: everything passes.
        let weak: Vec<Individual> = parents
            .iter()
            .map(|p| Individual {
                fitness: f64::INFINITY,
                ..p.clone()
            })
            .collect();
        let (out, lk) = improve(&ind, &weak, 0, &cfg, &inst, true);
        assert!(lk && out.improved);
        assert!(out.fitness <= ind.fitness + 1e-9);
        // Cached fitness matches the written-back chromosome.
        assert_eq!(Individual::new(&inst, out.chromosome.clone()).unwrap().fitness, out.fitness);
    }

    fn small_cfg(seed: u64) -> GaConfig {
        GaConfig {
            population_size: 20,
            max_generations: 15,
            seed,
            ..GaConfig::default()
        }
    }

    #[test]
    fn single_segment_picks_better_direction() {
        let seg = LineSegment::new(0, vec![[9, 0], [8, 0], [7, 0]]).unwrap();
        let inst = build_instance(vec![seg], Point::default(), 30.0).unwrap();
        let (p, stats) = run_rkga(&inst, &small_cfg(1), true).unwrap();
        // With one segment both directions cost the same round trip.
        assert_eq!(stats.best_fitness_per_generation[0], fitness(&inst, &p.tour));
        assert!((fitness(&inst, &p.tour) - (60.0 + 9.0 + 7.0)).abs() < 1e-9);
    }

    #[test]
    fn elitism_and_determinism() {
        let inst = random_instance(15, 60, 4);
        let (p1, s1) = run_rkga(&inst, &small_cfg(9), true).unwrap();
        let (p2, s2) = run_rkga(&inst, &small_cfg(9), true).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(s1.best_fitness_per_generation, s2.best_fitness_per_generation);
        assert_eq!(s1.lk_invocations, s2.lk_invocations);
        assert!(s1.best_fitness_per_generation.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*s1.best_fitness_per_generation.last().unwrap(), fitness(&inst, &p1.tour));
    }

    #[test]
    fn invalid_config_rejected() {
        let inst = random_instance(3, 20, 0);
        let cfg = GaConfig {
            elite_count: 20,
            ..small_cfg(0)
        };
        assert!(run_rkga(&inst, &cfg, false).is_err());
    }
}
