//! Corpus pipeline: batch generation with pruning and deduplication,
//! usage statistics, the tab-separated file format, and train/validation/test
//! splitting.
//!
//! File format, one sample per line:
//!
//! ```text
//! <program A> TAB <program B> TAB <sequence tokens | Not_equal>
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::axioms::Category;
use crate::checker::{check, parse_sequence, NOT_EQUAL};
use crate::generator::{sample, GenConfig, Outcome, SampleTuple};
use crate::lang::parse;

/// Size filters applied to every generated sample.
#[derive(Debug, Clone)]
pub struct PruneRules {
    /// Combined node count of both programs.
    pub max_pair_tokens: usize,
    pub max_depth_edges: usize,
    pub max_steps: usize,
    /// Selector words plus category names.
    pub max_seq_tokens: usize,
    pub max_program_nodes: usize,
    /// Probability of discarding a sample whose proof has 1 or 2 steps.
    pub drop_short_fraction: f64,
    /// Upper bound on the share of proof-carrying samples that may use any
    /// single category; `None` disables balancing.
    pub max_category_share: Option<f64>,
}

impl Default for PruneRules {
    fn default() -> Self {
        PruneRules {
            max_pair_tokens: 60,
            max_depth_edges: 5,
            max_steps: 5,
            max_seq_tokens: 25,
            max_program_nodes: 30,
            drop_short_fraction: 0.5,
            max_category_share: Some(0.3),
        }
    }
}

/// Why a generated sample was not emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rejection {
    ProgramTooLarge,
    PairTooLarge,
    TooDeep,
    TooManySteps,
    SequenceTooLong,
    LexicallyEqual,
    ShortDropped,
    Unbalanced,
    Duplicate,
}

impl PruneRules {
    /// Deterministic size/shape filters. The random short-sequence drop and
    /// deduplication are applied by [`build`].
    pub fn violation(&self, s: &SampleTuple) -> Option<Rejection> {
        let (a, b) = (&s.prog_a, &s.prog_b);
        if a == b {
            return Some(Rejection::LexicallyEqual);
        }
        if a.node_count().max(b.node_count()) > self.max_program_nodes {
            return Some(Rejection::ProgramTooLarge);
        }
        if a.node_count() + b.node_count() > self.max_pair_tokens {
            return Some(Rejection::PairTooLarge);
        }
        if a.depth_edges().max(b.depth_edges()) > self.max_depth_edges {
            return Some(Rejection::TooDeep);
        }
        if let Some(seq) = s.sequence() {
            if seq.len() > self.max_steps {
                return Some(Rejection::TooManySteps);
            }
            if seq.token_len() > self.max_seq_tokens {
                return Some(Rejection::SequenceTooLong);
            }
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub gen: GenConfig,
    pub prune: PruneRules,
    /// Probability that a raw sample is a corrupted (Not_equal) pair.
    pub not_equal_frac: f64,
    /// Raw samples drawn before giving up; `None` means `200 * n + 10_000`.
    pub max_attempts: Option<u64>,
}

impl BuildConfig {
    pub fn new(gen: GenConfig) -> BuildConfig {
        BuildConfig {
            gen,
            prune: PruneRules::default(),
            not_equal_frac: 0.0,
            max_attempts: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("only {produced} of {target} samples after {attempts} attempts")]
    Exhausted {
        produced: usize,
        target: usize,
        attempts: u64,
    },
    #[error("generated sample {index} failed re-verification")]
    Unverified { index: u64 },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid split fractions {0:?}")]
    Fractions([f64; 3]),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Generated samples plus rejection bookkeeping.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub samples: Vec<SampleTuple>,
    pub attempts: u64,
    pub rejected: BTreeMap<Rejection, u64>,
}

const CHUNK: u64 = 4096;
const DROP_STREAM_SALT: u64 = 0x6a09_e667_f3bc_c909;

fn short_drop(cfg: &BuildConfig, index: u64, seq_len: usize) -> bool {
    if !(1..=2).contains(&seq_len) || cfg.prune.drop_short_fraction <= 0.0 {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.gen.seed ^ DROP_STREAM_SALT);
    rng.set_stream(index);
    rng.gen_bool(cfg.prune.drop_short_fraction.min(1.0))
}

enum Candidate {
    Keep(SampleTuple),
    Reject(Rejection),
    Unverified,
}

fn candidate(cfg: &BuildConfig, index: u64) -> Candidate {
    let s = sample(&cfg.gen, index, cfg.not_equal_frac);
    if let Some(r) = cfg.prune.violation(&s) {
        return Candidate::Reject(r);
    }
    if let Outcome::Sequence(seq) = &s.outcome {
        if short_drop(cfg, index, seq.len()) {
            return Candidate::Reject(Rejection::ShortDropped);
        }
        if !check(&s.prog_a, seq, &s.prog_b).is_proven() {
            return Candidate::Unverified;
        }
    }
    Candidate::Keep(s)
}

/// Running per-category usage of the accepted samples. A sample is refused
/// when one of its categories is already used by more than the allowed share
/// of accepted samples.
struct Balancer {
    cap: Option<f64>,
    accepted: usize,
    used: [usize; 13],
}

impl Balancer {
    fn new(cap: Option<f64>) -> Balancer {
        Balancer {
            cap,
            accepted: 0,
            used: [0; 13],
        }
    }

    fn admit(&mut self, s: &SampleTuple) -> bool {
        let Some(seq) = s.sequence() else {
            return true;
        };
        let mut cats: Vec<usize> = seq.categories().map(|c| c.index()).collect();
        cats.sort_unstable();
        cats.dedup();
        if let Some(cap) = self.cap {
            if cats.iter().any(|&c| self.used[c] as f64 > cap * self.accepted as f64) {
                return false;
            }
        }
        self.accepted += 1;
        for c in cats {
            self.used[c] += 1;
        }
        true
    }
}

/// Draws samples `0, 1, 2, ...` from the stream defined by `cfg.gen` until
/// `n_target` distinct samples pass the filters.
///
/// Samples are generated in parallel chunks but accepted in index order, so
/// the result only depends on the configuration.
pub fn build(cfg: &BuildConfig, n_target: usize) -> Result<Corpus, DatasetError> {
    let max_attempts = cfg.max_attempts.unwrap_or(200 * n_target as u64 + 10_000);
    let mut seen: HashSet<SampleTuple> = HashSet::with_capacity(n_target);
    let mut corpus = Corpus {
        samples: Vec::with_capacity(n_target),
        attempts: 0,
        rejected: BTreeMap::new(),
    };
    let mut balance = Balancer::new(cfg.prune.max_category_share);
    let mut next = 0u64;
    while corpus.samples.len() < n_target {
        if next >= max_attempts {
            return Err(DatasetError::Exhausted {
                produced: corpus.samples.len(),
                target: n_target,
                attempts: next,
            });
        }
        let end = (next + CHUNK).min(max_attempts);
        let batch: Vec<Candidate> = (next..end).into_par_iter().map(|i| candidate(cfg, i)).collect();
        for (offset, c) in batch.into_iter().enumerate() {
            let index = next + offset as u64;
            corpus.attempts = index + 1;
            match c {
                Candidate::Keep(s) => {
                    if seen.contains(&s) {
                        *corpus.rejected.entry(Rejection::Duplicate).or_default() += 1;
                    } else if !balance.admit(&s) {
                        *corpus.rejected.entry(Rejection::Unbalanced).or_default() += 1;
                    } else {
                        seen.insert(s.clone());
                        corpus.samples.push(s);
                    }
                }
                Candidate::Reject(r) => *corpus.rejected.entry(r).or_default() += 1,
                Candidate::Unverified => return Err(DatasetError::Unverified { index }),
            }
            if corpus.samples.len() == n_target {
                break;
            }
        }
        next = end;
    }
    Ok(corpus)
}

/// Aggregate statistics of a corpus.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetStats {
    pub count: usize,
    pub not_equal: usize,
    /// Samples (with a sequence) that use each category at least once,
    /// indexed by declaration order.
    pub category_samples: [usize; 13],
    pub step_histogram: BTreeMap<usize, usize>,
    /// Node counts of every program, A and B alike.
    pub node_histogram: BTreeMap<usize, usize>,
}

impl DatasetStats {
    pub fn add(&mut self, s: &SampleTuple) {
        self.count += 1;
        for p in [&s.prog_a, &s.prog_b] {
            *self.node_histogram.entry(p.node_count()).or_default() += 1;
        }
        match s.sequence() {
            None => self.not_equal += 1,
            Some(seq) => {
                *self.step_histogram.entry(seq.len()).or_default() += 1;
                let mut used = [false; 13];
                for c in seq.categories() {
                    used[c.index()] = true;
                }
                for (n, u) in self.category_samples.iter_mut().zip(used) {
                    *n += usize::from(u);
                }
            }
        }
    }

    pub fn merge(mut self, other: DatasetStats) -> DatasetStats {
        self.count += other.count;
        self.not_equal += other.not_equal;
        for (n, m) in self.category_samples.iter_mut().zip(other.category_samples) {
            *n += m;
        }
        for (k, v) in other.step_histogram {
            *self.step_histogram.entry(k).or_default() += v;
        }
        for (k, v) in other.node_histogram {
            *self.node_histogram.entry(k).or_default() += v;
        }
        self
    }

    /// Samples with a proof sequence.
    pub fn equal(&self) -> usize {
        self.count - self.not_equal
    }

    /// Share of proof-carrying samples that use `category`, in percent.
    pub fn usage_pct(&self, category: Category) -> f64 {
        if self.equal() == 0 {
            0.0
        } else {
            100.0 * self.category_samples[category.index()] as f64 / self.equal() as f64
        }
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { 100.0 * n as f64 / d as f64 };
        writeln!(f, "samples\t{}", self.count)?;
        writeln!(
            f,
            "not_equal\t{} ({:.1}%)",
            self.not_equal,
            pct(self.not_equal, self.count)
        )?;
        writeln!(f, "category usage:")?;
        for c in Category::ALL {
            writeln!(f, "  {:<18}{:>6.1}%", c.name(), self.usage_pct(c))?;
        }
        writeln!(f, "steps:")?;
        for (k, v) in &self.step_histogram {
            writeln!(f, "  {k:>2}  {:>6.1}%", pct(*v, self.equal()))?;
        }
        writeln!(f, "program nodes:")?;
        let programs = 2 * self.count;
        for (k, v) in &self.node_histogram {
            writeln!(f, "  {k:>2}  {:>6.1}%", pct(*v, programs))?;
        }
        Ok(())
    }
}

pub fn stats<'a>(samples: impl IntoIterator<Item = &'a SampleTuple>) -> DatasetStats {
    let mut st = DatasetStats::default();
    for s in samples {
        st.add(s);
    }
    st
}

/// One line of the corpus file, without the newline.
pub fn format_sample(s: &SampleTuple) -> String {
    let third = match &s.outcome {
        Outcome::Sequence(seq) => seq.to_string(),
        Outcome::NotEqual => NOT_EQUAL.to_string(),
    };
    format!("{}\t{}\t{}", s.prog_a, s.prog_b, third)
}

pub fn parse_sample(line: &str, line_no: usize) -> Result<SampleTuple, DatasetError> {
    let err = |message: String| DatasetError::Format { line: line_no, message };
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
    }
    let prog_a = parse(fields[0]).map_err(|e| err(format!("program A: {e}")))?;
    let prog_b = parse(fields[1]).map_err(|e| err(format!("program B: {e}")))?;
    let outcome = if fields[2] == NOT_EQUAL {
        Outcome::NotEqual
    } else {
        Outcome::Sequence(parse_sequence(fields[2]).map_err(|e| err(format!("sequence: {e}")))?)
    };
    Ok(SampleTuple {
        prog_a,
        prog_b,
        outcome,
    })
}

pub fn write<'a, W: Write>(mut out: W, samples: impl IntoIterator<Item = &'a SampleTuple>) -> io::Result<()> {
    for s in samples {
        writeln!(out, "{}", format_sample(s))?;
    }
    out.flush()
}

pub fn read<R: BufRead>(input: R) -> Result<Vec<SampleTuple>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        out.push(parse_sample(line, i + 1)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct Split {
    pub train: Vec<SampleTuple>,
    pub validation: Vec<SampleTuple>,
    pub test: Vec<SampleTuple>,
}

/// Shuffles with `seed` and cuts into train/validation/test by `fractions`.
pub fn split(samples: &[SampleTuple], fractions: [f64; 3], seed: u64) -> Result<Split, DatasetError> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) || (sum - 1.0).abs() > 1e-6 {
        return Err(DatasetError::Fractions(fractions));
    }
    let n = samples.len();
    let n_train = ((n as f64 * fractions[0]).round() as usize).min(n);
    let n_val = ((n as f64 * fractions[1]).round() as usize).min(n - n_train);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |r: std::ops::Range<usize>| order[r].iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(0..n_train),
        validation: pick(n_train..n_train + n_val),
        test: pick(n_train + n_val..n),
    })
}

/// Fraction of `test` samples with at least one program that never appears
/// (as A or B) in `train`.
pub fn novelty(train: &[SampleTuple], test: &[SampleTuple]) -> f64 {
    if test.is_empty() {
        return 0.0;
    }
    let known: HashSet<_> = train.iter().flat_map(|s| [&s.prog_a, &s.prog_b]).collect();
    let novel = test
        .iter()
        .filter(|s| !known.contains(&s.prog_a) || !known.contains(&s.prog_b))
        .count();
    novel as f64 / test.len() as f64
}
