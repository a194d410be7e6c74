//! Compression of segmented sequences of order type ω·k+m to length ≤ ω,
//! and of divergent sequences to a single divergent ω-sequence.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::projection::rhs_occurrences;
use crate::redex::{apply_step, Redex};
use crate::sequence::{OmegaSequence, Segment, Sequence, Skip, StepSource, DEPTH_PROBE_LIMIT, Prepend};
use crate::term::{Position, Term};
use crate::trs::Trs;

/// Consecutive anti-diagonals without an emitted step before the search
/// for the next dovetailed step gives up.
pub const MAX_EMPTY_DIAGONALS: usize = 4096;

#[derive(Default)]
struct Dovetail {
    emitted: Vec<Redex>,
    /// `after[k]`: number of emitted steps after diagonal `k`.
    after: Vec<usize>,
}

/// A step `head` performed at the limit of `acc`, moved in front of the
/// tail of `acc` that lies strictly below `depth(head) + pattern depth`.
/// The tail is replayed on every occurrence of the corresponding rhs
/// variable, streams interleaved along anti-diagonals.
pub struct Pull {
    acc: Arc<dyn StepSource>,
    head: Redex,
    n: usize,
    pattern_depth: usize,
    /// `(lhs variable position, rhs occurrence)`, rhs occurrences in
    /// breadth-first order.
    streams: Vec<(Position, Position)>,
    cache: Mutex<Dovetail>,
}

impl Pull {
    pub fn new(trs: &Trs, acc: Arc<dyn StepSource>, head: Redex) -> Result<Pull> {
        let rule = trs.rule(head.rule);
        let dp = rule.pattern_depth();
        let n = acc
            .modulus(head.depth() + dp)
            .unwrap_or_else(|| Err(Error::ModulusUnavailable(acc.describe())))?;
        let mut streams: Vec<(Position, Position)> = Vec::new();
        for x in rule.lhs().vars() {
            let qx = rule
                .lhs_var_position(&x)
                .ok_or_else(|| Error::Invariant(format!("variable {x} not found in lhs")))?;
            for r in rhs_occurrences(trs, head.rule, &x) {
                streams.push((qx.clone(), r));
            }
        }
        streams.sort_by(|a, b| a.1.depth_lex_cmp(&b.1));
        Ok(Pull {
            acc,
            head,
            n,
            pattern_depth: dp,
            streams,
            cache: Mutex::new(Dovetail::default()),
        })
    }

    /// Index of the pulled step in the output.
    pub fn head_index(&self) -> usize {
        self.n
    }

    /// What stream `i` emits for tail step `j`.
    fn emission(&self, i: usize, j: usize) -> Result<Option<Redex>> {
        let t = self.acc.step(self.n + j)?;
        let p = &self.head.position;
        match p.strip_prefix_of(&t.position) {
            None => Ok((i == 0).then_some(t)),
            Some(_) if i == 0 => Ok(None),
            Some(rel) => {
                let (qx, r) = &self.streams[i - 1];
                Ok(qx
                    .strip_prefix_of(&rel)
                    .map(|rest| Redex::new(p.concat(r).concat(&rest), t.rule)))
            }
        }
    }

    fn extend(&self, cache: &mut Dovetail) -> Result<()> {
        let k = cache.after.len();
        for i in 0..=k.min(self.streams.len()) {
            if let Some(r) = self.emission(i, k - i)? {
                cache.emitted.push(r);
            }
        }
        cache.after.push(cache.emitted.len());
        Ok(())
    }

    fn emitted_through_diagonal(&self, k: usize) -> Result<usize> {
        let mut cache = self.cache.lock().expect("dovetail cache");
        while cache.after.len() <= k {
            self.extend(&mut cache)?;
        }
        Ok(cache.after[k])
    }

    fn dovetail_step(&self, i: usize) -> Result<Redex> {
        let mut cache = self.cache.lock().expect("dovetail cache");
        let mut empty = 0;
        while cache.emitted.len() <= i {
            let before = cache.emitted.len();
            self.extend(&mut cache)?;
            empty = if cache.emitted.len() == before { empty + 1 } else { 0 };
            if empty > MAX_EMPTY_DIAGONALS {
                return Err(Error::BudgetExhausted(format!(
                    "no step {i} after the pulled step {} (the output may be finite)",
                    self.head.position
                )));
            }
        }
        Ok(cache.emitted[i].clone())
    }
}

impl StepSource for Pull {
    fn step(&self, i: usize) -> Result<Redex> {
        match i.cmp(&self.n) {
            std::cmp::Ordering::Less => self.acc.step(i),
            std::cmp::Ordering::Equal => Ok(self.head.clone()),
            std::cmp::Ordering::Greater => self.dovetail_step(i - self.n - 1),
        }
    }

    fn modulus(&self, d: usize) -> Option<Result<usize>> {
        let dh = self.head.depth();
        if d < dh {
            return self.acc.modulus(d);
        }
        let run = || -> Result<usize> {
            let streams = 1 + self.streams.iter().filter(|(_, r)| r.depth() + dh < d).count();
            let tail = self
                .acc
                .modulus(d + self.pattern_depth)
                .unwrap_or_else(|| Err(Error::ModulusUnavailable(self.acc.describe())))?
                .saturating_sub(self.n);
            if tail == 0 {
                return Ok(self.n + 1);
            }
            Ok(self.n + 1 + self.emitted_through_diagonal(streams + tail - 2)?)
        };
        Some(run())
    }

    fn describe(&self) -> String {
        format!("{} with #{} at {} pulled to index {}", self.acc.describe(), self.head.rule, self.head.position, self.n)
    }
}

/// The limit case: every step of `tau` (performed at the limit of `base`)
/// pulled into `base` in turn; the prefix up to depth `d` is that of the
/// sequence with the first `tau.modulus(d)` steps pulled in.
pub struct LimitPull {
    trs: Arc<Trs>,
    tau: Arc<dyn StepSource>,
    chain: Mutex<Vec<Arc<dyn StepSource>>>,
}

impl LimitPull {
    pub fn new(trs: Arc<Trs>, base: Arc<dyn StepSource>, tau: Arc<dyn StepSource>) -> LimitPull {
        LimitPull {
            trs,
            tau,
            chain: Mutex::new(vec![base]),
        }
    }

    fn stage(&self, j: usize) -> Result<Arc<dyn StepSource>> {
        let mut chain = self.chain.lock().expect("pull chain");
        while chain.len() <= j {
            let k = chain.len() - 1;
            let next = Pull::new(&self.trs, chain[k].clone(), self.tau.step(k)?)?;
            chain.push(Arc::new(next));
        }
        Ok(chain[j].clone())
    }

    fn modulus_at(&self, d: usize) -> Result<usize> {
        let j = self
            .tau
            .modulus(d)
            .unwrap_or_else(|| Err(Error::ModulusUnavailable(self.tau.describe())))?;
        self.stage(j)?
            .modulus(d)
            .unwrap_or_else(|| Err(Error::ModulusUnavailable("pulled prefix".into())))
    }
}

impl StepSource for LimitPull {
    fn step(&self, i: usize) -> Result<Redex> {
        for d in 0..DEPTH_PROBE_LIMIT {
            if i < self.modulus_at(d)? {
                let j = self.tau.modulus(d).expect("checked above")?;
                return self.stage(j)?.step(i);
            }
        }
        Err(Error::BudgetExhausted(format!("step {i} not determined by depth {DEPTH_PROBE_LIMIT}")))
    }

    fn modulus(&self, d: usize) -> Option<Result<usize>> {
        Some(self.modulus_at(d))
    }

    fn describe(&self) -> String {
        format!("{} pulled into its predecessor", self.tau.describe())
    }
}

enum Acc {
    Finite(Vec<Redex>),
    Omega(Arc<dyn StepSource>, Option<Term>),
}

fn fold_segments(trs: &Arc<Trs>, segments: &[Segment]) -> Result<Acc> {
    let mut acc = Acc::Finite(Vec::new());
    for seg in segments {
        acc = match (acc, seg) {
            (Acc::Finite(mut v), Segment::Finite(steps)) => {
                v.extend(steps.iter().cloned());
                Acc::Finite(v)
            }
            (Acc::Finite(v), Segment::Omega(w)) if v.is_empty() => {
                Acc::Omega(w.steps().clone(), w.declared_limit().cloned())
            }
            (Acc::Finite(v), Segment::Omega(w)) => Acc::Omega(
                Arc::new(Prepend {
                    prefix: v,
                    rest: w.steps().clone(),
                }),
                w.declared_limit().cloned(),
            ),
            (Acc::Omega(mut a, lim), Segment::Finite(steps)) => {
                let mut lim = lim.ok_or_else(|| Error::InvalidSequence("ω-segment without declared limit".into()))?;
                for r in steps {
                    lim = apply_step(trs, &lim, r)?;
                    a = Arc::new(Pull::new(trs, a, r.clone())?);
                }
                Acc::Omega(a, Some(lim))
            }
            (Acc::Omega(a, _), Segment::Omega(w)) => Acc::Omega(
                Arc::new(LimitPull::new(trs.clone(), a, w.steps().clone())),
                w.declared_limit().cloned(),
            ),
        };
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct CompressionReport {
    pub input_order: (usize, usize),
    pub output: Sequence,
    pub min_depth: Option<usize>,
    pub steps_at_d_in: usize,
    pub steps_at_d_out: usize,
    pub min_depth_out: Option<usize>,
    pub limit_agreement_depth: usize,
    pub limit_agrees: bool,
    pub source_preserved: bool,
}

impl CompressionReport {
    pub fn holds(&self) -> bool {
        self.limit_agrees
            && self.source_preserved
            && self.min_depth == self.min_depth_out
            && self.steps_at_d_in == self.steps_at_d_out
    }
}

/// Compresses a strongly convergent sequence of order type ω·k+m into one of
/// length at most ω, checking the limits against each other to depth `d_check`.
pub fn compress(seq: &Sequence, d_check: usize) -> Result<CompressionReport> {
    let trs = seq.trs().clone();
    if let Some(rule) = trs.rules().iter().find(|r| !r.is_left_linear()) {
        return Err(Error::NotLeftLinear(rule.name().to_string()));
    }
    if !seq.is_convergent() {
        return Err(Error::ModulusUnavailable("a segment has no convergence modulus".into()));
    }
    let output = match fold_segments(&trs, seq.segments())? {
        Acc::Finite(v) => Sequence::finite(trs.clone(), seq.source().clone(), v)?,
        Acc::Omega(a, lim) => Sequence::omega(OmegaSequence::new(trs.clone(), seq.source().clone(), a, lim)),
    };
    let (min_depth, steps_at_d_in) = seq.min_depth_count()?.map_or((None, 0), |(d, c)| (Some(d), c));
    let (min_depth_out, steps_at_d_out) = output.min_depth_count()?.map_or((None, 0), |(d, c)| (Some(d), c));
    let limit_agrees = seq.end_to_depth(d_check)?.eq_to_depth(&output.end_to_depth(d_check)?, d_check);
    Ok(CompressionReport {
        input_order: seq.order_type(),
        source_preserved: output.source().eq_rational(seq.source()),
        output,
        min_depth,
        steps_at_d_in,
        steps_at_d_out,
        min_depth_out,
        limit_agreement_depth: d_check,
        limit_agrees,
    })
}

#[derive(Clone, Debug)]
pub struct DivergentReport {
    pub source: Term,
    /// The emitted prefix; every step was checked to be a redex.
    pub prefix: Vec<Redex>,
    /// Depth at which the input diverges.
    pub depth: usize,
    pub steps_at_depth: usize,
    /// Length of each emitted chunk; each chunk ends with a step at `depth`.
    pub chunks: Vec<usize>,
    /// The largest chunk length.
    pub chunk_bound: usize,
}

/// Emits the first `k` steps of a single ω-sequence compressing a sequence
/// whose last segment diverges at some depth.
pub fn compress_divergent(seq: &Sequence, k: usize) -> Result<DivergentReport> {
    let trs = seq.trs().clone();
    if let Some(rule) = trs.rules().iter().find(|r| !r.is_left_linear()) {
        return Err(Error::NotLeftLinear(rule.name().to_string()));
    }
    let (last, earlier) = seq
        .segments()
        .split_last()
        .ok_or_else(|| Error::WitnessUnavailable("empty sequence".into()))?;
    let Segment::Omega(w) = last else {
        return Err(Error::WitnessUnavailable("the last segment is finite".into()));
    };
    let (depth, witness) = w
        .steps()
        .divergence()
        .ok_or_else(|| Error::WitnessUnavailable(w.steps().describe()))?;
    let mut acc = fold_segments(&trs, earlier)?;
    let mut cur = seq.source().clone();
    let mut prefix = Vec::with_capacity(k);
    let mut chunks = Vec::new();
    let mut next_witness = (0usize, witness(0));
    let budget = k.saturating_mul(64).max(DEPTH_PROBE_LIMIT);
    let emit = |chunk: Vec<Redex>, cur: &mut Term, prefix: &mut Vec<Redex>| -> Result<()> {
        for r in chunk {
            *cur = apply_step(&trs, cur, &r).map_err(|e| {
                Error::Invariant(format!("emitted step {} is not a redex: {e}", prefix.len()))
            })?;
            prefix.push(r);
        }
        Ok(())
    };
    let mut j = 0;
    while prefix.len() < k {
        if j > budget {
            return Err(Error::BudgetExhausted(format!("{} steps emitted after {j} input steps", prefix.len())));
        }
        let tau = w.step(j)?;
        let is_witness = j == next_witness.1;
        if is_witness {
            next_witness = (next_witness.0 + 1, witness(next_witness.0 + 1));
        }
        acc = match acc {
            Acc::Finite(mut v) => {
                v.push(tau);
                if is_witness {
                    chunks.push(v.len());
                    emit(std::mem::take(&mut v), &mut cur, &mut prefix)?;
                }
                Acc::Finite(v)
            }
            Acc::Omega(a, lim) => {
                let lim = lim.ok_or_else(|| Error::InvalidSequence("ω-segment without declared limit".into()))?;
                let lim = apply_step(&trs, &lim, &tau)?;
                let pulled = Pull::new(&trs, a, tau)?;
                let n = pulled.head_index();
                let pulled: Arc<dyn StepSource> = Arc::new(pulled);
                if is_witness {
                    let chunk = (0..=n).map(|i| pulled.step(i)).collect::<Result<Vec<_>>>()?;
                    chunks.push(chunk.len());
                    emit(chunk, &mut cur, &mut prefix)?;
                    Acc::Omega(Arc::new(Skip { inner: pulled, skip: n + 1 }), Some(lim))
                } else {
                    Acc::Omega(pulled, Some(lim))
                }
            }
        };
        j += 1;
    }
    prefix.truncate(k);
    let steps_at_depth = prefix.iter().filter(|r| r.depth() == depth).count();
    Ok(DivergentReport {
        source: seq.source().clone(),
        prefix,
        depth,
        steps_at_depth,
        chunk_bound: chunks.iter().copied().max().unwrap_or(0),
        chunks,
    })
}
