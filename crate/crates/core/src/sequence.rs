//! Rewrite sequences: finite step lists, ω-sequences given by a step
//! generator with a convergence modulus, and segmented concatenations of
//! order type ω·k+m.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::redex::{apply_step, Redex};
use crate::term::{Position, Term};
use crate::trs::{RuleId, Trs};

/// Largest depth probed when searching for minimal step depths or for a
/// modulus exceeding a given index.
pub const DEPTH_PROBE_LIMIT: usize = 4096;

/// A lazily enumerated infinite list of redexes.
pub trait StepSource: Send + Sync {
    fn step(&self, i: usize) -> Result<Redex>;

    /// An index after which every step is deeper than `d`; monotone in `d`.
    fn modulus(&self, d: usize) -> Option<Result<usize>>;

    /// A depth at which infinitely many steps occur, with the index of the
    /// `j`-th such step.
    fn divergence(&self) -> Option<(usize, Box<dyn Fn(usize) -> usize + Send + Sync + '_>)> {
        None
    }

    fn describe(&self) -> String;
}

/// Step `i` at `start · dir^(stride·i)`.
pub struct Spine {
    pub rule: RuleId,
    pub start: Position,
    pub dir: Position,
    pub stride: usize,
}

impl StepSource for Spine {
    fn step(&self, i: usize) -> Result<Redex> {
        let mut p = self.start.clone();
        for _ in 0..self.stride * i {
            p = p.concat(&self.dir);
        }
        Ok(Redex::new(p, self.rule))
    }

    fn modulus(&self, d: usize) -> Option<Result<usize>> {
        let s = self.start.depth();
        let gap = self.stride * self.dir.depth();
        Some(Ok(if d < s { 0 } else { (d - s) / gap + 1 }))
    }

    fn describe(&self) -> String {
        format!("spine(#{}, {}, {}, {})", self.rule, self.start, self.dir, self.stride)
    }
}

/// The same redex forever.
pub struct Repeat {
    pub rule: RuleId,
    pub at: Position,
}

impl StepSource for Repeat {
    fn step(&self, _: usize) -> Result<Redex> {
        Ok(Redex::new(self.at.clone(), self.rule))
    }

    fn modulus(&self, _: usize) -> Option<Result<usize>> {
        None
    }

    fn divergence(&self) -> Option<(usize, Box<dyn Fn(usize) -> usize + Send + Sync + '_>)> {
        Some((self.at.depth(), Box::new(|j| j)))
    }

    fn describe(&self) -> String {
        format!("repeat(#{}, {})", self.rule, self.at)
    }
}

/// A finite prefix followed by an infinite source.
pub struct Prepend {
    pub prefix: Vec<Redex>,
    pub rest: Arc<dyn StepSource>,
}

impl StepSource for Prepend {
    fn step(&self, i: usize) -> Result<Redex> {
        match self.prefix.get(i) {
            Some(r) => Ok(r.clone()),
            None => self.rest.step(i - self.prefix.len()),
        }
    }

    fn modulus(&self, d: usize) -> Option<Result<usize>> {
        let n = self.prefix.len();
        self.rest.modulus(d).map(|m| m.map(|m| m + n))
    }

    fn divergence(&self) -> Option<(usize, Box<dyn Fn(usize) -> usize + Send + Sync + '_>)> {
        let n = self.prefix.len();
        let (d, f) = self.rest.divergence()?;
        Some((d, Box::new(move |j| f(j) + n)))
    }

    fn describe(&self) -> String {
        format!("{} steps then {}", self.prefix.len(), self.rest.describe())
    }
}

/// An infinite source with its first `skip` steps removed.
pub struct Skip {
    pub inner: Arc<dyn StepSource>,
    pub skip: usize,
}

impl StepSource for Skip {
    fn step(&self, i: usize) -> Result<Redex> {
        self.inner.step(i + self.skip)
    }

    fn modulus(&self, d: usize) -> Option<Result<usize>> {
        self.inner.modulus(d).map(|m| m.map(|m| m.saturating_sub(self.skip)))
    }

    fn describe(&self) -> String {
        format!("{} after {} steps", self.inner.describe(), self.skip)
    }
}

/// A step generator from a fixed source term, with cached intermediate terms.
#[derive(Clone)]
pub struct OmegaSequence {
    trs: Arc<Trs>,
    source: Term,
    steps: Arc<dyn StepSource>,
    limit: Option<Term>,
    terms: Arc<Mutex<Vec<Term>>>,
}

impl fmt::Debug for OmegaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OmegaSequence")
            .field("source", &self.source.to_string())
            .field("steps", &self.steps.describe())
            .field("limit", &self.limit.as_ref().map(|t| t.to_string()))
            .finish()
    }
}

impl OmegaSequence {
    pub fn new(trs: Arc<Trs>, source: Term, steps: Arc<dyn StepSource>, limit: Option<Term>) -> Self {
        OmegaSequence {
            trs,
            terms: Arc::new(Mutex::new(vec![source.clone()])),
            source,
            steps,
            limit,
        }
    }

    pub fn trs(&self) -> &Arc<Trs> {
        &self.trs
    }

    pub fn source(&self) -> &Term {
        &self.source
    }

    pub fn steps(&self) -> &Arc<dyn StepSource> {
        &self.steps
    }

    pub fn step(&self, i: usize) -> Result<Redex> {
        self.steps.step(i)
    }

    pub fn declared_limit(&self) -> Option<&Term> {
        self.limit.as_ref()
    }

    pub fn has_modulus(&self) -> bool {
        self.steps.modulus(0).is_some()
    }

    pub fn modulus(&self, d: usize) -> Result<usize> {
        self.steps
            .modulus(d)
            .unwrap_or_else(|| Err(Error::ModulusUnavailable(self.steps.describe())))
    }

    /// Steps `0..modulus(d)`: every step at depth `<= d` and possibly more.
    pub fn prefix_to_depth(&self, d: usize) -> Result<Vec<Redex>> {
        let n = self.modulus(d)?;
        (0..n).map(|i| self.step(i)).collect()
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<Redex>> {
        (0..n).map(|i| self.step(i)).collect()
    }

    /// The term after `i` steps; every step is checked to be a redex.
    pub fn term_at(&self, i: usize) -> Result<Term> {
        let mut cache = self.terms.lock().expect("term cache");
        while cache.len() <= i {
            let k = cache.len() - 1;
            let r = self.steps.step(k)?;
            let next = apply_step(&self.trs, &cache[k], &r).map_err(|e| {
                Error::InvalidSequence(format!("step {k} ({}) is not a redex: {e}", r.display(&self.trs)))
            })?;
            cache.push(next);
        }
        Ok(cache[i].clone())
    }

    /// The limit truncated at depth `d`.
    pub fn limit_to_depth(&self, d: usize) -> Result<Term> {
        Ok(self.term_at(self.modulus(d)?)?.unfold(d))
    }

    /// Smallest depth of any step, with the number of steps at that depth.
    pub fn min_depth_count(&self) -> Result<Option<(usize, usize)>> {
        for d in 0..DEPTH_PROBE_LIMIT {
            let pre = self.prefix_to_depth(d)?;
            if let Some(m) = pre.iter().map(Redex::depth).min() {
                let count = self.prefix_to_depth(m)?.iter().filter(|r| r.depth() == m).count();
                return Ok(Some((m, count)));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub enum Segment {
    Finite(Vec<Redex>),
    Omega(OmegaSequence),
}

/// Concatenation of segments; each ω-segment's limit is the next segment's source.
#[derive(Clone, Debug)]
pub struct Sequence {
    trs: Arc<Trs>,
    source: Term,
    segments: Vec<Segment>,
}

/// Depth at which a declared limit is checked against the ω-segment.
pub const LIMIT_CHECK_DEPTH: usize = 16;

impl Sequence {
    /// Validates the linking of segments. A non-final ω-segment needs a
    /// declared limit (checked to [`LIMIT_CHECK_DEPTH`]); a segment without
    /// modulus may only come last.
    pub fn new(trs: Arc<Trs>, source: Term, segments: Vec<Segment>) -> Result<Sequence> {
        let mut cur = source.clone();
        let last = segments.len().saturating_sub(1);
        for (k, seg) in segments.iter().enumerate() {
            match seg {
                Segment::Finite(steps) => {
                    for (i, r) in steps.iter().enumerate() {
                        cur = apply_step(&trs, &cur, r).map_err(|e| {
                            Error::InvalidSequence(format!("segment {k}, step {i}: {e}"))
                        })?;
                    }
                }
                Segment::Omega(w) => {
                    if !w.source().eq_rational(&cur) {
                        return Err(Error::InvalidSequence(format!(
                            "segment {k} starts at {} but the previous segment ends at {cur}",
                            w.source()
                        )));
                    }
                    if !w.has_modulus() && k != last {
                        return Err(Error::InvalidSequence(format!(
                            "segment {k} has no modulus and is not the last segment"
                        )));
                    }
                    if k != last {
                        let lim = w.declared_limit().ok_or_else(|| {
                            Error::InvalidSequence(format!("segment {k} needs a declared limit"))
                        })?;
                        let approx = w.limit_to_depth(LIMIT_CHECK_DEPTH)?;
                        if !lim.eq_to_depth(&approx, LIMIT_CHECK_DEPTH) {
                            return Err(Error::InvalidSequence(format!(
                                "declared limit {lim} of segment {k} disagrees with {approx}"
                            )));
                        }
                        cur = lim.clone();
                    }
                }
            }
        }
        Ok(Sequence { trs, source, segments })
    }

    pub fn finite(trs: Arc<Trs>, source: Term, steps: Vec<Redex>) -> Result<Sequence> {
        Sequence::new(trs, source, vec![Segment::Finite(steps)])
    }

    pub fn omega(w: OmegaSequence) -> Sequence {
        Sequence {
            trs: w.trs().clone(),
            source: w.source().clone(),
            segments: vec![Segment::Omega(w)],
        }
    }

    pub fn trs(&self) -> &Arc<Trs> {
        &self.trs
    }

    pub fn source(&self) -> &Term {
        &self.source
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// `(k, m)` for order type ω·k+m.
    pub fn order_type(&self) -> (usize, usize) {
        let k = self.segments.iter().filter(|s| matches!(s, Segment::Omega(_))).count();
        let m = self
            .segments
            .iter()
            .rev()
            .take_while(|s| matches!(s, Segment::Finite(_)))
            .map(|s| match s {
                Segment::Finite(v) => v.len(),
                Segment::Omega(_) => 0,
            })
            .sum();
        (k, m)
    }

    pub fn is_convergent(&self) -> bool {
        self.segments.iter().all(|s| match s {
            Segment::Finite(_) => true,
            Segment::Omega(w) => w.has_modulus(),
        })
    }

    /// Source term of segment `k`.
    pub fn segment_source(&self, k: usize) -> Result<Term> {
        let mut cur = self.source.clone();
        for seg in &self.segments[..k] {
            cur = match seg {
                Segment::Finite(steps) => {
                    let mut t = cur;
                    for r in steps {
                        t = apply_step(&self.trs, &t, r)?;
                    }
                    t
                }
                Segment::Omega(w) => w
                    .declared_limit()
                    .cloned()
                    .ok_or_else(|| Error::InvalidSequence("ω-segment without declared limit".into()))?,
            };
        }
        Ok(cur)
    }

    /// The final term (or limit) truncated at depth `d`.
    pub fn end_to_depth(&self, d: usize) -> Result<Term> {
        let k = self.segments.len();
        match self.segments.last() {
            None => Ok(self.source.unfold(d)),
            Some(Segment::Finite(steps)) => {
                let mut t = self.segment_source(k - 1)?;
                for r in steps {
                    t = apply_step(&self.trs, &t, r)?;
                }
                Ok(t.unfold(d))
            }
            Some(Segment::Omega(w)) => w.limit_to_depth(d),
        }
    }

    /// Minimal step depth with its number of occurrences, over all segments.
    pub fn min_depth_count(&self) -> Result<Option<(usize, usize)>> {
        let mut best: Option<(usize, usize)> = None;
        let mut merge = |d: usize, c: usize| {
            best = match best {
                Some((b, n)) if b < d => Some((b, n)),
                Some((b, n)) if b == d => Some((b, n + c)),
                _ => Some((d, c)),
            };
        };
        for seg in &self.segments {
            match seg {
                Segment::Finite(steps) => {
                    for r in steps {
                        merge(r.depth(), 1);
                    }
                }
                Segment::Omega(w) => {
                    if let Some((d, c)) = w.min_depth_count()? {
                        merge(d, c);
                    }
                }
            }
        }
        Ok(best)
    }

    /// Parses the sequence fixture format:
    ///
    /// ```text
    /// source: h(a)
    /// seq: step 1:AG; step 1.1:AG
    /// omega: gen=spine(AG, 1.1.1, 1, 1) modulus=auto limit=h(rec X = g(X))
    /// seq: step ε:HK
    /// ```
    pub fn parse(trs: Arc<Trs>, src: &str) -> Result<Sequence> {
        let mut source: Option<Term> = None;
        let mut segments = Vec::new();
        let mut cur: Option<Term> = None;
        for (ln, raw) in src.lines().enumerate() {
            let line = ln + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(line, 1, msg);
            let (key, rest) = text
                .split_once(':')
                .ok_or_else(|| err("expected `source:`, `seq:` or `omega:`".into()))?;
            let rest = rest.trim();
            match key.trim() {
                "source" => {
                    let t = trs.parse_term(rest).map_err(|e| err(e.to_string()))?;
                    cur = Some(t.clone());
                    source = Some(t);
                }
                "seq" => {
                    let mut steps = Vec::new();
                    for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                        let item = item
                            .strip_prefix("step")
                            .ok_or_else(|| err(format!("expected `step POS:RULE`, got `{item}`")))?;
                        steps.push(Redex::parse(item.trim(), &trs).map_err(|e| err(e.to_string()))?);
                    }
                    let mut t = cur.clone().ok_or_else(|| err("`source:` must come first".into()))?;
                    for r in &steps {
                        t = apply_step(&trs, &t, r).map_err(|e| err(e.to_string()))?;
                    }
                    cur = Some(t);
                    segments.push(Segment::Finite(steps));
                }
                "omega" => {
                    let from = cur.clone().ok_or_else(|| err("`source:` must come first".into()))?;
                    let w = parse_omega(&trs, from, rest).map_err(|e| err(e.to_string()))?;
                    cur = w.declared_limit().cloned();
                    segments.push(Segment::Omega(w));
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let source = source.ok_or_else(|| Error::parse(1, 1, "missing `source:` line"))?;
        Sequence::new(trs, source, segments)
    }
}

fn parse_omega(trs: &Arc<Trs>, from: Term, line: &str) -> Result<OmegaSequence> {
    let mut gen = None;
    let mut modulus = "auto";
    let mut limit = None;
    let mut rest = line.trim();
    while !rest.is_empty() {
        let (key, after) = rest
            .split_once('=')
            .ok_or_else(|| Error::parse(1, 1, format!("expected KEY=VALUE in `{rest}`")))?;
        let after = after.trim_start();
        match key.trim() {
            "gen" => {
                let close = after
                    .find(')')
                    .ok_or_else(|| Error::parse(1, 1, "unterminated generator"))?;
                gen = Some(&after[..=close]);
                rest = after[close + 1..].trim_start();
            }
            "modulus" => {
                let end = after.find(char::is_whitespace).unwrap_or(after.len());
                modulus = &after[..end];
                rest = after[end..].trim_start();
            }
            "limit" => {
                limit = Some(trs.parse_term(after)?);
                rest = "";
            }
            other => return Err(Error::parse(1, 1, format!("unknown ω-segment key `{other}`"))),
        }
    }
    let gen = gen.ok_or_else(|| Error::parse(1, 1, "missing gen="))?;
    let source = builtin_generator(trs, gen)?;
    let has_mod = source.modulus(0).is_some();
    match (modulus, has_mod) {
        ("auto", _) | ("none", false) => {}
        ("none", true) => {
            return Err(Error::parse(1, 1, "generator has a modulus; use modulus=auto"));
        }
        (m, _) => return Err(Error::parse(1, 1, format!("unknown modulus `{m}`"))),
    }
    Ok(OmegaSequence::new(trs.clone(), from, source, limit))
}

/// `spine(RULE, START, DIR, STRIDE)` or `repeat(RULE, AT)`.
pub fn builtin_generator(trs: &Trs, src: &str) -> Result<Arc<dyn StepSource>> {
    let (name, args) = src
        .trim()
        .strip_suffix(')')
        .and_then(|s| s.split_once('('))
        .ok_or_else(|| Error::parse(1, 1, format!("bad generator `{src}`")))?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    match (name.trim(), args.as_slice()) {
        ("spine", [rule, start, dir, stride]) => {
            let dir: Position = dir.parse()?;
            let stride: usize = stride
                .parse()
                .map_err(|_| Error::parse(1, 1, format!("bad stride `{stride}`")))?;
            if dir.is_root() || stride == 0 {
                return Err(Error::parse(1, 1, "spine needs a non-empty direction and positive stride"));
            }
            Ok(Arc::new(Spine {
                rule: trs.rule_id(rule)?,
                start: start.parse()?,
                dir,
                stride,
            }))
        }
        ("repeat", [rule, at]) => Ok(Arc::new(Repeat {
            rule: trs.rule_id(rule)?,
            at: at.parse()?,
        })),
        _ => Err(Error::parse(1, 1, format!("unknown generator `{src}`"))),
    }
}
