//! Infinite unary terms over `S` and `P` with the rules `P(S(x)) -> x` and
//! `S(P(x)) -> x`, read as infinite words: partial sums, heights,
//! class membership and explicit reductions toward `S^ω` and `P^ω`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::redex::{apply_step, Redex};
use crate::term::{Node, Position, Term};
use crate::trs::Trs;

/// Letters scanned when an answer is not decided by exact analysis.
pub const SCAN_BUDGET: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    S,
    P,
}

impl Letter {
    pub fn weight(self) -> i64 {
        match self {
            Letter::S => 1,
            Letter::P => -1,
        }
    }

    pub fn other(self) -> Letter {
        match self {
            Letter::S => Letter::P,
            Letter::P => Letter::S,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Letter::S => "S",
            Letter::P => "P",
        }
    }

    fn from_char(c: char) -> Result<Letter> {
        match c {
            'S' => Ok(Letter::S),
            'P' => Ok(Letter::P),
            _ => Err(Error::parse(1, 1, format!("expected S or P, got `{c}`"))),
        }
    }
}

pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    s.chars().map(Letter::from_char).collect()
}

pub fn show_letters(w: &[Letter]) -> String {
    w.iter().map(|l| l.symbol()).collect()
}

/// Alternating blocks starting with `first`; block `j` has length
/// `base[j mod L] + growth * (j div L)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub first: Letter,
    pub base: Vec<usize>,
    pub growth: usize,
}

impl BlockSpec {
    pub fn new(first: Letter, base: Vec<usize>, growth: usize) -> Result<BlockSpec> {
        if base.is_empty() || base.contains(&0) {
            return Err(Error::parse(1, 1, "block lengths must be positive"));
        }
        Ok(BlockSpec { first, base, growth })
    }

    pub fn block_length(&self, j: usize) -> usize {
        let l = self.base.len();
        self.base[j % l] + self.growth * (j / l)
    }

    pub fn block_letter(&self, j: usize) -> Letter {
        if j % 2 == 0 {
            self.first
        } else {
            self.first.other()
        }
    }
}

pub type PrefixOracle = Arc<dyn Fn(usize) -> Vec<Letter> + Send + Sync>;

#[derive(Clone)]
pub enum SPWord {
    EventuallyPeriodic { prefix: Vec<Letter>, period: Vec<Letter> },
    Blocks(BlockSpec),
    /// `f(n)` is the prefix of length `n`.
    Oracle(PrefixOracle),
}

impl fmt::Debug for SPWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SPWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SPWord::EventuallyPeriodic { prefix, period } => {
                write!(f, "ep:{}:{}", show_letters(prefix), show_letters(period))
            }
            SPWord::Blocks(b) => {
                let base: Vec<String> = b.base.iter().map(usize::to_string).collect();
                write!(f, "blocks:{}:{}+{}", b.first.symbol(), base.join(","), b.growth)
            }
            SPWord::Oracle(_) => write!(f, "oracle"),
        }
    }
}

pub fn make_q() -> SPWord {
    SPWord::Blocks(BlockSpec::new(Letter::S, vec![1], 1).expect("valid blocks"))
}

pub fn make_r() -> SPWord {
    SPWord::Blocks(BlockSpec::new(Letter::S, vec![1, 1], 1).expect("valid blocks"))
}

impl SPWord {
    pub fn ep(prefix: &str, period: &str) -> Result<SPWord> {
        let period = parse_letters(period)?;
        if period.is_empty() {
            return Err(Error::parse(1, 1, "the period must be non-empty"));
        }
        Ok(SPWord::EventuallyPeriodic {
            prefix: parse_letters(prefix)?,
            period,
        })
    }

    pub fn oracle(f: impl Fn(usize) -> Vec<Letter> + Send + Sync + 'static) -> SPWord {
        SPWord::Oracle(Arc::new(f))
    }

    /// `q`, `r`, `ep:PREFIX:PERIOD` or `blocks:FIRST:L1,L2,...[+GROWTH]`.
    pub fn parse(lit: &str) -> Result<SPWord> {
        let lit = lit.trim();
        match lit {
            "q" => return Ok(make_q()),
            "r" => return Ok(make_r()),
            _ => {}
        }
        let parts: Vec<&str> = lit.split(':').collect();
        match parts.as_slice() {
            ["ep", prefix, period] => SPWord::ep(prefix, period),
            ["blocks", first, lens] => {
                let first = match *first {
                    "S" => Letter::S,
                    "P" => Letter::P,
                    other => return Err(Error::parse(1, 1, format!("bad first letter `{other}`"))),
                };
                let (lens, growth) = lens.split_once('+').unwrap_or((lens, "0"));
                let bad = |s: &str| Error::parse(1, 1, format!("bad block length `{s}`"));
                let base = lens
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| bad(s)))
                    .collect::<Result<Vec<_>>>()?;
                let growth = growth.trim().parse().map_err(|_| bad(growth))?;
                Ok(SPWord::Blocks(BlockSpec::new(first, base, growth)?))
            }
            _ => Err(Error::parse(1, 1, format!("unknown word literal `{lit}`"))),
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<Letter> {
        match self {
            SPWord::EventuallyPeriodic { prefix, period } => (0..n)
                .map(|i| {
                    if i < prefix.len() {
                        prefix[i]
                    } else {
                        period[(i - prefix.len()) % period.len()]
                    }
                })
                .collect(),
            SPWord::Blocks(b) => {
                let mut out = Vec::with_capacity(n);
                let mut j = 0;
                while out.len() < n {
                    let len = b.block_length(j).min(n - out.len());
                    out.extend(std::iter::repeat(b.block_letter(j)).take(len));
                    j += 1;
                }
                out
            }
            SPWord::Oracle(f) => {
                let w = f(n);
                assert_eq!(w.len(), n, "prefix oracle returned a word of the wrong length");
                w
            }
        }
    }

    pub fn letter(&self, n: usize) -> Letter {
        self.prefix(n + 1)[n]
    }

    /// The prefix of length `n` as a unary term ending in a cut.
    pub fn prefix_term(&self, n: usize) -> Term {
        word_term(&self.prefix(n))
    }

    /// The word as a rational term, for eventually periodic words.
    pub fn rational_term(&self) -> Option<Term> {
        let SPWord::EventuallyPeriodic { prefix, period } = self else {
            return None;
        };
        let all: Vec<Letter> = prefix.iter().chain(period).copied().collect();
        let n = all.len();
        let nodes = all
            .iter()
            .enumerate()
            .map(|(i, l)| Node::App(Arc::from(l.symbol()), vec![if i + 1 < n { i + 1 } else { prefix.len() }]))
            .collect();
        Term::from_nodes(nodes, 0).ok()
    }
}

/// A finite word followed by a cut, as a unary term.
pub fn word_term(w: &[Letter]) -> Term {
    let mut nodes: Vec<Node> = w
        .iter()
        .enumerate()
        .map(|(i, l)| Node::App(Arc::from(l.symbol()), vec![i + 1]))
        .collect();
    nodes.push(Node::Cut);
    Term::from_nodes(nodes, 0).expect("chain is well formed")
}

/// The letters along the unary spine of `t`, up to `max` of them.
pub fn term_letters(t: &Term, max: usize) -> Vec<Letter> {
    let mut out = Vec::new();
    let mut cur = t.root();
    while out.len() < max {
        match t.node(cur) {
            Node::App(f, kids) if kids.len() == 1 => {
                match &**f {
                    "S" => out.push(Letter::S),
                    "P" => out.push(Letter::P),
                    _ => break,
                }
                cur = kids[0];
            }
            _ => break,
        }
    }
    out
}

/// The two-rule system on `S` and `P`.
pub fn sp_trs() -> Trs {
    Trs::parse("sig S/1 P/1\nrule PS : P(S(x)) -> x\nrule SP : S(P(x)) -> x\n").expect("fixed system")
}

/// Letters counted with `S` as +1 and `P` as −1 over the first `n`.
pub fn sum(w: &SPWord, n: usize) -> i64 {
    w.prefix(n).iter().map(|l| l.weight()).sum()
}

/// `(i, sum(w, i))` for `i = 0..=n`.
pub fn sum_graph(w: &SPWord, n: usize) -> Vec<(usize, i64)> {
    let mut acc = 0;
    let mut out = vec![(0, 0)];
    for (i, l) in w.prefix(n).iter().enumerate() {
        acc += l.weight();
        out.push((i + 1, acc));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Height {
    NegInf,
    Finite(i64),
    PosInf,
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::NegInf => write!(f, "-inf"),
            Height::Finite(h) => write!(f, "{h}"),
            Height::PosInf => write!(f, "inf"),
        }
    }
}

/// Supremum and infimum of the partial sums, the empty prefix included.
/// When not exact, they are the extrema over the first `evidence` letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Heights {
    pub upper: Height,
    pub lower: Height,
    pub exact: bool,
    pub evidence: usize,
}

/// A value `slope * m + intercept` at repetition `m`.
#[derive(Clone, Copy, Debug)]
struct Line {
    slope: i64,
    intercept: i64,
}

impl Line {
    fn eventual_sign(self) -> i64 {
        if self.slope != 0 {
            self.slope.signum()
        } else {
            self.intercept.signum()
        }
    }
}

/// The walk of partial sums as an initial finite part followed by a
/// repeating part: the value at the start of repetition `m`, then the
/// values at the ends of its monotone runs.
struct Walk {
    initial: Vec<i64>,
    start: Line,
    ends: Vec<Line>,
}

impl Walk {
    fn of(w: &SPWord) -> Option<Walk> {
        match w {
            SPWord::EventuallyPeriodic { prefix, period } => {
                let mut initial = vec![0];
                let mut s = 0;
                for l in prefix {
                    s += l.weight();
                    initial.push(s);
                }
                let drift: i64 = period.iter().map(|l| l.weight()).sum();
                let mut c = s;
                let ends = period
                    .iter()
                    .map(|l| {
                        c += l.weight();
                        Line { slope: drift, intercept: c }
                    })
                    .collect();
                Some(Walk {
                    initial,
                    start: Line { slope: drift, intercept: s },
                    ends,
                })
            }
            SPWord::Blocks(b) => {
                // one repetition covers an even number of blocks
                let l = b.base.len();
                let (reps, growth) = if l % 2 == 0 { (l, b.growth) } else { (2 * l, 2 * b.growth) };
                let base: Vec<i64> = (0..reps).map(|j| b.block_length(j) as i64).collect();
                let sign: Vec<i64> = (0..reps).map(|j| b.block_letter(j).weight()).collect();
                let drift: i64 = base.iter().zip(&sign).map(|(x, s)| x * s).sum();
                let mut intercept = 0;
                let mut signs = 0;
                let ends = (0..reps)
                    .map(|j| {
                        intercept += sign[j] * base[j];
                        signs += sign[j];
                        Line {
                            slope: drift + growth as i64 * signs,
                            intercept,
                        }
                    })
                    .collect();
                Some(Walk {
                    initial: vec![0],
                    start: Line { slope: drift, intercept: 0 },
                    ends,
                })
            }
            SPWord::Oracle(_) => None,
        }
    }

    fn upper(&self) -> Height {
        if self.ends.iter().any(|l| l.slope > 0) {
            return Height::PosInf;
        }
        let first = self.ends.iter().map(|l| l.intercept).chain(self.initial.iter().copied());
        Height::Finite(first.chain([self.start.intercept]).max().expect("non-empty"))
    }

    fn lower(&self) -> Height {
        if self.ends.iter().any(|l| l.slope < 0) {
            return Height::NegInf;
        }
        let first = self.ends.iter().map(|l| l.intercept).chain(self.initial.iter().copied());
        Height::Finite(first.chain([self.start.intercept]).min().expect("non-empty"))
    }

    fn root_active(&self) -> bool {
        let mut prev = self.start;
        for &next in &self.ends {
            if prev.eventual_sign() * next.eventual_sign() <= 0 {
                return true;
            }
            prev = next;
        }
        false
    }

    fn strongly_normalizing(&self) -> bool {
        self.ends.iter().all(|l| l.slope > 0) || self.ends.iter().all(|l| l.slope < 0)
    }
}

pub fn heights(w: &SPWord) -> Heights {
    match Walk::of(w) {
        Some(walk) => Heights {
            upper: walk.upper(),
            lower: walk.lower(),
            exact: true,
            evidence: 0,
        },
        None => {
            let g = sum_graph(w, SCAN_BUDGET);
            Heights {
                upper: Height::Finite(g.iter().map(|p| p.1).max().expect("non-empty")),
                lower: Height::Finite(g.iter().map(|p| p.1).min().expect("non-empty")),
                exact: false,
                evidence: SCAN_BUDGET,
            }
        }
    }
}

/// Membership in the classes A (reduces to `S^ω`), B (reduces to `P^ω`),
/// RA (root-active) and SN∞; `None` when undecided.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SPClassification {
    pub heights: Heights,
    pub in_a: Option<bool>,
    pub in_b: Option<bool>,
    pub root_active: Option<bool>,
    pub sn_inf: Option<bool>,
}

pub fn classify(w: &SPWord) -> SPClassification {
    let h = heights(w);
    match Walk::of(w) {
        Some(walk) => SPClassification {
            heights: h,
            in_a: Some(h.upper == Height::PosInf),
            in_b: Some(h.lower == Height::NegInf),
            root_active: Some(walk.root_active()),
            sn_inf: Some(walk.strongly_normalizing()),
        },
        None => SPClassification {
            heights: h,
            in_a: None,
            in_b: None,
            root_active: None,
            sn_inf: None,
        },
    }
}

/// The first `k` factors of the split of `w` at every return of the sum to 0.
pub fn zero_word_factorization(w: &SPWord, k: usize) -> Result<Vec<Vec<Letter>>> {
    let decided_finite = classify(w).root_active == Some(false);
    let letters = w.prefix(SCAN_BUDGET);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    let mut s = 0;
    for (i, l) in letters.iter().enumerate() {
        s += l.weight();
        if s == 0 {
            out.push(letters[start..=i].to_vec());
            start = i + 1;
            if out.len() == k {
                return Ok(out);
            }
        }
    }
    let why = if decided_finite {
        "the sum returns to 0 only finitely often"
    } else {
        "no verdict beyond the examined prefix"
    };
    Err(Error::WitnessUnavailable(format!(
        "{} zero words in the first {} letters; {why}",
        out.len(),
        letters.len()
    )))
}

/// A validated reduction of a finite prefix (followed by a cut) to a word
/// starting with `target^d`.
#[derive(Clone, Debug)]
pub struct SPWitness {
    pub target: Letter,
    pub depth: usize,
    pub prefix_len: usize,
    pub source: Term,
    pub steps: Vec<Redex>,
    pub result: Term,
}

/// Cancels the leftmost `PS` (towards `S`) or `SP` (towards `P`) until the
/// word starts with `target^d`, on the shortest prefix whose sum reaches
/// `±d`. Every step is checked against the two-rule system.
pub fn reduce_toward(w: &SPWord, target: Letter, d: usize) -> Result<SPWitness> {
    let h = heights(w);
    let goal = target.weight() * d as i64;
    let reach = match target {
        Letter::S => h.upper,
        Letter::P => h.lower,
    };
    if h.exact {
        if let Height::Finite(x) = reach {
            if x.abs() < d as i64 {
                return Err(Error::InsufficientHeight(format!(
                    "{} height of {w} is {x}, below {d}",
                    if target == Letter::S { "upper" } else { "lower" }
                )));
            }
        }
    }
    let graph = sum_graph(w, SCAN_BUDGET);
    let n = graph.iter().find(|p| p.1 == goal).map(|p| p.0).ok_or_else(|| {
        let msg = format!("sum never reaches {goal} in the first {SCAN_BUDGET} letters of {w}");
        if h.exact {
            Error::BudgetExhausted(msg)
        } else {
            Error::InsufficientHeight(msg)
        }
    })?;
    let trs = sp_trs();
    let (rule, first) = match target {
        Letter::S => (trs.rule_id("PS")?, Letter::P),
        Letter::P => (trs.rule_id("SP")?, Letter::S),
    };
    let mut word = w.prefix(n);
    let source = word_term(&word);
    let mut term = source.clone();
    let mut steps = Vec::new();
    while !(word.len() >= d && word[..d].iter().all(|&l| l == target)) {
        let i = word
            .windows(2)
            .position(|p| p[0] == first && p[1] == first.other())
            .ok_or_else(|| Error::Invariant(format!("no cancellable pair left in {}", show_letters(&word))))?;
        let r = Redex::new(Position::new(vec![1; i]), rule);
        term = apply_step(&trs, &term, &r)?;
        word.drain(i..i + 2);
        steps.push(r);
    }
    if term_letters(&term, d) != vec![target; d] {
        return Err(Error::Invariant("witness does not reach the requested prefix".into()));
    }
    Ok(SPWitness {
        target,
        depth: d,
        prefix_len: n,
        source,
        steps,
        result: term,
    })
}
