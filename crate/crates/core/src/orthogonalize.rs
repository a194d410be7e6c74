//! Removing overlaps between co-initial parallel steps or developments of a
//! weakly orthogonal system while preserving both targets.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::redex::{develop_explicit, overlap, show_redexes, y_redexes, Development, ParallelStep, Redex, RedexSet};
use crate::term::Term;
use crate::trs::Trs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Non-identical overlapping pairs `(a, b)` with `a` from `left` and `b` from `right`.
pub fn cross_conflicts(trs: &Trs, left: &[Redex], right: &[Redex]) -> Vec<(Redex, Redex)> {
    let mut out = Vec::new();
    for a in left {
        for b in right {
            if a != b && overlap(trs, a, b) {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// The conflicted redex to resolve next: least depth, then left-most, left
/// side before right.
fn topmost_conflicted(conflicts: &[(Redex, Redex)]) -> Option<(Redex, Side)> {
    conflicts
        .iter()
        .flat_map(|(a, b)| [(a.clone(), Side::Left), (b.clone(), Side::Right)])
        .min_by(|(x, sx), (y, sy)| x.position.cmp(&y.position).then(sx.cmp(sy)).then(x.rule.cmp(&y.rule)))
}

fn co_initial(a: &Term, b: &Term) -> Result<()> {
    if a.eq_rational(b) {
        Ok(())
    } else {
        Err(Error::InvalidParallelStep("steps are not co-initial".into()))
    }
}

/// Makes two co-initial parallel steps overlap-free: the outermost
/// conflicting redex is replaced by the left-most top-most redex of the
/// other step inside it; at a shared position the right step takes the
/// left step's redex.
pub fn orthogonalize_parallel(trs: &Trs, alpha: &ParallelStep, beta: &ParallelStep) -> Result<(ParallelStep, ParallelStep)> {
    trs.require_weakly_orthogonal()?;
    co_initial(alpha.source(), beta.source())?;
    let mut sets = [
        alpha.redexes().iter().cloned().collect::<BTreeSet<_>>(),
        beta.redexes().iter().cloned().collect::<BTreeSet<_>>(),
    ];
    let cap = 4 * (sets[0].len() + sets[1].len() + 1).pow(2);
    for _ in 0..cap {
        let (l, r): (Vec<_>, Vec<_>) = (sets[0].iter().cloned().collect(), sets[1].iter().cloned().collect());
        let conflicts = cross_conflicts(trs, &l, &r);
        let Some((o, side)) = topmost_conflicted(&conflicts) else {
            let a = ParallelStep::new(trs, alpha.source().clone(), sets[0].clone())?;
            let b = ParallelStep::new(trs, beta.source().clone(), sets[1].clone())?;
            return Ok((a, b));
        };
        let (own, other) = (side as usize, side.other() as usize);
        let partner = sets[other]
            .iter()
            .filter(|x| **x != o && overlap(trs, &o, x))
            .min()
            .cloned()
            .expect("conflicted redex has a partner");
        if partner.position == o.position {
            let (from_left, from_right) = if side == Side::Left { (o, partner) } else { (partner, o) };
            sets[1].remove(&from_right);
            sets[1].insert(from_left);
        } else {
            sets[own].remove(&o);
            sets[own].insert(partner);
        }
    }
    Err(Error::Invariant("parallel orthogonalization did not terminate".into()))
}

/// Removes from `dev` every redex that is a Y-redex with respect to `context`.
pub fn drop_y_redexes(trs: &Trs, dev: &Development, context: &[Redex]) -> Result<Development> {
    if dev.is_periodic() {
        return Err(Error::InvalidDevelopment(
            "dropping Y-redexes needs an explicit development; truncate it first".into(),
        ));
    }
    let mut ctx: Vec<Redex> = context.to_vec();
    ctx.extend(dev.redex_set().explicit.iter().cloned());
    let y = y_redexes(trs, &ctx).y_redexes;
    let keep = dev.redex_set().explicit.iter().filter(|r| !y.contains(*r)).cloned();
    Development::from_redexes(trs, dev.source().clone(), keep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// The only overlapping redex of the other set is replaced by `u`.
    ReplaceOther,
    /// Two disjoint redexes of the other set overlap `u`: drop `u`, `v`, `w`.
    DropDisjoint,
    /// `u` is replaced by `v`.
    ReplaceOwn,
    /// Drop `u`, `m`, `v`, `w`.
    DropFour,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::ReplaceOther => "(i)",
            Case::DropDisjoint => "(ii)",
            Case::ReplaceOwn => "(iii)",
            Case::DropFour => "(iv)",
        })
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub case: Case,
    pub side: Side,
    pub u: Redex,
    pub v: Redex,
    pub w: Option<Redex>,
    pub m: Option<Redex>,
    /// Depth of `u`; non-decreasing along a trace.
    pub depth: usize,
}

impl TraceStep {
    pub fn render(&self, trs: &Trs) -> String {
        let mut s = format!(
            "{} depth {} u={} ({}) v={}",
            self.case,
            self.depth,
            self.u.display(trs),
            if self.side == Side::Left { "U" } else { "V" },
            self.v.display(trs)
        );
        if let Some(w) = &self.w {
            s.push_str(&format!(" w={}", w.display(trs)));
        }
        if let Some(m) = &self.m {
            s.push_str(&format!(" m={}", m.display(trs)));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    /// Conflicts remain, all rooted at depth `>= frontier`.
    BudgetExhausted { frontier: usize, remaining: usize },
}

#[derive(Clone, Debug)]
pub struct Orthogonalization {
    pub left: Development,
    pub right: Development,
    pub trace: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl Orthogonalization {
    pub fn is_complete(&self) -> bool {
        self.outcome == Outcome::Complete
    }
}

/// Truncation depth used to resolve conflicts of periodic developments
/// down to depth `d`.
pub fn truncation_depth(trs: &Trs, d: usize) -> usize {
    let pd = trs.max_pattern_depth().max(1);
    (d + 2 * pd + 1) * pd
}

/// Top-down orthogonalization of two co-initial developments. Conflicts
/// rooted above depth `d` are resolved one at a time starting from the
/// topmost; deeper ones are reported in the outcome. Periodic developments
/// are first truncated (see [`truncation_depth`]), and the results are then
/// developments of the truncated source.
pub fn orthogonalize_developments(trs: &Trs, u: &Development, v: &Development, d: usize) -> Result<Orthogonalization> {
    trs.require_weakly_orthogonal()?;
    co_initial(u.source(), v.source())?;
    let (u, v) = if u.is_periodic() || v.is_periodic() {
        let big_d = truncation_depth(trs, d);
        (u.truncated(trs, big_d), v.truncated(trs, big_d))
    } else {
        (u.clone(), v.clone())
    };
    let source = u.source().clone();
    let mut sets = [u.redex_set().explicit.clone(), v.redex_set().explicit.clone()];
    let mut trace = Vec::new();
    let cap = 4 * (sets[0].len() + sets[1].len() + 1).pow(2);
    let mut last_depth = 0;
    let mut resolved = false;
    for _ in 0..cap {
        let (l, r): (Vec<_>, Vec<_>) = (sets[0].iter().cloned().collect(), sets[1].iter().cloned().collect());
        let conflicts: Vec<_> = cross_conflicts(trs, &l, &r);
        let Some((uu, side)) = topmost_conflicted(&conflicts).filter(|(x, _)| x.depth() < d) else {
            resolved = true;
            break;
        };
        if uu.depth() < last_depth {
            return Err(Error::Invariant(format!(
                "conflict frontier moved up from depth {last_depth} to {}",
                uu.depth()
            )));
        }
        last_depth = uu.depth();
        let (own, other) = (side as usize, side.other() as usize);
        let partners: Vec<Redex> = sets[other]
            .iter()
            .filter(|x| **x != uu && overlap(trs, &uu, x))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let vv = partners[0].clone();
        let mut step = TraceStep {
            case: Case::ReplaceOther,
            side,
            u: uu.clone(),
            v: vv.clone(),
            w: None,
            m: None,
            depth: uu.depth(),
        };
        if partners.len() == 1 {
            sets[other].remove(&vv);
            sets[other].insert(uu.clone());
        } else if let Some(w) = partners[1..].iter().find(|w| w.position.is_disjoint(&vv.position)) {
            step.case = Case::DropDisjoint;
            step.w = Some(w.clone());
            sets[own].remove(&uu);
            sets[other].remove(&vv);
            sets[other].remove(w);
        } else {
            let w = partners[1].clone();
            step.w = Some(w.clone());
            let m = sets[own]
                .iter()
                .find(|m| **m != uu && overlap(trs, m, &vv))
                .cloned();
            match m {
                None => {
                    step.case = Case::ReplaceOwn;
                    sets[own].remove(&uu);
                    sets[own].insert(vv.clone());
                }
                Some(m) => {
                    step.case = Case::DropFour;
                    sets[own].remove(&uu);
                    sets[own].remove(&m);
                    sets[other].remove(&vv);
                    sets[other].remove(&w);
                    step.m = Some(m);
                }
            }
        }
        trace.push(step);
    }
    if !resolved {
        return Err(Error::Invariant("development orthogonalization did not terminate".into()));
    }
    let left = Development::new(trs, source.clone(), RedexSet { explicit: sets[0].clone(), periodic: Default::default() })?;
    let right = Development::new(trs, source.clone(), RedexSet { explicit: sets[1].clone(), periodic: Default::default() })?;
    for (before, after) in [(&u, &left), (&v, &right)] {
        let b = develop_explicit(trs, &source, before.redex_set().explicit.iter().cloned().collect())?;
        let a = develop_explicit(trs, &source, after.redex_set().explicit.iter().cloned().collect())?;
        if !a.eq_rational(&b) {
            return Err(Error::Invariant(format!(
                "orthogonalization changed a development target: {b} became {a} ({})",
                show_redexes(trs, &after.redexes(usize::MAX))
            )));
        }
    }
    let l: Vec<_> = sets[0].iter().cloned().collect();
    let r: Vec<_> = sets[1].iter().cloned().collect();
    let remaining = cross_conflicts(trs, &l, &r);
    let outcome = match topmost_conflicted(&remaining) {
        None => Outcome::Complete,
        Some((x, _)) => Outcome::BudgetExhausted {
            frontier: x.depth(),
            remaining: remaining.len(),
        },
    };
    Ok(Orthogonalization {
        left,
        right,
        trace,
        outcome,
    })
}
