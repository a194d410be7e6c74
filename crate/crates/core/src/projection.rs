//! Residual projection of parallel steps and developments, weakly
//! orthogonal projection, and the diagram constructions built on it.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::orthogonalize::{cross_conflicts, orthogonalize_developments, orthogonalize_parallel, truncation_depth};
use crate::redex::{apply_step, develop_explicit, find_redexes, innermost_order, overlap, Development, ParallelStep, Redex};
use crate::sequence::{Segment, Sequence};
use crate::term::{Node, Position, Term};
use crate::trs::Trs;

/// Depth to which occurrences of a variable in an infinite rhs are listed.
pub const RATIONAL_RHS_OCCURRENCE_DEPTH: usize = 16;

/// Positions of variable `x` in the rhs of rule `rule`, breadth first.
pub fn rhs_occurrences(trs: &Trs, rule: usize, x: &str) -> Vec<Position> {
    let rhs = trs.rule(rule).rhs();
    let depth = rhs.height().map_or(RATIONAL_RHS_OCCURRENCE_DEPTH, |h| h + 1);
    rhs.var_positions(x, depth)
}

/// The variable of `b`'s lhs through which relative position `q` passes,
/// with the position of that variable.
fn variable_on_path(trs: &Trs, rule: usize, q: &Position) -> Option<(String, Position)> {
    let lhs = trs.rule(rule).lhs();
    let mut cur = lhs.root();
    for (k, &i) in q.path().iter().enumerate() {
        if let Node::Var(x) = lhs.node(cur) {
            return Some((x.to_string(), Position::new(q.path()[..k].to_vec())));
        }
        cur = *lhs.node(cur).children().get(i - 1)?;
    }
    match lhs.node(cur) {
        Node::Var(x) => Some((x.to_string(), q.clone())),
        _ => None,
    }
}

/// Residuals of `a` after contracting `b` (both redexes of the same term,
/// identical or non-overlapping).
pub fn residuals(trs: &Trs, a: &Redex, b: &Redex) -> Result<Vec<Redex>> {
    if a == b {
        return Ok(Vec::new());
    }
    if overlap(trs, a, b) {
        return Err(Error::NotOrthogonal(format!(
            "{} and {} overlap",
            a.display(trs),
            b.display(trs)
        )));
    }
    let Some(q) = b.position.strip_prefix_of(&a.position) else {
        return Ok(vec![a.clone()]);
    };
    let (x, qx) = variable_on_path(trs, b.rule, &q).ok_or_else(|| {
        Error::Invariant(format!("{} is inside the pattern of {}", a.display(trs), b.display(trs)))
    })?;
    let rest = qx.strip_prefix_of(&q).expect("variable position is a prefix");
    Ok(rhs_occurrences(trs, b.rule, &x)
        .into_iter()
        .map(|r| Redex::new(b.position.concat(&r).concat(&rest), a.rule))
        .collect())
}

/// Residuals of `rs` after the complete development of `dev`, contracted
/// innermost first.
pub fn residuals_after_development(trs: &Trs, rs: &[Redex], dev: &[Redex]) -> Result<Vec<Redex>> {
    let mut order = dev.to_vec();
    order.sort_by(innermost_order);
    order.dedup();
    let mut cur: BTreeSet<Redex> = rs.iter().cloned().collect();
    for v in &order {
        let mut next = BTreeSet::new();
        for a in &cur {
            next.extend(residuals(trs, a, v)?);
        }
        cur = next;
    }
    Ok(cur.into_iter().collect())
}

/// `alpha / beta` for an orthogonal pair: what remains of `alpha` after `beta`.
pub fn project_orthogonal(trs: &Trs, alpha: &ParallelStep, beta: &ParallelStep) -> Result<ParallelStep> {
    if !alpha.source().eq_rational(beta.source()) {
        return Err(Error::NotOrthogonal("steps are not co-initial".into()));
    }
    if let Some((a, b)) = cross_conflicts(trs, alpha.redexes(), beta.redexes()).first() {
        return Err(Error::NotOrthogonal(format!("{} overlaps {}", a.display(trs), b.display(trs))));
    }
    let target = beta.target(trs)?;
    let rs = residuals_after_development(trs, alpha.redexes(), beta.redexes())?;
    ParallelStep::new(trs, target, rs)
}

/// Projection for weakly orthogonal systems: orthogonalize, then project.
pub fn wo_project(trs: &Trs, alpha: &ParallelStep, beta: &ParallelStep) -> Result<ParallelStep> {
    let (a, b) = orthogonalize_parallel(trs, alpha, beta)?;
    project_orthogonal(trs, &a, &b)
}

/// Same source, same target and the same set of redexes.
pub fn equivalent(trs: &Trs, a: &ParallelStep, b: &ParallelStep) -> Result<bool> {
    Ok(a.source().eq_rational(b.source()) && a.redexes() == b.redexes() && a.target(trs)?.eq_rational(&b.target(trs)?))
}

#[derive(Clone, Debug)]
pub struct CubeReport {
    pub lhs: ParallelStep,
    pub rhs: ParallelStep,
    pub discrepancy: Option<String>,
}

impl CubeReport {
    pub fn holds(&self) -> bool {
        self.discrepancy.is_none()
    }
}

/// Compares `(α/β)/(γ/β)` with `(α/γ)/(β/γ)`.
pub fn check_cube(trs: &Trs, alpha: &ParallelStep, beta: &ParallelStep, gamma: &ParallelStep) -> Result<CubeReport> {
    let lhs = wo_project(trs, &wo_project(trs, alpha, beta)?, &wo_project(trs, gamma, beta)?)?;
    let rhs = wo_project(trs, &wo_project(trs, alpha, gamma)?, &wo_project(trs, beta, gamma)?)?;
    let (lt, rt) = (lhs.target(trs)?, rhs.target(trs)?);
    let discrepancy = if !lhs.source().eq_rational(rhs.source()) {
        Some(format!("sources differ: {} vs {}", lhs.source(), rhs.source()))
    } else if !lt.eq_rational(&rt) {
        Some(format!("targets differ: {lt} vs {rt}"))
    } else if lhs.redexes() != rhs.redexes() {
        Some(format!(
            "redex sets differ: {} vs {}",
            lhs.display(trs),
            rhs.display(trs)
        ))
    } else {
        None
    };
    Ok(CubeReport { lhs, rhs, discrepancy })
}

/// Minimal depths involved in projecting two co-initial parallel steps;
/// `None` stands for the empty step (depth ∞).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthLiftReport {
    pub d_alpha: Option<usize>,
    pub d_beta: Option<usize>,
    pub d_alpha_over_beta: Option<usize>,
    pub d_beta_over_alpha: Option<usize>,
    pub collapse_free: bool,
    pub bound_alpha_over_beta: Option<usize>,
    pub bound_beta_over_alpha: Option<usize>,
}

impl DepthLiftReport {
    pub fn holds(&self) -> bool {
        at_least(self.d_alpha_over_beta, self.bound_alpha_over_beta)
            && at_least(self.d_beta_over_alpha, self.bound_beta_over_alpha)
    }
}

/// `x >= bound` with `None` read as infinity.
fn at_least(x: Option<usize>, bound: Option<usize>) -> bool {
    match (x, bound) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(b)) => x >= b,
    }
}

fn min_inf(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a.min(b)),
    }
}

fn succ(a: Option<usize>) -> Option<usize> {
    a.map(|x| x + 1)
}

/// Projection depths against the lower bounds `min(dα, dβ)`, sharpened to
/// `min(dα, dβ+1)` and `min(dβ, dα+1)` without collapsing rules.
pub fn depth_lift_bound(trs: &Trs, alpha: &ParallelStep, beta: &ParallelStep) -> Result<DepthLiftReport> {
    let (da, db) = (alpha.min_depth(), beta.min_depth());
    let ab = wo_project(trs, alpha, beta)?.min_depth();
    let ba = wo_project(trs, beta, alpha)?.min_depth();
    let collapse_free = trs.is_collapse_free();
    let (bound_ab, bound_ba) = if collapse_free {
        (min_inf(da, succ(db)), min_inf(db, succ(da)))
    } else {
        (min_inf(da, db), min_inf(da, db))
    };
    Ok(DepthLiftReport {
        d_alpha: da,
        d_beta: db,
        d_alpha_over_beta: ab,
        d_beta_over_alpha: ba,
        collapse_free,
        bound_alpha_over_beta: bound_ab,
        bound_beta_over_alpha: bound_ba,
    })
}

/// Finite steps of a sequence of length at most ω, up to the index after
/// which all steps are deeper than `d`.
fn steps_to_depth(seq: &Sequence, d: usize) -> Result<Vec<Redex>> {
    match seq.segments() {
        [] => Ok(Vec::new()),
        [Segment::Finite(v)] => Ok(v.clone()),
        [Segment::Omega(w)] => w.prefix_to_depth(d),
        [Segment::Finite(v), Segment::Omega(w)] => {
            let mut out = v.clone();
            out.extend(w.prefix_to_depth(d)?);
            Ok(out)
        }
        _ => Err(Error::InvalidSequence(
            "expected a sequence of length at most ω; compress it first".into(),
        )),
    }
}

fn source_terms(trs: &Trs, source: &Term, steps: &[Redex]) -> Result<Vec<Term>> {
    let mut terms = vec![source.clone()];
    for r in steps {
        let next = apply_step(trs, terms.last().expect("non-empty"), r)?;
        terms.push(next);
    }
    Ok(terms)
}

#[derive(Clone, Debug)]
pub struct StripResult {
    /// Projections of the sequence's steps over the evolving parallel step.
    pub bottom: Vec<ParallelStep>,
    /// The parallel step after the last tiled sequence step.
    pub right: ParallelStep,
    /// Common target, truncated at the requested depth.
    pub limit: Term,
    /// The right step applied to the sequence's limit agrees with `limit`.
    pub limit_agrees: bool,
    pub bounds_hold: bool,
}

/// Tiles elementary diagrams along `seq` (length at most ω) against the
/// parallel step `alpha`, up to the index after which all steps of `seq`
/// are deeper than `d + p` for the maximal pattern depth `p`.
pub fn strip(trs: &Trs, seq: &Sequence, alpha: &ParallelStep, d: usize) -> Result<StripResult> {
    trs.require_weakly_orthogonal()?;
    if !seq.source().eq_rational(alpha.source()) {
        return Err(Error::InvalidSequence("sequence and step are not co-initial".into()));
    }
    let p = trs.max_pattern_depth();
    let steps = steps_to_depth(seq, d + p)?;
    let terms = source_terms(trs, seq.source(), &steps)?;
    let mut beta = alpha.clone();
    let mut bottom = Vec::with_capacity(steps.len());
    for (i, r) in steps.iter().enumerate() {
        let single = ParallelStep::new(trs, terms[i].clone(), [r.clone()])?;
        let down = wo_project(trs, &single, &beta)?;
        let next = wo_project(trs, &beta, &single)?;
        if !down.target(trs)?.eq_rational(&next.target(trs)?) {
            return Err(Error::Invariant(format!("elementary diagram {i} does not close")));
        }
        bottom.push(down);
        beta = next;
    }
    let end = beta.target(trs)?;
    let limit = end.unfold(d);
    let limit_agrees = {
        let seq_limit = match seq.segments().last() {
            Some(Segment::Omega(w)) => match w.declared_limit() {
                Some(l) => l.clone(),
                None => w.term_at(w.modulus(2 * (d + p))?)?,
            },
            _ => terms.last().expect("non-empty").clone(),
        };
        let shallow: Vec<Redex> = beta.redexes().iter().filter(|r| r.depth() <= d).cloned().collect();
        let mut t = seq_limit;
        for r in &shallow {
            t = apply_step(trs, &t, r)?;
        }
        t.eq_to_depth(&end, d)
    };
    let d_sigma = steps.iter().map(Redex::depth).min();
    let d_alpha = alpha.min_depth();
    let d_bottom = bottom.iter().filter_map(ParallelStep::min_depth).min();
    let d_right = beta.min_depth();
    let bounds_hold = if trs.is_collapse_free() {
        at_least(d_bottom, min_inf(d_sigma, succ(d_alpha))) && at_least(d_right, min_inf(d_alpha, succ(d_sigma)))
    } else {
        let b = min_inf(d_sigma, d_alpha);
        at_least(d_bottom, b) && at_least(d_right, b)
    };
    Ok(StripResult {
        bottom,
        right: beta,
        limit,
        limit_agrees,
        bounds_hold,
    })
}

#[derive(Clone, Debug)]
pub struct JoinResult {
    /// Parallel steps extending the left sequence's tiled prefix.
    pub left_extension: Vec<ParallelStep>,
    /// Parallel steps extending the right sequence's tiled prefix.
    pub right_extension: Vec<ParallelStep>,
    pub u_left: Term,
    pub u_right: Term,
    /// The common reduct truncated at depth `d`.
    pub u: Term,
}

/// Joins two co-initial sequences of length at most ω to depth `d` by
/// tiling parallel-step diagrams over their prefixes up to depth `d + p`.
pub fn confluence_join(trs: &Trs, sigma: &Sequence, tau: &Sequence, d: usize) -> Result<JoinResult> {
    trs.require_collapse_free()?;
    trs.require_weakly_orthogonal()?;
    if !sigma.source().eq_rational(tau.source()) {
        return Err(Error::InvalidSequence("sequences are not co-initial".into()));
    }
    let p = trs.max_pattern_depth();
    let s_steps = steps_to_depth(sigma, d + p)?;
    let t_steps = steps_to_depth(tau, d + p)?;
    let s_terms = source_terms(trs, sigma.source(), &s_steps)?;
    let t_terms = source_terms(trs, tau.source(), &t_steps)?;
    // row[i] is the horizontal edge leaving column i on the current row
    let mut row: Vec<ParallelStep> = s_steps
        .iter()
        .enumerate()
        .map(|(i, r)| ParallelStep::new(trs, s_terms[i].clone(), [r.clone()]))
        .collect::<Result<_>>()?;
    let mut left_extension = Vec::with_capacity(t_steps.len());
    for (j, r) in t_steps.iter().enumerate() {
        let mut down = ParallelStep::new(trs, t_terms[j].clone(), [r.clone()])?;
        for (i, h) in row.iter_mut().enumerate() {
            let h_next = wo_project(trs, h, &down)?;
            let down_next = wo_project(trs, &down, h)?;
            if !h_next.target(trs)?.eq_rational(&down_next.target(trs)?) {
                return Err(Error::Invariant(format!("tile ({i},{j}) does not close")));
            }
            *h = h_next;
            down = down_next;
        }
        left_extension.push(down);
    }
    let right_extension = row;
    let mut u_left = s_terms.last().expect("non-empty").clone();
    for step in &left_extension {
        if !step.source().eq_rational(&u_left) {
            return Err(Error::Invariant("left extension is not a sequence".into()));
        }
        u_left = step.target(trs)?;
    }
    let mut u_right = t_terms.last().expect("non-empty").clone();
    for step in &right_extension {
        if !step.source().eq_rational(&u_right) {
            return Err(Error::Invariant("right extension is not a sequence".into()));
        }
        u_right = step.target(trs)?;
    }
    let u = u_left.unfold(d);
    Ok(JoinResult {
        left_extension,
        right_extension,
        u_left,
        u_right,
        u,
    })
}

#[derive(Clone, Debug)]
pub struct DiamondResult {
    /// Development closing the diagram from the target of the left development.
    pub left_closing: Development,
    /// Development closing the diagram from the target of the right development.
    pub right_closing: Development,
    pub u_left: Term,
    pub u_right: Term,
    /// The common target truncated at depth `d`.
    pub u: Term,
}

/// Closes two co-initial developments: orthogonalize them, then develop
/// each one's residuals after the other.
pub fn diamond_join(trs: &Trs, u: &Development, v: &Development, d: usize) -> Result<DiamondResult> {
    trs.require_collapse_free()?;
    trs.require_weakly_orthogonal()?;
    let pd = trs.max_pattern_depth();
    let mut big_d = truncation_depth(trs, d);
    loop {
        let (ut, vt) = if u.is_periodic() || v.is_periodic() {
            (u.truncated(trs, big_d), v.truncated(trs, big_d))
        } else {
            (u.clone(), v.clone())
        };
        let o = orthogonalize_developments(trs, &ut, &vt, usize::MAX)?;
        let src = o.left.source().clone();
        let lr = o.left.redexes(usize::MAX);
        let rr = o.right.redexes(usize::MAX);
        let t_left = develop_explicit(trs, &src, lr.clone())?;
        let t_right = develop_explicit(trs, &src, rr.clone())?;
        let left_closing = Development::from_redexes(trs, t_left.clone(), residuals_after_development(trs, &rr, &lr)?)?;
        let right_closing = Development::from_redexes(trs, t_right.clone(), residuals_after_development(trs, &lr, &rr)?)?;
        let u_left = develop_explicit(trs, &t_left, left_closing.redexes(usize::MAX))?;
        let u_right = develop_explicit(trs, &t_right, right_closing.redexes(usize::MAX))?;
        if !u_left.eq_rational(&u_right) {
            return Err(Error::Invariant(format!("diamond does not close: {u_left} vs {u_right}")));
        }
        let valid = u_left.min_cut_depth().map_or(usize::MAX, |c| c.saturating_sub(2 * pd));
        if valid >= d {
            let uu = u_left.unfold(d);
            return Ok(DiamondResult {
                left_closing,
                right_closing,
                u_left,
                u_right,
                u: uu,
            });
        }
        big_d *= 2;
        if big_d > crate::sequence::DEPTH_PROBE_LIMIT {
            return Err(Error::BudgetExhausted(format!("diamond not determined to depth {d}")));
        }
    }
}

/// Breadth-first search for a common reduct of `a` and `b` within `steps`
/// steps each, contracting redexes rooted above depth `redex_depth`.
pub fn common_reduct_within(trs: &Trs, a: &Term, b: &Term, steps: usize, redex_depth: usize) -> Option<Term> {
    let reach = |t: &Term| {
        let mut seen: HashSet<String> = HashSet::from([t.canonical_key()]);
        let mut all = vec![t.clone()];
        let mut queue = VecDeque::from([(t.clone(), 0usize)]);
        while let Some((cur, k)) = queue.pop_front() {
            if k == steps {
                continue;
            }
            for r in find_redexes(trs, &cur, redex_depth) {
                if let Ok(next) = apply_step(trs, &cur, &r) {
                    if seen.insert(next.canonical_key()) {
                        all.push(next.clone());
                        queue.push_back((next, k + 1));
                    }
                }
            }
        }
        (seen, all)
    };
    let (sa, _) = reach(a);
    let (_, all_b) = reach(b);
    all_b.into_iter().find(|t| sa.contains(&t.canonical_key()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn sp() -> Trs {
        Trs::parse("sig S/1 P/1\nrule PS : P(S(x)) -> x\nrule SP : S(P(x)) -> x\n").unwrap()
    }

    fn step(trs: &Trs, t: &Term, rs: &[&str]) -> ParallelStep {
        ParallelStep::new(trs, t.clone(), rs.iter().map(|s| Redex::parse(s, trs).unwrap())).unwrap()
    }

    #[test]
    fn duplication_copies_residuals() {
        let trs = Trs::parse("sig d/1 c2/2 a/0 b/0\nrule D : d(x) -> c2(x,x)\nrule AB : a -> b\n").unwrap();
        let s = trs.parse_term("d(a)").unwrap();
        let r = project_orthogonal(&trs, &step(&trs, &s, &["1:AB"]), &step(&trs, &s, &["ε:D"])).unwrap();
        assert_eq!(r.display(&trs).to_string(), "{1:AB, 2:AB}");
        assert_eq!(r.target(&trs).unwrap().to_string(), "c2(b,b)");
    }

    #[test]
    fn sp_projection_after_orthogonalization() {
        let trs = sp();
        let s = trs.parse_term("S(P(S(P(x))))").unwrap();
        let (a, b) = (step(&trs, &s, &["ε:SP"]), step(&trs, &s, &["1:PS"]));
        assert!(wo_project(&trs, &a, &b).unwrap().is_empty());
        assert!(wo_project(&trs, &b, &a).unwrap().is_empty());
        assert!(project_orthogonal(&trs, &a, &b).is_err());
    }

    #[test]
    fn cube_fails_on_sp_witness() {
        let trs = sp();
        let s = trs.parse_term("S(P(S(P(x))))").unwrap();
        let rep = check_cube(
            &trs,
            &step(&trs, &s, &["ε:SP"]),
            &step(&trs, &s, &["1:PS"]),
            &step(&trs, &s, &["1.1:SP"]),
        )
        .unwrap();
        assert!(!rep.holds());
    }

    #[test]
    fn strip_erasure_case() {
        let trs = Arc::new(
            Trs::parse("sig or/2 true/0 c/0\nrule L : or(true,x) -> true\nrule R : or(x,true) -> true\nrule C : c -> or(true,c)\n")
                .unwrap(),
        );
        let seq = Sequence::parse(trs.clone(), "source: or(c,true)\nomega: gen=spine(C, 1, 2, 1)\n").unwrap();
        let alpha = step(&trs, seq.source(), &["ε:R"]);
        let r = strip(&trs, &seq, &alpha, 6).unwrap();
        assert!(r.bottom.iter().all(ParallelStep::is_empty));
        assert_eq!(r.right.display(&trs).to_string(), "{ε:R}");
        assert_eq!(r.limit.to_string(), "true");
        assert!(r.limit_agrees && r.bounds_hold);
    }

    #[test]
    fn collapsing_refused() {
        let trs = Trs::parse("sig f/2 a/0 b/0\nrule F : f(x,y) -> x\n").unwrap();
        let s = trs.parse_term("rec X = f(f(X,b),a)").unwrap();
        let dev = Development::from_redexes(&trs, s, []).unwrap();
        assert!(matches!(diamond_join(&trs, &dev, &dev, 3), Err(Error::CollapsingRules(_))));
        let t1 = trs.parse_term("rec Y = f(Y,a)").unwrap();
        let t2 = trs.parse_term("rec Z = f(Z,b)").unwrap();
        assert!(common_reduct_within(&trs, &t1, &t2, 3, 4).is_none());
    }
}
