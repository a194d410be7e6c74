//! One function per verb; each returns a report or a library error.

use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use wo_core::compression::{compress, compress_divergent};
use wo_core::orthogonalize::{orthogonalize_developments, Outcome};
use wo_core::projection::{check_cube, common_reduct_within, confluence_join, diamond_join, strip, wo_project};
use wo_core::redex::{find_redexes, show_redexes, y_redexes, Development, ParallelStep, Redex, RedexSet};
use wo_core::sequence::{Segment, Sequence};
use wo_core::sp::{self, Height, Letter, SPWord};
use wo_core::term::{parse_term_with_binders, ParsedTerm, Term};
use wo_core::trs::{Orthogonality, Trs};

use crate::dot::Dot;
use crate::report::{paint, verdict, Report, Status};

/// Depth at which terms are shown in diagram node labels.
const LABEL_DEPTH: usize = 5;

pub fn load_trs(path: &Path) -> Result<Trs> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Trs::parse(&src)?)
}

fn load_seq(trs: &Arc<Trs>, path: &Path) -> Result<Sequence> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Sequence::parse(trs.clone(), &src)?)
}

fn parse_term(trs: &Trs, src: &str) -> Result<ParsedTerm> {
    Ok(parse_term_with_binders(src, trs.signature())?)
}

fn parallel_step(trs: &Trs, t: &ParsedTerm, set: &str) -> Result<ParallelStep> {
    let rs = RedexSet::parse(set, trs, t)?;
    if rs.is_periodic() {
        anyhow::bail!(wo_core::Error::InvalidParallelStep("node markings are for developments".into()));
    }
    Ok(ParallelStep::new(trs, t.term.clone(), rs.explicit)?)
}

fn step_json(trs: &Trs, s: &ParallelStep) -> Result<Value> {
    Ok(json!({
        "redexes": s.redexes().iter().map(|r| r.display(trs).to_string()).collect::<Vec<_>>(),
        "target": s.target(trs)?.to_string(),
    }))
}

fn redex_strings(trs: &Trs, rs: &[Redex]) -> Vec<String> {
    rs.iter().map(|r| r.display(trs).to_string()).collect()
}

fn label(t: &Term) -> String {
    t.unfold(LABEL_DEPTH).to_string()
}

pub fn check(trs: &Trs) -> Result<Report> {
    let mut rep = Report::new("check");
    let rules = trs.check_rules();
    let verdict_wo = trs.is_weakly_orthogonal();
    let collapsing = if rules.collapsing_rules.is_empty() {
        "none".to_string()
    } else {
        rules.collapsing_rules.join(", ")
    };
    rep.line(format!("weakly orthogonal: {}; collapsing rules: {collapsing}", verdict(verdict_wo.holds())));
    rep.field("weakly_orthogonal", verdict_wo.holds())
        .field("left_linear", rules.left_linear)
        .field("orthogonal", trs.is_orthogonal())
        .field("collapsing_rules", rules.collapsing_rules.clone());
    match &verdict_wo {
        Orthogonality::Yes => {
            let n = trs.critical_pairs()?.len();
            rep.line(format!("critical pairs: {n}, all trivial")).field("critical_pairs", n);
        }
        Orthogonality::NotLeftLinear(rule) => {
            rep.status = Status::Violated;
            rep.line(format!("rule {rule} is not left-linear")).field("critical_pairs", Value::Null);
        }
        Orthogonality::NonTrivialPair(cp) => {
            rep.status = Status::Violated;
            rep.line(format!("non-trivial critical pair: {cp}"))
                .field("critical_pairs", trs.critical_pairs()?.len())
                .field("witness", json!([cp.left_reduct.to_string(), cp.right_reduct.to_string()]));
        }
    }
    Ok(rep)
}

pub fn cps(trs: &Trs) -> Result<Report> {
    let mut rep = Report::new("cps");
    let pairs = trs.critical_pairs()?;
    let mut list = Vec::new();
    for (i, cp) in pairs.iter().enumerate() {
        let trivial = cp.is_trivial();
        if !trivial {
            rep.status = Status::Violated;
        }
        rep.line(format!("{}: {cp} {}", i + 1, paint(if trivial { "trivial" } else { "non-trivial" }, trivial)));
        list.push(json!({
            "outer": cp.outer_rule, "inner": cp.inner_rule, "position": cp.position.to_string(),
            "peak": cp.peak.to_string(), "left": cp.left_reduct.to_string(),
            "right": cp.right_reduct.to_string(), "trivial": trivial,
        }));
    }
    rep.line(format!("{} critical pairs", pairs.len())).field("critical_pairs", list);
    Ok(rep)
}

fn overlap_dot(trs: &Trs, dot: &mut Dot, prefix: &str, rs: &[Redex]) {
    let y = y_redexes(trs, rs);
    for (k, c) in y.clusters.iter().enumerate() {
        dot.begin_cluster(&format!("{prefix}{k}"), if c.disjoint_pair.is_some() { "Y" } else { "" });
        for r in &c.members {
            let name = r.display(trs).to_string();
            let colour = if y.y_redexes.contains(r) { "red" } else { "black" };
            dot.node(&format!("{prefix}{name}"), &name, &[("color", colour)]);
        }
        dot.end_cluster();
    }
    for (i, a) in rs.iter().enumerate() {
        for b in &rs[i + 1..] {
            if wo_core::redex::overlap(trs, a, b) {
                let (na, nb) = (a.display(trs).to_string(), b.display(trs).to_string());
                dot.edge(&format!("{prefix}{na}"), &format!("{prefix}{nb}"), "");
            }
        }
    }
}

pub fn redexes(trs: &Trs, term: &str, depth: usize) -> Result<Report> {
    let mut rep = Report::new("redexes");
    let t = parse_term(trs, term)?.term;
    let rs = find_redexes(trs, &t, depth);
    let y = y_redexes(trs, &rs);
    rep.line(format!("redexes above depth {depth}: {}", show_redexes(trs, &rs)));
    let clusters: Vec<Vec<String>> = y.clusters.iter().map(|c| redex_strings(trs, &c.members)).collect();
    for c in &y.clusters {
        if c.members.len() > 1 {
            rep.line(format!("overlap cluster: {}", show_redexes(trs, &c.members)));
        }
    }
    let ys: Vec<Redex> = y.y_redexes.iter().cloned().collect();
    rep.line(format!("Y-redexes: {}", show_redexes(trs, &ys)));
    rep.field("redexes", redex_strings(trs, &rs))
        .field("clusters", clusters)
        .field("y_redexes", redex_strings(trs, &ys));
    let mut dot = Dot::graph("overlap");
    overlap_dot(trs, &mut dot, "", &rs);
    rep.dot = Some(dot.render());
    Ok(rep)
}

fn development(trs: &Trs, t: &ParsedTerm, set: &str) -> Result<Development> {
    Ok(Development::new(trs, t.term.clone(), RedexSet::parse(set, trs, t)?)?)
}

pub fn orthogonalize(trs: &Trs, term: &str, left: &str, right: &str, depth: usize) -> Result<Report> {
    let mut rep = Report::new("orthogonalize");
    let t = parse_term(trs, term)?;
    let (u, v) = (development(trs, &t, left)?, development(trs, &t, right)?);
    let o = orthogonalize_developments(trs, &u, &v, depth)?;
    let trace: Vec<String> = o.trace.iter().map(|s| s.render(trs)).collect();
    for s in &trace {
        rep.line(s.clone());
    }
    let (l, r) = (o.left.redexes(usize::MAX), o.right.redexes(usize::MAX));
    rep.line(format!("left: {}", show_redexes(trs, &l)))
        .line(format!("right: {}", show_redexes(trs, &r)));
    match o.outcome {
        Outcome::Complete => {
            rep.line("outcome: complete").field("frontier", Value::Null);
        }
        Outcome::BudgetExhausted { frontier, remaining } => {
            rep.status = Status::Budget;
            rep.line(format!("outcome: {remaining} conflicts left at depth >= {frontier}"))
                .field("frontier", frontier);
        }
    }
    rep.field("left", redex_strings(trs, &l))
        .field("right", redex_strings(trs, &r))
        .field("trace", trace)
        .field("complete", o.is_complete());
    let mut dot = Dot::graph("orthogonalize");
    for (tag, a, b) in [("before", &u, &v), ("after", &o.left, &o.right)] {
        let mut all = a.redexes(depth);
        all.extend(b.redexes(depth));
        all.sort();
        all.dedup();
        dot.begin_cluster(tag, tag);
        overlap_dot(trs, &mut dot, &format!("{tag}:"), &all);
        dot.end_cluster();
    }
    rep.dot = Some(dot.render());
    Ok(rep)
}

pub fn develop(trs: &Trs, term: &str, set: &str, depth: usize) -> Result<Report> {
    let mut rep = Report::new("develop");
    let t = parse_term(trs, term)?;
    let dev = development(trs, &t, set)?;
    let target = dev.develop(trs, depth)?;
    let shown = if dev.is_periodic() { target.unfold(depth) } else { target };
    rep.line(format!("target: {shown}"))
        .field("target", shown.to_string())
        .field("periodic", dev.is_periodic());
    Ok(rep)
}

fn square_dot(trs: &Trs, name: &str, a: &ParallelStep, b: &ParallelStep, ab: &ParallelStep, ba: &ParallelStep) -> Result<String> {
    let mut dot = Dot::digraph(name);
    dot.node("s", &label(a.source()), &[])
        .node("a", &label(&a.target(trs)?), &[])
        .node("b", &label(&b.target(trs)?), &[])
        .node("u", &label(&ab.target(trs)?), &[])
        .edge("s", "a", &a.display(trs).to_string())
        .edge("s", "b", &b.display(trs).to_string())
        .edge("b", "u", &ab.display(trs).to_string())
        .edge("a", "u", &ba.display(trs).to_string());
    Ok(dot.render())
}

pub fn project(trs: &Trs, term: &str, left: &str, right: &str) -> Result<Report> {
    let mut rep = Report::new("project");
    let t = parse_term(trs, term)?;
    let (a, b) = (parallel_step(trs, &t, left)?, parallel_step(trs, &t, right)?);
    let ab = wo_project(trs, &a, &b)?;
    let ba = wo_project(trs, &b, &a)?;
    let closes = ab.target(trs)?.eq_rational(&ba.target(trs)?);
    if !closes {
        rep.status = Status::Violated;
    }
    rep.line(format!("alpha/beta: {} -> {}", ab.display(trs), ab.target(trs)?))
        .line(format!("beta/alpha: {} -> {}", ba.display(trs), ba.target(trs)?))
        .line(format!("closes: {}", verdict(closes)))
        .field("alpha_over_beta", step_json(trs, &ab)?)
        .field("beta_over_alpha", step_json(trs, &ba)?)
        .field("closes", closes);
    rep.dot = Some(square_dot(trs, "project", &a, &b, &ab, &ba)?);
    Ok(rep)
}

pub fn strip_verb(trs: Arc<Trs>, seq: &Path, step: &str, depth: usize) -> Result<Report> {
    let mut rep = Report::new("strip");
    let seq = load_seq(&trs, seq)?;
    let src = ParsedTerm {
        term: seq.source().clone(),
        binders: Default::default(),
    };
    let alpha = parallel_step(&trs, &src, step)?;
    let r = strip(&trs, &seq, &alpha, depth)?;
    let bottom: Vec<String> = r.bottom.iter().map(|s| s.display(&trs).to_string()).collect();
    rep.line(format!("tiles: {}", r.bottom.len()))
        .line(format!("bottom: {}", bottom.join(" ; ")))
        .line(format!("right: {}", r.right.display(&trs)))
        .line(format!("limit to depth {depth}: {}", r.limit))
        .line(format!("limit agrees: {}", verdict(r.limit_agrees)))
        .line(format!("depth bounds hold: {}", verdict(r.bounds_hold)));
    if !(r.limit_agrees && r.bounds_hold) {
        rep.status = Status::Violated;
    }
    rep.field("tiles", r.bottom.len())
        .field("bottom", bottom)
        .field("right", r.right.display(&trs).to_string())
        .field("limit", r.limit.to_string())
        .field("limit_agrees", r.limit_agrees)
        .field("bounds_hold", r.bounds_hold);
    let mut dot = Dot::digraph("strip");
    for (i, s) in r.bottom.iter().enumerate() {
        dot.node(&format!("b{i}"), &label(s.source()), &[]);
        dot.edge(&format!("b{i}"), &format!("b{}", i + 1), &s.display(&trs).to_string());
    }
    let n = r.bottom.len();
    dot.node(&format!("b{n}"), &label(&r.right.target(&trs)?), &[]);
    dot.node("limit", &r.limit.to_string(), &[("shape", "ellipse")]);
    dot.edge(&format!("b{n}"), "limit", "ω");
    rep.dot = Some(dot.render());
    Ok(rep)
}

pub fn join(trs: Arc<Trs>, left: &Path, right: &Path, depth: usize) -> Result<Report> {
    let mut rep = Report::new("join");
    let (s, t) = (load_seq(&trs, left)?, load_seq(&trs, right)?);
    let r = confluence_join(&trs, &s, &t, depth)?;
    let agree = r.u_left.eq_to_depth(&r.u_right, depth);
    if !agree {
        rep.status = Status::Violated;
    }
    let le: Vec<String> = r.left_extension.iter().map(|x| x.display(&trs).to_string()).collect();
    let re: Vec<String> = r.right_extension.iter().map(|x| x.display(&trs).to_string()).collect();
    rep.line(format!("left extension: {} steps", le.len()))
        .line(format!("right extension: {} steps", re.len()))
        .line(format!("common reduct to depth {depth}: {}", r.u))
        .line(format!("sides agree: {}", verdict(agree)))
        .field("left_extension", le.clone())
        .field("right_extension", re.clone())
        .field("u", r.u.to_string())
        .field("agree", agree);
    let mut dot = Dot::digraph("join");
    dot.node("s", &label(s.source()), &[])
        .node("u", &r.u.to_string(), &[("shape", "ellipse")])
        .node("l", &label(&s.end_to_depth(depth)?), &[])
        .node("r", &label(&t.end_to_depth(depth)?), &[])
        .edge("s", "l", "σ")
        .edge("s", "r", "τ")
        .edge("l", "u", &le.join(" ; "))
        .edge("r", "u", &re.join(" ; "));
    rep.dot = Some(dot.render());
    Ok(rep)
}

pub struct DiamondArgs<'a> {
    pub term: &'a str,
    pub left: &'a str,
    pub right: &'a str,
    pub witness: Option<(&'a str, &'a str)>,
}

/// Refusals on collapsing systems come back as errors; the optional
/// witness pair is searched for a common reduct and reported in `note`.
pub fn diamond(trs: &Trs, args: &DiamondArgs, depth: usize, note: &mut Vec<String>) -> Result<Report> {
    if let Some((a, b)) = args.witness {
        let (ta, tb) = (parse_term(trs, a)?.term, parse_term(trs, b)?.term);
        let found = common_reduct_within(trs, &ta, &tb, 3, 4);
        note.push(match found {
            Some(u) => format!("note: {a} and {b} have the common reduct {u} within 3 steps"),
            None => format!("note: {a} and {b} have no common reduct within 3 steps"),
        });
    }
    let mut rep = Report::new("diamond");
    let t = parse_term(trs, args.term)?;
    let (u, v) = (development(trs, &t, args.left)?, development(trs, &t, args.right)?);
    let r = diamond_join(trs, &u, &v, depth)?;
    let (lc, rc) = (r.left_closing.redexes(usize::MAX), r.right_closing.redexes(usize::MAX));
    rep.line(format!("closing after left: {}", show_redexes(trs, &lc)))
        .line(format!("closing after right: {}", show_redexes(trs, &rc)))
        .line(format!("common target to depth {depth}: {}", r.u))
        .field("left_closing", redex_strings(trs, &lc))
        .field("right_closing", redex_strings(trs, &rc))
        .field("u", r.u.to_string());
    Ok(rep)
}

pub fn cube(trs: &Trs, term: &str, sets: [&str; 3]) -> Result<Report> {
    let mut rep = Report::new("cube");
    let t = parse_term(trs, term)?;
    let [a, b, g] = sets.map(|s| parallel_step(trs, &t, s));
    let c = check_cube(trs, &a?, &b?, &g?)?;
    if !c.holds() {
        rep.status = Status::Violated;
    }
    rep.line(format!("(alpha/beta)/(gamma/beta): {} -> {}", c.lhs.display(trs), c.lhs.target(trs)?))
        .line(format!("(alpha/gamma)/(beta/gamma): {} -> {}", c.rhs.display(trs), c.rhs.target(trs)?))
        .line(format!("cube identity holds: {}", verdict(c.holds())))
        .field("lhs", step_json(trs, &c.lhs)?)
        .field("rhs", step_json(trs, &c.rhs)?)
        .field("holds", c.holds())
        .field("discrepancy", c.discrepancy.clone());
    if let Some(d) = &c.discrepancy {
        rep.line(d.clone());
    }
    Ok(rep)
}

pub fn compress_verb(trs: Arc<Trs>, seq: &Path, check_depth: usize, prefix: usize) -> Result<Report> {
    let mut rep = Report::new("compress");
    let seq = load_seq(&trs, seq)?;
    let (k, m) = seq.order_type();
    rep.line(format!("input order type: ω·{k}+{m}")).field("input_order", json!([k, m]));
    if !seq.is_convergent() {
        let d = compress_divergent(&seq, prefix)?;
        let steps = redex_strings(&trs, &d.prefix);
        rep.line(format!("divergent at depth {}", d.depth))
            .line(format!("emitted {} steps, {} at depth {}", d.prefix.len(), d.steps_at_depth, d.depth))
            .line(format!("chunk bound: {}", d.chunk_bound))
            .line(format!("steps: {}", steps.join("; ")))
            .field("divergent", true)
            .field("depth", d.depth)
            .field("steps_at_depth", d.steps_at_depth)
            .field("chunk_bound", d.chunk_bound)
            .field("steps", steps);
        return Ok(rep);
    }
    let r = compress(&seq, check_depth)?;
    let steps: Vec<String> = match r.output.segments() {
        [Segment::Finite(v)] => redex_strings(&trs, v),
        [Segment::Omega(w)] => (0..prefix)
            .map_while(|i| w.step(i).ok())
            .map(|s| s.display(&trs).to_string())
            .collect(),
        _ => Vec::new(),
    };
    let (ok, ko) = (r.output.order_type(), r.holds());
    let depth_str = r.min_depth.map_or("-".to_string(), |d| d.to_string());
    rep.line(format!("output order type: ω·{}+{}", ok.0, ok.1))
        .line(format!("source preserved: {}", verdict(r.source_preserved)))
        .line(format!("minimal depth: {depth_str}"))
        .line(format!("steps at minimal depth: {} in, {} out", r.steps_at_d_in, r.steps_at_d_out))
        .line(format!("limits agree to depth {}: {}", r.limit_agreement_depth, verdict(r.limit_agrees)))
        .line(format!("steps: {}", steps.join("; ")))
        .field("divergent", false)
        .field("output_order", json!([ok.0, ok.1]))
        .field("source_preserved", r.source_preserved)
        .field("min_depth", r.min_depth)
        .field("steps_at_d_in", r.steps_at_d_in)
        .field("steps_at_d_out", r.steps_at_d_out)
        .field("limit_agreement_depth", r.limit_agreement_depth)
        .field("limit_agrees", r.limit_agrees)
        .field("steps", steps);
    if !ko {
        rep.status = Status::Violated;
    }
    Ok(rep)
}

fn height_json(h: Height) -> Value {
    match h {
        Height::Finite(x) => x.into(),
        other => other.to_string().into(),
    }
}

fn tri(x: Option<bool>) -> String {
    x.map_or("unknown".to_string(), verdict)
}

pub fn sp_classify(word: &str, depth: usize) -> Result<Report> {
    let mut rep = Report::new("sp classify");
    let w = SPWord::parse(word)?;
    let c = sp::classify(&w);
    let h = c.heights;
    rep.line(format!("word: {w}"))
        .line(format!("prefix: {}", sp::show_letters(&w.prefix(depth))))
        .line(format!("upper={} lower={}{}", h.upper, h.lower, if h.exact { "" } else { " (estimated)" }))
        .line(format!(
            "A: {}  B: {}  root_active: {}  SN∞: {}",
            tri(c.in_a),
            tri(c.in_b),
            tri(c.root_active),
            tri(c.sn_inf)
        ))
        .field("word", w.to_string())
        .field("upper", height_json(h.upper))
        .field("lower", height_json(h.lower))
        .field("exact", h.exact)
        .field("in_a", c.in_a)
        .field("in_b", c.in_b)
        .field("root_active", c.root_active)
        .field("sn_inf", c.sn_inf);
    if let Ok(f) = sp::zero_word_factorization(&w, 3) {
        let f: Vec<String> = f.iter().map(|x| sp::show_letters(x)).collect();
        rep.line(format!("first zero words: {}", f.join(" ")));
    }
    Ok(rep)
}

pub fn sp_graph(word: &str, n: usize) -> Result<Report> {
    let mut rep = Report::new("sp graph");
    let w = SPWord::parse(word)?;
    let g = sp::sum_graph(&w, n);
    let mut csv = String::from("n,sum\n");
    for (i, s) in &g {
        csv.push_str(&format!("{i},{s}\n"));
        rep.line(format!("{i} {s}"));
    }
    rep.field("word", w.to_string())
        .field("sums", g.iter().map(|p| p.1).collect::<Vec<_>>());
    rep.csv = Some(csv);
    Ok(rep)
}

pub fn sp_witness(word: &str, target: Letter, depth: usize) -> Result<Report> {
    let mut rep = Report::new("sp witness");
    let w = SPWord::parse(word)?;
    let wit = sp::reduce_toward(&w, target, depth)?;
    let trs = sp::sp_trs();
    let steps = redex_strings(&trs, &wit.steps);
    let result = sp::show_letters(&sp::term_letters(&wit.result, usize::MAX));
    rep.line(format!("prefix length: {}", wit.prefix_len))
        .line(format!("steps: {}", wit.steps.len()))
        .line(format!("result: {result}▢"))
        .field("target", target.symbol())
        .field("depth", depth)
        .field("prefix_len", wit.prefix_len)
        .field("steps", steps)
        .field("result", result);
    Ok(rep)
}
