//! Rewrite rules, rule systems, and critical pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::term::{match_at, syntax, Node, Position, Signature, Substitution, Symbol, Term};

/// Index of a rule within its [`Trs`].
pub type RuleId = usize;

#[derive(Clone, Debug)]
pub struct Rule {
    name: String,
    lhs: Term,
    rhs: Term,
    pattern: Vec<Position>,
    pattern_depth: usize,
}

impl Rule {
    /// Builds a rule; the lhs must be finite and not a variable, and the rhs
    /// may only mention lhs variables.
    pub fn new(name: &str, lhs: Term, rhs: Term) -> Result<Rule> {
        let bad = |reason: &str| Error::IllFormedRule {
            rule: name.to_string(),
            reason: reason.to_string(),
        };
        if lhs.is_var() {
            return Err(bad("left-hand side is a variable"));
        }
        if !lhs.is_finite() {
            return Err(bad("left-hand side must be finite"));
        }
        if lhs.min_cut_depth().is_some() || rhs.min_cut_depth().is_some() {
            return Err(bad("rules may not contain the cut marker"));
        }
        let lvars = lhs.vars();
        if let Some(x) = rhs.vars().iter().find(|x| !lvars.contains(*x)) {
            return Err(bad(&format!("variable `{x}` of the right-hand side is not in the left-hand side")));
        }
        let pattern_depth = lhs.height().expect("finite lhs");
        let pattern = lhs
            .positions(pattern_depth + 1)
            .into_iter()
            .filter(|(_, id)| matches!(lhs.node(*id), Node::App(..)))
            .map(|(p, _)| p)
            .collect();
        Ok(Rule {
            name: name.to_string(),
            lhs,
            rhs,
            pattern,
            pattern_depth,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lhs(&self) -> &Term {
        &self.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.rhs
    }

    /// Non-variable positions of the lhs, in depth-then-left order.
    pub fn pattern(&self) -> &[Position] {
        &self.pattern
    }

    /// Height of the lhs (deepest position, variables included).
    pub fn pattern_depth(&self) -> usize {
        self.pattern_depth
    }

    pub fn is_left_linear(&self) -> bool {
        self.lhs.is_linear()
    }

    /// The rhs is a bare variable.
    pub fn is_collapsing(&self) -> bool {
        self.rhs.is_var()
    }

    /// Position of variable `x` in the (linear) lhs.
    pub fn lhs_var_position(&self, x: &str) -> Option<Position> {
        self.lhs.var_positions(x, self.pattern_depth + 1).into_iter().next()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.name, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug)]
pub struct Trs {
    signature: Signature,
    rules: Vec<Rule>,
}

/// Result of [`Trs::check_rules`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleCheck {
    pub left_linear: bool,
    pub collapsing_rules: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CriticalPair {
    pub peak: Term,
    pub left_reduct: Term,
    pub right_reduct: Term,
    pub outer_rule: String,
    pub inner_rule: String,
    pub position: Position,
}

impl CriticalPair {
    pub fn is_trivial(&self) -> bool {
        self.left_reduct.eq_rational(&self.right_reduct)
    }
}

impl fmt::Display for CriticalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} at {}: {} -> <{}, {}>",
            self.outer_rule, self.inner_rule, self.position, self.peak, self.left_reduct, self.right_reduct
        )
    }
}

/// Verdict of [`Trs::is_weakly_orthogonal`].
#[derive(Clone, Debug)]
pub enum Orthogonality {
    Yes,
    NotLeftLinear(String),
    NonTrivialPair(Box<CriticalPair>),
}

impl Orthogonality {
    pub fn holds(&self) -> bool {
        matches!(self, Orthogonality::Yes)
    }
}

impl Trs {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Result<Trs> {
        let mut seen = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            if seen.insert(r.name.clone(), i).is_some() {
                return Err(Error::IllFormedRule {
                    rule: r.name.clone(),
                    reason: "duplicate rule name".into(),
                });
            }
            for side in [&r.lhs, &r.rhs] {
                side.check_arities(&signature).map_err(|e| Error::IllFormedRule {
                    rule: r.name.clone(),
                    reason: e.to_string(),
                })?;
            }
        }
        Ok(Trs { signature, rules })
    }

    /// Parses the line-oriented rule file format:
    ///
    /// ```text
    /// sig  S/1 P/1
    /// rule PS : P(S(x)) -> x
    /// ```
    pub fn parse(src: &str) -> Result<Trs> {
        let mut sig = Signature::new();
        let mut pending: Vec<(usize, usize, String, String, usize, String, usize)> = Vec::new();
        for (ln, raw) in src.lines().enumerate() {
            let line = ln + 1;
            let text = raw.split('#').next().unwrap_or("");
            let trimmed = text.trim_start();
            let indent = text.chars().count() - trimmed.chars().count();
            let trimmed = trimmed.trim_end();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix("sig") {
                for item in rest.split_whitespace() {
                    let col = 1 + indent + char_offset(trimmed, item);
                    let (name, arity) = item
                        .split_once('/')
                        .ok_or_else(|| Error::parse(line, col, format!("expected NAME/ARITY, got `{item}`")))?;
                    let arity: usize = arity
                        .parse()
                        .map_err(|_| Error::parse(line, col, format!("bad arity in `{item}`")))?;
                    sig.declare(name, arity).map_err(|e| Error::parse(line, col, e.to_string()))?;
                }
            } else if let Some(rest) = trimmed.strip_prefix("rule") {
                let (name, body) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, 1 + indent, "expected `rule NAME : LHS -> RHS`"))?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(Error::parse(line, 1 + indent, "missing rule name"));
                }
                let (lhs, rhs) = body
                    .split_once("->")
                    .ok_or_else(|| Error::parse(line, 1 + indent, "expected `->`"))?;
                let lcol = 1 + indent + char_offset(trimmed, lhs);
                let rcol = 1 + indent + char_offset(trimmed, rhs);
                pending.push((line, 1 + indent, name.to_string(), lhs.to_string(), lcol, rhs.to_string(), rcol));
            } else {
                return Err(Error::parse(line, 1 + indent, "expected `sig` or `rule`"));
            }
        }
        let mut rules = Vec::new();
        for (line, col, name, lhs, lcol, rhs, rcol) in pending {
            let l = syntax::parse_term_at(&lhs, &sig, line, lcol)?.term;
            let r = syntax::parse_term_at(&rhs, &sig, line, rcol)?.term;
            rules.push(Rule::new(&name, l, r).map_err(|e| Error::parse(line, col, e.to_string()))?);
        }
        Trs::new(sig, rules)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id]
    }

    pub fn rule_id(&self, name: &str) -> Result<RuleId> {
        self.rules
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRule(name.to_string()))
    }

    /// Largest lhs height over all rules.
    pub fn max_pattern_depth(&self) -> usize {
        self.rules.iter().map(|r| r.pattern_depth).max().unwrap_or(0)
    }

    pub fn parse_term(&self, src: &str) -> Result<Term> {
        crate::term::parse_term(src, &self.signature)
    }

    pub fn check_rules(&self) -> RuleCheck {
        RuleCheck {
            left_linear: self.rules.iter().all(Rule::is_left_linear),
            collapsing_rules: self
                .rules
                .iter()
                .filter(|r| r.is_collapsing())
                .map(|r| r.name.clone())
                .collect(),
        }
    }

    pub fn is_left_linear(&self) -> bool {
        self.rules.iter().all(Rule::is_left_linear)
    }

    pub fn is_collapse_free(&self) -> bool {
        self.rules.iter().all(|r| !r.is_collapsing())
    }

    /// Fails with [`Error::CollapsingRules`] unless no rule is collapsing.
    pub fn require_collapse_free(&self) -> Result<()> {
        let c = self.check_rules().collapsing_rules;
        if c.is_empty() {
            Ok(())
        } else {
            Err(Error::CollapsingRules(c))
        }
    }

    /// Contracts the redex of rule `rule` at `p`.
    pub fn contract(&self, t: &Term, p: &Position, rule: RuleId) -> Result<Term> {
        let r = &self.rules[rule];
        let sigma = match_at(&r.lhs, t, p)?.ok_or_else(|| Error::NotARedex {
            position: p.clone(),
            rule: r.name.clone(),
        })?;
        t.replace_at(p, &r.rhs.substitute(&sigma))
    }

    /// Critical pairs, ordered by (outer rule, inner rule, position). A root
    /// overlap between two distinct rules is reported once, with the
    /// lower-indexed rule outermost.
    pub fn critical_pairs(&self) -> Result<Vec<CriticalPair>> {
        if let Some(r) = self.rules.iter().find(|r| !r.is_left_linear()) {
            return Err(Error::NotLeftLinear(r.name.clone()));
        }
        let mut out = Vec::new();
        for (i, outer) in self.rules.iter().enumerate() {
            for (j, inner) in self.rules.iter().enumerate() {
                let renamed = inner.lhs.rename_vars(|x| format!("{x}'"));
                let renamed_rhs = inner.rhs.rename_vars(|x| format!("{x}'"));
                for p in &outer.pattern {
                    if p.is_root() && j <= i {
                        continue;
                    }
                    let sub = outer.lhs.subterm_at(p)?;
                    let Some(sigma) = unify_linear(&sub, &renamed) else {
                        continue;
                    };
                    let peak = outer.lhs.substitute(&sigma);
                    let left = outer.rhs.substitute(&sigma);
                    let right = peak.replace_at(p, &renamed_rhs.substitute(&sigma))?;
                    let names = canonical_var_names(&peak);
                    let rename = |t: &Term| t.rename_vars(|x| names.get(x).cloned().unwrap_or_else(|| x.to_string()));
                    out.push(CriticalPair {
                        peak: rename(&peak),
                        left_reduct: rename(&left),
                        right_reduct: rename(&right),
                        outer_rule: outer.name.clone(),
                        inner_rule: inner.name.clone(),
                        position: p.clone(),
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn is_weakly_orthogonal(&self) -> Orthogonality {
        if let Some(r) = self.rules.iter().find(|r| !r.is_left_linear()) {
            return Orthogonality::NotLeftLinear(r.name.clone());
        }
        match self
            .critical_pairs()
            .expect("left-linear")
            .into_iter()
            .find(|cp| !cp.is_trivial())
        {
            Some(cp) => Orthogonality::NonTrivialPair(Box::new(cp)),
            None => Orthogonality::Yes,
        }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.is_left_linear() && self.critical_pairs().map(|v| v.is_empty()).unwrap_or(false)
    }

    /// Fails with [`Error::NotWeaklyOrthogonal`] unless the system is weakly orthogonal.
    pub fn require_weakly_orthogonal(&self) -> Result<()> {
        match self.is_weakly_orthogonal() {
            Orthogonality::Yes => Ok(()),
            Orthogonality::NotLeftLinear(r) => Err(Error::NotLeftLinear(r)),
            Orthogonality::NonTrivialPair(cp) => Err(Error::NotWeaklyOrthogonal(cp.to_string())),
        }
    }
}

fn char_offset(whole: &str, part: &str) -> usize {
    let byte = part.as_ptr() as usize - whole.as_ptr() as usize;
    whole[..byte].chars().count()
}

/// Variables renamed to `x, y, z, w, x5, x6, ...` in preorder of first occurrence.
fn canonical_var_names(t: &Term) -> BTreeMap<String, String> {
    let mut names = BTreeMap::new();
    for (_, id) in t.positions(t.height().unwrap_or(0) + 1) {
        if let Node::Var(x) = t.node(id) {
            let k = names.len();
            names.entry(x.to_string()).or_insert_with(|| match k {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                3 => "w".to_string(),
                _ => format!("x{}", k + 1),
            });
        }
    }
    names
}

/// Most general unifier of two finite linear terms with disjoint variables.
/// Linearity means each variable is bound at most once, so no occurs check
/// or binding composition is needed.
fn unify_linear(a: &Term, b: &Term) -> Option<Substitution> {
    let mut sigma: Substitution = BTreeMap::new();
    let mut stack = vec![(a.root(), b.root())];
    while let Some((x, y)) = stack.pop() {
        match (a.node(x), b.node(y)) {
            (Node::Var(v), _) => bind(&mut sigma, v, b.subterm(y)),
            (_, Node::Var(v)) => bind(&mut sigma, v, a.subterm(x)),
            (Node::App(f, xs), Node::App(g, ys)) if f == g && xs.len() == ys.len() => {
                stack.extend(xs.iter().copied().zip(ys.iter().copied()));
            }
            _ => return None,
        }
    }
    Some(sigma)
}

fn bind(sigma: &mut Substitution, v: &Symbol, t: Term) {
    sigma.insert(Arc::clone(v), t);
}
