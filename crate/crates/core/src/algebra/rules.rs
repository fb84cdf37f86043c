use std::collections::{HashMap, HashSet};

use rand::Rng;

use super::coeff::Coeff;
use super::expr::{word_text, Expr, OperatorExpr, Word};
use super::field::Qi2;
use super::generator::{Generator, Statistics};
use super::scalar::Scalar;
use super::AlgebraError;

const MAX_WORDS: usize = 2_000_000;
const MAX_DEPTH: usize = 4_096;

/// Reordering rule for an out-of-order adjacent pair `g h`: `g h = sign · h g + remainder`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub sign: i8,
    pub remainder: OperatorExpr,
}

/// Table of (anti)commutation relations defining normal order.
///
/// Pairs without an entry commute, except two fermionic generators, which anticommute.
/// A fermionic generator squares to half its self-anticommutator (zero by default).
#[derive(Clone, Debug, Default)]
pub struct RewriteRules {
    rules: HashMap<(Generator, Generator), Rule>,
}

impl RewriteRules {
    pub fn new() -> Self {
        Self::default()
    }

    /// Standard ladder relations `[c_i, c_j†] = δ_ij` (or `{c_i, c_j†} = δ_ij`) for the
    /// given annihilators; all other pairs keep the default.
    pub fn canonical(annihilators: &[Generator], statistics: Statistics) -> Self {
        let mut r = Self::new();
        for g in annihilators {
            for h in annihilators {
                let rem = if g == h { OperatorExpr::one() } else { OperatorExpr::zero() };
                match statistics {
                    Statistics::Bosonic => r.set_commutator(g, &h.adjoint(), rem),
                    Statistics::Fermionic => r.set_anticommutator(g, &h.adjoint(), rem),
                }
            }
        }
        r
    }

    fn insert(&mut self, key: (Generator, Generator), rule: Rule) {
        self.rules.insert(key, rule);
    }

    /// Declares `[g, h] = r` together with its adjoint `[h†, g†] = r†`.
    pub fn set_commutator(&mut self, g: &Generator, h: &Generator, r: OperatorExpr) {
        self.set_one_commutator(&h.adjoint(), &g.adjoint(), r.adjoint());
        self.set_one_commutator(g, h, r);
    }

    fn set_one_commutator(&mut self, g: &Generator, h: &Generator, r: OperatorExpr) {
        match g.cmp(h) {
            std::cmp::Ordering::Greater => self.insert((g.clone(), h.clone()), Rule { sign: 1, remainder: r }),
            std::cmp::Ordering::Less => self.insert((h.clone(), g.clone()), Rule { sign: 1, remainder: -r }),
            std::cmp::Ordering::Equal => {}
        }
    }

    /// Declares `{g, h} = r` together with its adjoint `{h†, g†} = r†`.
    pub fn set_anticommutator(&mut self, g: &Generator, h: &Generator, r: OperatorExpr) {
        self.set_one_anticommutator(&h.adjoint(), &g.adjoint(), r.adjoint());
        self.set_one_anticommutator(g, h, r);
    }

    fn set_one_anticommutator(&mut self, g: &Generator, h: &Generator, r: OperatorExpr) {
        match g.cmp(h) {
            std::cmp::Ordering::Greater => self.insert((g.clone(), h.clone()), Rule { sign: -1, remainder: r }),
            std::cmp::Ordering::Less => self.insert((h.clone(), g.clone()), Rule { sign: -1, remainder: r }),
            std::cmp::Ordering::Equal => {
                let half = r.scale_exact(&Qi2::rational(1, 2));
                self.insert((g.clone(), g.clone()), Rule { sign: -1, remainder: half })
            }
        }
    }

    /// Rule for an adjacent pair that needs rewriting, or `None` if `g h` is already in order.
    pub fn rule_for(&self, g: &Generator, h: &Generator) -> Option<Rule> {
        match g.cmp(h) {
            std::cmp::Ordering::Less => None,
            std::cmp::Ordering::Equal => {
                if !(g.is_fermionic() && h.is_fermionic()) {
                    return None;
                }
                Some(self.rules.get(&(g.clone(), h.clone())).cloned().unwrap_or(Rule {
                    sign: -1,
                    remainder: OperatorExpr::zero(),
                }))
            }
            std::cmp::Ordering::Greater => Some(self.rules.get(&(g.clone(), h.clone())).cloned().unwrap_or_else(|| {
                let sign = if g.is_fermionic() && h.is_fermionic() { -1 } else { 1 };
                Rule { sign, remainder: OperatorExpr::zero() }
            })),
        }
    }

    /// Whether `g` moves across `h` (in either order) with only a sign, returning that sign.
    pub fn exchange_sign(&self, g: &Generator, h: &Generator) -> Option<i8> {
        if g == h {
            return if g.is_fermionic() { None } else { Some(1) };
        }
        let rule = if g > h { self.rule_for(g, h) } else { self.rule_for(h, g) }?;
        rule.remainder.is_zero().then_some(rule.sign)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Generator, Generator), &Rule)> {
        self.rules.iter()
    }

    /// Generators mentioned by any rule or remainder.
    pub fn generators(&self) -> HashSet<Generator> {
        let mut out = HashSet::new();
        for ((g, h), r) in &self.rules {
            out.insert(g.clone());
            out.insert(h.clone());
            for (w, _) in r.remainder.terms() {
                out.extend(w.iter().cloned());
            }
        }
        out
    }

    /// Checks that the rule for `(g†, h†)` is the adjoint of the rule for `(h, g)`.
    pub fn check_adjoint_consistency(&self) -> Result<(), AlgebraError> {
        for ((g, h), r) in &self.rules {
            let (gd, hd) = (g.adjoint(), h.adjoint());
            let ok = if g == h {
                // g g = r  ⇒  g† g† = r†
                self.rule_for(&gd, &gd).is_some_and(|p| p.remainder == r.remainder.adjoint())
            } else if hd > gd {
                // g h = s h g + r  ⇒  h† g† = s g† h† + r†
                self.rule_for(&hd, &gd).is_some_and(|p| p.sign == r.sign && p.remainder == r.remainder.adjoint())
            } else {
                // equivalently g† h† = s h† g† − s r†
                let expect = r.remainder.adjoint().scale_exact(&Qi2::int(-(r.sign as i64)));
                self.rule_for(&gd, &hd).is_some_and(|p| p.sign == r.sign && p.remainder == expect)
            };
            if !ok {
                return Err(AlgebraError::InconsistentRule(format!("{g} {h}")));
            }
        }
        Ok(())
    }

    /// Verifies that every remainder has the ε-grade of its pair, so truncation commutes
    /// with normal ordering.
    pub fn check_grading(&self) -> Result<(), AlgebraError> {
        for ((g, h), r) in &self.rules {
            let grade = (g.eps + h.eps) as u32;
            for (w, _) in r.remainder.terms() {
                if super::expr::word_grade(w) != grade {
                    return Err(AlgebraError::GradingViolation(format!("{g} {h} -> {}", word_text(w))));
                }
            }
        }
        Ok(())
    }
}

fn first_rewrite(w: &Word, rules: &RewriteRules) -> Option<(usize, Rule)> {
    w.windows(2).enumerate().find_map(|(i, p)| rules.rule_for(&p[0], &p[1]).map(|r| (i, r)))
}

fn splice(w: &Word, i: usize, middle: &[Generator]) -> Word {
    let mut out = Vec::with_capacity(w.len() + middle.len());
    out.extend_from_slice(&w[..i]);
    out.extend_from_slice(middle);
    out.extend_from_slice(&w[i + 2..]);
    out
}

struct Orderer<'a> {
    rules: &'a RewriteRules,
    memo: HashMap<Word, OperatorExpr>,
    active: HashSet<Word>,
}

impl Orderer<'_> {
    fn word(&mut self, w: &Word, depth: usize) -> Result<OperatorExpr, AlgebraError> {
        if let Some(r) = self.memo.get(w) {
            return Ok(r.clone());
        }
        let Some((i, rule)) = first_rewrite(w, self.rules) else {
            return Ok(OperatorExpr::word(w.clone()));
        };
        if depth > MAX_DEPTH || !self.active.insert(w.clone()) {
            return Err(AlgebraError::NonTerminating(word_text(w)));
        }
        let mut out = OperatorExpr::zero();
        if w[i] != w[i + 1] {
            let swapped = splice(w, i, &[w[i + 1].clone(), w[i].clone()]);
            let nf = self.word(&swapped, depth + 1)?;
            out = out + nf.scale_exact(&Qi2::int(rule.sign as i64));
        }
        for (rw, c) in rule.remainder.terms() {
            let nf = self.word(&splice(w, i, rw), depth + 1)?;
            out = out + nf.scale(c);
        }
        self.active.remove(w);
        if self.memo.len() > MAX_WORDS {
            return Err(AlgebraError::TooLarge);
        }
        self.memo.insert(w.clone(), out.clone());
        Ok(out)
    }
}

fn lift<C: Coeff>(nf: &OperatorExpr, c: &C) -> Result<Expr<C>, AlgebraError> {
    let mut out = Expr::zero();
    for (w, s) in nf.terms() {
        let s = C::from_scalar(s).ok_or_else(|| AlgebraError::Unresolved(word_text(w)))?;
        out.add_term(w.clone(), s * c.clone());
    }
    Ok(out)
}

/// Rewrites `x` so that in every word all daggered generators precede undaggered ones
/// (and generators appear in the normal-form order), using leftmost rewriting.
pub fn normal_order<C: Coeff>(x: &Expr<C>, rules: &RewriteRules) -> Result<Expr<C>, AlgebraError> {
    let mut ord = Orderer { rules, memo: HashMap::new(), active: HashSet::new() };
    let mut out = Expr::zero();
    for (w, c) in x.terms() {
        let nf = ord.word(w, 0)?;
        out = out + lift(&nf, c)?;
    }
    Ok(out)
}

/// Normal ordering that rewrites a randomly chosen out-of-order pair at every step.
/// Used to check confluence of a rule set.
pub fn normal_order_random<C: Coeff, R: Rng>(
    x: &Expr<C>,
    rules: &RewriteRules,
    rng: &mut R,
) -> Result<Expr<C>, AlgebraError> {
    let mut out = Expr::zero();
    let mut stack: Vec<(Word, Scalar)> = Vec::new();
    let mut steps = 0usize;
    for (w, c) in x.terms() {
        stack.push((w.clone(), Scalar::one()));
        let mut acc = OperatorExpr::zero();
        while let Some((w, s)) = stack.pop() {
            steps += 1;
            if steps > MAX_WORDS {
                return Err(AlgebraError::TooLarge);
            }
            let spots: Vec<(usize, Rule)> =
                w.windows(2).enumerate().filter_map(|(i, p)| rules.rule_for(&p[0], &p[1]).map(|r| (i, r))).collect();
            if spots.is_empty() {
                acc.add_term(w, s);
                continue;
            }
            let (i, rule) = spots[rng.gen_range(0..spots.len())].clone();
            if w[i] != w[i + 1] {
                let swapped = splice(&w, i, &[w[i + 1].clone(), w[i].clone()]);
                stack.push((swapped, s.clone() * Scalar::int(rule.sign as i64)));
            }
            for (rw, rc) in rule.remainder.terms() {
                stack.push((splice(&w, i, rw), s.clone() * rc.clone()));
            }
        }
        out = out + lift(&acc, c)?;
    }
    Ok(out)
}

/// True when every word of `x` is in normal form.
pub fn is_normal<C: Coeff>(x: &Expr<C>, rules: &RewriteRules) -> bool {
    x.terms().all(|(w, _)| first_rewrite(w, rules).is_none())
}
