//! Polynomial local learning rules.
//!
//! A rule is a sum of monomials in the local variables of a synapse: the
//! target `T`, the postsynaptic factor `P`, the presynaptic activity `O_pre`
//! and the weight `w`. The postsynaptic factor is interpreted through
//! [`PostMode`] as the unit output `O`, the clamped target `T`, or the error
//! `T - O`.
//!
//! Rules are stratified by their overall degree `n` and their effective
//! degree `d` in the weight, where every factor that contains the unit
//! output counts as one hidden occurrence of the weight.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEGREE: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostMode {
    Output,
    Target,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RangeConvention {
    #[serde(rename = "[0,1]")]
    ZeroOne,
    #[serde(rename = "[-1,1]")]
    MinusOneOne,
}

impl RangeConvention {
    pub fn other(self) -> Self {
        match self {
            RangeConvention::ZeroOne => RangeConvention::MinusOneOne,
            RangeConvention::MinusOneOne => RangeConvention::ZeroOne,
        }
    }
}

/// One monomial `coefficient * T^nT * P^nPost * O_pre^nPre * w^nW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTerm {
    #[serde(rename = "coeff")]
    pub coefficient: f64,
    #[serde(rename = "nT", default)]
    pub exp_target: u32,
    #[serde(rename = "nPost", default)]
    pub exp_post: u32,
    #[serde(rename = "nPre", default)]
    pub exp_pre: u32,
    #[serde(rename = "nW", default)]
    pub exp_weight: u32,
    #[serde(rename = "postMode", default = "default_post_mode")]
    pub post_mode: PostMode,
}

fn default_post_mode() -> PostMode {
    PostMode::Output
}

/// Exponent signature of a monomial once clamped-target factors have been
/// folded into the target exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct MonomialKey {
    exp_target: u32,
    post_mode: PostMode,
    exp_post: u32,
    exp_pre: u32,
    exp_weight: u32,
}

impl RuleTerm {
    pub fn new(coefficient: f64, post_mode: PostMode, exp_post: u32, exp_pre: u32, exp_weight: u32) -> Self {
        RuleTerm {
            coefficient,
            exp_target: 0,
            exp_post,
            exp_pre,
            exp_weight,
            post_mode,
        }
    }

    pub fn with_target(mut self, exp_target: u32) -> Self {
        self.exp_target = exp_target;
        self
    }

    /// Polynomial degree in the local variables.
    pub fn degree(&self) -> u32 {
        self.exp_target + self.exp_post + self.exp_pre + self.exp_weight
    }

    /// Degree in the weight, counting each output-bearing postsynaptic factor once.
    pub fn effective_degree(&self) -> u32 {
        let hidden = match self.post_mode {
            PostMode::Target => 0,
            PostMode::Output | PostMode::Error => self.exp_post,
        };
        self.exp_weight + hidden
    }

    pub fn uses_target(&self) -> bool {
        self.exp_target > 0 || (self.exp_post > 0 && self.post_mode != PostMode::Output)
    }

    fn key(&self) -> MonomialKey {
        let (exp_target, post_mode, exp_post) = match self.post_mode {
            PostMode::Target => (self.exp_target + self.exp_post, PostMode::Output, 0),
            _ if self.exp_post == 0 => (self.exp_target, PostMode::Output, 0),
            mode => (self.exp_target, mode, self.exp_post),
        };
        MonomialKey {
            exp_target,
            post_mode,
            exp_post,
            exp_pre: self.exp_pre,
            exp_weight: self.exp_weight,
        }
    }

    fn from_key(key: MonomialKey, coefficient: f64) -> Self {
        RuleTerm {
            coefficient,
            exp_target: key.exp_target,
            exp_post: key.exp_post,
            exp_pre: key.exp_pre,
            exp_weight: key.exp_weight,
            post_mode: key.post_mode,
        }
    }

    /// Monomial value without the learning rate.
    pub fn evaluate(&self, o_post: f64, o_pre: f64, w: f64, target: Option<f64>) -> Result<f64> {
        let needs_target = self.uses_target();
        let t = match (needs_target, target) {
            (true, None) => return Err(Error::MissingTarget),
            (_, t) => t.unwrap_or(0.0),
        };
        let post = match self.post_mode {
            PostMode::Output => o_post,
            PostMode::Target => t,
            PostMode::Error => t - o_post,
        };
        Ok(self.coefficient
            * powu(t, self.exp_target)
            * powu(post, self.exp_post)
            * powu(o_pre, self.exp_pre)
            * powu(w, self.exp_weight))
    }
}

fn powu(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degrees {
    pub n: u32,
    pub d: u32,
}

/// A named polynomial local learning rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearningRule {
    pub name: String,
    pub terms: Vec<RuleTerm>,
    #[serde(default = "default_range")]
    pub range_convention: RangeConvention,
}

fn default_range() -> RangeConvention {
    RangeConvention::MinusOneOne
}

impl PartialEq for LearningRule {
    fn eq(&self, other: &Self) -> bool {
        self.range_convention == other.range_convention && self.normalized_terms() == other.normalized_terms()
    }
}

impl LearningRule {
    pub fn new(name: impl Into<String>, terms: Vec<RuleTerm>) -> Result<Self> {
        Self::with_max_degree(name, terms, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(name: impl Into<String>, terms: Vec<RuleTerm>, max_degree: u32) -> Result<Self> {
        let rule = LearningRule {
            name: name.into(),
            terms,
            range_convention: RangeConvention::MinusOneOne,
        };
        rule.validate(max_degree)?;
        Ok(rule)
    }

    pub fn validate(&self, max_degree: u32) -> Result<()> {
        for term in &self.terms {
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite coefficient in rule {}", self.name)));
            }
            for e in [term.exp_target, term.exp_post, term.exp_pre, term.exp_weight] {
                if e > max_degree {
                    return Err(Error::AboveCap {
                        what: format!("exponent {e} in rule {}", self.name),
                        cap: max_degree as usize,
                    });
                }
            }
            if term.degree() > max_degree {
                return Err(Error::AboveCap {
                    what: format!("term degree {} in rule {}", term.degree(), self.name),
                    cap: max_degree as usize,
                });
            }
        }
        Ok(())
    }

    pub fn with_range(mut self, range: RangeConvention) -> Self {
        self.range_convention = range;
        self
    }

    /// Terms sorted by monomial signature with like monomials merged and
    /// vanishing coefficients dropped.
    pub fn normalized_terms(&self) -> Vec<RuleTerm> {
        let mut keyed: Vec<(MonomialKey, f64)> = self.terms.iter().map(|t| (t.key(), t.coefficient)).collect();
        keyed.sort_by_key(|a| a.0);
        let mut merged: Vec<(MonomialKey, f64)> = Vec::with_capacity(keyed.len());
        for (key, c) in keyed {
            match merged.last_mut() {
                Some((k, acc)) if *k == key => *acc += c,
                _ => merged.push((key, c)),
            }
        }
        merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(k, c)| RuleTerm::from_key(k, c))
            .collect()
    }

    pub fn normalized(&self) -> Self {
        LearningRule {
            name: self.name.clone(),
            terms: self.normalized_terms(),
            range_convention: self.range_convention,
        }
    }

    pub fn is_supervised(&self) -> bool {
        self.normalized_terms().iter().any(RuleTerm::uses_target)
    }

    pub fn degrees(&self) -> Result<Degrees> {
        classify_degrees(self)
    }

    pub fn evaluate(&self, o_post: f64, o_pre: f64, w: f64, target: Option<f64>, eta: f64) -> Result<f64> {
        evaluate_update(self, o_post, o_pre, w, target, eta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rule: LearningRule = serde_json::from_str(text)?;
        rule.validate(DEFAULT_MAX_DEGREE)?;
        Ok(rule)
    }
}

impl fmt::Display for LearningRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.normalized_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, term) in terms.iter().enumerate() {
            let c = term.coefficient;
            if idx == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            let push = |factors: &mut Vec<String>, name: &str, e: u32| match e {
                0 => {}
                1 => factors.push(name.to_string()),
                e => factors.push(format!("{name}^{e}")),
            };
            push(&mut factors, "T", term.exp_target);
            let post = match term.post_mode {
                PostMode::Output => "O",
                PostMode::Target => "T",
                PostMode::Error => "(T-O)",
            };
            push(&mut factors, post, term.exp_post);
            push(&mut factors, "I", term.exp_pre);
            push(&mut factors, "w", term.exp_weight);
            let mag = c.abs();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag != 1.0 {
                write!(f, "{mag}*{}", factors.join("*"))?;
            } else {
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Overall degree `n` and effective weight degree `d` of a rule.
pub fn classify_degrees(rule: &LearningRule) -> Result<Degrees> {
    let terms = rule.normalized_terms();
    if terms.is_empty() {
        return Err(Error::DegenerateRule);
    }
    let n = terms.iter().map(RuleTerm::degree).max().unwrap_or(0);
    let d = terms.iter().map(RuleTerm::effective_degree).max().unwrap_or(0);
    Ok(Degrees { n, d })
}

/// `eta * F(T, O_post, O_pre, w)`.
pub fn evaluate_update(
    rule: &LearningRule,
    o_post: f64,
    o_pre: f64,
    w: f64,
    target: Option<f64>,
    eta: f64,
) -> Result<f64> {
    let mut sum = 0.0;
    for term in &rule.terms {
        sum += term.evaluate(o_post, o_pre, w, target)?;
    }
    Ok(eta * sum)
}

/// Coefficients of the quadratic family `alpha*Oi*Oj + beta*Oi + gamma*Oj + delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl QuadraticCoefficients {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        QuadraticCoefficients { alpha, beta, gamma, delta }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        QuadraticCoefficients::new(a[0], a[1], a[2], a[3])
    }
}

/// Matrix of the homogeneous map taking `[0,1]` coefficients to `[-1,1]`
/// coefficients, acting on `(alpha, beta, gamma, delta)`.
pub const FORWARD_RANGE_MATRIX: [[f64; 4]; 4] = [
    [4.0, 0.0, 0.0, 0.0],
    [-2.0, 2.0, 0.0, 0.0],
    [-2.0, 0.0, 2.0, 0.0],
    [1.0, -1.0, -1.0, 1.0],
];

/// Inverse of [`FORWARD_RANGE_MATRIX`].
pub const INVERSE_RANGE_MATRIX: [[f64; 4]; 4] = [
    [0.25, 0.0, 0.0, 0.0],
    [0.25, 0.5, 0.0, 0.0],
    [0.25, 0.0, 0.5, 0.0],
    [0.25, 0.5, 0.5, 1.0],
];

fn apply4(m: &[[f64; 4]; 4], v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (row, o) in m.iter().zip(out.iter_mut()) {
        *o = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    }
    out
}

/// Re-express a quadratic rule written in the `from` convention in the other one.
pub fn range_transform(coeffs: QuadraticCoefficients, from: RangeConvention) -> QuadraticCoefficients {
    let m = match from {
        RangeConvention::ZeroOne => &FORWARD_RANGE_MATRIX,
        RangeConvention::MinusOneOne => &INVERSE_RANGE_MATRIX,
    };
    QuadraticCoefficients::from_array(apply4(m, coeffs.as_array()))
}

/// Basis of the coefficient vectors left unchanged by the `[0,1] -> [-1,1]` map.
///
/// The map is triangular with diagonal `(4, 2, 2, 1)`, so the fixed space is
/// spanned by the constant rule alone: every fixed point has a vanishing
/// quadratic and linear part.
pub fn range_fixed_points() -> Vec<QuadraticCoefficients> {
    // Solve (M - I) c = 0 by back substitution on the lower-triangular system.
    let mut basis = Vec::new();
    let diag: Vec<f64> = (0..4).map(|i| FORWARD_RANGE_MATRIX[i][i] - 1.0).collect();
    for free in 0..4 {
        if diag[free].abs() > 1e-12 {
            continue;
        }
        let mut c = [0.0; 4];
        c[free] = 1.0;
        for i in (free + 1)..4 {
            let s: f64 = (0..i).map(|j| FORWARD_RANGE_MATRIX[i][j] * c[j]).sum();
            if diag[i].abs() > 1e-12 {
                c[i] = -s / diag[i];
            }
        }
        basis.push(QuadraticCoefficients::from_array(c));
    }
    basis
}

// Catalog constructors.

fn t(c: f64, mode: PostMode, post: u32, pre: u32, w: u32) -> RuleTerm {
    RuleTerm::new(c, mode, post, pre, w)
}

fn rule(name: &str, terms: Vec<RuleTerm>) -> LearningRule {
    LearningRule {
        name: name.to_string(),
        terms,
        range_convention: RangeConvention::MinusOneOne,
    }
}

use PostMode::{Error as Err_, Output as Out, Target as Tgt};

pub fn simple_hebb() -> LearningRule {
    rule("simple_hebb", vec![t(1.0, Out, 1, 1, 0)])
}

pub fn anti_hebb() -> LearningRule {
    rule("anti_hebb", vec![t(-1.0, Out, 1, 1, 0)])
}

pub fn clamped_hebb() -> LearningRule {
    rule("clamped_hebb", vec![t(1.0, Tgt, 1, 1, 0)])
}

pub fn oja() -> LearningRule {
    rule("oja", vec![t(1.0, Out, 1, 1, 0), t(-1.0, Out, 2, 0, 1)])
}

pub fn perceptron() -> LearningRule {
    rule("perceptron", vec![t(1.0, Err_, 1, 1, 0)])
}

pub fn delta() -> LearningRule {
    rule("delta", vec![t(1.0, Err_, 1, 1, 0)])
}

pub fn gradient() -> LearningRule {
    rule("gradient", vec![t(1.0, Err_, 1, 1, 0)])
}

/// Saturating presynaptic rule `(1 - w^2) I`, whose expectation is a Riccati equation.
pub fn riccati() -> LearningRule {
    rule("riccati", vec![t(1.0, Out, 0, 1, 0), t(-1.0, Out, 0, 1, 2)])
}

fn bounded_with(name: &str, mode: PostMode, c: f64) -> LearningRule {
    rule(name, vec![t(c, mode, 1, 1, 0), t(-1.0, mode, 1, 1, 2)])
}

/// `(C - w^2) O_i O_j`; with `C = 1` this is the tanh-derived new rule.
pub fn bounded_hebb(c: f64) -> LearningRule {
    bounded_with(&named("bounded_hebb", c, 1.0), Out, c)
}

pub fn bounded_clamped(c: f64) -> LearningRule {
    bounded_with(&named("bounded_clamped", c, 1.0), Tgt, c)
}

pub fn bounded_gradient(c: f64) -> LearningRule {
    bounded_with(&named("bounded_gradient", c, 1.0), Err_, c)
}

fn named(base: &str, c: f64, default: f64) -> String {
    if c == default {
        base.to_string()
    } else {
        format!("{base}({c})")
    }
}

pub fn fixed_decay(c: f64) -> LearningRule {
    rule(&format!("fixed_decay({c})"), vec![t(1.0, Out, 1, 1, 0), t(-c, Out, 0, 0, 1)])
}

pub fn fixed_decay_clamped(c: f64) -> LearningRule {
    rule(&format!("fixed_decay_clamped({c})"), vec![t(1.0, Tgt, 1, 1, 0), t(-c, Out, 0, 0, 1)])
}

pub fn fixed_decay_gradient(c: f64) -> LearningRule {
    rule(&format!("fixed_decay_gradient({c})"), vec![t(1.0, Err_, 1, 1, 0), t(-c, Out, 0, 0, 1)])
}

pub fn presynaptic_decay() -> LearningRule {
    rule("presynaptic_decay", vec![t(1.0, Out, 1, 1, 0), t(-1.0, Out, 0, 2, 1)])
}

pub fn presynaptic_decay_clamped() -> LearningRule {
    rule("presynaptic_decay_clamped", vec![t(1.0, Tgt, 1, 1, 0), t(-1.0, Out, 0, 2, 1)])
}

pub fn presynaptic_decay_gradient() -> LearningRule {
    rule("presynaptic_decay_gradient", vec![t(1.0, Err_, 1, 1, 0), t(-1.0, Out, 0, 2, 1)])
}

/// `T O_j - O_i^2 w`.
pub fn oja_clamped_output_decay() -> LearningRule {
    rule("oja_clamped_output_decay", vec![t(1.0, Tgt, 1, 1, 0), t(-1.0, Out, 2, 0, 1)])
}

/// `T O_j - T^2 w`.
pub fn oja_clamped() -> LearningRule {
    rule("oja_clamped", vec![t(1.0, Tgt, 1, 1, 0), t(-1.0, Tgt, 2, 0, 1)])
}

/// `(T - O) O_j - O_i^2 w`.
pub fn oja_gradient_output_decay() -> LearningRule {
    rule("oja_gradient_output_decay", vec![t(1.0, Err_, 1, 1, 0), t(-1.0, Out, 2, 0, 1)])
}

/// `(T - O) O_j - (T - O)^2 w`.
pub fn oja_gradient() -> LearningRule {
    rule("oja_gradient", vec![t(1.0, Err_, 1, 1, 0), t(-1.0, Err_, 2, 0, 1)])
}

pub fn hebb_squared_decay() -> LearningRule {
    rule("hebb_squared_decay", vec![t(1.0, Out, 1, 1, 0), t(-1.0, Out, 2, 2, 1)])
}

/// `T O_j - (O_i O_j)^2 w`.
pub fn hebb_squared_decay_clamped_output() -> LearningRule {
    rule(
        "hebb_squared_decay_clamped_output",
        vec![t(1.0, Tgt, 1, 1, 0), t(-1.0, Out, 2, 2, 1)],
    )
}

/// `T O_j - (T O_j)^2 w`.
pub fn hebb_squared_decay_clamped() -> LearningRule {
    rule("hebb_squared_decay_clamped", vec![t(1.0, Tgt, 1, 1, 0), t(-1.0, Tgt, 2, 2, 1)])
}

/// `(T - O) O_j - (O_i O_j)^2 w`.
pub fn hebb_squared_decay_gradient_output() -> LearningRule {
    rule(
        "hebb_squared_decay_gradient_output",
        vec![t(1.0, Err_, 1, 1, 0), t(-1.0, Out, 2, 2, 1)],
    )
}

/// `(T - O) O_j - ((T - O) O_j)^2 w`.
pub fn hebb_squared_decay_gradient() -> LearningRule {
    rule("hebb_squared_decay_gradient", vec![t(1.0, Err_, 1, 1, 0), t(-1.0, Err_, 2, 2, 1)])
}

/// Every named rule with its default constants (`C = 1` for the decay and
/// bounded families).
pub fn catalog() -> Vec<LearningRule> {
    vec![
        simple_hebb(),
        anti_hebb(),
        clamped_hebb(),
        oja(),
        perceptron(),
        delta(),
        gradient(),
        riccati(),
        bounded_hebb(1.0),
        bounded_clamped(1.0),
        bounded_gradient(1.0),
        fixed_decay(1.0),
        fixed_decay_clamped(1.0),
        fixed_decay_gradient(1.0),
        presynaptic_decay(),
        presynaptic_decay_clamped(),
        presynaptic_decay_gradient(),
        oja_clamped_output_decay(),
        oja_clamped(),
        oja_gradient_output_decay(),
        oja_gradient(),
        hebb_squared_decay(),
        hebb_squared_decay_clamped_output(),
        hebb_squared_decay_clamped(),
        hebb_squared_decay_gradient_output(),
        hebb_squared_decay_gradient(),
    ]
}

/// Look a rule up by name. Parameterised families accept `name(C)`, e.g.
/// `fixed_decay(0.5)` or `bounded_hebb(2)`; `new` is an alias for `bounded_hebb`.
pub fn lookup(spec: &str) -> Result<LearningRule> {
    let spec = spec.trim();
    let (base, param) = match spec.find('(') {
        Some(open) if spec.ends_with(')') => {
            let value: f64 = spec[open + 1..spec.len() - 1]
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad rule parameter in {spec}")))?;
            (&spec[..open], Some(value))
        }
        _ => (spec, None),
    };
    let c = param.unwrap_or(1.0);
    let rule = match base {
        "fixed_decay" => fixed_decay(c),
        "fixed_decay_clamped" => fixed_decay_clamped(c),
        "fixed_decay_gradient" => fixed_decay_gradient(c),
        "bounded_hebb" | "new" => bounded_hebb(c),
        "bounded_clamped" | "new_clamped" => bounded_clamped(c),
        "bounded_gradient" | "new_gradient" => bounded_gradient(c),
        _ if param.is_some() => {
            return Err(Error::InvalidArgument(format!("rule {base} takes no parameter")));
        }
        "hebb" => simple_hebb(),
        name => catalog()
            .into_iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule {name}")))?,
    };
    Ok(rule)
}

/// Supervised counterpart used when a rule must train an output unit: the
/// clamped form of an unsupervised rule, or the rule itself if it already
/// uses the target.
pub fn supervised_variant(rule: &LearningRule) -> LearningRule {
    if rule.is_supervised() {
        return rule.clone();
    }
    let terms = rule
        .terms
        .iter()
        .map(|term| {
            let mut term = *term;
            if term.post_mode == PostMode::Output && term.exp_post > 0 {
                term.post_mode = PostMode::Target;
            }
            term
        })
        .collect();
    LearningRule {
        name: format!("{}_clamped", rule.name),
        terms,
        range_convention: rule.range_convention,
    }
}
