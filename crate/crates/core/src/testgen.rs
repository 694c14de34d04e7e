//! Seeded generators and brute-force oracles for tests and fuzzing.
//!
//! Every generator is a pure function of its [`GenConfig`]. Programs are
//! generated type-directed at two kinds, `int` and `int -> int`, so whatever
//! comes out is well typed and, having no recursion, terminates.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::history::{ActionName, Alphabet, HistExpr, Word};
use crate::syntax::{CmpOp, Context, Expr, Language, PrimOp, Program, SYSCALL_PRINT};

/// Longest trace [`enumerate_traces`] will produce.
pub const MAX_ENUMERATION_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    /// Bound on [`Expr::depth`] or [`HistExpr::depth`]; at least 1.
    pub max_depth: usize,
    /// Actions available to [`gen_hist`].
    pub alphabet: Alphabet,
    /// Whether generated contexts may bind `sc_print` to something that sends.
    pub allow_send_in_context: bool,
}

impl GenConfig {
    pub fn new(seed: u64) -> Self {
        GenConfig {
            seed,
            max_depth: 4,
            alphabet: Alphabet::observable(),
            allow_send_in_context: true,
        }
    }

    pub fn with_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn depth(&self) -> usize {
        self.max_depth.max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Fun,
}

struct ExprGen<'r> {
    rng: &'r mut ChaCha8Rng,
    lang: Language,
    scope: Vec<(String, Kind)>,
    next_name: usize,
    prefix: &'static str,
    sends: bool,
}

impl ExprGen<'_> {
    fn fresh(&mut self) -> String {
        let name = format!("{}{}", self.prefix, self.next_name);
        self.next_name += 1;
        name
    }

    fn vars(&self, kind: Kind) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.scope
            .iter()
            .rev()
            .filter(|(x, _)| seen.insert(x.as_str()))
            .filter(|(_, k)| *k == kind)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn pick(&mut self, items: &[String]) -> String {
        items[self.rng.random_range(0..items.len())].clone()
    }

    fn leaf_int(&mut self) -> Expr {
        let vars = self.vars(Kind::Int);
        if !vars.is_empty() && self.rng.random_bool(0.5) {
            let x = self.pick(&vars);
            return Expr::Var(x);
        }
        Expr::Int(self.rng.random_range(-3..=3))
    }

    fn observable(&mut self) -> PrimOp {
        match self.lang {
            Language::Source => PrimOp::Print,
            Language::Target if !self.sends || self.rng.random_bool(0.7) => PrimOp::Display,
            Language::Target => PrimOp::Send,
        }
    }

    fn scoped<T>(&mut self, name: &str, kind: Kind, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name.into(), kind));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn int(&mut self, depth: usize) -> Expr {
        if depth <= 1 || self.rng.random_bool(0.15) {
            return self.leaf_int();
        }
        let d = depth - 1;
        let can_call = d >= 2 || !self.vars(Kind::Fun).is_empty();
        match self.rng.random_range(0..7) {
            0 | 1 => {
                let op = self.observable();
                Expr::prim(op, self.int(d))
            }
            2 if can_call => {
                let f = self.fun(d);
                Expr::app(f, self.int(d))
            }
            3 => Expr::seq(self.int(d), self.int(d)),
            4 => {
                let op = [CmpOp::Ge, CmpOp::Le, CmpOp::Eq, CmpOp::Lt, CmpOp::Gt][self.rng.random_range(0..5)];
                let (lhs, rhs) = (self.int(d), self.int(d));
                let (then, otherwise) = (self.int(d), self.int(d));
                Expr::if_then_else(op, lhs, rhs, then, otherwise)
            }
            5 => {
                let x = self.fresh();
                let bound = self.int(d);
                let body = self.scoped(&x, Kind::Int, |g| g.int(d));
                Expr::let_in(&x, bound, body)
            }
            6 if d >= 2 => {
                let f = self.fresh();
                let bound = self.fun(d);
                let body = self.scoped(&f, Kind::Fun, |g| g.int(d));
                Expr::let_in(&f, bound, body)
            }
            _ => self.leaf_int(),
        }
    }

    /// Needs `depth >= 2` unless a function variable is in scope.
    fn fun(&mut self, depth: usize) -> Expr {
        let vars = self.vars(Kind::Fun);
        if !vars.is_empty() && (depth <= 1 || self.rng.random_bool(0.25)) {
            let f = self.pick(&vars);
            return Expr::Var(f);
        }
        let d = depth - 1;
        if d >= 2 && self.rng.random_bool(0.15) {
            return Expr::seq(self.int(d), self.fun(d));
        }
        let x = self.fresh();
        let body = self.scoped(&x, Kind::Int, |g| g.int(d));
        Expr::lam(&x, body)
    }
}

/// A closed, well-typed program of depth at most `cfg.max_depth`.
pub fn gen_program(cfg: &GenConfig, lang: Language) -> Expr {
    let mut rng = cfg.rng();
    gen_program_with(&mut rng, cfg.depth(), lang, Kind::Int, true)
}

fn gen_program_with(rng: &mut ChaCha8Rng, depth: usize, lang: Language, kind: Kind, either: bool) -> Expr {
    let mut g = ExprGen {
        rng,
        lang,
        scope: Vec::new(),
        next_name: 0,
        prefix: "x",
        sends: true,
    };
    let kind = if either && depth >= 2 && g.rng.random_bool(0.5) {
        Kind::Fun
    } else {
        kind
    };
    match kind {
        Kind::Fun => g.fun(depth.max(2)),
        Kind::Int => g.int(depth),
    }
}

/// A target context of the shape
/// `let sc_print = fun y -> ... in [.] n`, or with a computation before the
/// call. The hole expects an `int -> int` program.
pub fn gen_context(cfg: &GenConfig) -> Context {
    let mut rng = cfg.rng();
    // Keep the context stream apart from the program stream of the same seed.
    let _: u64 = rng.random();
    gen_context_with(&mut rng, cfg)
}

fn gen_context_with(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Context {
    let depth = cfg.depth();
    let mut g = ExprGen {
        rng,
        lang: Language::Target,
        scope: Vec::new(),
        next_name: 0,
        prefix: "y",
        sends: cfg.allow_send_in_context,
    };
    let param = g.fresh();
    let handler_body = g.scoped(&param, Kind::Int, |g| {
        let payload = g.int(depth.saturating_sub(2).max(1));
        let mut body = Expr::prim(PrimOp::Display, payload);
        if cfg.allow_send_in_context && g.rng.random_bool(0.4) {
            body = Expr::seq(body, Expr::prim(PrimOp::Send, Expr::var(&param)));
        }
        if g.rng.random_bool(0.3) {
            body = Expr::seq(body, Expr::var(&param));
        }
        body
    });
    let arg = g.int(2);
    let mut use_site = Expr::app(Expr::Hole, arg);
    if g.rng.random_bool(0.3) {
        use_site = Expr::seq(Expr::prim(PrimOp::Display, Expr::Int(0)), use_site);
    }
    let body = Expr::let_in(SYSCALL_PRINT, Expr::lam(&param, handler_body), use_site);
    Context::new(Language::Target, body).expect("generated contexts are closed with one hole")
}

/// A source function and a target context accepting it, from one seed.
pub fn gen_plugged(cfg: &GenConfig) -> (Program, Context) {
    let mut rng = cfg.rng();
    let body = gen_program_with(&mut rng, cfg.depth().max(2), Language::Source, Kind::Fun, false);
    let program = Program::new(Language::Source, body).expect("generated programs are closed");
    let context = gen_context_with(&mut rng, cfg);
    (program, context)
}

/// A history expression over `cfg.alphabet` of depth at most `cfg.max_depth`.
pub fn gen_hist(cfg: &GenConfig) -> HistExpr {
    let mut rng = cfg.rng();
    gen_hist_with(&mut rng, cfg)
}

pub(crate) fn gen_hist_with(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> HistExpr {
    let actions: Vec<ActionName> = cfg.alphabet.iter().cloned().collect();
    hist(rng, &actions, cfg.depth())
}

fn hist(rng: &mut ChaCha8Rng, actions: &[ActionName], depth: usize) -> HistExpr {
    let leaf = |rng: &mut ChaCha8Rng| {
        if actions.is_empty() || rng.random_bool(0.15) {
            HistExpr::Eps
        } else {
            HistExpr::Act(actions[rng.random_range(0..actions.len())].clone())
        }
    };
    if depth <= 1 || rng.random_bool(0.2) {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 | 1 => HistExpr::seq(hist(rng, actions, d), hist(rng, actions, d)),
        2 | 3 => HistExpr::choice(hist(rng, actions, d), hist(rng, actions, d)),
        _ => HistExpr::star(hist(rng, actions, d)),
    }
}

/// A stream of independent configurations derived from one seed.
pub fn configs(base: &GenConfig, n: usize) -> impl Iterator<Item = GenConfig> + '_ {
    let mut rng = base.rng();
    (0..n).map(move |_| GenConfig {
        seed: rng.random(),
        ..base.clone()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace length bound {0} exceeds {MAX_ENUMERATION_LEN}")]
pub struct GuardrailExceeded(pub usize);

/// Every trace of `h` with at most `max_len` actions, by direct recursion on
/// the expression.
pub fn enumerate_traces(h: &HistExpr, max_len: usize) -> Result<BTreeSet<Word>, GuardrailExceeded> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(GuardrailExceeded(max_len));
    }
    Ok(traces(h, max_len))
}

fn traces(h: &HistExpr, max_len: usize) -> BTreeSet<Word> {
    match h {
        HistExpr::Eps => BTreeSet::from([Word::new()]),
        HistExpr::Act(a) if max_len >= 1 => BTreeSet::from([Word::from([a.clone()])]),
        HistExpr::Act(_) => BTreeSet::new(),
        HistExpr::Choice(a, b) => {
            let mut out = traces(a, max_len);
            out.extend(traces(b, max_len));
            out
        }
        HistExpr::Seq(a, b) => concat(&traces(a, max_len), &traces(b, max_len), max_len),
        HistExpr::Star(body) => {
            let step = traces(body, max_len);
            let mut out = BTreeSet::from([Word::new()]);
            loop {
                let next = concat(&out, &step, max_len);
                let before = out.len();
                out.extend(next);
                if out.len() == before {
                    return out;
                }
            }
        }
    }
}

fn concat(left: &BTreeSet<Word>, right: &BTreeSet<Word>, max_len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for u in left {
        for v in right {
            if u.len() + v.len() <= max_len {
                let mut w = u.clone();
                w.extend(v.iter().cloned());
                out.insert(w);
            }
        }
    }
    out
}

/// Every word over `alphabet` with at most `max_len` actions.
pub fn all_words(alphabet: &Alphabet, max_len: usize) -> Result<Vec<Word>, GuardrailExceeded> {
    if max_len > MAX_ENUMERATION_LEN {
        return Err(GuardrailExceeded(max_len));
    }
    let mut out = vec![Word::new()];
    let mut frontier = vec![Word::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for a in alphabet.iter() {
                let mut longer = w.clone();
                longer.push(a.clone());
                next.push(longer);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// Prefix-closure of a finite set of words.
pub fn prefixes_of(words: &BTreeSet<Word>) -> BTreeSet<Word> {
    words
        .iter()
        .flat_map(|w| (0..=w.len()).map(move |n| w[..n].to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{infer, TypeEnv};
    use crate::syntax::plug;

    fn w(actions: &[&str]) -> Word {
        actions.iter().map(|a| ActionName::new(*a)).collect()
    }

    #[test]
    fn depth_one_programs_are_literals() {
        for seed in 0..50 {
            let cfg = GenConfig::new(seed).with_depth(1);
            let e = gen_program(&cfg, Language::Source);
            assert!(matches!(e, Expr::Int(_)), "{e}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::new(99).with_depth(5);
        assert_eq!(gen_program(&cfg, Language::Target), gen_program(&cfg, Language::Target));
        assert_eq!(gen_context(&cfg), gen_context(&cfg));
        assert_eq!(gen_hist(&cfg), gen_hist(&cfg));
        assert_eq!(gen_plugged(&cfg), gen_plugged(&cfg));
    }

    #[test]
    fn seed_seven_depth_four_is_well_typed() {
        let e = gen_program(&GenConfig::new(7).with_depth(4), Language::Source);
        assert!(infer(&e, &TypeEnv::new()).is_ok(), "{e}");
    }

    #[test]
    fn generated_programs_respect_depth_and_type() {
        for seed in 0..300 {
            for lang in [Language::Source, Language::Target] {
                let cfg = GenConfig::new(seed).with_depth(1 + (seed as usize % 6));
                let e = gen_program(&cfg, lang);
                assert!(e.depth() <= cfg.max_depth, "{e}");
                assert!(Program::new(lang, e.clone()).is_ok(), "{e}");
                assert!(infer(&e, &TypeEnv::new()).is_ok(), "{e}");
            }
        }
    }

    #[test]
    fn generated_plugs_are_well_typed() {
        for seed in 0..200 {
            let (p, c) = gen_plugged(&GenConfig::new(seed));
            let t = crate::compiler::translate(&p).unwrap();
            let plugged = plug(&c, &t).unwrap();
            assert!(infer(plugged.body(), &TypeEnv::new()).is_ok(), "{plugged}");
        }
    }

    #[test]
    fn contexts_without_send() {
        for seed in 0..100 {
            let cfg = GenConfig {
                allow_send_in_context: false,
                ..GenConfig::new(seed)
            };
            let mut sends = false;
            gen_context(&cfg)
                .body()
                .visit(&mut |e| sends |= matches!(e, Expr::Prim(PrimOp::Send, _)));
            assert!(!sends);
        }
    }

    #[test]
    fn hist_depth_and_alphabet() {
        let cfg = GenConfig {
            alphabet: Alphabet::new(["a", "b", "c"]),
            ..GenConfig::new(0)
        };
        for c in configs(&cfg, 200) {
            let h = gen_hist(&c);
            assert!(h.depth() <= 4);
            assert!(cfg.alphabet.is_superset(&h.actions()));
        }
    }

    #[test]
    fn enumerates_the_evil_history() {
        let h: HistExpr = "(display . send) + eps".parse().unwrap();
        assert_eq!(
            enumerate_traces(&h, 2).unwrap(),
            BTreeSet::from([w(&[]), w(&["display", "send"])])
        );
        assert_eq!(enumerate_traces(&h, 1).unwrap(), BTreeSet::from([w(&[])]));
    }

    #[test]
    fn enumerates_eps_and_star() {
        for n in 0..=MAX_ENUMERATION_LEN {
            assert_eq!(enumerate_traces(&HistExpr::Eps, n).unwrap(), BTreeSet::from([w(&[])]));
        }
        let h = HistExpr::star(HistExpr::act("display"));
        assert_eq!(
            enumerate_traces(&h, 3).unwrap(),
            BTreeSet::from([
                w(&[]),
                w(&["display"]),
                w(&["display", "display"]),
                w(&["display", "display", "display"])
            ])
        );
        let nested = HistExpr::star(HistExpr::star(HistExpr::Eps));
        assert_eq!(enumerate_traces(&nested, 4).unwrap(), BTreeSet::from([w(&[])]));
    }

    #[test]
    fn guardrail() {
        assert_eq!(enumerate_traces(&HistExpr::Eps, 9), Err(GuardrailExceeded(9)));
        assert!(all_words(&Alphabet::observable(), 9).is_err());
    }

    #[test]
    fn word_enumeration_counts() {
        let words = all_words(&Alphabet::new(["a", "b"]), 3).unwrap();
        assert_eq!(words.len(), 1 + 2 + 4 + 8);
        let set: BTreeSet<_> = words.into_iter().collect();
        assert_eq!(set.len(), 15);
    }

    #[test]
    fn prefix_sets() {
        let set = BTreeSet::from([w(&["a", "b"])]);
        assert_eq!(prefixes_of(&set), BTreeSet::from([w(&[]), w(&["a"]), w(&["a", "b"])]));
    }
}
