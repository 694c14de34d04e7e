//! History expressions and the trace automata that decide questions about them.
//!
//! A history expression denotes a set of finite action sequences:
//!
//! | expression     | traces                                  |
//! |----------------|-----------------------------------------|
//! | `eps`          | the empty trace only                    |
//! | `a`            | the one-action trace `a`                |
//! | `h1 . h2`      | concatenations                          |
//! | `h1 + h2`      | union                                   |
//! | `h*`           | finite iterations, including none       |
//!
//! The fragment is regular, so membership, inclusion and equivalence are all
//! decided on finite automata. [`to_automaton`] uses the position (Glushkov)
//! construction, which yields an automaton without silent moves.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Name of an observable action, e.g. `display`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionName(String);

impl ActionName {
    pub fn new(name: impl Into<String>) -> Self {
        ActionName(name.into())
    }

    pub fn display() -> Self {
        ActionName::new("display")
    }

    pub fn send() -> Self {
        ActionName::new("send")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ActionName {
    fn from(name: &str) -> Self {
        ActionName::new(name)
    }
}

/// A payload-free trace.
pub type Word = Vec<ActionName>;

/// Render a word as `a . b . c`, or `eps` when empty.
pub fn word_to_string(word: &[ActionName]) -> String {
    if word.is_empty() {
        return "eps".to_string();
    }
    word.iter().map(ActionName::as_str).collect::<Vec<_>>().join(" . ")
}

/// A finite set of action names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet(BTreeSet<ActionName>);

impl Alphabet {
    pub fn new<I, A>(actions: I) -> Self
    where
        I: IntoIterator<Item = A>,
        A: Into<ActionName>,
    {
        Alphabet(actions.into_iter().map(Into::into).collect())
    }

    /// The observables shared by both languages: `display` and `send`.
    pub fn observable() -> Self {
        Alphabet::new([ActionName::display(), ActionName::send()])
    }

    pub fn contains(&self, action: &ActionName) -> bool {
        self.0.contains(action)
    }

    pub fn insert(&mut self, action: ActionName) {
        self.0.insert(action);
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet(self.0.union(&other.0).cloned().collect())
    }

    pub fn is_superset(&self, other: &Alphabet) -> bool {
        self.0.is_superset(&other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ActionName> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn index_of(&self, action: &ActionName) -> Option<usize> {
        self.0.iter().position(|a| a == action)
    }
}

impl FromIterator<ActionName> for Alphabet {
    fn from_iter<T: IntoIterator<Item = ActionName>>(iter: T) -> Self {
        Alphabet(iter.into_iter().collect())
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryError {
    #[error("action `{0}` is outside the alphabet")]
    UnknownAction(ActionName),
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: Alphabet, right: Alphabet },
    #[error("history expression, offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

/// A history expression.
///
/// The variant order fixes the order of alternatives after [`normalize`]:
/// single actions first, `eps` last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HistExpr {
    Act(ActionName),
    Seq(Box<HistExpr>, Box<HistExpr>),
    Star(Box<HistExpr>),
    Choice(Box<HistExpr>, Box<HistExpr>),
    Eps,
}

impl HistExpr {
    pub fn act(name: impl Into<ActionName>) -> Self {
        HistExpr::Act(name.into())
    }

    pub fn seq(first: HistExpr, second: HistExpr) -> Self {
        HistExpr::Seq(Box::new(first), Box::new(second))
    }

    pub fn choice(left: HistExpr, right: HistExpr) -> Self {
        HistExpr::Choice(Box::new(left), Box::new(right))
    }

    pub fn star(body: HistExpr) -> Self {
        HistExpr::Star(Box::new(body))
    }

    /// The actions occurring syntactically.
    pub fn actions(&self) -> Alphabet {
        let mut out = Alphabet::default();
        self.collect_actions(&mut out);
        out
    }

    fn collect_actions(&self, out: &mut Alphabet) {
        match self {
            HistExpr::Eps => {}
            HistExpr::Act(a) => out.insert(a.clone()),
            HistExpr::Seq(a, b) | HistExpr::Choice(a, b) => {
                a.collect_actions(out);
                b.collect_actions(out);
            }
            HistExpr::Star(a) => a.collect_actions(out),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            HistExpr::Eps | HistExpr::Act(_) => 1,
            HistExpr::Seq(a, b) | HistExpr::Choice(a, b) => 1 + a.depth().max(b.depth()),
            HistExpr::Star(a) => 1 + a.depth(),
        }
    }

    pub fn nullable(&self) -> bool {
        match self {
            HistExpr::Eps | HistExpr::Star(_) => true,
            HistExpr::Act(_) => false,
            HistExpr::Seq(a, b) => a.nullable() && b.nullable(),
            HistExpr::Choice(a, b) => a.nullable() || b.nullable(),
        }
    }

    /// Parse the textual syntax: `eps`, action names, `.`, `+`, postfix `*`.
    pub fn parse(text: &str) -> Result<HistExpr, HistoryError> {
        let mut p = HistParser {
            toks: hist_lex(text)?,
            pos: 0,
        };
        let h = p.choice()?;
        match p.toks.get(p.pos) {
            None => Ok(h),
            Some((offset, tok)) => Err(HistoryError::Parse {
                offset: *offset,
                message: alloc::format!("unexpected `{tok}`"),
            }),
        }
    }
}

impl core::str::FromStr for HistExpr {
    type Err = HistoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HistExpr::parse(s)
    }
}

impl fmt::Display for HistExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(h: &HistExpr, wrap: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if wrap {
                write!(f, "({h})")
            } else {
                write!(f, "{h}")
            }
        }
        match self {
            HistExpr::Eps => f.write_str("eps"),
            HistExpr::Act(a) => write!(f, "{a}"),
            HistExpr::Seq(a, b) => {
                paren(a, matches!(**a, HistExpr::Seq(..) | HistExpr::Choice(..)), f)?;
                f.write_str(" . ")?;
                paren(b, matches!(**b, HistExpr::Choice(..)), f)
            }
            // Sequences inside a choice are bracketed for readability.
            HistExpr::Choice(a, b) => {
                paren(a, matches!(**a, HistExpr::Seq(..) | HistExpr::Choice(..)), f)?;
                f.write_str(" + ")?;
                paren(b, matches!(**b, HistExpr::Seq(..)), f)
            }
            HistExpr::Star(a) => {
                paren(a, !matches!(**a, HistExpr::Eps | HistExpr::Act(_)), f)?;
                f.write_str("*")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum HistTok {
    Name(String),
    Dot,
    Plus,
    Star,
    LParen,
    RParen,
}

impl fmt::Display for HistTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistTok::Name(x) => f.write_str(x),
            HistTok::Dot => f.write_str("."),
            HistTok::Plus => f.write_str("+"),
            HistTok::Star => f.write_str("*"),
            HistTok::LParen => f.write_str("("),
            HistTok::RParen => f.write_str(")"),
        }
    }
}

fn hist_lex(text: &str) -> Result<Vec<(usize, HistTok)>, HistoryError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '.' | '·' => HistTok::Dot,
            '+' => HistTok::Plus,
            '*' => HistTok::Star,
            '(' => HistTok::LParen,
            ')' => HistTok::RParen,
            'ε' => HistTok::Name("eps".to_string()),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((offset, HistTok::Name(name)));
                continue;
            }
            _ => {
                return Err(HistoryError::Parse {
                    offset,
                    message: alloc::format!("unexpected character `{c}`"),
                })
            }
        };
        chars.next();
        out.push((offset, tok));
    }
    Ok(out)
}

struct HistParser {
    toks: Vec<(usize, HistTok)>,
    pos: usize,
}

impl HistParser {
    fn peek(&self) -> Option<&HistTok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(o, _)| *o)
            .unwrap_or_else(|| self.toks.last().map(|(o, t)| o + t.to_string().len()).unwrap_or(0))
    }

    fn fail<T>(&self, message: &str) -> Result<T, HistoryError> {
        Err(HistoryError::Parse {
            offset: self.offset(),
            message: message.to_string(),
        })
    }

    fn choice(&mut self) -> Result<HistExpr, HistoryError> {
        let first = self.seq()?;
        if self.peek() == Some(&HistTok::Plus) {
            self.pos += 1;
            return Ok(HistExpr::choice(first, self.choice()?));
        }
        Ok(first)
    }

    fn seq(&mut self) -> Result<HistExpr, HistoryError> {
        let first = self.postfix()?;
        if self.peek() == Some(&HistTok::Dot) {
            self.pos += 1;
            return Ok(HistExpr::seq(first, self.seq()?));
        }
        Ok(first)
    }

    fn postfix(&mut self) -> Result<HistExpr, HistoryError> {
        let mut h = self.atom()?;
        while self.peek() == Some(&HistTok::Star) {
            self.pos += 1;
            h = HistExpr::star(h);
        }
        Ok(h)
    }

    fn atom(&mut self) -> Result<HistExpr, HistoryError> {
        match self.peek().cloned() {
            Some(HistTok::Name(x)) => {
                self.pos += 1;
                Ok(if x == "eps" {
                    HistExpr::Eps
                } else {
                    HistExpr::act(x.as_str())
                })
            }
            Some(HistTok::LParen) => {
                self.pos += 1;
                let inner = self.choice()?;
                if self.peek() != Some(&HistTok::RParen) {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => self.fail("expected `eps`, an action or `(`"),
        }
    }
}

/// Canonical form: units of `.` dropped, `.` and `+` right-nested, the
/// alternatives of `+` sorted and deduplicated, trivial stars collapsed.
pub fn normalize(h: &HistExpr) -> HistExpr {
    match h {
        HistExpr::Eps | HistExpr::Act(_) => h.clone(),
        HistExpr::Seq(a, b) => {
            let mut items = Vec::new();
            seq_items(normalize(a), &mut items);
            seq_items(normalize(b), &mut items);
            rebuild(items, HistExpr::seq).unwrap_or(HistExpr::Eps)
        }
        HistExpr::Choice(a, b) => {
            let mut alts = Vec::new();
            choice_items(normalize(a), &mut alts);
            choice_items(normalize(b), &mut alts);
            alts.sort();
            alts.dedup();
            rebuild(alts, HistExpr::choice).expect("a choice has alternatives")
        }
        HistExpr::Star(a) => star_of(normalize(a)),
    }
}

/// The star of a normalized body, with trivial stars collapsed.
fn star_of(body: HistExpr) -> HistExpr {
    match body {
        HistExpr::Eps => HistExpr::Eps,
        HistExpr::Star(inner) => HistExpr::Star(inner),
        HistExpr::Choice(x, y) => {
            // (eps + h)* = h*
            let mut alts = Vec::new();
            choice_items(HistExpr::Choice(x, y), &mut alts);
            alts.retain(|alt| *alt != HistExpr::Eps);
            match rebuild(alts, HistExpr::choice).expect("eps is not duplicated") {
                body @ HistExpr::Choice(..) => HistExpr::star(body),
                single => star_of(single),
            }
        }
        other => HistExpr::star(other),
    }
}

fn seq_items(h: HistExpr, out: &mut Vec<HistExpr>) {
    match h {
        HistExpr::Eps => {}
        HistExpr::Seq(a, b) => {
            seq_items(*a, out);
            seq_items(*b, out);
        }
        other => out.push(other),
    }
}

fn choice_items(h: HistExpr, out: &mut Vec<HistExpr>) {
    match h {
        HistExpr::Choice(a, b) => {
            choice_items(*a, out);
            choice_items(*b, out);
        }
        other => out.push(other),
    }
}

fn rebuild(items: Vec<HistExpr>, join: fn(HistExpr, HistExpr) -> HistExpr) -> Option<HistExpr> {
    items.into_iter().rev().reduce(|acc, item| join(item, acc))
}

/// A nondeterministic automaton over an alphabet of actions, without silent
/// moves. Every state is reachable from the initial state and, unless the
/// language is empty, can reach an accepting state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceAutomaton {
    alphabet: Alphabet,
    symbols: Vec<ActionName>,
    initial: usize,
    accepting: Vec<bool>,
    /// Outgoing `(symbol index, target)` pairs per state, sorted.
    delta: Vec<Vec<(usize, usize)>>,
}

impl TraceAutomaton {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, &ActionName, usize)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(move |(q, out)| out.iter().map(move |&(s, r)| (q, &self.symbols[s], r)))
    }

    /// Actions labelling at least one transition.
    pub fn used_actions(&self) -> Alphabet {
        self.transitions().map(|(_, a, _)| a.clone()).collect()
    }

    fn symbol_index(&self, action: &ActionName) -> Result<usize, HistoryError> {
        self.alphabet
            .index_of(action)
            .ok_or_else(|| HistoryError::UnknownAction(action.clone()))
    }

    fn step(&self, states: &[bool], symbol: usize) -> Vec<bool> {
        let mut next = vec![false; self.state_count()];
        for (q, _) in states.iter().enumerate().filter(|(_, on)| **on) {
            for &(s, r) in &self.delta[q] {
                if s == symbol {
                    next[r] = true;
                }
            }
        }
        next
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut reverse = vec![Vec::new(); n];
        for (q, out) in self.delta.iter().enumerate() {
            for &(_, r) in out {
                reverse[r].push(q);
            }
        }
        let mut seen = self.accepting.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| seen[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &reverse[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Drop states that are unreachable or cannot reach acceptance, keeping the
    /// initial state. States are renumbered in breadth-first order.
    fn trim(self) -> TraceAutomaton {
        let live = self.coreachable();
        let mut order = vec![usize::MAX; self.state_count()];
        let mut kept = vec![self.initial];
        order[self.initial] = 0;
        let mut i = 0;
        while i < kept.len() {
            let q = kept[i];
            for &(_, r) in &self.delta[q] {
                if live[r] && order[r] == usize::MAX {
                    order[r] = kept.len();
                    kept.push(r);
                }
            }
            i += 1;
        }
        let delta = kept
            .iter()
            .map(|&q| {
                let mut out: Vec<(usize, usize)> = self.delta[q]
                    .iter()
                    .filter(|(_, r)| order[*r] != usize::MAX)
                    .map(|&(s, r)| (s, order[r]))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        TraceAutomaton {
            accepting: kept.iter().map(|&q| self.accepting[q]).collect(),
            alphabet: self.alphabet,
            symbols: self.symbols,
            initial: 0,
            delta,
        }
    }

    /// Shortest accepted word containing at least one action from `targets`.
    pub fn shortest_accepted_containing(&self, targets: &Alphabet) -> Option<Word> {
        let marked: Vec<bool> = self.symbols.iter().map(|a| targets.contains(a)).collect();
        let n = self.state_count();
        // Node (state, seen) is numbered state + seen * n.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; 2 * n];
        let mut visited = vec![false; 2 * n];
        let start = self.initial;
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            let (q, seen) = (node % n, node >= n);
            if seen && self.accepting[q] {
                let mut word = Vec::new();
                let mut cur = node;
                while let Some((prev, s)) = parent[cur] {
                    word.push(self.symbols[s].clone());
                    cur = prev;
                }
                word.reverse();
                return Some(word);
            }
            for &(s, r) in &self.delta[q] {
                let next = r + if seen || marked[s] { n } else { 0 };
                if !visited[next] {
                    visited[next] = true;
                    parent[next] = Some((node, s));
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// Build the automaton of `h` over the observable alphabet extended with the
/// actions `h` mentions.
pub fn to_automaton(h: &HistExpr) -> TraceAutomaton {
    let alphabet = Alphabet::observable().union(&h.actions());
    to_automaton_over(h, &alphabet).expect("alphabet covers the expression")
}

/// Build the automaton of `h` over a declared alphabet.
pub fn to_automaton_over(h: &HistExpr, alphabet: &Alphabet) -> Result<TraceAutomaton, HistoryError> {
    if let Some(a) = h.actions().iter().find(|a| !alphabet.contains(a)) {
        return Err(HistoryError::UnknownAction(a.clone()));
    }
    let symbols: Vec<ActionName> = alphabet.iter().cloned().collect();
    let mut g = Glushkov {
        alphabet,
        position_symbol: vec![usize::MAX],
        follow: vec![BTreeSet::new()],
    };
    let root = g.build(h);
    let n = g.position_symbol.len();
    let mut accepting = vec![false; n];
    for &p in &root.last {
        accepting[p] = true;
    }
    accepting[0] = root.nullable;
    let mut delta = vec![Vec::new(); n];
    for &p in &root.first {
        delta[0].push((g.position_symbol[p], p));
    }
    for (p, follow) in g.follow.iter().enumerate().skip(1) {
        for &q in follow {
            delta[p].push((g.position_symbol[q], q));
        }
    }
    let raw = TraceAutomaton {
        alphabet: alphabet.clone(),
        symbols,
        initial: 0,
        accepting,
        delta,
    };
    Ok(raw.trim())
}

struct Glushkov<'a> {
    alphabet: &'a Alphabet,
    /// Symbol of each position; position 0 is the initial state.
    position_symbol: Vec<usize>,
    follow: Vec<BTreeSet<usize>>,
}

struct Positions {
    nullable: bool,
    first: BTreeSet<usize>,
    last: BTreeSet<usize>,
}

impl Glushkov<'_> {
    fn build(&mut self, h: &HistExpr) -> Positions {
        match h {
            HistExpr::Eps => Positions {
                nullable: true,
                first: BTreeSet::new(),
                last: BTreeSet::new(),
            },
            HistExpr::Act(a) => {
                let p = self.position_symbol.len();
                self.position_symbol
                    .push(self.alphabet.index_of(a).expect("checked by caller"));
                self.follow.push(BTreeSet::new());
                Positions {
                    nullable: false,
                    first: BTreeSet::from([p]),
                    last: BTreeSet::from([p]),
                }
            }
            HistExpr::Seq(a, b) => {
                let a = self.build(a);
                let b = self.build(b);
                for &l in &a.last {
                    self.follow[l].extend(b.first.iter().copied());
                }
                let mut first = a.first;
                if a.nullable {
                    first.extend(b.first.iter().copied());
                }
                let mut last = b.last;
                if b.nullable {
                    last.extend(a.last.iter().copied());
                }
                Positions {
                    nullable: a.nullable && b.nullable,
                    first,
                    last,
                }
            }
            HistExpr::Choice(a, b) => {
                let mut a = self.build(a);
                let b = self.build(b);
                a.first.extend(b.first);
                a.last.extend(b.last);
                Positions {
                    nullable: a.nullable || b.nullable,
                    first: a.first,
                    last: a.last,
                }
            }
            HistExpr::Star(a) => {
                let a = self.build(a);
                for &l in &a.last {
                    self.follow[l].extend(a.first.iter().copied());
                }
                Positions {
                    nullable: true,
                    first: a.first,
                    last: a.last,
                }
            }
        }
    }
}

/// The automaton accepting every prefix of a word `a` accepts.
pub fn prefix_close(a: &TraceAutomaton) -> TraceAutomaton {
    let live = a.coreachable();
    TraceAutomaton {
        accepting: live,
        ..a.clone()
    }
}

/// Whether `word` is accepted. Actions outside the automaton's alphabet are an
/// error rather than a rejection.
pub fn member(word: &[ActionName], a: &TraceAutomaton) -> Result<bool, HistoryError> {
    let mut current = vec![false; a.state_count()];
    current[a.initial] = true;
    for action in word {
        let s = a.symbol_index(action)?;
        current = a.step(&current, s);
    }
    Ok(current.iter().zip(&a.accepting).any(|(on, acc)| *on && *acc))
}

/// Outcome of a language-inclusion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    Holds,
    /// A shortest word of the smaller side the larger side rejects.
    Fails(Word),
}

impl Inclusion {
    pub fn holds(&self) -> bool {
        matches!(self, Inclusion::Holds)
    }

    pub fn counterexample(&self) -> Option<&Word> {
        match self {
            Inclusion::Holds => None,
            Inclusion::Fails(w) => Some(w),
        }
    }
}

/// Decide whether the language of `included` is contained in that of `container`.
///
/// Breadth-first search over pairs (state of `included`, subset of states of
/// `container`), with symbols explored in alphabet order, so the reported
/// counterexample is the shortest and, among those, the first in that order.
pub fn includes(container: &TraceAutomaton, included: &TraceAutomaton) -> Result<Inclusion, HistoryError> {
    if container.alphabet != included.alphabet {
        return Err(HistoryError::AlphabetMismatch {
            left: container.alphabet.clone(),
            right: included.alphabet.clone(),
        });
    }
    type Node = (usize, Vec<usize>);
    let start: Node = (included.initial, vec![container.initial]);
    let mut index: BTreeMap<Node, usize> = BTreeMap::new();
    let mut nodes: Vec<(Node, Option<(usize, usize)>)> = Vec::new();
    index.insert(start.clone(), 0);
    nodes.push((start, None));
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (q, set) = nodes[cursor].0.clone();
        if included.accepting[q] && !set.iter().any(|&p| container.accepting[p]) {
            let mut word = Vec::new();
            let mut cur = cursor;
            while let Some((prev, s)) = nodes[cur].1 {
                word.push(included.symbols[s].clone());
                cur = prev;
            }
            word.reverse();
            return Ok(Inclusion::Fails(word));
        }
        for &(s, r) in &included.delta[q] {
            let mut next: Vec<usize> = set
                .iter()
                .flat_map(|&p| container.delta[p].iter())
                .filter(|(t, _)| *t == s)
                .map(|&(_, p2)| p2)
                .collect();
            next.sort_unstable();
            next.dedup();
            let node = (r, next);
            if !index.contains_key(&node) {
                index.insert(node.clone(), nodes.len());
                nodes.push((node, Some((cursor, s))));
            }
        }
        cursor += 1;
    }
    Ok(Inclusion::Holds)
}

/// Trace equivalence, over the union of both expressions' actions and the
/// observable alphabet.
pub fn equiv(h1: &HistExpr, h2: &HistExpr) -> bool {
    let alphabet = Alphabet::observable().union(&h1.actions()).union(&h2.actions());
    equiv_over(h1, h2, &alphabet).expect("alphabet covers both expressions")
}

/// Trace equivalence over a declared alphabet.
pub fn equiv_over(h1: &HistExpr, h2: &HistExpr, alphabet: &Alphabet) -> Result<bool, HistoryError> {
    Ok(distinguishing_word(h1, h2, alphabet)?.is_none())
}

/// A shortest word in exactly one of the two languages, if any.
pub fn distinguishing_word(h1: &HistExpr, h2: &HistExpr, alphabet: &Alphabet) -> Result<Option<Word>, HistoryError> {
    let a1 = to_automaton_over(h1, alphabet)?;
    let a2 = to_automaton_over(h2, alphabet)?;
    let left = includes(&a1, &a2)?;
    let right = includes(&a2, &a1)?;
    let witness = match (left, right) {
        (Inclusion::Holds, Inclusion::Holds) => None,
        (Inclusion::Fails(w), Inclusion::Holds) | (Inclusion::Holds, Inclusion::Fails(w)) => Some(w),
        (Inclusion::Fails(w1), Inclusion::Fails(w2)) => Some(if w2.len() < w1.len() { w2 } else { w1 }),
    };
    Ok(witness)
}
