//! Reduced words of the free group over a finite alphabet.
//!
//! Words are kept fully reduced at all times: construction performs free
//! reduction eagerly, so equality, hashing and ordering all work on canonical
//! forms. The canonical total order is by length, then lexicographic on
//! (generator id, sign), with the positive sign first.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// One signed letter: a generator index plus a sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u16,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: u16, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }
}

/// A reduced word. The empty word is the group identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word {
            letters: Vec::new(),
        }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(raw: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in raw {
            if out.last().is_some_and(|last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn from_letter(l: Letter) -> Self {
        Word { letters: vec![l] }
    }

    pub fn generator(gen: u16) -> Self {
        Word::from_letter(Letter::new(gen, false))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced `s w s^{-1}` for a signed letter `s`.
    pub fn conjugate_by(&self, s: Letter) -> Word {
        let mut raw = Vec::with_capacity(self.len() + 2);
        raw.push(s);
        raw.extend_from_slice(&self.letters);
        raw.push(s.inverse());
        Word::reduce(raw)
    }

    /// Counts occurrences of the generator `gen`, in either sign.
    pub fn count_occurrences(&self, gen: u16) -> usize {
        self.letters.iter().filter(|l| l.gen == gen).count()
    }

    /// Integer power; `pow(0)` is the identity.
    pub fn pow(&self, e: i64) -> Word {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Multiplicative commutator `u v u^{-1} v^{-1}`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.concat(v).concat(&u.inverse()).concat(&v.inverse())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

/// A named finite alphabet; generator ids are dense `0..size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(|s| s.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::input("alphabet must be nonempty"));
        }
        if names.len() > u16::MAX as usize {
            return Err(Error::size("alphabet too large"));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n == "e" || n.contains(char::is_whitespace) || n.contains('^') {
                return Err(Error::input(format!("invalid generator name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::input(format!("duplicate generator name `{n}`")));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, gen: u16) -> &str {
        &self.names[gen as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<u16> {
        self.names.iter().position(|n| n == name).map(|i| i as u16)
    }

    /// Validates letters against this alphabet and returns the reduced word.
    pub fn word_from_letters(&self, raw: impl IntoIterator<Item = Letter>) -> Result<Word> {
        let raw: Vec<Letter> = raw.into_iter().collect();
        for l in &raw {
            if l.gen as usize >= self.size() {
                return Err(Error::input(format!("unknown generator id {}", l.gen)));
            }
        }
        Ok(Word::reduce(raw))
    }

    /// Parses `a b^-1 a`; `e` denotes the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(base) => (base, true),
                None => (tok, false),
            };
            let gen = self
                .index(name)
                .ok_or_else(|| Error::input(format!("unknown generator `{name}` in word `{s}`")))?;
            letters.push(Letter::new(gen, inv));
        }
        Ok(Word::reduce(letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_identity() {
            return "e".to_string();
        }
        w.letters
            .iter()
            .map(|l| {
                if l.inv {
                    format!("{}^-1", self.name(l.gen))
                } else {
                    self.name(l.gen).to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// All reduced words of length at most `radius`, in canonical order.
    pub fn ball(&self, radius: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        for _ in 0..radius {
            let mut next = Vec::new();
            for w in &frontier {
                for gen in 0..self.size() as u16 {
                    for inv in [false, true] {
                        let l = Letter::new(gen, inv);
                        if w.letters.last().is_some_and(|last| last.cancels(l)) {
                            continue;
                        }
                        let mut letters = w.letters.clone();
                        letters.push(l);
                        next.push(Word { letters });
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

/// Renders raw ids, for debugging only; user-facing output goes through
/// [`Alphabet::format_word`].
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| format!("g{}{}", l.gen, if l.inv { "^-1" } else { "" }))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}
