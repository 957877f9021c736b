//! Textual file formats: word lists, actions and strategies, tests, and
//! tailored games. Parsers report 1-based line/column positions; writers
//! emit canonical text that the parsers round-trip.

use std::collections::{BTreeMap, BTreeSet};

use crate::actions::{FiniteAction, Permutation};
use crate::compiler::{compile, CompiledTest};
use crate::error::{Error, Result};
use crate::games::{Edge, EdgeConstraints, LinearConstraint, TailoredGame};
use crate::rational::{format_q, parse_q};
use crate::subgroup_test::{
    cnf_test, separation_test, verification_test, Challenge, CnfClause, Decision, SubgroupTest,
};
use crate::words::{Alphabet, Word};

fn err_at(line: usize, msg: impl Into<String>) -> Error {
    Error::parse(line, 1, msg)
}

fn non_comment_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

// ---------------------------------------------------------------------------
// word lists
// ---------------------------------------------------------------------------

/// Parses one word per line; `#` lines and blanks are skipped.
pub fn parse_word_list(alphabet: &Alphabet, text: &str) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for (line, content) in non_comment_lines(text) {
        let w = alphabet
            .parse_word(content)
            .map_err(|e| err_at(line, e.to_string()))?;
        out.push(w);
    }
    Ok(out)
}

pub fn write_word_list(alphabet: &Alphabet, words: &[Word]) -> String {
    let mut out = String::new();
    for w in words {
        out.push_str(&alphabet.format_word(w));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// actions and strategies
// ---------------------------------------------------------------------------

/// Parses `degree n` followed by one line `name: i j k ...` per generator.
/// The alphabet is taken from the generator lines in order.
pub fn parse_action(text: &str) -> Result<FiniteAction> {
    let lines = non_comment_lines(text);
    let Some(&(first_line, first)) = lines.first() else {
        return Err(err_at(1, "empty action file"));
    };
    let degree: usize = first
        .strip_prefix("degree")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err_at(first_line, "expected `degree <n>`"))?;
    if degree == 0 {
        return Err(err_at(first_line, "degree must be positive"));
    }
    let mut names = Vec::new();
    let mut perms = Vec::new();
    for &(line, content) in &lines[1..] {
        let (name, imgs) = content
            .split_once(':')
            .ok_or_else(|| err_at(line, "expected `<generator>: <one-line images>`"))?;
        let mut img = Vec::with_capacity(degree);
        for tok in imgs.split_whitespace() {
            let v: u32 = tok
                .parse()
                .map_err(|_| err_at(line, format!("bad image `{tok}`")))?;
            img.push(v);
        }
        if img.len() != degree {
            return Err(err_at(line, format!("expected {degree} images")));
        }
        let perm = Permutation::new(img).map_err(|e| err_at(line, e.to_string()))?;
        names.push(name.trim().to_string());
        perms.push(perm);
    }
    let alphabet = Alphabet::new(&names).map_err(|e| err_at(first_line, e.to_string()))?;
    FiniteAction::new(alphabet, perms)
}

pub fn write_action(action: &FiniteAction) -> String {
    let mut out = format!("degree {}\n", action.degree());
    for g in 0..action.alphabet().size() as u16 {
        let images: Vec<String> = action
            .perm(g)
            .images()
            .iter()
            .map(|x| x.to_string())
            .collect();
        out.push_str(&format!(
            "{}: {}\n",
            action.alphabet().name(g),
            images.join(" ")
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// tailored games
// ---------------------------------------------------------------------------

/// Game grammar, one item per line:
/// ```text
/// vertices r0 r1 c0
/// lengths r0 0 3
/// lengths c0 0 1
/// edge r0 c0 1/2 lcs 1 0
/// edge r0 c0 1/2 table -:[J+r0/L/0]
/// ```
/// Table keys are the readable bits of the edge (x's block then y's), `-`
/// when the edge has no readable variables; constraint vectors list
/// generator names joined by `+`, with `J` for the constant slot.
pub fn parse_game(text: &str) -> Result<TailoredGame> {
    parse_game_lines(&non_comment_lines(text))
}

fn parse_game_lines(lines: &[(usize, &str)]) -> Result<TailoredGame> {
    let Some(&(vline, vcontent)) = lines.first() else {
        return Err(err_at(1, "empty game description"));
    };
    let vertices: Vec<String> = vcontent
        .strip_prefix("vertices")
        .ok_or_else(|| err_at(vline, "expected `vertices <names...>`"))?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    if vertices.is_empty() {
        return Err(err_at(vline, "no vertices listed"));
    }
    let vid = |line: usize, name: &str| -> Result<usize> {
        vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| err_at(line, format!("unknown vertex `{name}`")))
    };
    let mut len_r = vec![usize::MAX; vertices.len()];
    let mut len_l = vec![usize::MAX; vertices.len()];
    let mut raw_edges: Vec<(usize, usize, usize, crate::rational::Q, String)> = Vec::new();
    for &(line, content) in &lines[1..] {
        if let Some(rest) = content.strip_prefix("lengths ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(err_at(
                    line,
                    "expected `lengths <vertex> <readable> <linear>`",
                ));
            }
            let v = vid(line, toks[0])?;
            len_r[v] = toks[1]
                .parse()
                .map_err(|_| err_at(line, "bad readable length"))?;
            len_l[v] = toks[2]
                .parse()
                .map_err(|_| err_at(line, "bad linear length"))?;
        } else if let Some(rest) = content.strip_prefix("edge ") {
            let toks: Vec<&str> = rest.splitn(4, ' ').collect();
            if toks.len() != 4 {
                return Err(err_at(line, "expected `edge <x> <y> <p/q> <constraints>`"));
            }
            let x = vid(line, toks[0])?;
            let y = vid(line, toks[1])?;
            let w = parse_q(toks[2]).map_err(|e| err_at(line, e.to_string()))?;
            raw_edges.push((line, x, y, w, toks[3].to_string()));
        } else {
            return Err(err_at(line, format!("unrecognized game line `{content}`")));
        }
    }
    for v in 0..vertices.len() {
        if len_r[v] == usize::MAX || len_l[v] == usize::MAX {
            return Err(err_at(
                vline,
                format!("missing lengths for vertex `{}`", vertices[v]),
            ));
        }
    }

    // Names must resolve before the game exists, so build them here the same
    // way the game will.
    let mut gen_index: BTreeMap<String, usize> = BTreeMap::new();
    {
        let mut next = 0usize;
        for (v, name) in vertices.iter().enumerate() {
            for i in 0..len_r[v] {
                gen_index.insert(format!("{name}/R/{i}"), next);
                next += 1;
            }
            for i in 0..len_l[v] {
                gen_index.insert(format!("{name}/L/{i}"), next);
                next += 1;
            }
        }
    }

    let mut edges = Vec::new();
    for (line, x, y, weight, spec) in raw_edges {
        let constraints = if let Some(rest) = spec.strip_prefix("lcs ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(err_at(line, "expected `lcs <rhs-bit> <column-position>`"));
            }
            let rhs = match toks[0] {
                "0" => false,
                "1" => true,
                _ => return Err(err_at(line, "lcs rhs bit must be 0 or 1")),
            };
            let col_pos = toks[1]
                .parse()
                .map_err(|_| err_at(line, "bad lcs column position"))?;
            EdgeConstraints::Lcs { rhs, col_pos }
        } else if let Some(rest) = spec.strip_prefix("table") {
            let mut table = BTreeMap::new();
            for entry in rest.split_whitespace() {
                let (key, body) = entry
                    .split_once(":[")
                    .ok_or_else(|| err_at(line, format!("bad table entry `{entry}`")))?;
                let body = body
                    .strip_suffix(']')
                    .ok_or_else(|| err_at(line, "unterminated constraint list"))?;
                let bits: Vec<bool> = if key == "-" {
                    Vec::new()
                } else {
                    key.chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(err_at(line, format!("bad table key `{key}`"))),
                        })
                        .collect::<Result<_>>()?
                };
                let mut cons = Vec::new();
                if !body.is_empty() {
                    for vec_text in body.split(';') {
                        let mut j = false;
                        let mut gens = BTreeSet::new();
                        for part in vec_text.split('+') {
                            let part = part.trim();
                            if part == "J" {
                                j = !j;
                            } else {
                                let g = *gen_index.get(part).ok_or_else(|| {
                                    err_at(line, format!("unknown generator `{part}`"))
                                })?;
                                gens.insert(g);
                            }
                        }
                        cons.push(LinearConstraint { j, gens });
                    }
                }
                cons.sort();
                cons.dedup();
                table.insert(bits, cons);
            }
            EdgeConstraints::Table(table)
        } else {
            return Err(err_at(
                line,
                format!("unrecognized constraint spec `{spec}`"),
            ));
        };
        edges.push(Edge {
            x,
            y,
            weight,
            constraints,
        });
    }
    TailoredGame::new(vertices, len_r, len_l, edges)
}

pub fn write_game(game: &TailoredGame) -> String {
    let mut out = String::new();
    let names: Vec<&str> = (0..game.vertex_count())
        .map(|v| game.vertex_name(v))
        .collect();
    out.push_str(&format!("vertices {}\n", names.join(" ")));
    for v in 0..game.vertex_count() {
        out.push_str(&format!(
            "lengths {} {} {}\n",
            names[v],
            game.len_r(v),
            game.len_l(v)
        ));
    }
    for e in game.edges() {
        let spec = match &e.constraints {
            EdgeConstraints::Lcs { rhs, col_pos } => {
                format!("lcs {} {}", *rhs as u8, col_pos)
            }
            EdgeConstraints::Table(table) => {
                let mut parts = vec!["table".to_string()];
                for (bits, cons) in table {
                    let key = if bits.is_empty() {
                        "-".to_string()
                    } else {
                        bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
                    };
                    let vecs: Vec<String> = cons
                        .iter()
                        .map(|c| {
                            let mut terms: Vec<String> = c
                                .gens
                                .iter()
                                .map(|&g| game.generators()[g].name.clone())
                                .collect();
                            if c.j {
                                terms.insert(0, "J".to_string());
                            }
                            terms.join("+")
                        })
                        .collect();
                    parts.push(format!("{key}:[{}]", vecs.join(";")));
                }
                parts.join(" ")
            }
        };
        out.push_str(&format!(
            "edge {} {} {} {}\n",
            names[e.x],
            names[e.y],
            format_q(&e.weight),
            spec
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

/// A parsed test file; compiled tests keep their provenance for audits.
#[derive(Debug)]
pub struct ParsedTest {
    pub test: SubgroupTest,
    pub compiled: Option<CompiledTest>,
}

/// Test grammar:
/// ```text
/// alphabet a,b
/// challenge 1/2
/// window: a a; b
/// accept: {}; {a a, b}
/// end
/// builtin 1/4 verification R=[a a]
/// builtin 1/8 separation R=[a a] L=[a]
/// builtin 1/8 clause [+a; -b]
/// ```
/// A compiled test is a single block `compiled` ... `end` wrapping a game
/// description, which is compiled on load.
pub fn parse_test(text: &str) -> Result<ParsedTest> {
    let lines = non_comment_lines(text);
    let Some(&(first_line, first)) = lines.first() else {
        return Err(err_at(1, "empty test file"));
    };
    if first == "compiled" {
        let Some(&(last_line, last)) = lines.last() else {
            unreachable!()
        };
        if last != "end" {
            return Err(err_at(last_line, "compiled block must end with `end`"));
        }
        let game = parse_game_lines(&lines[1..lines.len() - 1])?;
        let compiled = compile(&game)?;
        return Ok(ParsedTest {
            test: compiled.test.clone(),
            compiled: Some(compiled),
        });
    }
    let alphabet_names = first
        .strip_prefix("alphabet")
        .map(str::trim)
        .ok_or_else(|| err_at(first_line, "expected `alphabet <a,b,...>`"))?;
    let alphabet = Alphabet::new(alphabet_names.split(',').map(str::trim))
        .map_err(|e| err_at(first_line, e.to_string()))?;

    enum Builder {
        Verification {
            weight: crate::rational::Q,
            r: BTreeSet<Word>,
        },
        Separation {
            weight: crate::rational::Q,
            r: BTreeSet<Word>,
            l: BTreeSet<Word>,
        },
        Clause {
            weight: crate::rational::Q,
            lits: Vec<(u16, bool)>,
        },
        Explicit {
            weight: crate::rational::Q,
            window: Vec<Word>,
            accepted: BTreeSet<u32>,
        },
    }
    let parse_words = |line: usize, body: &str| -> Result<Vec<Word>> {
        let mut out = Vec::new();
        for part in body.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            out.push(
                alphabet
                    .parse_word(part)
                    .map_err(|e| err_at(line, e.to_string()))?,
            );
        }
        Ok(out)
    };
    let bracket = |line: usize, text: &str, key: &str| -> Result<String> {
        let start = text
            .find(&format!("{key}=["))
            .ok_or_else(|| err_at(line, format!("missing `{key}=[...]`")))?;
        let rest = &text[start + key.len() + 2..];
        let end = rest
            .find(']')
            .ok_or_else(|| err_at(line, format!("unterminated `{key}=[...]`")))?;
        Ok(rest[..end].to_string())
    };

    let mut builders: Vec<Builder> = Vec::new();
    let mut i = 1usize;
    while i < lines.len() {
        let (line, content) = lines[i];
        if let Some(rest) = content.strip_prefix("builtin ") {
            let (weight_tok, spec) = rest
                .trim()
                .split_once(' ')
                .ok_or_else(|| err_at(line, "expected `builtin <p/q> <kind> ...`"))?;
            let weight = parse_q(weight_tok).map_err(|e| err_at(line, e.to_string()))?;
            if let Some(args) = spec.strip_prefix("verification") {
                let r = parse_words(line, &bracket(line, args, "R")?)?;
                builders.push(Builder::Verification {
                    weight,
                    r: r.into_iter().collect(),
                });
            } else if let Some(args) = spec.strip_prefix("separation") {
                let r = parse_words(line, &bracket(line, args, "R")?)?;
                let l = parse_words(line, &bracket(line, args, "L")?)?;
                builders.push(Builder::Separation {
                    weight,
                    r: r.into_iter().collect(),
                    l: l.into_iter().collect(),
                });
            } else if let Some(args) = spec.strip_prefix("clause") {
                let body = args.trim();
                let body = body
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| err_at(line, "expected `clause [+a; -b]`"))?;
                let mut lits = Vec::new();
                for part in body.split(';') {
                    let part = part.trim();
                    let (negated, name) = match part.strip_prefix('+') {
                        Some(n) => (false, n),
                        None => match part.strip_prefix('-') {
                            Some(n) => (true, n),
                            None => return Err(err_at(line, "literals start with + or -")),
                        },
                    };
                    let var = alphabet
                        .index(name.trim())
                        .ok_or_else(|| err_at(line, format!("unknown variable `{name}`")))?;
                    lits.push((var, negated));
                }
                builders.push(Builder::Clause { weight, lits });
            } else {
                return Err(err_at(line, format!("unknown builtin `{spec}`")));
            }
            i += 1;
        } else if let Some(weight_tok) = content.strip_prefix("challenge ") {
            let weight = parse_q(weight_tok.trim()).map_err(|e| err_at(line, e.to_string()))?;
            let (wline, wcontent) = *lines
                .get(i + 1)
                .ok_or_else(|| err_at(line, "challenge block needs a `window:` line"))?;
            let window = parse_words(
                wline,
                wcontent
                    .strip_prefix("window:")
                    .ok_or_else(|| err_at(wline, "expected `window: ...`"))?,
            )?;
            let mut window = window;
            window.sort();
            window.dedup();
            let (aline, acontent) = *lines
                .get(i + 2)
                .ok_or_else(|| err_at(line, "challenge block needs an `accept:` line"))?;
            let accept_body = acontent
                .strip_prefix("accept:")
                .ok_or_else(|| err_at(aline, "expected `accept: ...`"))?;
            let mut accepted = BTreeSet::new();
            for subset in accept_body.split(';') {
                let subset = subset.trim();
                if subset.is_empty() {
                    continue;
                }
                let inner = subset
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| err_at(aline, "subsets are written as {w, w}"))?;
                let mut mask = 0u32;
                for w_text in inner.split(',') {
                    let w_text = w_text.trim();
                    if w_text.is_empty() {
                        continue;
                    }
                    let w = alphabet
                        .parse_word(w_text)
                        .map_err(|e| err_at(aline, e.to_string()))?;
                    let pos = window
                        .binary_search(&w)
                        .map_err(|_| err_at(aline, "accepted word outside the window"))?;
                    mask |= 1 << pos;
                }
                accepted.insert(mask);
            }
            let (eline, econtent) = *lines
                .get(i + 3)
                .ok_or_else(|| err_at(line, "challenge block must end with `end`"))?;
            if econtent != "end" {
                return Err(err_at(eline, "challenge block must end with `end`"));
            }
            builders.push(Builder::Explicit {
                weight,
                window,
                accepted,
            });
            i += 4;
        } else {
            return Err(err_at(line, format!("unrecognized test line `{content}`")));
        }
    }

    // Uniform-weight pure CNF files reuse the dedicated constructor; other
    // mixes build challenges directly.
    let mut challenges = Vec::new();
    for b in builders {
        match b {
            Builder::Verification { weight, r } => {
                let t = verification_test(alphabet.clone(), r)?;
                challenges.push((weight, t.challenges()[0].1.clone()));
            }
            Builder::Separation { weight, r, l } => {
                let t = separation_test(alphabet.clone(), r, l)?;
                challenges.push((weight, t.challenges()[0].1.clone()));
            }
            Builder::Clause { weight, lits } => {
                let clause: CnfClause = lits;
                let t = cnf_test(alphabet.clone(), &[clause])?;
                challenges.push((weight, t.challenges()[0].1.clone()));
            }
            Builder::Explicit {
                weight,
                window,
                accepted,
            } => {
                challenges.push((
                    weight,
                    Challenge::new(window, Decision::Table { accepted })?,
                ));
            }
        }
    }
    Ok(ParsedTest {
        test: SubgroupTest::new(alphabet, challenges)?,
        compiled: None,
    })
}

/// Writes explicit and builtin challenges; compiled tests are written with
/// [`write_compiled_test`].
pub fn write_test(test: &SubgroupTest) -> Result<String> {
    let alphabet = test.alphabet();
    let mut out = format!("alphabet {}\n", alphabet.names().join(","));
    for (weight, challenge) in test.challenges() {
        match challenge.decision() {
            Decision::IsExactly { r } => {
                let window: BTreeSet<Word> = challenge.window().iter().cloned().collect();
                let r_text: Vec<String> = r.iter().map(|w| alphabet.format_word(w)).collect();
                if r.len() == window.len() {
                    out.push_str(&format!(
                        "builtin {} verification R=[{}]\n",
                        format_q(weight),
                        r_text.join("; ")
                    ));
                } else {
                    let l: Vec<String> = window
                        .iter()
                        .filter(|w| !r.contains(w))
                        .map(|w| alphabet.format_word(w))
                        .collect();
                    out.push_str(&format!(
                        "builtin {} separation R=[{}] L=[{}]\n",
                        format_q(weight),
                        r_text.join("; "),
                        l.join("; ")
                    ));
                }
            }
            Decision::Clause { literals } => {
                let lits: Vec<String> = literals
                    .iter()
                    .map(|(w, negated)| {
                        format!(
                            "{}{}",
                            if *negated { "-" } else { "+" },
                            alphabet.format_word(w)
                        )
                    })
                    .collect();
                out.push_str(&format!(
                    "builtin {} clause [{}]\n",
                    format_q(weight),
                    lits.join("; ")
                ));
            }
            Decision::Table { accepted } => {
                out.push_str(&format!("challenge {}\n", format_q(weight)));
                let window: Vec<String> = challenge
                    .window()
                    .iter()
                    .map(|w| alphabet.format_word(w))
                    .collect();
                out.push_str(&format!("window: {}\n", window.join("; ")));
                let subsets: Vec<String> = accepted
                    .iter()
                    .map(|mask| {
                        let words: Vec<String> = challenge
                            .window()
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask >> i & 1 == 1)
                            .map(|(_, w)| alphabet.format_word(w))
                            .collect();
                        format!("{{{}}}", words.join(", "))
                    })
                    .collect();
                out.push_str(&format!("accept: {}\n", subsets.join("; ")));
                out.push_str("end\n");
            }
            Decision::Compiled(_) => {
                return Err(Error::input(
                    "compiled tests are written from their game description",
                ));
            }
        }
    }
    Ok(out)
}

pub fn write_compiled_test(game: &TailoredGame) -> String {
    format!("compiled\n{}end\n", write_game(game))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::magic_square;

    #[test]
    fn action_roundtrip() {
        let text = "degree 4\na: 1 0 3 2\nb: 0 1 2 3\n";
        let action = parse_action(text).unwrap();
        assert_eq!(action.degree(), 4);
        assert_eq!(write_action(&action), text);
        assert!(parse_action("degree 2\na: 0 0\n").is_err());
        let err = parse_action("degree x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn word_list_roundtrip() {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let text = "a a\n# comment\nb^-1 a\n\ne\n";
        let words = parse_word_list(&alphabet, text).unwrap();
        assert_eq!(words.len(), 3);
        let rendered = write_word_list(&alphabet, &words);
        assert_eq!(rendered, "a a\nb^-1 a\ne\n");
    }

    #[test]
    fn game_roundtrip() {
        let game = magic_square();
        let text = write_game(&game);
        let parsed = parse_game(&text).unwrap();
        assert_eq!(parsed, game);
    }

    #[test]
    fn table_game_roundtrip() {
        let text = "vertices x y\nlengths x 1 1\nlengths y 0 1\n\
                    edge x y 1/1 table 0:[J+x/L/0;y/L/0] 1:[]\n";
        let game = parse_game(text).unwrap();
        assert_eq!(game.lambda(), 2);
        let rendered = write_game(&game);
        assert_eq!(parse_game(&rendered).unwrap(), game);
    }

    #[test]
    fn test_file_roundtrip() {
        let text = "alphabet a,b\n\
                    builtin 1/2 verification R=[a a]\n\
                    builtin 1/4 separation R=[a a] L=[a]\n\
                    builtin 1/8 clause [+a; -b]\n\
                    challenge 1/8\n\
                    window: a; b b\n\
                    accept: {}; {a, b b}\n\
                    end\n";
        let parsed = parse_test(text).unwrap();
        assert!(parsed.compiled.is_none());
        assert_eq!(parsed.test.challenges().len(), 4);
        let rendered = write_test(&parsed.test).unwrap();
        let reparsed = parse_test(&rendered).unwrap();
        assert_eq!(reparsed.test, parsed.test);
    }

    #[test]
    fn compiled_test_roundtrip() {
        let game = magic_square();
        let text = write_compiled_test(&game);
        let parsed = parse_test(&text).unwrap();
        let compiled = parsed.compiled.unwrap();
        assert_eq!(compiled.game, game);
        assert_eq!(parsed.test.challenges().len(), 18);
    }

    #[test]
    fn test_weights_validated() {
        let text = "alphabet a\nbuiltin 1/2 verification R=[a]\n";
        assert!(parse_test(text).is_err());
        let ok = "alphabet a\nbuiltin 1/2 verification R=[a]\nbuiltin 1/2 clause [+a]\n";
        assert_eq!(parse_test(ok).unwrap().test.challenges().len(), 2);
    }

    #[test]
    fn parse_error_positions() {
        let bad = "alphabet a\nbogus line\n";
        match parse_test(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    // Truncating or mangling well-formed files must yield errors, never
    // panics.
    #[test]
    fn parsers_survive_truncation() {
        let game_text = write_game(&magic_square());
        let test_text = "alphabet a,b\nbuiltin 1/2 verification R=[a a]\n\
                         challenge 1/2\nwindow: a; b b\naccept: {}; {a}\nend\n";
        for text in [game_text.as_str(), test_text] {
            for cut in 0..text.len() {
                let _ = parse_game(&text[..cut]);
                let _ = parse_test(&text[..cut]);
            }
        }
        let action_text = "degree 4\na: 1 0 3 2\n";
        for cut in 0..action_text.len() {
            let _ = parse_action(&action_text[..cut]);
        }
    }
}
