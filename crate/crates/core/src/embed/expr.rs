//! Concept expressions such as `vertebrate - mammal + bird`.
//!
//! Grammar: `name (("+" | "-") name)*`. Operators are separate tokens (or
//! prefix the following name); consecutive words form one multi-word name.

use crate::error::{Error, Result};
use crate::taxonomy::ConceptVocabulary;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptExpression {
    pub add: Vec<usize>,
    pub sub: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Plus,
    Minus,
    Word(String),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let mut rest = raw;
        while let Some(op) = rest.chars().next().filter(|c| *c == '+' || *c == '-') {
            out.push(if op == '+' { Token::Plus } else { Token::Minus });
            rest = &rest[1..];
        }
        if !rest.is_empty() {
            out.push(Token::Word(rest.to_string()));
        }
    }
    out
}

/// Splits an expression into signed terms (`true` = added).
pub fn parse_terms(text: &str) -> Result<Vec<(bool, String)>> {
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut sign: Option<bool> = Some(true);
    for tok in tokenize(text) {
        match tok {
            Token::Word(w) => match (sign.take(), terms.last_mut()) {
                (Some(s), _) => terms.push((s, w)),
                (None, Some((_, name))) => {
                    name.push(' ');
                    name.push_str(&w);
                }
                (None, None) => unreachable!("the first token always has a sign"),
            },
            Token::Plus | Token::Minus if sign.is_some() => {
                return Err(Error::Param(format!("expected a concept name before an operator in {text:?}")));
            }
            Token::Plus => sign = Some(true),
            Token::Minus => sign = Some(false),
        }
    }
    if terms.is_empty() {
        return Err(Error::Param("empty concept expression".into()));
    }
    if sign.is_some() {
        return Err(Error::Param(format!("expression {text:?} ends with an operator")));
    }
    Ok(terms)
}

/// Labels closest to `name` by edit distance, at most `n`.
pub fn nearest_labels(vocab: &ConceptVocabulary, name: &str, n: usize) -> Vec<String> {
    let want = name.to_lowercase();
    let mut scored: Vec<(usize, &str)> = vocab
        .concepts
        .iter()
        .map(|c| (strsim::levenshtein(&want, &c.label.to_lowercase()), c.label.as_str()))
        .collect();
    scored.sort();
    scored.dedup_by(|a, b| a.1 == b.1);
    scored.into_iter().take(n).map(|(_, l)| l.to_string()).collect()
}

/// Parses an expression and resolves every name in `vocab`. A repeated
/// concept is a parameter error; an unknown name reports the nearest labels.
pub fn parse_concept_expression(text: &str, vocab: &ConceptVocabulary) -> Result<ConceptExpression> {
    let mut expr = ConceptExpression {
        add: Vec::new(),
        sub: Vec::new(),
    };
    for (positive, name) in parse_terms(text)? {
        let k = vocab.concept_index(&name).ok_or_else(|| Error::UnknownConcept {
            suggestions: nearest_labels(vocab, &name, 3),
            name: name.clone(),
        })?;
        if expr.add.contains(&k) || expr.sub.contains(&k) {
            return Err(Error::Param(format!("concept {name:?} appears more than once")));
        }
        if positive {
            expr.add.push(k);
        } else {
            expr.sub.push(k);
        }
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{build_vocabulary, load_mini_taxonomy, DESK_FIXTURE, DESK_WORDS};

    fn vocab() -> ConceptVocabulary {
        let g = load_mini_taxonomy(DESK_FIXTURE).unwrap();
        let words = crate::taxonomy::parse_word_list(DESK_WORDS);
        build_vocabulary(&g, &words, 2, 8).unwrap()
    }

    #[test]
    fn terms() {
        assert_eq!(parse_terms("vertebrate").unwrap(), vec![(true, "vertebrate".into())]);
        assert_eq!(
            parse_terms("a - b +c").unwrap(),
            vec![(true, "a".into()), (false, "b".into()), (true, "c".into())]
        );
        assert_eq!(parse_terms("motor vehicle - car").unwrap()[0].1, "motor vehicle");
        for bad in ["", "+", "a +", "- a", "a + - b"] {
            assert!(matches!(parse_terms(bad), Err(Error::Param(_))), "{bad:?}");
        }
    }

    #[test]
    fn resolution() {
        let v = vocab();
        let e = parse_concept_expression("tool - Fruit", &v).unwrap();
        assert_eq!(e.add, vec![v.concept_index("tool").unwrap()]);
        assert_eq!(e.sub, vec![v.concept_index("fruit").unwrap()]);
        assert!(matches!(parse_concept_expression("tool + tool", &v), Err(Error::Param(_))));
        match parse_concept_expression("toool", &v) {
            Err(Error::UnknownConcept { name, suggestions }) => {
                assert_eq!(name, "toool");
                assert_eq!(suggestions[0], "tool");
            }
            other => panic!("{other:?}"),
        }
    }
}
