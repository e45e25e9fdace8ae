//! Reader for the WordNet 3.0 database format (`index.noun`, `data.noun`).
//!
//! Only the noun part of speech is loaded. Hypernym (`@`) and instance
//! hypernym (`@i`) pointers become hypernym edges; every other pointer is
//! skipped after its fields have been validated.

use std::collections::BTreeMap;
use std::str::SplitAsciiWhitespace;

use super::graph::{GraphBuilder, RawSynset, SynsetGraph};
use crate::error::{Error, Result};

const DATA: &str = "data.noun";
const INDEX: &str = "index.noun";

/// Synset id for a noun byte offset.
pub fn noun_id(offset: u64) -> String {
    format!("n{offset:08}")
}

/// Parses a noun index/data pair into a validated graph.
pub fn parse_wndb(index: &[u8], data: &[u8]) -> Result<SynsetGraph> {
    let mut builder = GraphBuilder::new();
    for (line_no, line) in lines(DATA, data)? {
        let synset = parse_data_line(line, line_no)?;
        let id = synset.id.clone();
        if !builder.push(synset) {
            return Err(Error::parse(DATA, line_no, "synset_offset", format!("duplicate offset {id}")));
        }
    }

    let mut lemma_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (line_no, line) in lines(INDEX, index)? {
        let (lemma, ids) = parse_index_line(line, line_no)?;
        if lemma_index.insert(lemma.clone(), ids).is_some() {
            return Err(Error::parse(INDEX, line_no, "lemma", format!("duplicate lemma {lemma:?}")));
        }
    }
    builder.lemma_index(lemma_index);
    builder.finish()
}

/// Non-header, non-blank lines with 1-based line numbers.
fn lines<'a>(source: &str, bytes: &'a [u8]) -> Result<Vec<(usize, &'a str)>> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(source, line, "encoding", "invalid UTF-8")
    })?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with("  ") && !l.trim().is_empty())
        .collect())
}

struct Fields<'a> {
    source: &'static str,
    line: usize,
    tokens: SplitAsciiWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn next(&mut self, field: &str) -> Result<&'a str> {
        self.tokens
            .next()
            .ok_or_else(|| Error::parse(self.source, self.line, field, "missing"))
    }

    fn decimal(&mut self, field: &str) -> Result<u64> {
        let tok = self.next(field)?;
        if !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(self.source, self.line, field, format!("expected decimal digits, got {tok:?}")));
        }
        tok.parse()
            .map_err(|_| Error::parse(self.source, self.line, field, format!("out of range: {tok:?}")))
    }

    fn hex(&mut self, field: &str) -> Result<u64> {
        let tok = self.next(field)?;
        u64::from_str_radix(tok, 16)
            .map_err(|_| Error::parse(self.source, self.line, field, format!("expected hex digits, got {tok:?}")))
    }

    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::parse(self.source, self.line, field, message)
    }
}

fn parse_data_line(line: &str, line_no: usize) -> Result<RawSynset> {
    let (body, gloss) = match line.split_once('|') {
        Some((b, g)) => (b, g.trim()),
        None => (line, ""),
    };
    let mut f = Fields {
        source: DATA,
        line: line_no,
        tokens: body.split_ascii_whitespace(),
    };

    let offset = f.decimal("synset_offset")?;
    f.decimal("lex_filenum")?;
    let ss_type = f.next("ss_type")?;
    if ss_type != "n" {
        return Err(f.err("ss_type", format!("expected noun synset, got {ss_type:?}")));
    }
    let w_cnt = f.hex("w_cnt")?;
    if w_cnt == 0 {
        return Err(f.err("w_cnt", "synset without words"));
    }
    let mut lemmas = Vec::with_capacity(w_cnt as usize);
    for _ in 0..w_cnt {
        lemmas.push(f.next("word")?.to_string());
        f.hex("lex_id")?;
    }

    let p_cnt = f.decimal("p_cnt")?;
    let mut hypernyms = Vec::new();
    for i in 0..p_cnt {
        let short = |f: &Fields| f.err("p_cnt", format!("declares {p_cnt} pointers, found {i}"));
        let symbol = f.tokens.next().ok_or_else(|| short(&f))?;
        let target = f.decimal("pointer_offset").map_err(|e| match e {
            Error::Parse { ref message, .. } if message == "missing" => short(&f),
            e => e,
        })?;
        let pos = f.next("pointer_pos").map_err(|_| short(&f))?;
        let st = f.next("source_target").map_err(|_| short(&f))?;
        if st.len() != 4 || u16::from_str_radix(st, 16).is_err() {
            return Err(f.err("source_target", format!("expected 4 hex digits, got {st:?}")));
        }
        if matches!(symbol, "@" | "@i") && pos == "n" {
            let id = noun_id(target);
            if !hypernyms.contains(&id) {
                hypernyms.push(id);
            }
        }
    }
    if f.tokens.next().is_some() {
        return Err(f.err("p_cnt", format!("declares {p_cnt} pointers but more fields follow")));
    }

    Ok(RawSynset {
        id: noun_id(offset),
        order: offset,
        lemmas,
        gloss: gloss.to_string(),
        hypernyms,
    })
}

fn parse_index_line(line: &str, line_no: usize) -> Result<(String, Vec<String>)> {
    let mut f = Fields {
        source: INDEX,
        line: line_no,
        tokens: line.split_ascii_whitespace(),
    };
    let lemma = f.next("lemma")?.to_lowercase();
    let pos = f.next("pos")?;
    if pos != "n" {
        return Err(f.err("pos", format!("expected noun entry, got {pos:?}")));
    }
    let synset_cnt = f.decimal("synset_cnt")?;
    let p_cnt = f.decimal("p_cnt")?;
    for _ in 0..p_cnt {
        f.next("ptr_symbol")?;
    }
    f.decimal("sense_cnt")?;
    f.decimal("tagsense_cnt")?;
    let mut ids = Vec::with_capacity(synset_cnt.min(1024) as usize);
    for _ in 0..synset_cnt {
        ids.push(noun_id(f.decimal("synset_offset")?));
    }
    if f.tokens.next().is_some() {
        return Err(f.err("synset_cnt", format!("declares {synset_cnt} offsets but more fields follow")));
    }
    if ids.is_empty() {
        return Err(f.err("synset_cnt", "lemma without synsets"));
    }
    Ok((lemma, ids))
}
