use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

/// Where a token came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub table: String,
    pub row: usize,
    /// `None` for relation-name tokens.
    pub column: Option<String>,
}

/// An ordered token sequence split into sentences (one per tokenized row).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    tokens: Vec<String>,
    provenance: Option<Vec<Provenance>>,
    sentence_ends: Vec<usize>,
}

impl Document {
    pub fn new() -> Self {
        Self::default()
    }

    /// A document with provenance tracking enabled.
    pub fn with_provenance() -> Self {
        Self {
            provenance: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub fn from_sentences<I, S, T>(sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let mut doc = Self::new();
        for sentence in sentences {
            doc.push_sentence(sentence.into_iter().map(Into::into).collect(), None);
        }
        doc
    }

    pub fn push_sentence(&mut self, tokens: Vec<String>, provenance: Option<Vec<Provenance>>) {
        if tokens.is_empty() {
            return;
        }
        if let Some(all) = &mut self.provenance {
            match provenance {
                Some(p) => {
                    debug_assert_eq!(p.len(), tokens.len());
                    all.extend(p);
                }
                None => self.provenance = None,
            }
        }
        self.tokens.extend(tokens);
        self.sentence_ends.push(self.tokens.len());
    }

    pub fn append(&mut self, other: Document) {
        let offset = self.tokens.len();
        match (&mut self.provenance, other.provenance) {
            (Some(mine), Some(theirs)) => mine.extend(theirs),
            (Some(_), None) if !other.tokens.is_empty() => self.provenance = None,
            _ => {}
        }
        self.tokens.extend(other.tokens);
        self.sentence_ends
            .extend(other.sentence_ends.into_iter().map(|e| e + offset));
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn provenance(&self) -> Option<&[Provenance]> {
        self.provenance.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_ends.len()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[String]> + '_ {
        let mut start = 0;
        self.sentence_ends.iter().map(move |&end| {
            let s = &self.tokens[start..end];
            start = end;
            s
        })
    }

    /// Writes one sentence per line, tokens separated by single spaces.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for sentence in self.sentences() {
            writeln!(out, "{}", sentence.join(" "))?;
        }
        Ok(())
    }

    /// Reads whitespace-separated tokens, one sentence per non-empty line.
    pub fn read_text<R: BufRead>(input: R) -> io::Result<Self> {
        let mut doc = Self::new();
        for line in input.lines() {
            let line = line?;
            doc.push_sentence(line.split_whitespace().map(str::to_string).collect(), None);
        }
        Ok(doc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let doc = Document::from_sentences([vec!["a", "b"], vec!["c"]]);
        let mut buf = Vec::new();
        doc.write_text(&mut buf).unwrap();
        assert_eq!(buf, b"a b\nc\n");
        assert_eq!(Document::read_text(&buf[..]).unwrap(), doc);
    }

    #[test]
    fn empty_sentences_are_dropped() {
        let doc = Document::from_sentences([Vec::<String>::new(), vec!["x".into()]]);
        assert_eq!(doc.sentence_count(), 1);
    }
}
