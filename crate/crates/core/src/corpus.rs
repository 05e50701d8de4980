//! Corpus ingestion and preprocessing.
//!
//! Raw text goes through tokenize -> stopword removal -> Porter stemming;
//! pre-tokenized input is split on whitespace and left untouched. Empty
//! documents are dropped. The vocabulary assigns dense indices in first
//! occurrence order, which makes every downstream matrix deterministic.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::porter;

/// A document before preprocessing.
#[derive(Debug, Clone)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Set of words removed before stemming.
#[derive(Debug, Clone, Default)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopwordList {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    /// Built-in English list (standard common-word inventory).
    pub fn english() -> Self {
        Self::new(ENGLISH_STOPWORDS.iter().copied())
    }

    pub fn empty() -> Self {
        StopwordList::default()
    }

    /// One word per line, UTF-8; blank lines ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty())))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercase and split on any non-alphabetic character. Digits and
/// punctuation act as separators, so "COVID-19" yields just "covid".
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Drop stopwords, preserving order.
pub fn remove_stopwords(tokens: Vec<String>, stops: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stops.contains(t)).collect()
}

/// Porter-stem a single token. Re-exported from the stemmer module.
pub fn stem(token: &str) -> String {
    porter::stem(token)
}

/// One preprocessed document: stable id plus vocabulary indices in text order.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<usize>,
}

/// Preprocessed corpus with a shared dense vocabulary.
#[derive(Debug, Clone)]
pub struct TokenCorpus {
    docs: Vec<Document>,
    vocab: Vec<String>,
    vocab_index: HashMap<String, usize>,
    token_count: usize,
}

impl TokenCorpus {
    /// Assemble a corpus from per-document token strings, dropping empty
    /// documents and building the vocabulary in first-occurrence order.
    pub fn from_token_docs(docs: Vec<(String, Vec<String>)>) -> Result<Self> {
        let mut seen_ids = HashSet::new();
        let mut vocab: Vec<String> = Vec::new();
        let mut vocab_index: HashMap<String, usize> = HashMap::new();
        let mut out_docs = Vec::new();
        let mut token_count = 0usize;

        for (id, tokens) in docs {
            if id.contains(',') || id.contains('\n') || id.contains('\r') {
                return Err(Error::InvalidDocumentId(id));
            }
            if !seen_ids.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            if tokens.is_empty() {
                continue;
            }
            let indices = tokens
                .into_iter()
                .map(|t| {
                    *vocab_index.entry(t.clone()).or_insert_with(|| {
                        vocab.push(t);
                        vocab.len() - 1
                    })
                })
                .collect::<Vec<_>>();
            token_count += indices.len();
            out_docs.push(Document { id, tokens: indices });
        }

        if out_docs.is_empty() {
            return Err(Error::AllDocumentsEmpty);
        }
        Ok(TokenCorpus {
            docs: out_docs,
            vocab,
            vocab_index,
            token_count,
        })
    }

    /// Number of (non-empty) documents.
    pub fn n(&self) -> usize {
        self.docs.len()
    }

    /// Unique token count.
    pub fn term_count(&self) -> usize {
        self.vocab.len()
    }

    /// Total token occurrences.
    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.docs.iter().map(|d| d.id.clone()).collect()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn token(&self, index: usize) -> &str {
        &self.vocab[index]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocab_index.get(token).copied()
    }

    /// Token strings of one document, resolved through the vocabulary.
    pub fn doc_tokens(&self, doc: usize) -> Vec<&str> {
        self.docs[doc].tokens.iter().map(|&i| self.token(i)).collect()
    }
}

/// Preprocess raw or pre-tokenized documents into a corpus.
///
/// Pre-tokenized input is whitespace-split only; raw input runs the full
/// tokenize -> stopword -> stem pipeline.
pub fn build_corpus(
    docs: Vec<RawDocument>,
    stops: &StopwordList,
    pre_tokenized: bool,
) -> Result<TokenCorpus> {
    let token_docs = docs
        .into_iter()
        .map(|doc| {
            let tokens = if pre_tokenized {
                doc.text.split_whitespace().map(str::to_owned).collect()
            } else {
                remove_stopwords(tokenize(&doc.text), stops)
                    .iter()
                    .map(|t| stem(t))
                    .collect()
            };
            (doc.id, tokens)
        })
        .collect();
    TokenCorpus::from_token_docs(token_docs)
}

/// Read a one-document-per-line file; the 1-based line number is the id.
pub fn read_line_documents(path: &Path) -> Result<Vec<RawDocument>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, line)| RawDocument::new((i + 1).to_string(), line))
        .collect())
}

/// Read a directory where each file is a document (filename as id),
/// in lexicographic filename order.
pub fn read_directory_documents(dir: &Path) -> Result<Vec<RawDocument>> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?
        .into_iter()
        .filter(|e| e.path().is_file())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    entries
        .into_iter()
        .map(|entry| {
            let path = entry.path();
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let id = entry.file_name().to_string_lossy().into_owned();
            Ok(RawDocument::new(id, text))
        })
        .collect()
}

/// Default English stopword list used when no file is supplied.
const ENGLISH_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
    "for", "with", "about", "against", "between", "into", "through", "during", "before",
    "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
    "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such",
    "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can",
    "will", "just", "don", "should", "now",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_case_fold_and_punctuation() {
        assert_eq!(tokenize("The cat, the CAT!"), vec!["the", "cat", "the", "cat"]);
    }

    #[test]
    fn tokenize_empty() {
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn tokenize_hyphens_and_digits() {
        assert_eq!(tokenize("COVID-19 spreads fast"), vec!["covid", "spreads", "fast"]);
    }

    #[test]
    fn stopwords_preserve_order() {
        let stops = StopwordList::new(["he", "said"]);
        let tokens = vec!["he".to_owned(), "said".to_owned(), "hello".to_owned()];
        assert_eq!(remove_stopwords(tokens, &stops), vec!["hello"]);
        assert_eq!(remove_stopwords(vec![], &stops), Vec::<String>::new());
    }

    #[test]
    fn stopwords_standard_list() {
        let stops = StopwordList::english();
        let tokens = ["she", "runs", "i", "run"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(remove_stopwords(tokens, &stops), vec!["runs", "run"]);
    }

    #[test]
    fn empty_docs_dropped() {
        let docs = vec![
            RawDocument::new("a", "walking dogs"),
            RawDocument::new("b", "the and of"),
            RawDocument::new("c", "cats sleep"),
        ];
        let corpus = build_corpus(docs, &StopwordList::english(), false).unwrap();
        assert_eq!(corpus.n(), 2);
        assert_eq!(corpus.doc_ids(), vec!["a", "c"]);
    }

    #[test]
    fn pre_tokenized_is_verbatim() {
        let docs = vec![RawDocument::new("1", "a b a")];
        let corpus = build_corpus(docs, &StopwordList::english(), true).unwrap();
        assert_eq!(corpus.doc_tokens(0), vec!["a", "b", "a"]);
        assert_eq!(corpus.index_of("a"), Some(0));
        assert_eq!(corpus.index_of("b"), Some(1));
        assert_eq!(corpus.term_count(), 2);
        assert_eq!(corpus.token_count(), 3);
    }

    #[test]
    fn manual_counts() {
        let docs = vec![
            RawDocument::new("1", "Dogs chase cats; dogs bark."),
            RawDocument::new("2", "Cats sleep."),
        ];
        // after stopword removal and stemming: [dog, chase, cat, dog, bark], [cat, sleep]
        let corpus = build_corpus(docs, &StopwordList::english(), false).unwrap();
        assert_eq!(corpus.token_count(), 7);
        assert_eq!(corpus.term_count(), 5);
        assert_eq!(corpus.doc_tokens(0), vec!["dog", "chase", "cat", "dog", "bark"]);
        assert_eq!(corpus.doc_tokens(1), vec!["cat", "sleep"]);
    }

    #[test]
    fn duplicate_id_rejected() {
        let docs = vec![RawDocument::new("x", "one two"), RawDocument::new("x", "three")];
        match build_corpus(docs, &StopwordList::empty(), true) {
            Err(Error::DuplicateId(id)) => assert_eq!(id, "x"),
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn all_empty_rejected() {
        let docs = vec![RawDocument::new("1", ""), RawDocument::new("2", "the")];
        match build_corpus(docs, &StopwordList::english(), false) {
            Err(Error::AllDocumentsEmpty) => {}
            other => panic!("expected AllDocumentsEmpty, got {other:?}"),
        }
    }

    #[test]
    fn comma_in_id_rejected() {
        let docs = vec![RawDocument::new("a,b", "word")];
        assert!(matches!(
            build_corpus(docs, &StopwordList::empty(), true),
            Err(Error::InvalidDocumentId(_))
        ));
    }

    #[test]
    fn counts_recomputable() {
        let docs = vec![
            RawDocument::new("1", "alpha beta alpha"),
            RawDocument::new("2", "beta gamma"),
        ];
        let corpus = build_corpus(docs, &StopwordList::empty(), true).unwrap();
        let recount: usize = corpus.docs().iter().map(|d| d.tokens.len()).sum();
        assert_eq!(recount, corpus.token_count());
        let uniq: std::collections::HashSet<usize> = corpus
            .docs()
            .iter()
            .flat_map(|d| d.tokens.iter().copied())
            .collect();
        assert_eq!(uniq.len(), corpus.term_count());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn token_docs() -> impl Strategy<Value = Vec<(String, Vec<String>)>> {
        let token = proptest::sample::select(vec!["ant", "bee", "cat", "dog", "elk", "fox"]);
        let doc = proptest::collection::vec(token, 1..12);
        proptest::collection::vec(doc, 1..10).prop_map(|docs| {
            docs.into_iter()
                .enumerate()
                .map(|(i, tokens)| {
                    (
                        i.to_string(),
                        tokens.into_iter().map(str::to_owned).collect(),
                    )
                })
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn counts_and_vocab_consistent(docs in token_docs()) {
            let corpus = TokenCorpus::from_token_docs(docs.clone()).unwrap();
            let recount: usize = corpus.docs().iter().map(|d| d.tokens.len()).sum();
            prop_assert_eq!(recount, corpus.token_count());
            let uniq: std::collections::HashSet<usize> = corpus
                .docs()
                .iter()
                .flat_map(|d| d.tokens.iter().copied())
                .collect();
            prop_assert_eq!(uniq.len(), corpus.term_count());
            prop_assert_eq!(corpus.n(), docs.len());
        }

        #[test]
        fn build_is_deterministic(docs in token_docs()) {
            let a = TokenCorpus::from_token_docs(docs.clone()).unwrap();
            let b = TokenCorpus::from_token_docs(docs).unwrap();
            prop_assert_eq!(a.vocab(), b.vocab());
            for i in 0..a.n() {
                prop_assert_eq!(a.doc_tokens(i), b.doc_tokens(i));
            }
        }

        #[test]
        fn pre_tokenized_never_alters_tokens(docs in token_docs()) {
            let raw: Vec<RawDocument> = docs
                .iter()
                .map(|(id, tokens)| RawDocument::new(id.clone(), tokens.join(" ")))
                .collect();
            let corpus = build_corpus(raw, &StopwordList::english(), true).unwrap();
            for (i, (_, tokens)) in docs.iter().enumerate() {
                let got = corpus.doc_tokens(i);
                prop_assert_eq!(&got, tokens);
            }
        }
    }
}
