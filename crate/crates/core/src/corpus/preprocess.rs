//! Tweet normalization and tokenization.
//!
//! Rules, in order:
//! 1. A leading `RT @name:` becomes `<rt>` and marks the tweet as a retweet.
//! 2. URLs become `<url>`, `@mentions` become `<user>`.
//! 3. Text is lowercased and split on whitespace and hard punctuation.
//! 4. Boundary punctuation is peeled off each piece; a piece survives only if
//!    what remains is alphanumeric with optional inner dashes. A leading `#`
//!    is stripped and the token is recorded as a hashtag.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";
pub const RT_TOKEN: &str = "<rt>";

pub fn is_placeholder(token: &str) -> bool {
    matches!(token, URL_TOKEN | USER_TOKEN | RT_TOKEN)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocessed {
    pub tokens: Vec<String>,
    pub is_retweet: bool,
    /// Space-joined tokens without placeholders; identical texts share a key.
    pub canonical_key: String,
    /// Hashtags (lowercase, without `#`) that survived filtering.
    pub hashtags: BTreeSet<String>,
    /// Screen name from the `RT @name:` prefix, as written.
    pub retweeted_user: Option<String>,
}

impl Preprocessed {
    /// True when no token survived.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn retweet_prefix() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?i:rt)\s+@(\w+)\s*:?").unwrap())
}

fn url_or_mention() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?P<url>(?:https?://|www\.)\S+)|(?P<user>@\w+)").unwrap())
}

/// Characters that always end a token.
fn is_hard_break(c: char) -> bool {
    matches!(
        c,
        ',' | ';' | ':' | '!' | '?' | '(' | ')' | '[' | ']' | '{' | '}' | '"' | '“' | '”' | '«' | '»' | '…'
    )
}

const CLITICS: [&str; 7] = ["n't", "'s", "'re", "'ve", "'ll", "'m", "'d"];

pub fn preprocess(raw_text: &str) -> Preprocessed {
    let mut out = Tokens::default();
    let mut rest = raw_text;

    if let Some(caps) = retweet_prefix().captures(raw_text) {
        out.push_placeholder(RT_TOKEN);
        out.retweeted_user = Some(caps[1].to_string());
        rest = &raw_text[caps.get(0).unwrap().end()..];
    }

    let mut last = 0;
    for caps in url_or_mention().captures_iter(rest) {
        let m = caps.get(0).unwrap();
        out.push_text(&rest[last..m.start()]);
        if caps.name("url").is_some() {
            out.push_placeholder(URL_TOKEN);
        } else {
            out.push_placeholder(USER_TOKEN);
        }
        last = m.end();
    }
    out.push_text(&rest[last..]);

    let is_retweet = out.tokens.first().map(String::as_str) == Some(RT_TOKEN);
    let canonical_key = out
        .tokens
        .iter()
        .filter(|t| !is_placeholder(t))
        .map(String::as_str)
        .collect::<Vec<_>>()
        .join(" ");
    Preprocessed {
        tokens: out.tokens,
        is_retweet,
        canonical_key,
        hashtags: out.hashtags,
        retweeted_user: out.retweeted_user,
    }
}

#[derive(Default)]
struct Tokens {
    tokens: Vec<String>,
    hashtags: BTreeSet<String>,
    retweeted_user: Option<String>,
}

impl Tokens {
    fn push_placeholder(&mut self, p: &str) {
        self.tokens.push(p.to_string());
    }

    fn push_text(&mut self, text: &str) {
        let lower = text.to_lowercase();
        for chunk in lower.split_whitespace() {
            if is_placeholder(chunk) {
                self.push_placeholder(chunk);
                continue;
            }
            for piece in chunk.split(is_hard_break) {
                self.push_piece(piece);
            }
        }
    }

    fn push_piece(&mut self, piece: &str) {
        // Clitics carry an apostrophe and never survive filtering, also when
        // detached from their word by a mention placeholder.
        if CLITICS.contains(&piece.replace('’', "'").as_str()) {
            return;
        }
        let (stem, _clitic) = split_clitic(piece);
        self.push_word(stem);
    }

    fn push_word(&mut self, word: &str) {
        let end = word.trim_end_matches(|c: char| !c.is_alphanumeric());
        let Some(first_alnum) = end.find(|c: char| c.is_alphanumeric()) else {
            return;
        };
        let is_hashtag = end[..first_alnum].ends_with('#');
        let core = &end[first_alnum..];
        if core.chars().all(|c| c.is_alphanumeric() || c == '-') {
            if is_hashtag {
                self.hashtags.insert(core.to_string());
            }
            self.tokens.push(core.to_string());
        }
    }
}

fn split_clitic(piece: &str) -> (&str, Option<&str>) {
    let normalized;
    let probe: &str = if piece.contains('’') {
        normalized = piece.replace('’', "'");
        &normalized
    } else {
        piece
    };
    for clitic in CLITICS {
        if probe.len() > clitic.len() && probe.ends_with(clitic) {
            let stem_len = probe.len() - clitic.len();
            let stem = &probe[..stem_len];
            if stem.chars().last().is_some_and(char::is_alphanumeric) {
                // Map the byte offset back onto the original string.
                let chars_in_stem = stem.chars().count();
                let split = piece.char_indices().nth(chars_in_stem).map_or(piece.len(), |(i, _)| i);
                return (&piece[..split], Some(&piece[split..]));
            }
        }
    }
    (piece, None)
}
