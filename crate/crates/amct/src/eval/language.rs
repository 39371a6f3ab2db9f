//! Script-range and stop-word language detection.
//!
//! Characters from distinctive scripts vote directly (Han -> zh, kana ->
//! ja, and so on); Latin-script text is resolved through small stop-word
//! tables. The language with the strictly largest vote count wins; ties or
//! zero evidence yield `None` ("unknown"). A heuristic, not a classifier:
//! it attributes reasoning spans for routing analytics, nothing more.

use std::collections::BTreeMap;

use crate::types::LanguageTag;

const EN_STOP_WORDS: &[&str] = &[
    "the", "and", "is", "of", "to", "in", "that", "it", "was", "for", "on", "are", "with", "as",
    "be", "this", "have", "not", "they", "what", "which", "because", "answer", "step",
];

const ID_STOP_WORDS: &[&str] = &[
    "yang", "dan", "di", "ini", "itu", "dengan", "untuk", "tidak", "dari", "adalah", "pada",
    "dalam", "akan", "bisa", "karena", "saja", "juga", "sudah", "atau", "kita", "saya", "apa",
    "bagaimana", "berapa", "jawaban",
];

const MS_STOP_WORDS: &[&str] = &[
    "yang", "dan", "di", "ini", "itu", "dengan", "untuk", "tidak", "dari", "adalah", "pada",
    "dalam", "akan", "boleh", "kerana", "sahaja", "juga", "sudah", "atau", "kita", "saya", "apa",
    "bagaimana", "berapa", "jawapan", "anda", "awak", "ialah",
];

fn script_of(ch: char) -> Option<&'static str> {
    match ch as u32 {
        0x4E00..=0x9FFF | 0x3400..=0x4DBF => Some("zh"),
        0x3040..=0x30FF => Some("ja"),
        0xAC00..=0xD7AF => Some("ko"),
        0x0600..=0x06FF => Some("ar"),
        0x0400..=0x04FF => Some("ru"),
        0x0900..=0x097F => Some("hi"),
        0x0980..=0x09FF => Some("bn"),
        0x0B80..=0x0BFF => Some("ta"),
        0x0E00..=0x0E7F => Some("th"),
        0x0590..=0x05FF => Some("he"),
        0x0370..=0x03FF => Some("el"),
        _ => None,
    }
}

/// Detect the dominant language of a text, or `None` when the evidence is
/// absent or tied.
pub fn detect_language(text: &str) -> Option<LanguageTag> {
    let mut votes: BTreeMap<&'static str, usize> = BTreeMap::new();

    for ch in text.chars() {
        if let Some(code) = script_of(ch) {
            *votes.entry(code).or_default() += 1;
        }
    }

    let lowered = text.to_lowercase();
    let tokens: Vec<&str> = lowered
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .collect();
    for (code, table) in [("en", EN_STOP_WORDS), ("id", ID_STOP_WORDS), ("ms", MS_STOP_WORDS)] {
        let count = tokens.iter().filter(|t| table.contains(t)).count();
        if count > 0 {
            *votes.entry(code).or_default() += count;
        }
    }

    let best = votes.iter().max_by_key(|(_, n)| **n)?;
    let tied = votes.values().filter(|n| *n == best.1).count() > 1;
    if tied {
        return None;
    }
    Some(LanguageTag::new(*best.0).expect("table codes are valid"))
}
