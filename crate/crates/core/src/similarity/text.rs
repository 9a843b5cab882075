//! Tokenization, sentence splitting and lexical (Jaccard) similarity.

use std::collections::BTreeSet;

/// Lowercased token set. Tokens are maximal runs of alphanumeric
/// characters; whitespace, punctuation and symbols all separate tokens.
pub fn token_set(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// |T(a) ∩ T(b)| / |T(a) ∪ T(b)|; two empty token sets are identical (1.0).
pub fn jaccard_similarity(a: &str, b: &str) -> f64 {
    jaccard_of_sets(&token_set(a), &token_set(b))
}

pub(crate) fn jaccard_of_sets(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Splits on `.`, `!` or `?` followed by whitespace. The terminator stays
/// with its sentence; pieces are trimmed and empty pieces dropped, so a
/// blank text has no sentences.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            if let Some(&(_, next)) = chars.peek() {
                if next.is_whitespace() {
                    let end = i + c.len_utf8();
                    push_trimmed(&mut sentences, &text[start..end]);
                    start = end;
                }
            }
        }
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard_similarity("the cat sat", "the cat sat"), 1.0);
        assert_eq!(jaccard_similarity("alpha beta", "gamma delta"), 0.0);
        assert_eq!(jaccard_similarity("the cat sat", "the cat ran"), 0.5);
        assert_eq!(jaccard_similarity("", "  "), 1.0);
        assert_eq!(jaccard_similarity("", "word"), 0.0);
    }

    #[test]
    fn tokenizer_normalizes() {
        let t = token_set("The CAT, the cat! Ünïcode-ÄÖ");
        let expected: BTreeSet<String> =
            ["the", "cat", "ünïcode", "äö"].iter().map(|s| s.to_string()).collect();
        assert_eq!(t, expected);
    }

    #[test]
    fn sentences() {
        assert_eq!(split_sentences("One. Two! Three? Four"), vec!["One.", "Two!", "Three?", "Four"]);
        assert_eq!(split_sentences("no terminator here"), vec!["no terminator here"]);
        assert_eq!(split_sentences("Score is 2.5 points."), vec!["Score is 2.5 points."]);
        assert_eq!(split_sentences("A.  \n B."), vec!["A.", "B."]);
        assert!(split_sentences("   ").is_empty());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn symmetric_and_reflexive(a in "[a-d ,.]{0,20}", b in "[a-d ,.]{0,20}") {
                prop_assert_eq!(jaccard_similarity(&a, &b), jaccard_similarity(&b, &a));
                prop_assert_eq!(jaccard_similarity(&a, &a), 1.0);
                let s = jaccard_similarity(&a, &b);
                prop_assert!((0.0..=1.0).contains(&s));
            }

            #[test]
            fn order_and_duplication_invariant(words in proptest::collection::vec("[a-e]{1,3}", 1..8), other in "[a-e ]{0,15}") {
                let forward = words.join(" ");
                let mut rev = words.clone();
                rev.reverse();
                rev.extend(words.iter().cloned());
                let shuffled = rev.join(" ");
                prop_assert_eq!(jaccard_similarity(&forward, &other), jaccard_similarity(&shuffled, &other));
            }
        }
    }
}
