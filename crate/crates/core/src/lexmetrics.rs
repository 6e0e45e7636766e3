//! Readability (Flesch-Kincaid grade level) and lexical diversity (Yule's K).

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::{self, PreparedText, StopPolicy, TextError, Token};

#[derive(Debug, Error)]
pub enum LexError {
    #[error("readability needs at least one word and one sentence")]
    NoWords,
    #[error("frequency spectrum of an empty token list")]
    EmptySpectrum,
    #[error(transparent)]
    Text(#[from] TextError),
}

/// Flesch-Kincaid grade level from raw counts.
pub fn fkgl_from_counts(words: usize, sentences: usize, syllables: usize) -> Result<f64, LexError> {
    if words == 0 || sentences == 0 {
        return Err(LexError::NoWords);
    }
    let words_per_sentence = words as f64 / sentences as f64;
    let syllables_per_word = syllables as f64 / words as f64;
    Ok(0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59)
}

/// Flesch-Kincaid grade level of a prepared text (unfiltered counts).
pub fn fkgl(text: &PreparedText) -> Result<f64, LexError> {
    fkgl_from_counts(text.word_count, text.sentence_count, text.syllable_count)
}

/// Type frequency spectrum: how many types occur exactly `i` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencySpectrum {
    pub n_tokens: usize,
    pub n_types: usize,
    pub spectrum: BTreeMap<usize, usize>,
}

impl FrequencySpectrum {
    pub fn from_counts<I: IntoIterator<Item = usize>>(type_counts: I) -> Result<Self, LexError> {
        let mut spectrum = BTreeMap::new();
        let mut n_tokens = 0;
        let mut n_types = 0;
        for count in type_counts.into_iter().filter(|&c| c > 0) {
            *spectrum.entry(count).or_insert(0) += 1;
            n_tokens += count;
            n_types += 1;
        }
        if n_tokens == 0 {
            return Err(LexError::EmptySpectrum);
        }
        Ok(Self {
            n_tokens,
            n_types,
            spectrum,
        })
    }

    /// Σ f(i)·i², the only moment Yule's K needs.
    fn second_moment(&self) -> u128 {
        self.spectrum
            .iter()
            .map(|(&i, &f)| f as u128 * (i as u128) * (i as u128))
            .sum()
    }
}

pub fn frequency_spectrum<'a, I>(tokens: I) -> Result<FrequencySpectrum, LexError>
where
    I: IntoIterator<Item = &'a Token>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in tokens {
        *counts.entry(t.surface.as_str()).or_insert(0) += 1;
    }
    FrequencySpectrum::from_counts(counts.into_values())
}

/// Yule's K: `10⁴ · (Σ f(i)·i² − N) / N²`.
///
/// This is the usual `10⁴ · (−1/N + Σ f(i)·(i/N)²)` with the sum taken in
/// integers, so the all-unique case is exactly zero.
pub fn yules_k(spec: &FrequencySpectrum) -> f64 {
    let n = spec.n_tokens as u128;
    let excess = spec.second_moment() - n;
    1e4 * excess as f64 / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexScores {
    pub fkgl: f64,
    pub yules_k: f64,
}

/// Scores a prepared text: both metrics use the tokens before stopword removal.
pub fn score_prepared(text: &PreparedText) -> Result<LexScores, LexError> {
    Ok(LexScores {
        fkgl: fkgl(text)?,
        yules_k: yules_k(&frequency_spectrum(text.tokens())?),
    })
}

pub fn score_text(text: &str, policy: &StopPolicy) -> Result<LexScores, LexError> {
    score_prepared(&textprep::prepare(text, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::tokenize;
    use proptest::prelude::*;

    fn spectrum_of(words: &[&str]) -> FrequencySpectrum {
        frequency_spectrum(&tokenize(&words.join(" "), 0)).unwrap()
    }

    #[test]
    fn fkgl_hand_values() {
        assert!((fkgl_from_counts(6, 1, 6).unwrap() - (-1.45)).abs() < 1e-12);
        assert!((fkgl_from_counts(1, 1, 1).unwrap() - (-3.40)).abs() < 1e-12);
        assert!(matches!(fkgl_from_counts(0, 1, 0), Err(LexError::NoWords)));
        assert!(matches!(fkgl_from_counts(3, 0, 3), Err(LexError::NoWords)));
    }

    #[test]
    fn technical_paragraph_lands_in_grade_band() {
        let text = "The journal publishes original research on the interface between ecological \
                    science and the management of biological resources. The editors welcome \
                    manuscripts that address the practical application of ecological knowledge to \
                    environmental problems faced by managers and policy makers. Submissions should \
                    have clear management implications and be of interest to an international \
                    readership. We consider research on all taxa and ecosystems, including studies \
                    of conservation, agriculture, fisheries, forestry and urban landscapes, \
                    provided that the work offers general lessons beyond the particular system \
                    studied.";
        let s = score_text(text, &StopPolicy::default()).unwrap();
        assert!((9.0..=23.0).contains(&s.fkgl), "fkgl = {}", s.fkgl);
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum_of(&["a", "b", "c"]);
        assert_eq!((s.n_tokens, s.n_types), (3, 3));
        assert_eq!(s.spectrum, BTreeMap::from([(1, 3)]));
        let s = spectrum_of(&["a", "a", "b"]);
        assert_eq!((s.n_tokens, s.n_types), (3, 2));
        assert_eq!(s.spectrum, BTreeMap::from([(1, 1), (2, 1)]));
        assert!(matches!(frequency_spectrum(&[]), Err(LexError::EmptySpectrum)));
    }

    #[test]
    fn yules_k_examples() {
        assert_eq!(yules_k(&spectrum_of(&["a", "b", "c", "d"])), 0.0);
        let ten = FrequencySpectrum::from_counts([10]).unwrap();
        assert_eq!(yules_k(&ten), 9000.0);
        assert!((yules_k(&spectrum_of(&["a", "a", "b"])) - 2222.2222222222).abs() < 1e-9);
    }

    #[test]
    fn single_word_text() {
        let s = score_text("Word.", &StopPolicy::default()).unwrap();
        assert!((s.fkgl - (-3.40)).abs() < 1e-12);
        assert_eq!(s.yules_k, 0.0);
    }

    #[test]
    fn repetitive_statement_scores_highest() {
        let texts = [
            "The International Journal of Educational Organization and Leadership inquiries into \
             the nature and processes of effective educational administration and leadership.",
            "We publish original empirical research on marketing, consumer behaviour and brand \
             strategy across diverse industries.",
            "Papers address auditing, taxation, disclosure regulation and capital markets in \
             emerging economies worldwide.",
            "Submissions cover logistics, procurement networks, inventory optimization and \
             service operations.",
        ];
        let scores: Vec<f64> = texts
            .iter()
            .map(|t| score_text(t, &StopPolicy::default()).unwrap().yules_k)
            .collect();
        assert!(scores[1..].iter().all(|&k| k < scores[0]), "{scores:?}");
    }

    #[test]
    fn duplicated_text_keeps_fkgl() {
        let text = "Management research matters. Rigorous studies inform practice and policy!";
        let once = score_text(text, &StopPolicy::default()).unwrap();
        let twice = score_text(&format!("{text} {text}"), &StopPolicy::default()).unwrap();
        assert_eq!(once.fkgl, twice.fkgl);

        let p1 = textprep::prepare(text, &StopPolicy::default()).unwrap();
        let p2 = textprep::prepare(&format!("{text} {text}"), &StopPolicy::default()).unwrap();
        let s1 = frequency_spectrum(p1.tokens()).unwrap();
        let s2 = frequency_spectrum(p2.tokens()).unwrap();
        let doubled: BTreeMap<usize, usize> = s1.spectrum.iter().map(|(&i, &f)| (2 * i, f)).collect();
        assert_eq!(s2.spectrum, doubled);
        assert_eq!(s2.n_tokens, 2 * s1.n_tokens);
    }

    proptest! {
        #[test]
        fn spectrum_identities(counts in proptest::collection::vec(1usize..30, 1..40)) {
            let s = FrequencySpectrum::from_counts(counts.iter().copied()).unwrap();
            prop_assert_eq!(s.spectrum.values().sum::<usize>(), s.n_types);
            prop_assert_eq!(s.spectrum.iter().map(|(i, f)| i * f).sum::<usize>(), s.n_tokens);
            prop_assert!(s.spectrum.keys().all(|&i| i >= 1 && i <= s.n_tokens));
        }

        #[test]
        fn k_bounds(counts in proptest::collection::vec(1usize..30, 1..40)) {
            let s = FrequencySpectrum::from_counts(counts).unwrap();
            let k = yules_k(&s);
            let n = s.n_tokens as f64;
            prop_assert!(k >= 0.0);
            prop_assert!(k <= 1e4 * (1.0 - 1.0 / n) + 1e-9);
        }

        #[test]
        fn k_is_permutation_invariant(
            words in proptest::collection::vec("[a-e]", 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = words.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = spectrum_of(&words.iter().map(String::as_str).collect::<Vec<_>>());
            let b = spectrum_of(&shuffled.iter().map(String::as_str).collect::<Vec<_>>());
            prop_assert_eq!(yules_k(&a), yules_k(&b));
        }

        #[test]
        fn k_of_repeated_text(words in proptest::collection::vec("[a-f]", 1..20), k in 1usize..5) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let base = spectrum_of(&refs);
            let repeated: Vec<&str> = refs.iter().copied().cycle().take(refs.len() * k).collect();
            let rep = spectrum_of(&repeated);
            let expected: BTreeMap<usize, usize> =
                base.spectrum.iter().map(|(&i, &f)| (i * k, f)).collect();
            prop_assert_eq!(&rep.spectrum, &expected);
            prop_assert_eq!(rep.n_tokens, base.n_tokens * k);
            let direct = FrequencySpectrum::from_counts(
                base.spectrum.iter().flat_map(|(&i, &f)| std::iter::repeat_n(i * k, f)),
            ).unwrap();
            prop_assert_eq!(yules_k(&rep), yules_k(&direct));
        }

        #[test]
        fn fkgl_monotone(w in 1usize..200, s in 1usize..20, syl_extra in 0usize..200) {
            let syl = w + syl_extra;
            let base = fkgl_from_counts(w, s, syl).unwrap();
            prop_assert!(fkgl_from_counts(w, s, syl + 1).unwrap() > base);
            // more words per sentence at fixed syllables/word
            prop_assert!(fkgl_from_counts(2 * w, s, 2 * syl).unwrap() > base);
        }
    }
}
