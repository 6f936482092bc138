//! Word error rate via Levenshtein edit distance.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WerError {
    #[error("word error rate needs a non-empty reference")]
    EmptyReference,
}

/// Minimum number of substitutions, insertions, and deletions (unit cost)
/// turning `reference` into `hypothesis`.
pub fn edit_distance<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> usize {
    let mut previous: Vec<usize> = (0..=hypothesis.len()).collect();
    let mut current = vec![0; hypothesis.len() + 1];
    for (i, r) in reference.iter().enumerate() {
        current[0] = i + 1;
        for (j, h) in hypothesis.iter().enumerate() {
            let substitute = previous[j] + usize::from(r != h);
            current[j + 1] = substitute
                .min(previous[j + 1] + 1)
                .min(current[j] + 1);
        }
        std::mem::swap(&mut previous, &mut current);
    }
    previous[hypothesis.len()]
}

/// Edit distance divided by the reference length.
pub fn word_error_rate<T: PartialEq>(
    reference: &[T],
    hypothesis: &[T],
) -> Result<f64, WerError> {
    if reference.is_empty() {
        return Err(WerError::EmptyReference);
    }
    Ok(edit_distance(reference, hypothesis) as f64 / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn words(text: &str) -> Vec<&str> {
        text.split_whitespace().collect()
    }

    #[test]
    fn identical_sequences_have_zero_error() {
        let reference = words("alexa play some jazz music");
        assert_eq!(word_error_rate(&reference, &reference).unwrap(), 0.0);
    }

    #[test]
    fn counts_substitutions_insertions_and_deletions() {
        let reference = words("alexa call my phone");
        assert_eq!(
            word_error_rate(&reference, &words("alexa call my own phone")).unwrap(),
            0.25
        );
        assert_eq!(
            word_error_rate(&reference, &words("alexa call phone")).unwrap(),
            0.25
        );
        assert_eq!(
            word_error_rate(&reference, &words("alexa ring my phone")).unwrap(),
            0.25
        );
        assert_eq!(word_error_rate(&reference, &[]).unwrap(), 1.0);
    }

    #[test]
    fn error_rate_can_exceed_one() {
        let reference = words("hi");
        let hypothesis = words("so long and thanks");
        assert_eq!(word_error_rate(&reference, &hypothesis).unwrap(), 4.0);
    }

    #[test]
    fn empty_reference_is_rejected() {
        let empty: Vec<&str> = Vec::new();
        assert_eq!(
            word_error_rate(&empty, &words("anything")),
            Err(WerError::EmptyReference)
        );
    }

    /// Independent top-down formulation of the same metric.
    fn recursive_distance(
        r: &[u8],
        h: &[u8],
        i: usize,
        j: usize,
        memo: &mut HashMap<(usize, usize), usize>,
    ) -> usize {
        if i == r.len() {
            return h.len() - j;
        }
        if j == h.len() {
            return r.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let substitute =
            recursive_distance(r, h, i + 1, j + 1, memo) + usize::from(r[i] != h[j]);
        let delete = recursive_distance(r, h, i + 1, j, memo) + 1;
        let insert = recursive_distance(r, h, i, j + 1, memo) + 1;
        let best = substitute.min(delete).min(insert);
        memo.insert((i, j), best);
        best
    }

    proptest! {
        #[test]
        fn matches_recursive_oracle(
            reference in prop::collection::vec(0u8..3, 1..9),
            hypothesis in prop::collection::vec(0u8..3, 0..9),
        ) {
            let expected = recursive_distance(&reference, &hypothesis, 0, 0, &mut HashMap::new());
            prop_assert_eq!(edit_distance(&reference, &hypothesis), expected);
        }
    }
}
