//! Certified sequences shipped with the crate.

use crate::exploration::ExplorationSequence;

const N3: &str = include_str!("../sequences/n3.seq");
const N4: &str = include_str!("../sequences/n4.seq");
const N5: &str = include_str!("../sequences/n5.seq");
const N6: &str = include_str!("../sequences/n6.seq");

/// The bundled sequence certified for `n`, if there is one.
pub fn bundled(n: usize) -> Option<ExplorationSequence> {
    let text = match n {
        3 => N3,
        4 => N4,
        5 => N5,
        6 => N6,
        _ => return None,
    };
    Some(ExplorationSequence::parse(text).expect("bundled sequences parse"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exploration::{verify_sequence, Certification, VerifyOptions};

    #[test]
    fn bundled_sequences_are_certified() {
        for n in 3..=4 {
            let s = bundled(n).unwrap();
            assert_eq!(s.certified_n, n);
            assert_eq!(s.certification, Certification::Exhaustive);
            assert!(verify_sequence(&s.terms, n, &VerifyOptions::default()).unwrap().is_certified());
        }
        assert_eq!(bundled(5).unwrap().len(), 40);
        assert_eq!(bundled(6).unwrap().certification, Certification::Sampled { seed: 1 });
        assert!(bundled(7).is_none());
    }
}
