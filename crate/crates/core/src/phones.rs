//! The stress-free ARPAbet phone set plus the silence pseudo-phone `PAU`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One phone. The 39 stress-free ARPAbet symbols plus `PAU`, the reserved
/// silence marker.
///
/// Variants are declared in alphabetical symbol order. Because `-` sorts
/// before every ASCII letter, the derived `Ord` on [`Diphone`] coincides with
/// lexicographic order of its canonical `LEFT-RIGHT` string; tie-breaking in
/// popularity ordering relies on this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Phoneme {
    AA,
    AE,
    AH,
    AO,
    AW,
    AY,
    B,
    CH,
    D,
    DH,
    EH,
    ER,
    EY,
    F,
    G,
    HH,
    IH,
    IY,
    JH,
    K,
    L,
    M,
    N,
    NG,
    OW,
    OY,
    P,
    PAU,
    R,
    S,
    SH,
    T,
    TH,
    UH,
    UW,
    V,
    W,
    Y,
    Z,
    ZH,
}

impl Phoneme {
    /// Every phone, in alphabetical symbol order.
    pub const ALL: [Phoneme; 40] = [
        Phoneme::AA,
        Phoneme::AE,
        Phoneme::AH,
        Phoneme::AO,
        Phoneme::AW,
        Phoneme::AY,
        Phoneme::B,
        Phoneme::CH,
        Phoneme::D,
        Phoneme::DH,
        Phoneme::EH,
        Phoneme::ER,
        Phoneme::EY,
        Phoneme::F,
        Phoneme::G,
        Phoneme::HH,
        Phoneme::IH,
        Phoneme::IY,
        Phoneme::JH,
        Phoneme::K,
        Phoneme::L,
        Phoneme::M,
        Phoneme::N,
        Phoneme::NG,
        Phoneme::OW,
        Phoneme::OY,
        Phoneme::P,
        Phoneme::PAU,
        Phoneme::R,
        Phoneme::S,
        Phoneme::SH,
        Phoneme::T,
        Phoneme::TH,
        Phoneme::UH,
        Phoneme::UW,
        Phoneme::V,
        Phoneme::W,
        Phoneme::Y,
        Phoneme::Z,
        Phoneme::ZH,
    ];

    /// Canonical uppercase symbol.
    pub fn symbol(self) -> &'static str {
        match self {
            Phoneme::AA => "AA",
            Phoneme::AE => "AE",
            Phoneme::AH => "AH",
            Phoneme::AO => "AO",
            Phoneme::AW => "AW",
            Phoneme::AY => "AY",
            Phoneme::B => "B",
            Phoneme::CH => "CH",
            Phoneme::D => "D",
            Phoneme::DH => "DH",
            Phoneme::EH => "EH",
            Phoneme::ER => "ER",
            Phoneme::EY => "EY",
            Phoneme::F => "F",
            Phoneme::G => "G",
            Phoneme::HH => "HH",
            Phoneme::IH => "IH",
            Phoneme::IY => "IY",
            Phoneme::JH => "JH",
            Phoneme::K => "K",
            Phoneme::L => "L",
            Phoneme::M => "M",
            Phoneme::N => "N",
            Phoneme::NG => "NG",
            Phoneme::OW => "OW",
            Phoneme::OY => "OY",
            Phoneme::P => "P",
            Phoneme::PAU => "PAU",
            Phoneme::R => "R",
            Phoneme::S => "S",
            Phoneme::SH => "SH",
            Phoneme::T => "T",
            Phoneme::TH => "TH",
            Phoneme::UH => "UH",
            Phoneme::UW => "UW",
            Phoneme::V => "V",
            Phoneme::W => "W",
            Phoneme::Y => "Y",
            Phoneme::Z => "Z",
            Phoneme::ZH => "ZH",
        }
    }

    /// Parses a raw ARPAbet label: trailing stress digits are stripped and the
    /// symbol is uppercased, so `"ah0"` and `"AH"` both yield [`Phoneme::AH`].
    /// Returns `None` for anything outside the 39-phone set plus `PAU`.
    pub fn from_arpabet(raw: &str) -> Option<Phoneme> {
        let stripped = raw.trim().trim_end_matches(|c: char| c.is_ascii_digit());
        if stripped.is_empty() || stripped.len() > 3 {
            return None;
        }
        let upper = stripped.to_ascii_uppercase();
        Phoneme::ALL
            .iter()
            .copied()
            .find(|p| p.symbol() == upper)
    }

    pub fn is_pau(self) -> bool {
        self == Phoneme::PAU
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Phoneme {
    type Err = UnknownPhoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Phoneme::from_arpabet(s).ok_or_else(|| UnknownPhoneError {
            token: s.to_string(),
        })
    }
}

/// A token failed to parse as an ARPAbet phone.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown phone {token:?}")]
pub struct UnknownPhoneError {
    pub token: String,
}

/// An ordered pair of phones, the atomic synthesis unit key. Rendered as
/// `LEFT-RIGHT`, e.g. `AH-G`, which is also its serialized form so diphones
/// can key JSON maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diphone {
    pub left: Phoneme,
    pub right: Phoneme,
}

impl Diphone {
    pub fn new(left: Phoneme, right: Phoneme) -> Diphone {
        Diphone { left, right }
    }
}

impl Serialize for Diphone {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Diphone {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Diphone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.left, self.right)
    }
}

impl FromStr for Diphone {
    type Err = UnknownPhoneError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (left, right) = s.split_once('-').ok_or_else(|| UnknownPhoneError {
            token: s.to_string(),
        })?;
        Ok(Diphone::new(left.parse()?, right.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_stress_digits_and_uppercases() {
        assert_eq!(Phoneme::from_arpabet("AH0"), Some(Phoneme::AH));
        assert_eq!(Phoneme::from_arpabet("eh1"), Some(Phoneme::EH));
        assert_eq!(Phoneme::from_arpabet("EY2"), Some(Phoneme::EY));
        assert_eq!(Phoneme::from_arpabet("pau"), Some(Phoneme::PAU));
        assert_eq!(Phoneme::from_arpabet("ZH"), Some(Phoneme::ZH));
    }

    #[test]
    fn rejects_non_phones() {
        for bad in ["", "QX", "AHH", "0", "A-H", "sil", "spn"] {
            assert_eq!(Phoneme::from_arpabet(bad), None, "accepted {bad:?}");
        }
    }

    #[test]
    fn phone_set_is_complete_and_sorted() {
        assert_eq!(Phoneme::ALL.len(), 40);
        for pair in Phoneme::ALL.windows(2) {
            assert!(pair[0].symbol() < pair[1].symbol());
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn diphone_order_matches_canonical_string_order() {
        // Popularity tie-breaking sorts Diphone values directly and must agree
        // with lexicographic order of the "LEFT-RIGHT" rendering.
        let mut all = Vec::new();
        for &l in &Phoneme::ALL {
            for &r in &Phoneme::ALL {
                all.push(Diphone::new(l, r));
            }
        }
        let mut by_value = all.clone();
        by_value.sort();
        let mut by_string = all;
        by_string.sort_by_key(|d| d.to_string());
        assert_eq!(by_value, by_string);
    }

    #[test]
    fn diphone_round_trips_through_display() {
        let d = Diphone::new(Phoneme::AH, Phoneme::G);
        assert_eq!(d.to_string(), "AH-G");
        assert_eq!("AH-G".parse::<Diphone>().unwrap(), d);
        assert!("AH_G".parse::<Diphone>().is_err());
        assert!("AH-QX".parse::<Diphone>().is_err());
    }
}
