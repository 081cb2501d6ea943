//! The seven-attribute label vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of attribute classes.
pub const NUM_CLASSES: usize = 7;

/// Class names in fixed index order.
pub const CLASS_NAMES: [&str; NUM_CLASSES] = [
    "fire",
    "flag",
    "large_crowd",
    "other",
    "police",
    "sign",
    "student",
];

/// Index of the "other" class, which by annotation convention means none of
/// the remaining attributes apply.
pub const OTHER_CLASS: usize = 3;

/// Ordered 7-bit attribute vector.
///
/// Index order is fixed: 0=fire, 1=flag, 2=large_crowd, 3=other, 4=police,
/// 5=sign, 6=student. Serializes as a 7-character string of `0`/`1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LabelVector {
    bits: [bool; NUM_CLASSES],
}

impl LabelVector {
    pub fn new(bits: [bool; NUM_CLASSES]) -> Self {
        Self { bits }
    }

    /// All bits clear.
    pub fn empty() -> Self {
        Self::default()
    }

    /// A single-class vector with only bit `class` set.
    pub fn single(class: usize) -> Self {
        let mut bits = [false; NUM_CLASSES];
        bits[class] = true;
        Self { bits }
    }

    pub fn get(&self, class: usize) -> bool {
        self.bits[class]
    }

    pub fn set(&mut self, class: usize, value: bool) {
        self.bits[class] = value;
    }

    pub fn bits(&self) -> &[bool; NUM_CLASSES] {
        &self.bits
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when bit 3 ("other") is set together with any other bit.
    /// The annotation convention infers "other" from the absence of every
    /// positive attribute, so such vectors are suspicious but not illegal.
    pub fn violates_other_exclusivity(&self) -> bool {
        self.bits[OTHER_CLASS] && self.count_set() > 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<bool> {
        self.bits.to_vec()
    }
}

impl fmt::Display for LabelVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for LabelVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.len() != NUM_CLASSES {
            return Err(Error::BadLabel(s.to_string()));
        }
        let mut bits = [false; NUM_CLASSES];
        for (i, c) in s.chars().enumerate() {
            bits[i] = match c {
                '0' => false,
                '1' => true,
                _ => return Err(Error::BadLabel(s.to_string())),
            };
        }
        Ok(Self { bits })
    }
}

impl Serialize for LabelVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LabelVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let v: LabelVector = "1010010".parse().unwrap();
        assert!(v.get(0) && v.get(2) && v.get(5));
        assert!(!v.get(1) && !v.get(3) && !v.get(4) && !v.get(6));
        assert_eq!(v.to_string(), "1010010");
    }

    #[test]
    fn rejects_wrong_length() {
        assert!("101001".parse::<LabelVector>().is_err());
        assert!("10100100".parse::<LabelVector>().is_err());
        assert!("10a0010".parse::<LabelVector>().is_err());
    }

    #[test]
    fn other_exclusivity() {
        let other_plus_student: LabelVector = "0001001".parse().unwrap();
        assert!(other_plus_student.violates_other_exclusivity());
        let other_only: LabelVector = "0001000".parse().unwrap();
        assert!(!other_only.violates_other_exclusivity());
        let no_other: LabelVector = "1110111".parse().unwrap();
        assert!(!no_other.violates_other_exclusivity());
    }

    #[test]
    fn serde_uses_bit_string() {
        let v: LabelVector = "0100001".parse().unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, "\"0100001\"");
        let back: LabelVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
