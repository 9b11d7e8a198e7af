//! Exponent sequences `0 <= lambda_0 < lambda_1 < ...` spanning a Muntz space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::numeric::{compensated_sum, scaled_power};

/// Number of values a geometric family generates when no `len=` is given.
pub const DEFAULT_GEOMETRIC_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// `values[i] = scale * base^(start + i)`.
    Geometric {
        base: f64,
        scale: f64,
        start: u32,
    },
    List,
}

/// A finite, strictly increasing prefix of an exponent sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSequence {
    values: Vec<f64>,
    family: Family,
    origin_offset: usize,
}

#[derive(Deserialize)]
struct SequenceRepr {
    values: Vec<f64>,
    family: Family,
}

impl<'de> Deserialize<'de> for ExponentSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SequenceRepr::deserialize(d)?;
        ExponentSequence::with_family(repr.values, repr.family).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuntzSum {
    /// `sum 1/lambda_k` over the stored positive exponents.
    pub partial_sum: f64,
    /// `2 / lambda_last`, present when the prefix has the rapid increase property.
    pub tail_bound: Option<f64>,
}

impl ExponentSequence {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::with_family(values, Family::List)
    }

    fn with_family(values: Vec<f64>, family: Family) -> Result<Self> {
        if values.is_empty() {
            return Err(MuntzError::invalid("exponent sequence is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(MuntzError::invalid(format!("exponent {bad} is not a finite non-negative number")));
        }
        if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(MuntzError::invalid(format!(
                "exponents not strictly increasing at index {}: {} >= {}",
                i,
                values[i],
                values[i + 1]
            )));
        }
        let origin_offset = values.iter().position(|v| *v > 0.0).unwrap_or(values.len());
        Ok(ExponentSequence { values, family, origin_offset })
    }

    /// `len` values `scale * base^(start + i)`, each computed in double-double
    /// arithmetic and rounded once.
    pub fn geometric(base: f64, scale: f64, start: u32, len: usize) -> Result<Self> {
        if !(base >= 2.0) || !base.is_finite() {
            return Err(MuntzError::invalid(format!("geometric base must be >= 2, got {base}")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(MuntzError::invalid(format!("geometric scale must be positive, got {scale}")));
        }
        let values: Vec<f64> = (0..len).map(|i| scaled_power(scale, base, start + i as u32)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MuntzError::invalid(format!("geometric value at index {i} overflows")));
        }
        Self::with_family(values, Family::Geometric { base, scale, start })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Index of the first strictly positive exponent.
    pub fn origin_offset(&self) -> usize {
        self.origin_offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    /// Rapid increase property: `lambda_{k+1} >= 2 lambda_k` for every stored pair.
    pub fn is_rip(&self) -> Result<bool> {
        if self.values.len() < 2 {
            return Err(MuntzError::invalid("rapid increase needs at least two exponents"));
        }
        Ok(self.values.windows(2).all(|w| w[1] >= 2.0 * w[0]))
    }

    /// Greedy rapid-increase subsequence: starts at the first positive exponent
    /// and repeatedly takes the smallest index with `lambda_j >= 2 lambda_prev`.
    pub fn extract_rip_subsequence(&self, count: usize) -> Result<Vec<usize>> {
        if count == 0 {
            return Err(MuntzError::invalid("count must be positive"));
        }
        let mut picked = Vec::with_capacity(count.min(self.values.len()));
        let mut j = self.origin_offset;
        while picked.len() < count && j < self.values.len() {
            match picked.last() {
                Some(&prev) if self.values[j] < 2.0 * self.values[prev] => {}
                _ => picked.push(j),
            }
            j += 1;
        }
        if picked.len() < count {
            return Err(MuntzError::InsufficientSequence { requested: count, achieved: picked.len() });
        }
        Ok(picked)
    }

    pub fn subsequence(&self, indices: &[usize]) -> Result<Self> {
        let values = indices
            .iter()
            .map(|&i| self.get(i).ok_or_else(|| MuntzError::invalid(format!("index {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_values(values)
    }

    pub fn muntz_partial_sum(&self) -> MuntzSum {
        let partial_sum = compensated_sum(self.values.iter().filter(|v| **v > 0.0).map(|v| 1.0 / v));
        let last = *self.values.last().expect("non-empty");
        let tail_bound = match self.is_rip() {
            Ok(true) if last > 0.0 => Some(2.0 / last),
            _ => None,
        };
        MuntzSum { partial_sum, tail_bound }
    }
}

/// Parsed form of the `geometric:...` / `list:...` mini-language.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    Geometric { base: f64, scale: f64, start: u32, len: Option<usize> },
    List(Vec<f64>),
}

impl SequenceSpec {
    pub fn build(&self) -> Result<ExponentSequence> {
        match *self {
            SequenceSpec::Geometric { base, scale, start, len: Some(len) } => {
                ExponentSequence::geometric(base, scale, start, len)
            }
            SequenceSpec::Geometric { base, scale, start, len: None } => {
                // default length stops short of overflow
                let finite = (0..DEFAULT_GEOMETRIC_LEN)
                    .take_while(|&i| scaled_power(scale, base, start + i as u32).is_finite())
                    .count();
                ExponentSequence::geometric(base, scale, start, finite)
            }
            SequenceSpec::List(ref v) => ExponentSequence::from_values(v.clone()),
        }
    }
}

fn parse_num<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| MuntzError::Parse(format!("cannot parse {what} from {s:?}")))
}

impl FromStr for SequenceSpec {
    type Err = MuntzError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| MuntzError::Parse(format!("expected geometric:... or list:..., got {s:?}")))?;
        match kind.trim() {
            "geometric" => {
                let mut parts = rest.split(':');
                let base = parse_num("base", parts.next().unwrap_or(""))?;
                let (mut scale, mut start, mut len) = (1.0, 0, None);
                for opt in parts {
                    let (key, val) = opt
                        .split_once('=')
                        .ok_or_else(|| MuntzError::Parse(format!("expected key=value, got {opt:?}")))?;
                    match key.trim() {
                        "scale" => scale = parse_num("scale", val)?,
                        "start" => start = parse_num("start", val)?,
                        "len" => len = Some(parse_num("len", val)?),
                        other => return Err(MuntzError::Parse(format!("unknown geometric option {other:?}"))),
                    }
                }
                Ok(SequenceSpec::Geometric { base, scale, start, len })
            }
            "list" => {
                let values = rest.split(',').map(|v| parse_num("exponent", v)).collect::<Result<Vec<f64>>>()?;
                Ok(SequenceSpec::List(values))
            }
            other => Err(MuntzError::Parse(format!("unknown sequence family {other:?}"))),
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Geometric { base, scale, start, len } => {
                write!(f, "geometric:{base}:scale={scale}:start={start}")?;
                if let Some(len) = len {
                    write!(f, ":len={len}")?;
                }
                Ok(())
            }
            SequenceSpec::List(v) => {
                let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> ExponentSequence {
        ExponentSequence::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn rip_examples() {
        assert!(seq(&[0.0, 1.0, 2.0, 4.0, 8.0]).is_rip().unwrap());
        assert!(!seq(&[1.0, 2.0, 3.0]).is_rip().unwrap());
        let pow: Vec<f64> = (1..=12).map(|k| 2f64.powi(k)).collect();
        assert!(seq(&pow).is_rip().unwrap());
        assert!(seq(&[3.0]).is_rip().is_err());
    }

    #[test]
    fn rejects_non_increasing_and_negative() {
        assert!(ExponentSequence::from_values(vec![1.0, 1.0]).is_err());
        assert!(ExponentSequence::from_values(vec![-1.0, 1.0]).is_err());
        assert!(ExponentSequence::from_values(vec![0.0, f64::INFINITY]).is_err());
        assert!(ExponentSequence::from_values(vec![]).is_err());
    }

    #[test]
    fn greedy_extraction() {
        let s = seq(&[1.0, 1.5, 2.0, 3.0, 5.0, 9.0, 20.0, 50.0]);
        assert_eq!(s.extract_rip_subsequence(5).unwrap(), vec![0, 2, 4, 6, 7]);
        assert_eq!(seq(&[2.0, 4.0, 8.0]).extract_rip_subsequence(3).unwrap(), vec![0, 1, 2]);
        assert_eq!(
            seq(&[0.0, 1.0, 2.0, 3.0]).extract_rip_subsequence(3),
            Err(MuntzError::InsufficientSequence { requested: 3, achieved: 2 })
        );
    }

    #[test]
    fn extraction_accepts_exact_doubling() {
        let s = seq(&[1.0, 1.9, 2.0, 3.9, 4.0]);
        assert_eq!(s.extract_rip_subsequence(3).unwrap(), vec![0, 2, 4]);
    }

    #[test]
    fn partial_sums() {
        let g = ExponentSequence::geometric(2.0, 1.0, 1, 20).unwrap();
        let s = g.muntz_partial_sum();
        assert!((s.partial_sum - 1.0).abs() < 1e-6);
        assert_eq!(seq(&[0.0, 5.0]).muntz_partial_sum().partial_sum, 0.2);
        let upto_1024 = ExponentSequence::geometric(2.0, 1.0, 0, 11).unwrap();
        assert_eq!(upto_1024.values().last(), Some(&1024.0));
        assert_eq!(upto_1024.muntz_partial_sum().tail_bound, Some(0.001953125));
        assert_eq!(seq(&[1.0, 1.5]).muntz_partial_sum().tail_bound, None);
    }

    #[test]
    fn origin_offset_skips_zero() {
        assert_eq!(seq(&[0.0, 1.0]).origin_offset(), 1);
        assert_eq!(seq(&[3.0]).origin_offset(), 0);
    }

    #[test]
    fn spec_parsing() {
        let g: SequenceSpec = "geometric:2".parse().unwrap();
        let s = g.build().unwrap();
        assert_eq!(s.get(0), Some(1.0));
        assert_eq!(s.get(10), Some(1024.0));
        assert_eq!(s.len(), DEFAULT_GEOMETRIC_LEN);

        let g: SequenceSpec = "geometric:3:scale=0.5:start=2:len=4".parse().unwrap();
        assert_eq!(g.build().unwrap().values(), &[4.5, 13.5, 40.5, 121.5]);

        let l: SequenceSpec = "list:0,1,2.5".parse().unwrap();
        assert_eq!(l.build().unwrap().values(), &[0.0, 1.0, 2.5]);

        assert!("geometric:1".parse::<SequenceSpec>().unwrap().build().is_err());
        assert!("fibonacci:1".parse::<SequenceSpec>().is_err());
        assert!("geometric:2:foo=1".parse::<SequenceSpec>().is_err());
        assert!("list:1,x".parse::<SequenceSpec>().is_err());
    }

    #[test]
    fn default_length_stops_before_overflow() {
        let s: SequenceSpec = "geometric:1000".parse().unwrap();
        let seq = s.build().unwrap();
        assert!(seq.values().iter().all(|v| v.is_finite()));
        assert!(seq.len() < DEFAULT_GEOMETRIC_LEN);
        assert!(ExponentSequence::geometric(1000.0, 1.0, 0, 200).is_err());
    }

    #[test]
    fn json_roundtrip_revalidates() {
        let s = ExponentSequence::geometric(2.0, 1.0, 0, 5).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: ExponentSequence = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"values":[2,1],"family":{"kind":"list"}}"#;
        assert!(serde_json::from_str::<ExponentSequence>(bad).is_err());
    }
}
