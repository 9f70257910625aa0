//! Lossless JSON encoding of named reals: finite values are numbers, the
//! non-finite ones the strings `"Infinity"`, `"-Infinity"` and `"NaN"`.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy)]
pub struct Tagged(pub f64);

impl Serialize for Tagged {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if v > 0.0 {
            s.serialize_str("Infinity")
        } else {
            s.serialize_str("-Infinity")
        }
    }
}

impl<'de> Deserialize<'de> for Tagged {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Tagged(v)),
            Raw::Str(s) => match s.as_str() {
                "Infinity" => Ok(Tagged(f64::INFINITY)),
                "-Infinity" => Ok(Tagged(f64::NEG_INFINITY)),
                "NaN" => Ok(Tagged(f64::NAN)),
                other => Err(D::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

pub mod map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut out = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            out.serialize_entry(k, &Tagged(*v))?;
        }
        out.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, Tagged>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.0)).collect())
    }
}

pub mod option_map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<BTreeMap<String, f64>>, s: S) -> Result<S::Ok, S::Error> {
        match m {
            Some(m) => super::map::serialize(m, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BTreeMap<String, f64>>, D::Error> {
        let raw = Option::<BTreeMap<String, Tagged>>::deserialize(d)?;
        Ok(raw.map(|m| m.into_iter().map(|(k, v)| (k, v.0)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "map")]
        m: BTreeMap<String, f64>,
    }

    #[test]
    fn round_trip() {
        let h = Holder {
            m: [("a".to_owned(), 1.5), ("b".to_owned(), f64::INFINITY), ("c".to_owned(), f64::NEG_INFINITY)]
                .into_iter()
                .collect(),
        };
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"m":{"a":1.5,"b":"Infinity","c":"-Infinity"}}"#);
        assert_eq!(serde_json::from_str::<Holder>(&json).unwrap(), h);
    }
}
