//! Serde helpers that write infinite costs as the string `"inf"`.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match Repr::deserialize(d)? {
        Repr::Num(x) => Ok(x),
        Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Repr::Text(t) => Err(de::Error::custom(format!(
            "expected a number or \"inf\", got {t:?}"
        ))),
    }
}

/// Formats a cost for text tables: `inf` or the shortest round-trip decimal.
pub fn fmt_cost(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct T {
        #[serde(with = "super")]
        x: f64,
    }

    #[test]
    fn round_trip() {
        for x in [0.5, f64::INFINITY, 0.0] {
            let s = serde_json::to_string(&T { x }).unwrap();
            assert_eq!(serde_json::from_str::<T>(&s).unwrap(), T { x });
        }
        assert_eq!(
            serde_json::to_string(&T { x: f64::INFINITY }).unwrap(),
            r#"{"x":"inf"}"#
        );
        assert!(serde_json::from_str::<T>(r#"{"x":"nan"}"#).is_err());
    }
}
