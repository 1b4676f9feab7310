//! Serde helpers that keep non-finite floats representable in JSON.
//!
//! Finite values are written as numbers (shortest round-trip decimal);
//! `NaN`, `inf` and `-inf` are written as those strings.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn to_repr(v: f64) -> Repr {
    if v.is_finite() {
        Repr::Num(v)
    } else if v.is_nan() {
        Repr::Text("NaN".into())
    } else if v > 0.0 {
        Repr::Text("inf".into())
    } else {
        Repr::Text("-inf".into())
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(v) => Ok(v),
        Repr::Text(s) => match s.as_str() {
            "NaN" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(E::custom(format!("not a float: {other:?}"))),
        },
    }
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    to_repr(*v).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    from_repr(Repr::deserialize(d)?)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?
            .map(from_repr)
            .transpose()
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| to_repr(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(from_repr::<D::Error>)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "super")]
        a: f64,
        #[serde(with = "super::option")]
        b: Option<f64>,
        #[serde(with = "super::vec")]
        c: Vec<f64>,
    }

    #[test]
    fn non_finite_values_round_trip() {
        let p = Probe {
            a: f64::NAN,
            b: Some(f64::NEG_INFINITY),
            c: vec![0.1, f64::INFINITY, -0.0, 1e-300],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"a":"NaN","b":"-inf","c":[0.1,"inf",-0.0,1e-300]}"#);
        let q: Probe = serde_json::from_str(&s).unwrap();
        assert!(q.a.is_nan());
        assert_eq!(q.b, Some(f64::NEG_INFINITY));
        assert_eq!(q.c[1], f64::INFINITY);
        assert_eq!(q.c[2].to_bits(), (-0.0f64).to_bits());
        assert_eq!(q.c[3], 1e-300);
    }

    #[test]
    fn rejects_unknown_text() {
        assert!(serde_json::from_str::<Probe>(r#"{"a":"x","b":null,"c":[]}"#).is_err());
    }
}
