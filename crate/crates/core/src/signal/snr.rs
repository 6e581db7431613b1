use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::MultichannelSignal;
use crate::error::{Error, Result};

/// Per-channel and average SNR in dB.
///
/// A perfect estimate has infinite SNR. In JSON that is written as the
/// string `"inf"` since JSON numbers cannot carry infinities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    #[serde(serialize_with = "ser_db_vec", deserialize_with = "de_db_vec")]
    pub per_channel_db: Vec<f64>,
    #[serde(serialize_with = "ser_db", deserialize_with = "de_db")]
    pub average_db: f64,
}

impl SnrReport {
    pub fn from_channels(per_channel_db: Vec<f64>) -> Self {
        let average_db = per_channel_db.iter().sum::<f64>() / per_channel_db.len() as f64;
        Self {
            per_channel_db,
            average_db,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.average_db == f64::INFINITY
    }
}

/// `10 log10(sum s^2 / sum (s - estimate)^2)` for each channel.
pub fn snr(clean: &MultichannelSignal, estimate: &MultichannelSignal) -> Result<SnrReport> {
    if !clean.same_shape(estimate) {
        return Err(Error::Shape(format!(
            "clean is {}x{}, estimate is {}x{}",
            clean.len(),
            clean.channels(),
            estimate.len(),
            estimate.channels()
        )));
    }
    let per_channel = (0..clean.channels())
        .map(|c| {
            let (signal, error) = clean
                .channel(c)
                .iter()
                .zip(estimate.channel(c))
                .fold((0.0, 0.0), |(s, e), (x, y)| {
                    (s + x * x, e + (x - y) * (x - y))
                });
            if signal == 0.0 {
                return Err(Error::ZeroEnergy { channel: c });
            }
            Ok(if error == 0.0 {
                f64::INFINITY
            } else {
                10.0 * (signal / error).log10()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SnrReport::from_channels(per_channel))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Db {
    Finite(f64),
    Marker(String),
}

fn to_db(v: f64) -> Db {
    if v == f64::INFINITY {
        Db::Marker("inf".into())
    } else {
        Db::Finite(v)
    }
}

fn from_db<E: serde::de::Error>(d: Db) -> std::result::Result<f64, E> {
    match d {
        Db::Finite(v) => Ok(v),
        Db::Marker(s) if s == "inf" => Ok(f64::INFINITY),
        Db::Marker(s) => Err(E::custom(format!("invalid SNR value {s:?}"))),
    }
}

fn ser_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    to_db(*v).serialize(s)
}

fn ser_db_vec<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter().map(|&x| to_db(x)).collect::<Vec<_>>().serialize(s)
}

fn de_db<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    from_db(Db::deserialize(d)?)
}

fn de_db_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Vec::<Db>::deserialize(d)?
        .into_iter()
        .map(from_db)
        .collect()
}
