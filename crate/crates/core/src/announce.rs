//! Regime announcement record.
//!
//! A monitoring proxy tells receivers which jitter model currently holds
//! and with what parameters. Layout, all multi-byte fields big-endian:
//!
//! ```text
//! offset  size  field
//! 0       1     version (1)
//! 1       1     model id (0 = exponential, 1 = gamma)
//! 2       1     parameter count n (1 for exponential, 2 for gamma)
//! 3       8·n   parameters, IEEE-754 binary64 (exponential: rate; gamma: shape, scale)
//! 3+8n    4     window start (packet index, u32)
//! 7+8n    4     window length (packets, u32, ≥ 1)
//! ```
//!
//! Total length is `11 + 8·n`; anything else is rejected. There is no
//! checksum, the record is meant to ride inside an integrity-protected carrier.

use serde::{Deserialize, Serialize};

use crate::distributions::{ModelKind, ModelParams};
use crate::error::WireError;

pub const VERSION: u8 = 1;
const FIXED_LEN: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeAnnouncement {
    pub version: u8,
    pub model: ModelKind,
    pub params: Vec<f64>,
    pub window_start: u32,
    pub window_len: u32,
}

pub fn encoded_len(param_count: usize) -> usize {
    FIXED_LEN + 8 * param_count
}

impl RegimeAnnouncement {
    pub fn new(params: &ModelParams, window_start: u32, window_len: u32) -> Result<Self, WireError> {
        let a = RegimeAnnouncement {
            version: VERSION,
            model: params.kind(),
            params: params.values(),
            window_start,
            window_len,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), WireError> {
        if self.version != VERSION {
            return Err(WireError::UnknownVersion(self.version));
        }
        let expected = self.model.param_count();
        if self.params.len() != expected {
            return Err(WireError::ParamCount { model: self.model, expected, got: self.params.len() });
        }
        if let Some((index, &value)) = self.params.iter().enumerate().find(|(_, p)| !(**p > 0.0 && p.is_finite())) {
            return Err(WireError::BadParam { index, value });
        }
        if self.window_len == 0 {
            return Err(WireError::EmptyWindow);
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, WireError> {
        self.validate()?;
        Ok(ModelParams::from_values(self.model, &self.params).expect("validated parameters"))
    }

    pub fn encode(&self) -> Result<Vec<u8>, WireError> {
        self.validate()?;
        let mut out = Vec::with_capacity(encoded_len(self.params.len()));
        out.push(self.version);
        out.push(self.model.code());
        out.push(self.params.len() as u8);
        for p in &self.params {
            out.extend_from_slice(&p.to_be_bytes());
        }
        out.extend_from_slice(&self.window_start.to_be_bytes());
        out.extend_from_slice(&self.window_len.to_be_bytes());
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() < 3 {
            return Err(WireError::Length { expected: encoded_len(1), got: bytes.len() });
        }
        let version = bytes[0];
        if version != VERSION {
            return Err(WireError::UnknownVersion(version));
        }
        let model = ModelKind::from_code(bytes[1]).ok_or(WireError::UnknownModel(bytes[1]))?;
        let count = bytes[2] as usize;
        if count != model.param_count() {
            return Err(WireError::ParamCount { model, expected: model.param_count(), got: count });
        }
        let expected = encoded_len(count);
        if bytes.len() != expected {
            return Err(WireError::Length { expected, got: bytes.len() });
        }
        let params: Vec<f64> = bytes[3..3 + 8 * count]
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let tail = &bytes[3 + 8 * count..];
        let window_start = u32::from_be_bytes(tail[0..4].try_into().expect("4 bytes"));
        let window_len = u32::from_be_bytes(tail[4..8].try_into().expect("4 bytes"));
        let a = RegimeAnnouncement { version, model, params, window_start, window_len };
        a.validate()?;
        Ok(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn worked_example() -> RegimeAnnouncement {
        RegimeAnnouncement::new(&ModelParams::exponential(2.0).unwrap(), 0, 3500).unwrap()
    }

    #[test]
    fn worked_example_bytes() {
        let bytes = worked_example().encode().unwrap();
        assert_eq!(hex::encode(&bytes), "01000140000000000000000000000000000dac");
        assert_eq!(bytes.len(), 19);
    }

    #[test]
    fn gamma_length() {
        let a = RegimeAnnouncement::new(&ModelParams::gamma(4.0, 1.0).unwrap(), 14000, 3500).unwrap();
        assert_eq!(a.encode().unwrap().len(), 27);
    }

    #[test]
    fn encode_rejects_invalid() {
        let mut a = worked_example();
        a.window_len = 0;
        assert_eq!(a.encode(), Err(WireError::EmptyWindow));
        let mut a = worked_example();
        a.params.push(1.0);
        assert!(matches!(a.encode(), Err(WireError::ParamCount { .. })));
        let mut a = worked_example();
        a.params[0] = f64::NAN;
        assert!(matches!(a.encode(), Err(WireError::BadParam { index: 0, .. })));
        let mut a = worked_example();
        a.version = 2;
        assert_eq!(a.encode(), Err(WireError::UnknownVersion(2)));
    }

    #[test]
    fn decode_errors() {
        let bytes = worked_example().encode().unwrap();
        assert_eq!(
            RegimeAnnouncement::decode(&bytes[..18]),
            Err(WireError::Length { expected: 19, got: 18 })
        );
        let mut long = bytes.clone();
        long.push(0);
        assert_eq!(RegimeAnnouncement::decode(&long), Err(WireError::Length { expected: 19, got: 20 }));
        let mut bad_model = bytes.clone();
        bad_model[1] = 7;
        assert_eq!(RegimeAnnouncement::decode(&bad_model), Err(WireError::UnknownModel(7)));
        let mut bad_count = bytes.clone();
        bad_count[2] = 2;
        assert!(matches!(RegimeAnnouncement::decode(&bad_count), Err(WireError::ParamCount { .. })));
        let mut negative = bytes.clone();
        negative[3] = 0xC0;
        assert!(matches!(RegimeAnnouncement::decode(&negative), Err(WireError::BadParam { .. })));
        assert!(matches!(RegimeAnnouncement::decode(&[]), Err(WireError::Length { .. })));
    }

    #[test]
    fn json_form() {
        let json = serde_json::to_string(&worked_example()).unwrap();
        assert_eq!(json, r#"{"version":1,"model":"exponential","params":[2.0],"window_start":0,"window_len":3500}"#);
    }

    fn valid_announcement() -> impl Strategy<Value = RegimeAnnouncement> {
        let positive = prop_oneof![1e-300f64..1e300, 1e-6f64..1e3];
        (any::<bool>(), positive.clone(), positive, any::<u32>(), 1u32..).prop_map(|(gamma, p, q, start, len)| {
            let (model, params) = if gamma { (ModelKind::Gamma, vec![p, q]) } else { (ModelKind::Exponential, vec![p]) };
            RegimeAnnouncement { version: VERSION, model, params, window_start: start, window_len: len }
        })
    }

    proptest! {
        #[test]
        fn round_trips(a in valid_announcement()) {
            let bytes = a.encode().unwrap();
            prop_assert_eq!(bytes.len(), encoded_len(a.params.len()));
            prop_assert_eq!(RegimeAnnouncement::decode(&bytes).unwrap(), a);
        }

        #[test]
        fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..40)) {
            if let Ok(a) = RegimeAnnouncement::decode(&bytes) {
                prop_assert_eq!(a.encode().unwrap(), bytes);
            }
        }
    }
}
