//! Wire protocol v1 between the harness and an external worker.
//!
//! One JSON object per line over the worker's stdin/stdout. The worker
//! announces itself with `{"ready":true,"protocol":1}`; every request carries
//! an `id` that the response must echo. Masks travel as canonical RLE text.
//! Unknown fields are ignored in both directions.

use serde::{Deserialize, Serialize};

use crate::dataio::rle::{rle_decode, rle_encode};
use crate::types::BinaryMask;

use super::BackendError;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub ready: bool,
    pub protocol: u32,
}

impl Handshake {
    pub fn current() -> Self {
        Self {
            ready: true,
            protocol: PROTOCOL_VERSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireMask {
    pub index: usize,
    pub rle: String,
}

impl WireMask {
    pub fn encode(index: usize, mask: &BinaryMask) -> Self {
        Self {
            index,
            rle: rle_encode(mask).to_string(),
        }
    }

    pub fn decode(&self) -> Result<BinaryMask, BackendError> {
        rle_decode(&self.rle).map_err(|e| BackendError::Protocol(format!("mask for frame {}: {e}", self.index)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Request {
    Predict {
        id: String,
        expression: String,
        frames: Vec<String>,
        indices: Vec<usize>,
        height: usize,
        width: usize,
    },
    Propagate {
        id: String,
        frames: Vec<String>,
        prompts: Vec<WireMask>,
        targets: Vec<usize>,
        direction: String,
        height: usize,
        width: usize,
    },
}

impl Request {
    pub fn id(&self) -> &str {
        match self {
            Request::Predict { id, .. } | Request::Propagate { id, .. } => id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<Vec<WireMask>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    pub fn masks(id: &str, masks: Vec<WireMask>) -> Self {
        Self {
            id: serde_json::Value::String(id.to_string()),
            masks: Some(masks),
            error: None,
        }
    }

    pub fn error(id: serde_json::Value, message: impl Into<String>) -> Self {
        Self {
            id,
            masks: None,
            error: Some(message.into()),
        }
    }
}

/// Decodes a response for request `id`, requiring one mask per expected
/// frame, in order, with the given dimensions.
pub fn decode_response(
    line: &str,
    id: &str,
    expected_frames: &[usize],
    dims: (usize, usize),
) -> Result<Vec<(usize, BinaryMask)>, BackendError> {
    let resp: Response =
        serde_json::from_str(line).map_err(|e| BackendError::Protocol(format!("unparseable response: {e}")))?;
    if resp.id.as_str() != Some(id) {
        return Err(BackendError::Protocol(format!(
            "response id {} does not match request id {id}",
            resp.id
        )));
    }
    if let Some(err) = resp.error {
        return Err(BackendError::Remote(err));
    }
    let masks = resp
        .masks
        .ok_or_else(|| BackendError::Protocol("response has neither masks nor error".into()))?;
    let got: Vec<usize> = masks.iter().map(|m| m.index).collect();
    if got != expected_frames {
        return Err(BackendError::Protocol(format!(
            "response covers frames {got:?}, expected {expected_frames:?}"
        )));
    }
    masks
        .iter()
        .map(|m| {
            let mask = m.decode()?;
            if mask.dims() != dims {
                return Err(BackendError::Dimensions {
                    frame: m.index,
                    expected: dims,
                    actual: mask.dims(),
                });
            }
            Ok((m.index, mask))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_wire_shape() {
        let req = Request::Predict {
            id: "r1".into(),
            expression: "the cat".into(),
            frames: vec!["a.png".into()],
            indices: vec![0],
            height: 2,
            width: 3,
        };
        let v: serde_json::Value = serde_json::to_value(&req).unwrap();
        assert_eq!(v["kind"], "predict");
        assert_eq!(v["id"], "r1");
        assert_eq!(v["indices"], serde_json::json!([0]));
        let line = serde_json::to_string(&req).unwrap();
        assert!(!line.contains('\n'));
        assert_eq!(serde_json::from_str::<Request>(&line).unwrap(), req);
    }

    #[test]
    fn response_decoding() {
        let ok = r#"{"id":"r1","masks":[{"index":3,"rle":"1 2\n0 2"}],"extra":true}"#;
        let masks = decode_response(ok, "r1", &[3], (1, 2)).unwrap();
        assert_eq!(masks[0].1, BinaryMask::full(1, 2).unwrap());
        assert!(matches!(
            decode_response(ok, "r2", &[3], (1, 2)),
            Err(BackendError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(ok, "r1", &[3, 4], (1, 2)),
            Err(BackendError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(ok, "r1", &[3], (2, 1)),
            Err(BackendError::Dimensions { .. })
        ));
        assert!(matches!(
            decode_response("{not json", "r1", &[3], (1, 2)),
            Err(BackendError::Protocol(_))
        ));
        let err = r#"{"id":"r1","error":"out of memory"}"#;
        assert!(
            matches!(decode_response(err, "r1", &[3], (1, 2)), Err(BackendError::Remote(m)) if m == "out of memory")
        );
        let bad_rle = r#"{"id":"r1","masks":[{"index":3,"rle":"1 2\n5"}]}"#;
        assert!(matches!(
            decode_response(bad_rle, "r1", &[3], (1, 2)),
            Err(BackendError::Protocol(_))
        ));
    }

    #[test]
    fn handshake_shape() {
        assert_eq!(
            serde_json::to_string(&Handshake::current()).unwrap(),
            r#"{"ready":true,"protocol":1}"#
        );
    }
}
