use crate::bits::Bits;
use crate::error::{Error, Result};

/// Width of the right-vertex index that prefixes every KDF query.
pub const INDEX_BYTES: usize = 4;

/// `LE32(i) ‖ payload`, the payload's bits packed MSB-first with zero
/// padding. Injective for a fixed payload length.
pub fn encode_query(i: u32, payload: &Bits) -> Vec<u8> {
    let mut out = Vec::with_capacity(INDEX_BYTES + payload.as_bytes().len());
    out.extend_from_slice(&i.to_le_bytes());
    out.extend_from_slice(payload.as_bytes());
    out
}

/// Inverse of [`encode_query`] for a known payload length.
pub fn decode_query(msg: &[u8], payload_bits: usize) -> Result<(u32, Bits)> {
    let body_len = payload_bits.div_ceil(8);
    if msg.len() != INDEX_BYTES + body_len {
        return Err(Error::malformed(
            "query",
            format!("{} bytes, expected {}", msg.len(), INDEX_BYTES + body_len),
        ));
    }
    let i = u32::from_le_bytes(msg[..INDEX_BYTES].try_into().unwrap());
    let payload = Bits::from_hex(&hex::encode(&msg[INDEX_BYTES..]), payload_bits)?;
    Ok((i, payload))
}
