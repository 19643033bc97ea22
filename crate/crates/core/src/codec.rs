//! `.tem1` bitstreams and the decoder-side replay of the bias recursion.
//!
//! Byte layout (all multi-byte fields big-endian):
//!
//! ```text
//! 0   4  magic "TEM1"
//! 4   1  scheme tag: 0 = conv, 1 = vb, 2 = lb
//! 5   ..  scheme parameters as f64: lb → Δ, μ; vb → Δ_v; conv → Δ_c, b
//!     8  Ω0 (f64)
//!     8  c (f64)
//!     8  t_first (f64, s)
//!     1  R, bits per index
//!     4  count of indices (u32)
//!     4  codebook JSON length (u32), followed by that many bytes
//!     ⌈count·R/8⌉  indices, R bits each, most significant bit first,
//!                  zero-padded to a byte boundary
//! ```
//!
//! Streams are produced by the open-loop encoder.

use crate::error::{Error, Result};
use crate::quantization::{dequantize, quantize, Codebook};
use crate::signal::SignalClass;
use crate::tem::{
    running_average, BiasState, ConstParams, FiringRecord, LbParams, Scheme, SchemeParams,
    StateMode, VbParams,
};

pub const MAGIC: &[u8; 4] = b"TEM1";

/// A decoded (or ready to encode) stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Bitstream {
    pub params: SchemeParams,
    pub t_first: f64,
    pub codebook: Codebook,
    pub indices: Vec<u32>,
}

/// Quantizes a record against `codebook` and wraps it as a stream.
/// Returns the stream and the number of clamped intervals.
pub fn pack(
    record: &FiringRecord,
    codebook: &Codebook,
    params: &SchemeParams,
) -> (Bitstream, usize) {
    let q = quantize(&record.intervals, codebook);
    (
        Bitstream {
            params: *params,
            t_first: record.t_first,
            codebook: codebook.clone(),
            indices: q.indices,
        },
        q.clamped,
    )
}

pub fn unpack(bytes: &[u8]) -> Result<Bitstream> {
    Bitstream::from_bytes(bytes)
}

impl Bitstream {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let bits = self.codebook.bits();
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(self.params.scheme().tag());
        match &self.params {
            SchemeParams::Lb(p) => {
                put_f64(&mut out, p.delta);
                put_f64(&mut out, p.mu);
            }
            SchemeParams::Vb(p) => put_f64(&mut out, p.delta_v),
            SchemeParams::Conv(p) => {
                put_f64(&mut out, p.delta_c);
                put_f64(&mut out, p.bias);
            }
        }
        let class = self.params.class();
        put_f64(&mut out, class.omega0);
        put_f64(&mut out, class.amp_bound);
        put_f64(&mut out, self.t_first);
        out.push(bits);
        let count = u32::try_from(self.indices.len())
            .map_err(|_| Error::invalid("too many indices for one stream"))?;
        out.extend_from_slice(&count.to_be_bytes());
        let json = self.codebook.to_canonical_json()?;
        let json_len =
            u32::try_from(json.len()).map_err(|_| Error::invalid("codebook too large"))?;
        out.extend_from_slice(&json_len.to_be_bytes());
        out.extend_from_slice(json.as_bytes());
        let limit = 1u64 << bits;
        if let Some(bad) = self.indices.iter().find(|&&i| u64::from(i) >= limit) {
            return Err(Error::invalid(format!(
                "index {bad} does not fit in {bits} bits"
            )));
        }
        out.extend_from_slice(&pack_indices(&self.indices, bits));
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::format(0, "bad magic, expected TEM1"));
        }
        let tag_at = r.pos;
        let tag = r.u8()?;
        let scheme = Scheme::from_tag(tag)
            .ok_or_else(|| Error::format(tag_at, format!("unknown scheme tag {tag}")))?;
        let params_at = r.pos;
        let head: Vec<f64> = match scheme {
            Scheme::Lb | Scheme::Conv => vec![r.f64()?, r.f64()?],
            Scheme::Vb => vec![r.f64()?],
        };
        let omega0 = r.f64()?;
        let c = r.f64()?;
        let bad_params =
            |e: Error| Error::format(params_at, format!("invalid header parameters: {e}"));
        let class = SignalClass::new(omega0, c).map_err(bad_params)?;
        let params = match scheme {
            Scheme::Lb => SchemeParams::Lb(
                LbParams::from_threshold(head[0], head[1], class).map_err(bad_params)?,
            ),
            Scheme::Vb => SchemeParams::Vb(VbParams::new(head[0], class).map_err(bad_params)?),
            Scheme::Conv => {
                SchemeParams::Conv(ConstParams::new(head[0], head[1], class).map_err(bad_params)?)
            }
        };
        let t_first = r.f64()?;
        let bits_at = r.pos;
        let bits = r.u8()?;
        let count = r.u32()? as usize;
        let json_len = r.u32()? as usize;
        let json_at = r.pos;
        let json = r.take(json_len)?;
        let text = std::str::from_utf8(json)
            .map_err(|_| Error::format(json_at, "codebook is not UTF-8"))?;
        let codebook = Codebook::from_json(text)
            .map_err(|e| Error::format(json_at, format!("invalid codebook: {e}")))?;
        if codebook.bits() != bits {
            return Err(Error::format(
                bits_at,
                format!("R = {bits} disagrees with codebook R = {}", codebook.bits()),
            ));
        }
        let index_at = r.pos;
        let need_bits = count * bits as usize;
        let need = need_bits.div_ceil(8);
        let have = bytes.len() - index_at;
        if have < need {
            return Err(Error::format(
                index_at,
                format!(
                    "truncated index section: expected {need_bits} bits, found {}",
                    have * 8
                ),
            ));
        }
        if have > need {
            return Err(Error::format(
                index_at + need,
                format!(
                    "count mismatch: {} trailing bytes after {count} indices",
                    have - need
                ),
            ));
        }
        let indices = unpack_indices(&bytes[index_at..], bits, count);
        Ok(Self {
            params,
            t_first,
            codebook,
            indices,
        })
    }

    /// Dequantized intervals.
    pub fn intervals(&self) -> Result<Vec<f64>> {
        dequantize(&self.indices, &self.codebook)
    }
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_be_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::format(
                self.pos,
                format!(
                    "truncated stream: need {n} bytes, {} left",
                    self.bytes.len() - self.pos
                ),
            )),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_be_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

/// `bits`-wide fields, MSB first, zero-padded to a byte boundary.
pub fn pack_indices(indices: &[u32], bits: u8) -> Vec<u8> {
    let total = indices.len() * bits as usize;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0usize;
    for &idx in indices {
        for b in (0..bits).rev() {
            if (idx >> b) & 1 == 1 {
                out[pos / 8] |= 0x80 >> (pos % 8);
            }
            pos += 1;
        }
    }
    out
}

pub fn unpack_indices(bytes: &[u8], bits: u8, count: usize) -> Vec<u32> {
    let mut pos = 0usize;
    (0..count)
        .map(|_| {
            let mut v = 0u32;
            for _ in 0..bits {
                let bit = (bytes[pos / 8] >> (7 - pos % 8)) & 1;
                v = (v << 1) | u32::from(bit);
                pos += 1;
            }
            v
        })
        .collect()
}

/// Firing times and the per-interval signal integrals implied by them.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurements {
    pub times: Vec<f64>,
    /// `y_n ≈ ∫_{t_n}^{t_{n+1}} f`.
    pub integrals: Vec<f64>,
    /// Replayed running averages `f̂_n = y_n / T_n`.
    pub averages: Vec<f64>,
}

/// Replays the encoder's bias recursion from (possibly quantized)
/// intervals: `y_n = Δ − ∫ b_n`, with `b_n` built from the replayed
/// history exactly as the encoder builds it.
pub fn decoder_replay(
    t_first: f64,
    intervals: &[f64],
    params: &SchemeParams,
    mode: &StateMode,
) -> Result<Measurements> {
    let delta = params.threshold();
    let margin = mode.bias_margin(params);
    let mut times = Vec::with_capacity(intervals.len() + 1);
    let mut integrals = Vec::with_capacity(intervals.len());
    let mut averages = Vec::with_capacity(intervals.len());
    let mut state: Option<BiasState> = None;
    let mut t = t_first;
    times.push(t);
    for (index, &dt) in intervals.iter().enumerate() {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::NonPositiveInterval { index, value: dt });
        }
        let bias = params.bias(state.as_ref(), margin);
        let fhat = running_average(delta, dt, bias.integral(dt))?;
        integrals.push(fhat * dt);
        averages.push(fhat);
        state = Some(BiasState {
            fhat_prev: fhat,
            t_prev: dt,
        });
        t += dt;
        times.push(t);
    }
    Ok(Measurements {
        times,
        integrals,
        averages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::uq_design;
    use crate::tem::lb_design;
    use std::f64::consts::PI;

    fn lb() -> SchemeParams {
        SchemeParams::Lb(lb_design(0.5, 1.0, 100.0 * PI, 1.0).unwrap())
    }

    fn stream(indices: Vec<u32>, bits: u8) -> Bitstream {
        Bitstream {
            params: lb(),
            t_first: -0.45,
            codebook: uq_design(0.005, 0.01, bits).unwrap(),
            indices,
        }
    }

    #[test]
    fn one_bit_layout() {
        assert_eq!(pack_indices(&[0, 1, 1, 0, 1], 1), vec![0b0110_1000]);
        assert_eq!(pack_indices(&[5, 2], 3), vec![0b1010_1000]);
        assert_eq!(unpack_indices(&[0b1010_1000], 3, 2), vec![5, 2]);
    }

    #[test]
    fn header_only_stream() {
        let s = stream(vec![], 2);
        let bytes = s.to_bytes().unwrap();
        assert_eq!(&bytes[..4], b"TEM1");
        assert_eq!(bytes[4], 2);
        let back = unpack(&bytes).unwrap();
        assert!(back.indices.is_empty());
        assert_eq!(back, s);
    }

    #[test]
    fn bad_magic_reported_at_zero() {
        let mut bytes = stream(vec![1, 2, 3], 2).to_bytes().unwrap();
        bytes[0] = b'X';
        match unpack(&bytes) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_indices_name_bit_counts() {
        let bytes = stream(vec![3; 10], 2).to_bytes().unwrap();
        let err = unpack(&bytes[..bytes.len() - 2]).unwrap_err().to_string();
        assert!(err.contains("expected 20 bits, found 8"), "{err}");
        let mut long = bytes.clone();
        long.push(0);
        assert!(unpack(&long).is_err());
    }

    #[test]
    fn replay_rejects_non_positive_intervals() {
        let err = decoder_replay(0.0, &[0.006, 0.0], &lb(), &StateMode::OpenLoop).unwrap_err();
        assert!(matches!(err, Error::NonPositiveInterval { index: 1, .. }));
    }

    #[test]
    fn replay_conv_is_memoryless() {
        let class = SignalClass::new(100.0 * PI, 1.0).unwrap();
        let p = SchemeParams::Conv(ConstParams::new(0.005, 1.5, class).unwrap());
        let m = decoder_replay(0.0, &[0.003, 0.004], &p, &StateMode::OpenLoop).unwrap();
        assert!((m.integrals[0] - (0.005 - 1.5 * 0.003)).abs() < 1e-18);
        assert!((m.integrals[1] - (0.005 - 1.5 * 0.004)).abs() < 1e-18);
        assert_eq!(m.times, vec![0.0, 0.003, 0.007]);
    }
}
