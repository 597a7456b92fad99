//! Canonical byte encodings.
//!
//! Encodings are prefix-free given the group, so a sequence of them can be
//! concatenated without separators (the ball cache relies on this).

use smallvec::SmallVec;

use super::element::{GroupElement, WreathElement};
use super::{Group, GroupError, Kind};

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

pub(crate) fn put_signed(out: &mut Vec<u8>, v: i64) {
    put_varint(out, ((v << 1) ^ (v >> 63)) as u64);
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn position(&self) -> usize {
        self.pos
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn byte(&mut self) -> Result<u8, GroupError> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| GroupError::Corrupt("unexpected end of encoding".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub(crate) fn varint(&mut self) -> Result<u64, GroupError> {
        let mut value = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            value |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                // Reject overlong forms so that the encoding stays injective.
                if b == 0 && shift > 0 {
                    return Err(GroupError::Corrupt("overlong varint".into()));
                }
                return Ok(value);
            }
        }
        Err(GroupError::Corrupt("varint overflow".into()))
    }

    pub(crate) fn signed(&mut self) -> Result<i64, GroupError> {
        let z = self.varint()?;
        Ok(((z >> 1) as i64) ^ -((z & 1) as i64))
    }
}

impl Group {
    /// Canonical encoding of `a`, appended to `out`.
    pub fn encode_into(&self, a: &GroupElement, out: &mut Vec<u8>) {
        match a {
            GroupElement::Cyclic(v) => put_varint(out, *v),
            GroupElement::Lattice(v) => v.iter().for_each(|&x| put_signed(out, x)),
            GroupElement::Word(w) => {
                put_varint(out, w.len() as u64);
                out.extend_from_slice(w);
            }
            GroupElement::Heisenberg(abc) => abc.iter().for_each(|&x| put_signed(out, x)),
            GroupElement::Pair(p) => {
                let (l, r) = self.factors();
                l.encode_into(&p.0, out);
                r.encode_into(&p.1, out);
            }
            GroupElement::Wreath(w) => {
                let (lamp, base) = self.factors();
                base.encode_into(&w.position, out);
                put_varint(out, w.lamps.len() as u64);
                for (k, v) in &w.lamps {
                    base.encode_into(k, out);
                    lamp.encode_into(v, out);
                }
            }
        }
    }

    pub fn encode(&self, a: &GroupElement) -> Vec<u8> {
        let mut out = Vec::with_capacity(16);
        self.encode_into(a, &mut out);
        out
    }

    /// Decode a complete encoding; trailing bytes are an error.
    pub fn decode(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        let mut reader = Reader::new(bytes);
        let element = self.decode_from(&mut reader)?;
        if !reader.is_empty() {
            return Err(GroupError::Corrupt("trailing bytes after element".into()));
        }
        Ok(element)
    }

    pub(crate) fn decode_from(&self, r: &mut Reader<'_>) -> Result<GroupElement, GroupError> {
        let element = match &self.kind {
            Kind::Cyclic(m) => {
                let v = r.varint()?;
                if v >= *m {
                    return Err(GroupError::Corrupt(format!("residue {v} out of range mod {m}")));
                }
                GroupElement::Cyclic(v)
            }
            Kind::Lattice(d) => {
                let mut v = SmallVec::with_capacity(*d);
                for _ in 0..*d {
                    v.push(r.signed()?);
                }
                GroupElement::Lattice(v)
            }
            Kind::Free(k) => {
                let len = r.varint()? as usize;
                let mut w: SmallVec<[u8; 16]> = SmallVec::with_capacity(len);
                for _ in 0..len {
                    let l = r.byte()?;
                    if (l as usize) >= 2 * k {
                        return Err(GroupError::Corrupt(format!("letter {l} out of range")));
                    }
                    if let Some(&prev) = w.last() {
                        if prev ^ 1 == l {
                            return Err(GroupError::Corrupt("word is not freely reduced".into()));
                        }
                    }
                    w.push(l);
                }
                GroupElement::Word(w)
            }
            Kind::Heisenberg => GroupElement::Heisenberg([r.signed()?, r.signed()?, r.signed()?]),
            Kind::Direct(l, rt) => {
                let a = l.decode_from(r)?;
                let b = rt.decode_from(r)?;
                GroupElement::pair(a, b)
            }
            Kind::Wreath { lamp, base } => {
                let position = base.decode_from(r)?;
                let count = r.varint()? as usize;
                let lamp_identity = lamp.identity();
                let mut lamps = Vec::with_capacity(count.min(1 << 16));
                let mut prev_key: Option<Vec<u8>> = None;
                for _ in 0..count {
                    let start = r.position();
                    let k = base.decode_from(r)?;
                    let key_bytes = r.bytes[start..r.position()].to_vec();
                    if let Some(p) = &prev_key {
                        if *p >= key_bytes {
                            return Err(GroupError::Corrupt("lamp keys not strictly ordered".into()));
                        }
                    }
                    prev_key = Some(key_bytes);
                    let v = lamp.decode_from(r)?;
                    if v == lamp_identity {
                        return Err(GroupError::Corrupt("identity-valued lamp entry".into()));
                    }
                    lamps.push((k, v));
                }
                GroupElement::Wreath(Box::new(WreathElement { position, lamps }))
            }
        };
        Ok(element)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_round_trip() {
        for v in [0i64, 1, -1, 63, -64, 64, i64::MAX, i64::MIN] {
            let mut out = Vec::new();
            put_signed(&mut out, v);
            assert_eq!(Reader::new(&out).signed().unwrap(), v);
        }
    }

    #[test]
    fn overlong_varint_rejected() {
        assert!(Reader::new(&[0x80, 0x00]).varint().is_err());
    }
}
