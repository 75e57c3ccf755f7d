use std::collections::BTreeMap;

use super::*;
use crate::algebra::ProgressionFreeSet;
use crate::codec::{Artifact, ArtifactKind, Container, DecodeError, Decoder, Encodable, Encoder};
use crate::single_section_artifact;

pub(crate) fn encode_attrs(e: &mut Encoder, attrs: &AttrSet) {
    e.uint(attrs.len() as u64);
    for a in attrs {
        e.text(a);
    }
}

pub(crate) fn decode_attrs(d: &mut Decoder<'_>) -> Result<AttrSet, DecodeError> {
    let n = d.usize()?;
    let mut out = AttrSet::new();
    for _ in 0..n {
        if !out.insert(d.text()?) {
            return Err(DecodeError::Malformed("duplicate attribute".into()));
        }
    }
    Ok(out)
}

fn encode_keyed<E: GroupElement>(e: &mut Encoder, map: &BTreeMap<String, E>) {
    e.uint(map.len() as u64);
    for (k, v) in map {
        e.text(k).element(v);
    }
}

fn decode_keyed<E: GroupElement>(d: &mut Decoder<'_>) -> Result<BTreeMap<String, E>, DecodeError> {
    let n = d.usize()?;
    let mut out = BTreeMap::new();
    for _ in 0..n {
        let k = d.text()?;
        let v = d.element()?;
        if out.insert(k, v).is_some() {
            return Err(DecodeError::Malformed("duplicate key".into()));
        }
    }
    Ok(out)
}

impl<G: PairingGroup> Encodable for Crs<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.slots.len() as u64);
        for d in self.index_set.elements() {
            e.uint(*d);
        }
        e.uint(self.universe.len() as u64);
        for w in &self.universe {
            e.text(w);
        }
        e.element(&self.z).element(&self.h);
        for s in &self.slots {
            e.element(&s.base)
                .element(&s.blinded)
                .element(&s.key_base)
                .element(&s.attr_base);
        }
        e.uint(self.cross_terms.len() as u64);
        for (z, w) in &self.cross_terms {
            e.uint(*z).element(w);
        }
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let n = d.usize()?;
        if n == 0 || n > 1 << 12 {
            return Err(DecodeError::Malformed("slot count".into()));
        }
        let elements = (0..n).map(|_| d.uint()).collect::<Result<Vec<_>, _>>()?;
        let index_set = ProgressionFreeSet::from_elements(elements)
            .ok_or_else(|| DecodeError::Malformed("index set".into()))?;
        let u = d.usize()?;
        let universe = (0..u).map(|_| d.text()).collect::<Result<Vec<_>, _>>()?;
        if universe.is_empty() || universe.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DecodeError::Malformed("universe must be sorted and unique".into()));
        }
        let z = d.element()?;
        let h = d.element()?;
        let mut slots = Vec::with_capacity(n);
        for _ in 0..n {
            slots.push(SlotParams {
                base: d.element()?,
                blinded: d.element()?,
                key_base: d.element()?,
                attr_base: d.element()?,
            });
        }
        let m = d.usize()?;
        let mut cross_terms = BTreeMap::new();
        for _ in 0..m {
            let z = d.uint()?;
            cross_terms.insert(z, d.element()?);
        }
        let expected = index_set.cross_indices();
        if cross_terms.len() != expected.len() || !cross_terms.keys().all(|z| expected.contains(*z)) {
            return Err(DecodeError::Malformed("cross terms do not match index set".into()));
        }
        Ok(Self {
            z,
            h,
            slots,
            cross_terms,
            index_set,
            universe,
        })
    }
}

impl<G: PairingGroup> Encodable for SlotPublicKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.slot as u64)
            .element(&self.commit)
            .element(&self.bound)
            .uint(self.cross.len() as u64);
        for (j, v) in &self.cross {
            e.uint(*j as u64).element(v);
        }
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let slot = d.usize()?;
        let commit = d.element()?;
        let bound = d.element()?;
        let n = d.usize()?;
        let mut cross = BTreeMap::new();
        for _ in 0..n {
            let j = d.usize()?;
            if j == slot || cross.insert(j, d.element()?).is_some() {
                return Err(DecodeError::Malformed("cross key index".into()));
            }
        }
        Ok(Self {
            slot,
            commit,
            bound,
            cross,
        })
    }
}

impl<G: PairingGroup> Encodable for SecretKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.slot as u64).scalar(self.scalar());
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let slot = d.usize()?;
        Ok(Self::new(slot, d.scalar()?))
    }
}

impl<G: PairingGroup> Encodable for MasterPublicKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.element(&self.z)
            .element(&self.h)
            .element(&self.aggregate_commit);
        encode_keyed(e, &self.attr_keys);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            z: d.element()?,
            h: d.element()?,
            aggregate_commit: d.element()?,
            attr_keys: decode_keyed(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for HelperKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.slot as u64);
        encode_attrs(e, &self.attrs);
        e.element(&self.base)
            .element(&self.blinded)
            .element(&self.cross_key);
        encode_keyed(e, &self.attr_cross);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            slot: d.usize()?,
            attrs: decode_attrs(d)?,
            base: d.element()?,
            blinded: d.element()?,
            cross_key: d.element()?,
            attr_cross: decode_keyed(d)?,
        })
    }
}

impl<G: PairingGroup> Ciphertext<G> {
    fn encode_elements(&self, e: &mut Encoder) {
        e.element(&self.masked).element(&self.randomizer);
        for row in &self.rows {
            e.element(&row.share).element(&row.randomizer);
        }
        e.element(&self.binding);
    }

    fn decode_elements(
        policy: LsssMatrix,
        blob: Vec<u8>,
        tag: [u8; TAG_LEN],
        elements: &mut Decoder<'_>,
    ) -> Result<Self, DecodeError> {
        let masked = elements.element()?;
        let randomizer = elements.element()?;
        let mut rows = Vec::with_capacity(policy.num_rows());
        for _ in 0..policy.num_rows() {
            rows.push(CiphertextRow {
                share: elements.element()?,
                randomizer: elements.element()?,
            });
        }
        Ok(Self {
            policy,
            blob,
            masked,
            randomizer,
            rows,
            binding: elements.element()?,
            tag,
        })
    }
}

impl<G: PairingGroup> Encodable for Ciphertext<G> {
    fn encode(&self, e: &mut Encoder) {
        self.policy.encode(e);
        e.bytes(&self.blob).bytes(&self.tag);
        self.encode_elements(e);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let policy = LsssMatrix::decode(d)?;
        let blob = d.bytes()?;
        let tag = d.array32()?;
        Self::decode_elements(policy, blob, tag, d)
    }
}

impl<G: PairingGroup> Artifact for Ciphertext<G> {
    type Group = G;
    const KIND: ArtifactKind = ArtifactKind::Ciphertext;

    fn write_container(&self, c: Container) -> Container {
        let mut policy = Encoder::new();
        self.policy.encode(&mut policy);
        let mut symmetric = Encoder::new();
        symmetric.bytes(&self.blob).bytes(&self.tag);
        let mut elements = Encoder::new();
        self.encode_elements(&mut elements);
        c.with_section(1, policy.finish())
            .with_section(2, symmetric.finish())
            .with_section(3, elements.finish())
    }

    fn read_container(c: &Container) -> Result<Self, DecodeError> {
        let mut p = Decoder::new(c.section(1)?);
        let policy = LsssMatrix::decode(&mut p)?;
        p.finish()?;
        let mut s = Decoder::new(c.section(2)?);
        let mut e = Decoder::new(c.section(3)?);
        let blob = s.bytes()?;
        let tag = s.array32()?;
        s.finish()?;
        let ct = Self::decode_elements(policy, blob, tag, &mut e)?;
        e.finish()?;
        Ok(ct)
    }
}

impl<G: PairingGroup> Encodable for TransformCiphertext<G> {
    fn encode(&self, e: &mut Encoder) {
        e.element(&self.masked).element(&self.unmask_base);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            masked: d.element()?,
            unmask_base: d.element()?,
        })
    }
}

single_section_artifact!(Crs, ArtifactKind::Crs);
single_section_artifact!(SlotPublicKey, ArtifactKind::PublicKey);
single_section_artifact!(SecretKey, ArtifactKind::SecretKey);
single_section_artifact!(MasterPublicKey, ArtifactKind::MasterPublicKey);
single_section_artifact!(HelperKey, ArtifactKind::HelperKey);
single_section_artifact!(TransformCiphertext, ArtifactKind::TransformCiphertext);
