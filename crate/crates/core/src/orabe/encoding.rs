use super::*;
use crate::codec::{content_digest, Artifact, ArtifactKind, Container, DecodeError, Decoder, Encodable, Encoder};
use crate::osrabe::encoding::{decode_attrs, encode_attrs};
use crate::single_section_artifact;

fn encode_list<T: Encodable>(e: &mut Encoder, items: &[T]) {
    e.uint(items.len() as u64);
    for item in items {
        item.encode(e);
    }
}

fn decode_list<T: Encodable>(d: &mut Decoder<'_>) -> Result<Vec<T>, DecodeError> {
    let n = d.usize()?;
    if n == 0 || n > MAX_LEVELS + 1 {
        return Err(DecodeError::Malformed("instance count".into()));
    }
    (0..n).map(|_| T::decode(d)).collect()
}

fn encode_options<T: Encodable>(e: &mut Encoder, items: &[Option<T>]) {
    e.uint(items.len() as u64);
    for item in items {
        e.flag(item.is_some());
        if let Some(v) = item {
            v.encode(e);
        }
    }
}

fn decode_options<T: Encodable>(d: &mut Decoder<'_>) -> Result<Vec<Option<T>>, DecodeError> {
    let n = d.usize()?;
    if n == 0 || n > MAX_LEVELS + 1 {
        return Err(DecodeError::Malformed("instance count".into()));
    }
    (0..n)
        .map(|_| if d.flag()? { T::decode(d).map(Some) } else { Ok(None) })
        .collect()
}

impl<G: PairingGroup> Encodable for MultiCrs<G> {
    fn encode(&self, e: &mut Encoder) {
        encode_list(e, &self.instances);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let instances: Vec<Crs<G>> = decode_list(d)?;
        for (k, crs) in instances.iter().enumerate() {
            if crs.num_slots() != 1 << k || crs.universe != instances[0].universe {
                return Err(DecodeError::Malformed("instance shape".into()));
            }
        }
        Ok(Self { instances })
    }
}

impl<G: PairingGroup> Encodable for UserPublicKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.ctr);
        encode_list(e, &self.keys);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            ctr: d.uint()?,
            keys: decode_list(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for UserSecretKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.ctr);
        encode_list(e, &self.keys);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            ctr: d.uint()?,
            keys: decode_list(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for MultiMasterPublicKey<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.ctr);
        encode_options(e, &self.instances);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            ctr: d.uint()?,
            instances: decode_options(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for HelperBundle<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.user_ctr).uint(self.aux_ctr);
        encode_options(e, &self.keys);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            user_ctr: d.uint()?,
            aux_ctr: d.uint()?,
            keys: decode_options(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for MultiCiphertext<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.ctr);
        encode_options(e, &self.instances);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            ctr: d.uint()?,
            instances: decode_options(d)?,
        })
    }
}

impl<G: PairingGroup> Encodable for InstanceTransform<G> {
    fn encode(&self, e: &mut Encoder) {
        e.uint(self.instance as u64);
        self.result.encode(e);
    }

    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Self {
            instance: d.usize()?,
            result: TransformCiphertext::decode(d)?,
        })
    }
}

impl<G: PairingGroup> Artifact for AuxState<G> {
    type Group = G;
    const KIND: ArtifactKind = ArtifactKind::AuxState;

    fn write_container(&self, c: Container) -> Container {
        let mut header = Encoder::new();
        header.uint(self.ctr);
        let mut dict1 = Encoder::new();
        dict1.uint(self.dict1.len() as u64);
        for ((k, i), (pk, attrs)) in &self.dict1 {
            dict1.uint(*k as u64).uint(*i as u64);
            pk.encode(&mut dict1);
            encode_attrs(&mut dict1, attrs);
        }
        let mut dict2 = Encoder::new();
        dict2.uint(self.dict2.len() as u64);
        for ((position, k), hsk) in &self.dict2 {
            dict2.uint(*position).uint(*k as u64);
            hsk.encode(&mut dict2);
        }
        c.with_section(1, header.finish())
            .with_section(2, dict1.finish())
            .with_section(3, dict2.finish())
            .with_section(4, self.mpk.encode_to_vec())
    }

    fn read_container(c: &Container) -> Result<Self, DecodeError> {
        let mut header = Decoder::new(c.section(1)?);
        let ctr = header.uint()?;
        header.finish()?;

        let mut d = Decoder::new(c.section(2)?);
        let mut dict1 = BTreeMap::new();
        for _ in 0..d.usize()? {
            let key = (d.usize()?, d.usize()?);
            let pk = SlotPublicKey::decode(&mut d)?;
            let attrs = decode_attrs(&mut d)?;
            if pk.slot != key.1 || dict1.insert(key, (pk, attrs)).is_some() {
                return Err(DecodeError::Malformed("registration table".into()));
            }
        }
        d.finish()?;

        let mut d = Decoder::new(c.section(3)?);
        let mut dict2 = BTreeMap::new();
        for _ in 0..d.usize()? {
            let key = (d.uint()?, d.usize()?);
            if dict2.insert(key, HelperKey::decode(&mut d)?).is_some() {
                return Err(DecodeError::Malformed("helper key table".into()));
            }
        }
        d.finish()?;

        let mpk = MultiMasterPublicKey::decode_exact(c.section(4)?)?;
        if mpk.ctr != ctr {
            return Err(DecodeError::Malformed("counter disagrees with master public key".into()));
        }
        Ok(Self {
            ctr,
            dict1,
            dict2,
            mpk,
        })
    }
}

/// Digest of the canonical aux snapshot; this is what the curator publishes.
pub fn snapshot_digest<G: PairingGroup>(aux: &AuxState<G>) -> [u8; 32] {
    content_digest(&aux.to_bytes())
}

single_section_artifact!(MultiCrs, ArtifactKind::MultiCrs);
single_section_artifact!(UserPublicKey, ArtifactKind::UserPublicKey);
single_section_artifact!(UserSecretKey, ArtifactKind::UserSecretKey);
single_section_artifact!(MultiMasterPublicKey, ArtifactKind::MultiMasterPublicKey);
single_section_artifact!(HelperBundle, ArtifactKind::HelperBundle);
single_section_artifact!(MultiCiphertext, ArtifactKind::MultiCiphertext);
single_section_artifact!(InstanceTransform, ArtifactKind::TransformResult);
