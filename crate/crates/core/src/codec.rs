//! Binary encodings shared by every artifact.
//!
//! Fields are written as `kind (1 byte) | length (u32 BE) | payload`.
//! Artifacts are wrapped in a versioned container:
//!
//! ```text
//! magic "ORAB" | version u16 | backend u8 | artifact kind u8 | section count u16
//! section table: (id u16, offset u32, length u32) * count
//! section payloads, back to back in table order
//! ```
//!
//! Offsets are relative to the end of the table. Decoding is strict: any
//! gap, overlap or trailing byte is rejected, so each value has exactly one
//! encoding. For file interchange the container is hex-armored inside a
//! small JSON [`Envelope`].

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{BackendId, GroupElement, GroupKind, PairingGroup, ScalarField};

pub const MAGIC: &[u8; 4] = b"ORAB";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("trailing bytes after value")]
    Trailing,
    #[error("expected field kind {expected:#04x}, found {found:#04x}")]
    WrongKind { expected: u8, found: u8 },
    #[error("invalid group element: {0}")]
    InvalidElement(&'static str),
    #[error("invalid scalar encoding")]
    InvalidScalar,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("artifact backend {found} does not match expected {expected}")]
    BackendMismatch { expected: String, found: String },
    #[error("artifact kind {found:?} does not match expected {expected:?}")]
    KindMismatch {
        expected: ArtifactKind,
        found: ArtifactKind,
    },
    #[error("unknown artifact kind {0}")]
    UnknownKind(u8),
    #[error("malformed section table")]
    BadSectionTable,
    #[error("missing section {0}")]
    MissingSection(u16),
    #[error("malformed value: {0}")]
    Malformed(String),
    #[error("envelope: {0}")]
    Envelope(String),
}

/// Field kind tags.
pub mod tag {
    pub const SCALAR: u8 = 0x01;
    pub const SOURCE: u8 = 0x02;
    pub const TARGET: u8 = 0x03;
    pub const BYTES: u8 = 0x04;
    pub const UINT: u8 = 0x05;
    pub const TEXT: u8 = 0x06;
    pub const FLAG: u8 = 0x07;
}

fn element_tag<E: GroupElement>() -> u8 {
    match E::KIND {
        GroupKind::Source => tag::SOURCE,
        GroupKind::Target => tag::TARGET,
    }
}

#[derive(Default, Debug, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn field(&mut self, kind: u8, payload: &[u8]) -> &mut Self {
        self.buf.push(kind);
        self.buf
            .extend_from_slice(&(payload.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(payload);
        self
    }

    pub fn scalar<F: ScalarField>(&mut self, s: &F) -> &mut Self {
        self.field(tag::SCALAR, &s.to_bytes())
    }

    pub fn element<E: GroupElement>(&mut self, e: &E) -> &mut Self {
        self.field(element_tag::<E>(), &e.to_bytes())
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.field(tag::BYTES, b)
    }

    pub fn uint(&mut self, v: u64) -> &mut Self {
        self.field(tag::UINT, &v.to_be_bytes())
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.field(tag::TEXT, s.as_bytes())
    }

    pub fn flag(&mut self, v: bool) -> &mut Self {
        self.field(tag::FLAG, &[v as u8])
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { rest: bytes }
    }

    fn field(&mut self, kind: u8) -> Result<&'a [u8], DecodeError> {
        if self.rest.len() < 5 {
            return Err(DecodeError::Truncated);
        }
        let found = self.rest[0];
        if found != kind {
            return Err(DecodeError::WrongKind {
                expected: kind,
                found,
            });
        }
        let len = u32::from_be_bytes(self.rest[1..5].try_into().unwrap()) as usize;
        let body = &self.rest[5..];
        if body.len() < len {
            return Err(DecodeError::Truncated);
        }
        let (payload, rest) = body.split_at(len);
        self.rest = rest;
        Ok(payload)
    }

    pub fn scalar<F: ScalarField>(&mut self) -> Result<F, DecodeError> {
        F::from_bytes(self.field(tag::SCALAR)?).ok_or(DecodeError::InvalidScalar)
    }

    pub fn element<E: GroupElement>(&mut self) -> Result<E, DecodeError> {
        E::from_bytes(self.field(element_tag::<E>())?)
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        Ok(self.field(tag::BYTES)?.to_vec())
    }

    pub fn array32(&mut self) -> Result<[u8; 32], DecodeError> {
        self.field(tag::BYTES)?
            .try_into()
            .map_err(|_| DecodeError::Malformed("expected 32 bytes".into()))
    }

    pub fn uint(&mut self) -> Result<u64, DecodeError> {
        let p = self.field(tag::UINT)?;
        let arr: [u8; 8] = p
            .try_into()
            .map_err(|_| DecodeError::Malformed("integer width".into()))?;
        Ok(u64::from_be_bytes(arr))
    }

    pub fn usize(&mut self) -> Result<usize, DecodeError> {
        usize::try_from(self.uint()?).map_err(|_| DecodeError::Malformed("integer range".into()))
    }

    pub fn text(&mut self) -> Result<String, DecodeError> {
        String::from_utf8(self.field(tag::TEXT)?.to_vec())
            .map_err(|_| DecodeError::Malformed("utf-8".into()))
    }

    pub fn flag(&mut self) -> Result<bool, DecodeError> {
        match self.field(tag::FLAG)? {
            [0] => Ok(false),
            [1] => Ok(true),
            _ => Err(DecodeError::Malformed("flag".into())),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rest.is_empty()
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::Trailing)
        }
    }
}

/// What a container holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    Crs,
    PublicKey,
    SecretKey,
    MasterPublicKey,
    HelperKey,
    Ciphertext,
    TransformCiphertext,
    MultiCrs,
    UserPublicKey,
    UserSecretKey,
    MultiMasterPublicKey,
    HelperBundle,
    MultiCiphertext,
    AuxState,
    TransformResult,
    FraudProof,
}

impl ArtifactKind {
    const ALL: [ArtifactKind; 16] = [
        ArtifactKind::Crs,
        ArtifactKind::PublicKey,
        ArtifactKind::SecretKey,
        ArtifactKind::MasterPublicKey,
        ArtifactKind::HelperKey,
        ArtifactKind::Ciphertext,
        ArtifactKind::TransformCiphertext,
        ArtifactKind::MultiCrs,
        ArtifactKind::UserPublicKey,
        ArtifactKind::UserSecretKey,
        ArtifactKind::MultiMasterPublicKey,
        ArtifactKind::HelperBundle,
        ArtifactKind::MultiCiphertext,
        ArtifactKind::AuxState,
        ArtifactKind::TransformResult,
        ArtifactKind::FraudProof,
    ];

    pub fn code(self) -> u8 {
        Self::ALL.iter().position(|k| *k == self).unwrap() as u8 + 1
    }

    pub fn from_code(code: u8) -> Result<Self, DecodeError> {
        code.checked_sub(1)
            .and_then(|i| Self::ALL.get(i as usize).copied())
            .ok_or(DecodeError::UnknownKind(code))
    }

    pub fn label(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

/// A parsed container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub backend: BackendId,
    pub kind: ArtifactKind,
    pub sections: Vec<(u16, Vec<u8>)>,
}

impl Container {
    pub fn new(backend: BackendId, kind: ArtifactKind) -> Self {
        Self {
            backend,
            kind,
            sections: Vec::new(),
        }
    }

    pub fn with_section(mut self, id: u16, payload: Vec<u8>) -> Self {
        self.sections.push((id, payload));
        self
    }

    pub fn section(&self, id: u16) -> Result<&[u8], DecodeError> {
        self.sections
            .iter()
            .find(|(sid, _)| *sid == id)
            .map(|(_, p)| p.as_slice())
            .ok_or(DecodeError::MissingSection(id))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_be_bytes());
        out.push(self.backend.code());
        out.push(self.kind.code());
        out.extend_from_slice(&(self.sections.len() as u16).to_be_bytes());
        let mut offset = 0u32;
        for (id, payload) in &self.sections {
            out.extend_from_slice(&id.to_be_bytes());
            out.extend_from_slice(&offset.to_be_bytes());
            out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
            offset += payload.len() as u32;
        }
        for (_, payload) in &self.sections {
            out.extend_from_slice(payload);
        }
        out
    }

    /// Parses a container whose backend is known to be `backend`.
    pub fn decode(bytes: &[u8], backend: BackendId) -> Result<Self, DecodeError> {
        let (found, _) = Self::peek(bytes)?;
        if found.code() != backend.code() {
            return Err(DecodeError::BackendMismatch {
                expected: backend.name(),
                found: found.name(),
            });
        }
        if bytes.len() < 10 {
            return Err(DecodeError::Truncated);
        }
        let kind = ArtifactKind::from_code(bytes[7])?;
        let count = u16::from_be_bytes([bytes[8], bytes[9]]) as usize;
        let table_end = 10 + count * 10;
        if bytes.len() < table_end {
            return Err(DecodeError::Truncated);
        }
        let body = &bytes[table_end..];
        let mut expected_offset = 0usize;
        let mut sections = Vec::with_capacity(count);
        for i in 0..count {
            let e = &bytes[10 + i * 10..10 + (i + 1) * 10];
            let id = u16::from_be_bytes([e[0], e[1]]);
            let offset = u32::from_be_bytes(e[2..6].try_into().unwrap()) as usize;
            let len = u32::from_be_bytes(e[6..10].try_into().unwrap()) as usize;
            if offset != expected_offset || sections.iter().any(|(s, _)| *s == id) {
                return Err(DecodeError::BadSectionTable);
            }
            let payload = body
                .get(offset..offset + len)
                .ok_or(DecodeError::Truncated)?;
            sections.push((id, payload.to_vec()));
            expected_offset += len;
        }
        if expected_offset != body.len() {
            return Err(DecodeError::Trailing);
        }
        Ok(Self {
            backend,
            kind,
            sections,
        })
    }

    /// Reads the backend code and artifact kind without parsing sections.
    /// The mock modulus is not recorded in the header, so a mock backend is
    /// reported with the default modulus.
    pub fn peek(bytes: &[u8]) -> Result<(BackendId, ArtifactKind), DecodeError> {
        if bytes.len() < 10 {
            return Err(DecodeError::Truncated);
        }
        if &bytes[..4] != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        let version = u16::from_be_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        let backend = match bytes[6] {
            1 => BackendId::Bls12_381,
            2 => BackendId::Mock(crate::group::MOCK_DEFAULT_MODULUS),
            other => return Err(DecodeError::Malformed(format!("backend code {other}"))),
        };
        Ok((backend, ArtifactKind::from_code(bytes[7])?))
    }
}

/// Plain SHA-256 of a byte string, used for content addressing.
pub fn content_digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// Anything that serializes into a [`Container`].
pub trait Artifact: Sized {
    type Group: PairingGroup;
    const KIND: ArtifactKind;

    fn write_container(&self, c: Container) -> Container;
    fn read_container(c: &Container) -> Result<Self, DecodeError>;

    fn to_bytes(&self) -> Vec<u8> {
        self.write_container(Container::new(
            <Self::Group as PairingGroup>::BACKEND,
            Self::KIND,
        ))
        .encode()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let c = Container::decode(bytes, <Self::Group as PairingGroup>::BACKEND)?;
        if c.kind != Self::KIND {
            return Err(DecodeError::KindMismatch {
                expected: Self::KIND,
                found: c.kind,
            });
        }
        Self::read_container(&c)
    }

    fn to_envelope(&self) -> Envelope {
        Envelope::wrap(
            <Self::Group as PairingGroup>::BACKEND,
            Self::KIND,
            &self.to_bytes(),
        )
    }

    fn from_envelope(env: &Envelope) -> Result<Self, DecodeError> {
        if env.kind != Self::KIND {
            return Err(DecodeError::KindMismatch {
                expected: Self::KIND,
                found: env.kind,
            });
        }
        Self::from_bytes(&env.payload()?)
    }
}

/// Values with an embedded field encoding, composable inside larger artifacts.
pub trait Encodable: Sized {
    fn encode(&self, e: &mut Encoder);
    fn decode(d: &mut Decoder<'_>) -> Result<Self, DecodeError>;

    fn encode_to_vec(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode(&mut e);
        e.finish()
    }

    fn decode_exact(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(bytes);
        let v = Self::decode(&mut d)?;
        d.finish()?;
        Ok(v)
    }
}

/// Implements [`Artifact`] for an [`Encodable`] type stored as section 1.
#[macro_export]
macro_rules! single_section_artifact {
    ($ty:ident, $kind:expr) => {
        impl<G: $crate::group::PairingGroup> $crate::codec::Artifact for $ty<G> {
            type Group = G;
            const KIND: $crate::codec::ArtifactKind = $kind;

            fn write_container(&self, c: $crate::codec::Container) -> $crate::codec::Container {
                c.with_section(1, $crate::codec::Encodable::encode_to_vec(self))
            }

            fn read_container(
                c: &$crate::codec::Container,
            ) -> Result<Self, $crate::codec::DecodeError> {
                <Self as $crate::codec::Encodable>::decode_exact(c.section(1)?)
            }
        }
    };
}

/// Hex-armored JSON wrapper used for files exchanged through the CLI.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub format: String,
    pub version: u16,
    pub backend: String,
    pub kind: ArtifactKind,
    pub data: String,
}

impl Envelope {
    pub const FORMAT: &'static str = "orabe";

    pub fn wrap(backend: BackendId, kind: ArtifactKind, bytes: &[u8]) -> Self {
        Self {
            format: Self::FORMAT.to_string(),
            version: FORMAT_VERSION,
            backend: backend.name(),
            kind,
            data: hex::encode(bytes),
        }
    }

    pub fn backend_id(&self) -> Result<BackendId, DecodeError> {
        BackendId::parse_name(&self.backend)
            .ok_or_else(|| DecodeError::Envelope(format!("unknown backend {}", self.backend)))
    }

    pub fn payload(&self) -> Result<Vec<u8>, DecodeError> {
        if self.format != Self::FORMAT {
            return Err(DecodeError::Envelope(format!("format {}", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(DecodeError::UnsupportedVersion(self.version));
        }
        hex::decode(&self.data).map_err(|e| DecodeError::Envelope(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DecodeError> {
        serde_json::from_str(text).map_err(|e| DecodeError::Envelope(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{MockGroup, MockScalar, MockSource};
    use proptest::prelude::*;

    #[test]
    fn tlv_layout() {
        let mut e = Encoder::new();
        e.uint(5).bytes(b"ab");
        let bytes = e.finish();
        assert_eq!(
            bytes,
            vec![0x05, 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 5, 0x04, 0, 0, 0, 2, b'a', b'b']
        );
        let mut d = Decoder::new(&bytes);
        assert_eq!(d.uint().unwrap(), 5);
        assert_eq!(d.bytes().unwrap(), b"ab");
        d.finish().unwrap();
    }

    #[test]
    fn wrong_kind_and_trailing_rejected() {
        let mut e = Encoder::new();
        e.uint(1);
        let bytes = e.finish();
        assert!(matches!(
            Decoder::new(&bytes).bytes(),
            Err(DecodeError::WrongKind { .. })
        ));
        let mut padded = bytes.clone();
        padded.push(0);
        let mut d = Decoder::new(&padded);
        d.uint().unwrap();
        assert_eq!(d.finish(), Err(DecodeError::Trailing));
        assert_eq!(
            Decoder::new(&bytes[..6]).uint(),
            Err(DecodeError::Truncated)
        );
    }

    #[test]
    fn element_field_kinds() {
        let g = MockSource::from_dlog(MockScalar::new(3));
        let mut e = Encoder::new();
        e.element(&g).scalar(&MockScalar::<7919>::new(9));
        let bytes = e.finish();
        assert_eq!(bytes[0], tag::SOURCE);
        let mut d = Decoder::new(&bytes);
        assert_eq!(d.element::<MockSource>().unwrap(), g);
        assert_eq!(d.scalar::<MockScalar>().unwrap(), MockScalar::new(9));
    }

    #[test]
    fn container_rejects_tampering() {
        let c = Container::new(BackendId::Mock(7919), ArtifactKind::Crs)
            .with_section(1, vec![1, 2, 3])
            .with_section(2, vec![]);
        let bytes = c.encode();
        let backend = <MockGroup as PairingGroup>::BACKEND;
        assert_eq!(Container::decode(&bytes, backend).unwrap(), c);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(Container::decode(&bad, backend), Err(DecodeError::BadMagic));
        let mut extra = bytes.clone();
        extra.push(9);
        assert_eq!(Container::decode(&extra, backend), Err(DecodeError::Trailing));
        assert!(matches!(
            Container::decode(&bytes, BackendId::Bls12_381),
            Err(DecodeError::BackendMismatch { .. })
        ));
        assert_eq!(
            Container::peek(&bytes).unwrap(),
            (BackendId::Mock(7919), ArtifactKind::Crs)
        );
    }

    #[test]
    fn kind_codes_roundtrip() {
        for k in ArtifactKind::ALL {
            assert_eq!(ArtifactKind::from_code(k.code()).unwrap(), k);
        }
        assert!(ArtifactKind::from_code(0).is_err());
        assert_eq!(ArtifactKind::TransformCiphertext.label(), "transform-ciphertext");
    }

    proptest! {
        #[test]
        fn container_roundtrip(sections in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..40), 0..6)) {
            let mut c = Container::new(BackendId::Bls12_381, ArtifactKind::Ciphertext);
            for (i, s) in sections.into_iter().enumerate() {
                c = c.with_section(i as u16, s);
            }
            let bytes = c.encode();
            prop_assert_eq!(Container::decode(&bytes, BackendId::Bls12_381).unwrap(), c);
        }

        #[test]
        fn envelope_roundtrip(data in proptest::collection::vec(any::<u8>(), 0..64)) {
            let env = Envelope::wrap(BackendId::Mock(7919), ArtifactKind::AuxState, &data);
            let back = Envelope::from_json(&env.to_json()).unwrap();
            prop_assert_eq!(back.payload().unwrap(), data);
            prop_assert_eq!(back.backend_id().unwrap(), BackendId::Mock(7919));
        }
    }
}
