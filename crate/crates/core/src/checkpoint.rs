//! Binary checkpoints of the full model state.
//!
//! Layout: 8-byte magic, `u32` format version, one byte holding the size of
//! a stored real, then little-endian fields, then a SHA-256 digest of
//! everything before it. A file is either loaded completely or rejected.

use std::collections::BTreeSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::linalg::DenseMatrix;
use crate::model::{EmbeddingStore, Model, ModelConfig, RelationParams, Variant};
use crate::trainer::TrainConfig;
use crate::{Error, Real, Result};

pub const MAGIC: &[u8; 8] = b"PRJNETCK";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;
const REAL_BYTES: u8 = std::mem::size_of::<Real>() as u8;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub train_config: TrainConfig,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(FORMAT_VERSION);
        w.u8(REAL_BYTES);
        write_model_config(&mut w, &self.model.config);
        write_train_config(&mut w, &self.train_config);
        write_vocab(&mut w, &self.model.vocab);
        w.u64(self.model.relation_names.len() as u64);
        for name in &self.model.relation_names {
            w.str(name);
        }
        let e = &self.model.embeddings;
        for m in [&e.input, &e.output, &e.relations] {
            w.matrix(m);
        }
        for params in &self.model.relations {
            w.reals(&params.flatten());
        }
        let digest = Sha256::digest(&w.buf);
        w.bytes(&digest);
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = MAGIC.len() + 4 + 1;
        if bytes.len() < header + DIGEST_LEN {
            return Err(Error::Checkpoint("file is truncated".into()));
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        if bytes[12] != REAL_BYTES {
            return Err(Error::Checkpoint(format!(
                "checkpoint stores {}-byte reals, this build uses {REAL_BYTES}",
                bytes[12]
            )));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Checkpoint("checksum mismatch (truncated or corrupted file)".into()));
        }

        let mut r = Reader { buf: body, pos: header };
        let config = read_model_config(&mut r)?;
        let train_config = read_train_config(&mut r)?;
        let vocab = read_vocab(&mut r)?;
        let relation_count = r.len()?;
        let relation_names = (0..relation_count).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        let input = r.matrix()?;
        let output = r.matrix()?;
        let relation_vectors = r.matrix()?;
        let mut relations = Vec::with_capacity(relation_count);
        for _ in 0..relation_count {
            let mut params = RelationParams::zeros(&config);
            let flat = r.reals()?;
            if flat.len() != params.param_count() {
                return Err(Error::Checkpoint("relation parameter size mismatch".into()));
            }
            params.load_flat(&flat);
            relations.push(params);
        }
        if r.pos != body.len() {
            return Err(Error::Checkpoint("trailing bytes after model state".into()));
        }

        let dim = config.dim;
        let shapes_ok = input.rows() == vocab.len()
            && output.rows() == vocab.len()
            && relation_vectors.rows() == relation_count
            && [&input, &output, &relation_vectors].iter().all(|m| m.cols() == dim || m.rows() == 0);
        if !shapes_ok {
            return Err(Error::Checkpoint("matrix shapes disagree with vocabulary or config".into()));
        }
        Ok(Self {
            model: Model {
                config,
                vocab,
                relation_names,
                embeddings: EmbeddingStore {
                    input,
                    output,
                    relations: relation_vectors,
                },
                relations,
            },
            train_config,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<()> {
    checkpoint.save(path)
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::load(path)
}

fn write_model_config(w: &mut Writer, c: &ModelConfig) {
    let tag = Variant::ALL.iter().position(|&v| v == c.variant).unwrap() as u8;
    w.u8(tag);
    w.u64(c.dim as u64);
    w.u64(c.left_rank as u64);
    w.u64(c.right_rank as u64);
    w.real(c.margin);
}

fn read_model_config(r: &mut Reader) -> Result<ModelConfig> {
    let tag = r.u8()? as usize;
    let variant = *Variant::ALL
        .get(tag)
        .ok_or_else(|| Error::Checkpoint(format!("unknown variant tag {tag}")))?;
    let config = ModelConfig {
        variant,
        dim: r.len()?,
        left_rank: r.len()?,
        right_rank: r.len()?,
        margin: r.real()?,
    };
    config
        .validate()
        .map_err(|e| Error::Checkpoint(format!("invalid model config: {e}")))?;
    Ok(config)
}

fn write_train_config(w: &mut Writer, c: &TrainConfig) {
    w.f64(c.alpha);
    w.f64(c.initial_lr);
    w.u64(c.epochs as u64);
    w.u64(c.window as u64);
    w.u64(c.negatives as u64);
    w.u64(c.seed);
    w.u64(c.workers as u64);
    w.u8(c.deterministic as u8);
    w.u8(c.subsample.is_some() as u8);
    w.f64(c.subsample.unwrap_or(0.0));
    w.f64(c.negative_power);
    w.u64(c.negative_table_size as u64);
    w.u8(c.corrupt_relations as u8);
    w.u8(c.steps_per_epoch.is_some() as u8);
    w.u64(c.steps_per_epoch.unwrap_or(0));
}

fn read_train_config(r: &mut Reader) -> Result<TrainConfig> {
    let alpha = r.f64()?;
    let initial_lr = r.f64()?;
    let epochs = r.len()?;
    let window = r.len()?;
    let negatives = r.len()?;
    let seed = r.u64()?;
    let workers = r.len()?;
    let deterministic = r.flag()?;
    let has_subsample = r.flag()?;
    let subsample = r.f64()?;
    let negative_power = r.f64()?;
    let negative_table_size = r.len()?;
    let corrupt_relations = r.flag()?;
    let has_steps = r.flag()?;
    let steps = r.u64()?;
    Ok(TrainConfig {
        alpha,
        initial_lr,
        epochs,
        window,
        negatives,
        seed,
        workers,
        deterministic,
        subsample: has_subsample.then_some(subsample),
        negative_power,
        negative_table_size,
        corrupt_relations,
        steps_per_epoch: has_steps.then_some(steps),
    })
}

fn write_vocab(w: &mut Writer, v: &Vocabulary) {
    w.u64(v.len() as u64);
    w.u64(v.min_count());
    for (tok, &count) in v.tokens().iter().zip(v.counts()) {
        w.str(tok);
        w.u64(count);
    }
    w.u64(v.phrases().len() as u64);
    for p in v.phrases() {
        w.str(p);
    }
}

fn read_vocab(r: &mut Reader) -> Result<Vocabulary> {
    let n = r.len()?;
    let min_count = r.u64()?;
    let mut entries = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let tok = r.string()?;
        entries.push((tok, r.u64()?));
    }
    let phrase_count = r.len()?;
    let phrases = (0..phrase_count).map(|_| r.string()).collect::<Result<BTreeSet<_>>>()?;
    Vocabulary::from_parts(entries, min_count, phrases)
        .map_err(|e| Error::Checkpoint(format!("invalid vocabulary: {e}")))
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn real(&mut self, v: Real) {
        self.bytes(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.bytes(s.as_bytes());
    }
    fn reals(&mut self, values: &[Real]) {
        self.u64(values.len() as u64);
        for &v in values {
            self.real(v);
        }
    }
    fn matrix(&mut self, m: &DenseMatrix) {
        self.u64(m.rows() as u64);
        self.u64(m.cols() as u64);
        for &v in m.as_slice() {
            self.real(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Checkpoint("unexpected end of model state".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }
    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Checkpoint(format!("bad flag byte {b}"))),
        }
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Checkpoint(format!("length {v} too large")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn real(&mut self) -> Result<Real> {
        Ok(Real::from_le_bytes(self.array()?))
    }
    fn string(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid UTF-8 in string".into()))
    }
    fn reals(&mut self) -> Result<Vec<Real>> {
        let n = self.len()?;
        let bytes = self.take(n.checked_mul(REAL_BYTES as usize).ok_or_else(|| {
            Error::Checkpoint("array too large".into())
        })?)?;
        Ok(bytes
            .chunks_exact(REAL_BYTES as usize)
            .map(|c| Real::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn matrix(&mut self) -> Result<DenseMatrix> {
        let rows = self.len()?;
        let cols = self.len()?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Checkpoint("matrix too large".into()))?;
        let bytes = self.take(n.checked_mul(REAL_BYTES as usize).ok_or_else(|| {
            Error::Checkpoint("matrix too large".into())
        })?)?;
        let values = bytes
            .chunks_exact(REAL_BYTES as usize)
            .map(|c| Real::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(DenseMatrix::from_vec(rows, cols, values))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::PhraseLexicon;

    fn sample() -> Checkpoint {
        let counts: HashMap<String, u64> =
            [("a", 5), ("b", 3), ("new_york", 2)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let vocab = Vocabulary::from_counts(counts, 1, &PhraseLexicon::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let config = ModelConfig { dim: 4, left_rank: 2, right_rank: 3, ..ModelConfig::default() };
        let model = Model::init(config, vocab, vec!["r".into(), "s".into()], &mut rng).unwrap();
        Checkpoint { model, train_config: TrainConfig { subsample: Some(1e-3), ..TrainConfig::default() } }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn every_variant_round_trips() {
        for variant in Variant::ALL {
            let mut c = sample();
            c.model.config.variant = variant;
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            c.model.relations = (0..2).map(|_| RelationParams::init(&c.model.config, &mut rng).unwrap()).collect();
            assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
        }
    }

    #[test]
    fn bad_magic_and_version_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bytes), Err(Error::Checkpoint(_))));
        let mut bytes = sample().to_bytes();
        bytes[8] = 9;
        let err = Checkpoint::from_bytes(&bytes).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");
    }

    #[test]
    fn every_truncation_rejected() {
        let bytes = sample().to_bytes();
        for len in 0..bytes.len() {
            assert!(Checkpoint::from_bytes(&bytes[..len]).is_err(), "length {len}");
        }
    }

    #[test]
    fn flipped_byte_rejected() {
        let mut bytes = sample().to_bytes();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 1;
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }
}
