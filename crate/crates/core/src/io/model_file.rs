//! Binary model persistence.
//!
//! Layout: an 8-byte magic, a `u32` format version, then every model field
//! in a fixed order. All numbers are little-endian; arrays are row-major
//! `f64`; edges are stored per source node as `(target, strength)` pairs.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::edges::EdgeGraph;
use crate::error::{Result, SongError};
use crate::eval::pca::Projection;
use crate::hyper::HyperParams;
use crate::model::SongModel;

pub const MAGIC: &[u8; 8] = b"SONGMDL\0";
pub const FORMAT_VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn bool(&mut self, v: bool) {
        self.u8(u8::from(v));
    }
    fn opt_f64(&mut self, v: Option<f64>) {
        self.bool(v.is_some());
        self.f64(v.unwrap_or(0.0));
    }
    fn matrix(&mut self, m: &Array2<f64>) {
        self.usize(m.nrows());
        self.usize(m.ncols());
        m.iter().for_each(|&v| self.f64(v));
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(SongError::Format(format!("model file truncated at byte {}", self.pos)));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| SongError::Format("size overflows usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(SongError::Format(format!("invalid flag byte {b}"))),
        }
    }
    fn opt_f64(&mut self) -> Result<Option<f64>> {
        let present = self.bool()?;
        let v = self.f64()?;
        Ok(present.then_some(v))
    }
    fn matrix(&mut self) -> Result<Array2<f64>> {
        let rows = self.usize()?;
        let cols = self.usize()?;
        let len = rows
            .checked_mul(cols)
            .filter(|&l| l.checked_mul(8).is_some_and(|b| b <= self.bytes.len() - self.pos))
            .ok_or_else(|| SongError::Format(format!("model file truncated at byte {}", self.pos)))?;
        let values = (0..len).map(|_| self.f64()).collect::<Result<Vec<_>>>()?;
        Ok(Array2::from_shape_vec((rows, cols), values).expect("length computed from shape"))
    }
}

fn write_hyper(w: &mut Writer, h: &HyperParams) {
    w.usize(h.k);
    w.usize(h.t_max);
    w.f64(h.alpha_0);
    w.f64(h.a);
    w.f64(h.b);
    w.f64(h.epsilon_decay);
    w.f64(h.e_min);
    w.opt_f64(h.theta_g);
    w.f64(h.theta_g_factor);
    w.usize(h.neg_rate);
    w.f64(h.dist_floor);
    w.f64(h.max_step);
    w.usize(h.max_coding_vectors);
    w.f64(h.coding_vector_ratio);
    w.bool(h.centroid_with_input);
    w.bool(h.replay_reference);
    w.u64(h.seed);
}

fn read_hyper(r: &mut Reader) -> Result<HyperParams> {
    Ok(HyperParams {
        k: r.usize()?,
        t_max: r.usize()?,
        alpha_0: r.f64()?,
        a: r.f64()?,
        b: r.f64()?,
        epsilon_decay: r.f64()?,
        e_min: r.f64()?,
        theta_g: r.opt_f64()?,
        theta_g_factor: r.f64()?,
        neg_rate: r.usize()?,
        dist_floor: r.f64()?,
        max_step: r.f64()?,
        max_coding_vectors: r.usize()?,
        coding_vector_ratio: r.f64()?,
        centroid_with_input: r.bool()?,
        replay_reference: r.bool()?,
        seed: r.u64()?,
    })
}

/// Serializes a model to bytes. Equal models give identical bytes.
pub fn encode_model(model: &SongModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    write_hyper(&mut w, &model.hyper);
    w.usize(model.input_dim);
    w.usize(model.output_dim);
    w.opt_f64(model.theta_g);
    w.usize(model.epoch);

    w.0.extend_from_slice(&model.rng.get_seed());
    w.u64(model.rng.get_stream());
    w.0.extend_from_slice(&model.rng.get_word_pos().to_le_bytes());

    w.matrix(&model.coding_vectors);
    w.matrix(&model.embedding);
    w.usize(model.growth_error.len());
    model.growth_error.iter().for_each(|&g| w.f64(g));

    w.usize(model.edges.len());
    for i in 0..model.edges.len() {
        let out = model.edges.outgoing(i);
        w.usize(out.len());
        for &(j, v) in out {
            w.usize(j);
            w.f64(v);
        }
    }

    w.bool(model.reference.is_some());
    if let Some(r) = &model.reference {
        w.matrix(r);
    }
    w.bool(model.projection.is_some());
    if let Some(p) = &model.projection {
        w.usize(p.mean().len());
        p.mean().iter().for_each(|&v| w.f64(v));
        w.matrix(p.components());
    }
    w.0
}

/// Parses bytes produced by [`encode_model`], validating structure and
/// model invariants.
pub fn decode_model(bytes: &[u8]) -> Result<SongModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len()).ok() != Some(MAGIC.as_slice()) {
        return Err(SongError::Format("not a model file (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(SongError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let hyper = read_hyper(&mut r)?;
    let input_dim = r.usize()?;
    let output_dim = r.usize()?;
    let theta_g = r.opt_f64()?;
    let epoch = r.usize()?;

    let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(r.u64()?);
    rng.set_word_pos(r.u128()?);

    let coding_vectors = r.matrix()?;
    let embedding = r.matrix()?;
    let n_growth = r.usize()?;
    if n_growth > coding_vectors.nrows() {
        return Err(SongError::Format("growth error longer than node count".into()));
    }
    let growth_error = (0..n_growth).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;

    let n_edges = r.usize()?;
    if n_edges != coding_vectors.nrows() {
        return Err(SongError::Format(format!(
            "edge table has {n_edges} nodes, expected {}",
            coding_vectors.nrows()
        )));
    }
    let mut edges = EdgeGraph::new(n_edges);
    for i in 0..n_edges {
        let count = r.usize()?;
        for _ in 0..count {
            let j = r.usize()?;
            let v = r.f64()?;
            if j >= n_edges || j == i || !(v > 0.0 && v <= 1.0) {
                return Err(SongError::Format(format!("bad edge {i} -> {j} = {v}")));
            }
            edges.set(i, j, v);
        }
    }

    let reference = if r.bool()? { Some(r.matrix()?) } else { None };
    let projection = if r.bool()? {
        let len = r.usize()?;
        if len > bytes.len() {
            return Err(SongError::Format("model file truncated".into()));
        }
        let mean = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let components = r.matrix()?;
        Some(Projection::new(Array1::from(mean), components)?)
    } else {
        None
    };
    if r.pos != bytes.len() {
        return Err(SongError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }

    hyper.validate(output_dim)?;
    if let Some(rf) = &reference {
        if rf.ncols() != input_dim || !rf.iter().all(|v| v.is_finite()) {
            return Err(SongError::Format("invalid reference data".into()));
        }
    }
    let model = SongModel {
        coding_vectors,
        edges,
        embedding,
        growth_error,
        input_dim,
        output_dim,
        hyper,
        theta_g,
        rng,
        epoch,
        reference,
        projection: None,
    };
    model.check_invariants()?;
    let mut model = model;
    model.set_projection(projection)?;
    Ok(model)
}

/// Writes the model atomically: a sibling temporary file is renamed over
/// `path` once fully written.
pub fn save_model(model: &SongModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&encode_model(model))?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SongModel> {
    decode_model(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use crate::eval::pca::fit_pca;
    use ndarray::array;

    fn sample_model() -> SongModel {
        let data = DataMatrix::unlabeled(Array2::from_shape_fn((30, 4), |(i, j)| ((i * 5 + j * 3) % 7) as f64)).unwrap();
        let hyper = HyperParams { t_max: 3, ..Default::default() };
        let mut m = SongModel::init_for(&data, 2, hyper).unwrap();
        crate::trainer::fit(&mut m, &data).unwrap();
        m
    }

    #[test]
    fn round_trip_is_lossless() {
        let m = sample_model();
        let back = decode_model(&encode_model(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn projection_survives() {
        let raw = DataMatrix::unlabeled(Array2::from_shape_fn((10, 5), |(i, j)| ((i * 7 + j * j * 3) % 11) as f64)).unwrap();
        let p = fit_pca(&raw, 3).unwrap();
        let mut m = SongModel::init(3, 2, HyperParams::default(), None).unwrap();
        m.set_projection(Some(p)).unwrap();
        assert_eq!(decode_model(&encode_model(&m)).unwrap(), m);
    }

    #[test]
    fn saves_are_byte_identical() {
        let m = sample_model();
        let dir = tempfile::tempdir().unwrap();
        save_model(&m, dir.path().join("a.song")).unwrap();
        save_model(&m.clone(), dir.path().join("b.song")).unwrap();
        assert_eq!(
            fs::read(dir.path().join("a.song")).unwrap(),
            fs::read(dir.path().join("b.song")).unwrap()
        );
        assert_eq!(load_model(dir.path().join("a.song")).unwrap(), m);
    }

    #[test]
    fn every_truncation_is_rejected() {
        let bytes = encode_model(&sample_model());
        for len in (0..bytes.len()).step_by(7).chain([bytes.len() - 1]) {
            assert!(decode_model(&bytes[..len]).is_err(), "accepted {len} bytes");
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut bytes = encode_model(&sample_model());
        bytes[8..12].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
        assert!(matches!(decode_model(&bytes), Err(SongError::Version { .. })));
    }

    #[test]
    fn corrupt_values_rejected() {
        let mut m = SongModel::init(3, 2, HyperParams::default(), None).unwrap();
        m.coding_vectors[[0, 0]] = f64::NAN;
        assert!(decode_model(&encode_model(&m)).is_err());
        assert!(decode_model(b"NOTAMODEL").is_err());
        let mut m = SongModel::init(3, 2, HyperParams::default(), None).unwrap();
        m.embedding = array![[0.0, 0.0]];
        assert!(decode_model(&encode_model(&m)).is_err());
    }
}
