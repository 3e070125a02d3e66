//! Field files, tuple and bundle directories.
//!
//! Binary grid format, all little-endian:
//!
//!   magic "KSGF" | u32 n_theta | u32 n_phi | u32 rank | u32 ncomp | u32 kind
//!   | ncomp·n_theta·n_phi f64, component-major, θ-major within a component
//!
//! `kind` is the FieldKind code, or `GENERAL_TENSOR` for a full-rank tensor.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::chardata::{CharDataBundle, CharDataReport};
use crate::constraint::verify_kappa_constraint;
use crate::error::{Error, Result};
use crate::field::{AnyField, FieldKind, ScalarField, Tensor, VectorField};
use crate::grid::SphereGrid;
use crate::metric::ConformalMetric;
use crate::tuple::{PicardStep, RegularTuple};

pub const MAGIC: &[u8; 4] = b"KSGF";
pub const GENERAL_TENSOR: u32 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridHeader {
    pub n_theta: u32,
    pub n_phi: u32,
    pub rank: u32,
    pub ncomp: u32,
    pub kind: u32,
}

impl GridHeader {
    fn of_kind(grid: &SphereGrid, kind: FieldKind) -> Self {
        GridHeader {
            n_theta: grid.n_theta as u32,
            n_phi: grid.n_phi as u32,
            rank: kind.rank() as u32,
            ncomp: kind.ncomp() as u32,
            kind: kind.code(),
        }
    }

    fn payload_len(&self) -> usize {
        self.ncomp as usize * self.n_theta as usize * self.n_phi as usize
    }
}

/// Serde adapter for floats that may be NaN: JSON writes NaN as null, and null reads back as NaN.
pub mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub fn write_grid_data<W: Write>(w: &mut W, h: &GridHeader, data: &[f64]) -> Result<()> {
    if data.len() != h.payload_len() {
        return Err(Error::Format(format!("payload has {} values, header needs {}", data.len(), h.payload_len())));
    }
    w.write_all(MAGIC)?;
    for v in [h.n_theta, h.n_phi, h.rank, h.ncomp, h.kind] {
        w.write_u32::<LittleEndian>(v)?;
    }
    for v in data {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

pub fn read_grid_data<R: Read>(r: &mut R) -> Result<(GridHeader, Vec<f64>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a grid file (bad magic)".into()));
    }
    let mut f = [0u32; 5];
    for v in f.iter_mut() {
        *v = r.read_u32::<LittleEndian>()?;
    }
    let h = GridHeader { n_theta: f[0], n_phi: f[1], rank: f[2], ncomp: f[3], kind: f[4] };
    let consistent = match FieldKind::from_code(h.kind) {
        Some(k) => k.rank() as u32 == h.rank && k.ncomp() as u32 == h.ncomp,
        None => h.kind == GENERAL_TENSOR && h.rank < 8 && h.ncomp == 1 << h.rank,
    };
    if !consistent {
        return Err(Error::Format(format!("inconsistent header {h:?}")));
    }
    let mut data = vec![0.0; h.payload_len()];
    r.read_f64_into::<LittleEndian>(&mut data)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok((h, data))
}

fn check_shape(h: &GridHeader, grid: &SphereGrid) -> Result<()> {
    if h.n_theta as usize != grid.n_theta || h.n_phi as usize != grid.n_phi {
        return Err(Error::GridMismatch(format!(
            "file is {}x{}, grid is {}x{}",
            h.n_theta, h.n_phi, grid.n_theta, grid.n_phi
        )));
    }
    Ok(())
}

pub fn write_field(path: &Path, field: &AnyField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_data(&mut w, &GridHeader::of_kind(field.grid(), field.kind()), field.data())?;
    Ok(w.flush()?)
}

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    let h = GridHeader {
        n_theta: t.grid.n_theta as u32,
        n_phi: t.grid.n_phi as u32,
        rank: t.rank as u32,
        ncomp: t.ncomp() as u32,
        kind: GENERAL_TENSOR,
    };
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_data(&mut w, &h, &t.data)?;
    Ok(w.flush()?)
}

/// Reads a field onto `grid`, which must have the file's shape.
pub fn read_field(path: &Path, grid: &Arc<SphereGrid>) -> Result<AnyField> {
    let (h, data) = read_grid_data(&mut BufReader::new(File::open(path)?))?;
    check_shape(&h, grid)?;
    let kind = FieldKind::from_code(h.kind)
        .ok_or_else(|| Error::Format(format!("{} holds a general tensor", path.display())))?;
    AnyField::from_kind_data(kind, grid, data)
}

pub fn read_tensor(path: &Path, grid: &Arc<SphereGrid>) -> Result<Tensor> {
    let (h, data) = read_grid_data(&mut BufReader::new(File::open(path)?))?;
    check_shape(&h, grid)?;
    Ok(Tensor { grid: grid.clone(), rank: h.rank as usize, data })
}

fn scalar_of(f: AnyField, what: &str) -> Result<ScalarField> {
    match f {
        AnyField::Scalar(s) => Ok(s),
        other => Err(Error::Format(format!("{what}: expected scalar, found {}", other.kind().name()))),
    }
}

/// One row per node: i, j, θ, φ, then the components.
pub fn write_field_csv<W: Write>(w: W, field: &AnyField) -> Result<()> {
    write_components_csv(w, field.grid(), field.data(), field.kind().ncomp())
}

pub fn write_components_csv<W: Write>(w: W, grid: &SphereGrid, data: &[f64], ncomp: usize) -> Result<()> {
    let n = grid.len();
    if data.len() != n * ncomp {
        return Err(Error::Format("csv: payload does not match grid".into()));
    }
    let mut wr = csv::Writer::from_writer(w);
    let mut head = vec!["i".to_string(), "j".into(), "theta".into(), "phi".into()];
    head.extend((0..ncomp).map(|c| format!("c{c}")));
    wr.write_record(&head)?;
    let dphi = grid.dphi();
    for i in 0..grid.n_theta {
        for j in 0..grid.n_phi {
            let k = i * grid.n_phi + j;
            let mut row = vec![i.to_string(), j.to_string(), grid.theta_nodes[i].to_string(), (j as f64 * dphi).to_string()];
            row.extend((0..ncomp).map(|c| data[c * n + k].to_string()));
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn save_field_csv(path: &Path, field: &AnyField) -> Result<()> {
    write_field_csv(File::create(path)?, field)
}

/// Reads a CSV made by `write_field_csv` back into component-major data.
pub fn read_field_csv<R: Read>(r: R, kind: FieldKind, grid: &Arc<SphereGrid>) -> Result<AnyField> {
    let n = grid.len();
    let nc = kind.ncomp();
    let mut data = vec![f64::NAN; n * nc];
    let mut seen = 0;
    for rec in csv::Reader::from_reader(r).records() {
        let rec = rec?;
        if rec.len() != 4 + nc {
            return Err(Error::Format(format!("csv row has {} columns, expected {}", rec.len(), 4 + nc)));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("csv: {e}")));
        let idx = |s: &str| s.parse::<usize>().map_err(|e| Error::Format(format!("csv: {e}")));
        let (i, j) = (idx(&rec[0])?, idx(&rec[1])?);
        if i >= grid.n_theta || j >= grid.n_phi {
            return Err(Error::GridMismatch(format!("csv node ({i}, {j}) outside grid")));
        }
        for c in 0..nc {
            data[c * n + i * grid.n_phi + j] = parse(&rec[4 + c])?;
        }
        seen += 1;
    }
    if seen != n {
        return Err(Error::Format(format!("csv has {seen} rows, grid has {n} nodes")));
    }
    AnyField::from_kind_data(kind, grid, data)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    Ok(w.flush()?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TupleMeta {
    pub n_theta: usize,
    pub n_phi: usize,
    #[serde(with = "nan_as_null")]
    pub epsilon: f64,
    #[serde(with = "nan_as_null")]
    pub gamma: f64,
    pub kappa: f64,
    #[serde(with = "nan_as_null")]
    pub residual: f64,
    pub iteration_trace: Vec<PicardStep>,
}

const TUPLE_FILES: [&str; 4] = ["phi.bin", "log_lapse.bin", "b.bin", "f_potential.bin"];

pub fn save_tuple(dir: &Path, t: &RegularTuple) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = t.grid();
    let meta = TupleMeta {
        n_theta: g.n_theta,
        n_phi: g.n_phi,
        epsilon: t.epsilon,
        gamma: t.gamma,
        kappa: t.kappa,
        residual: t.residual,
        iteration_trace: t.iteration_trace.clone(),
    };
    write_json(&dir.join("tuple.json"), &meta)?;
    let fields = [
        AnyField::Scalar(t.metric.phi.clone()),
        AnyField::Scalar(t.metric.log_lapse.clone()),
        AnyField::Vector(t.b.clone()),
        AnyField::Scalar(t.f_potential.clone()),
    ];
    for (name, f) in TUPLE_FILES.iter().zip(&fields) {
        write_field(&dir.join(name), f)?;
    }
    Ok(())
}

/// The reloaded tuple differentiates b on the grid; its residual is recomputed.
pub fn load_tuple(dir: &Path) -> Result<(RegularTuple, TupleMeta)> {
    let meta: TupleMeta = read_json(&dir.join("tuple.json"))?;
    let g = SphereGrid::new(meta.n_theta, meta.n_phi)?;
    let phi = scalar_of(read_field(&dir.join(TUPLE_FILES[0]), &g)?, "phi")?;
    let lapse = scalar_of(read_field(&dir.join(TUPLE_FILES[1]), &g)?, "log_lapse")?;
    let b: VectorField = match read_field(&dir.join(TUPLE_FILES[2]), &g)? {
        AnyField::Vector(v) => v,
        other => return Err(Error::Format(format!("b: expected vector, found {}", other.kind().name()))),
    };
    let f = scalar_of(read_field(&dir.join(TUPLE_FILES[3]), &g)?, "f_potential")?;
    let mut t = RegularTuple::from_parts(ConformalMetric::new(phi, lapse)?, b, meta.kappa)?;
    t.f_potential = f;
    t.epsilon = meta.epsilon;
    t.gamma = meta.gamma;
    t.iteration_trace = meta.iteration_trace.clone();
    t.residual = verify_kappa_constraint(&t).l2_ray;
    Ok((t, meta))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BundleManifest {
    pub n_theta: usize,
    pub n_phi: usize,
    pub kappa: f64,
    pub v_bar: f64,
    pub ladder: Vec<f64>,
    pub chihat_files: Vec<String>,
    pub v_hat: Vec<f64>,
    pub outgoing_files: Vec<[String; 2]>,
    pub report: CharDataReport,
}

pub fn save_bundle(dir: &Path, b: &CharDataBundle) -> Result<BundleManifest> {
    let g = b.eta_tri.grid().clone();
    fs::create_dir_all(dir.join("chihat"))?;
    fs::create_dir_all(dir.join("outgoing"))?;
    write_field(&dir.join("eta_tri.bin"), &AnyField::OneForm(b.eta_tri.clone()))?;
    write_field(&dir.join("trchi_tri.bin"), &AnyField::Scalar(b.trchi_tri.clone()))?;
    write_field(&dir.join("chihat/stationary.bin"), &AnyField::SymTF2(b.chihat.stationary.clone()))?;
    let mut chihat_files = Vec::new();
    for (k, s) in b.chihat.family.samples.iter().enumerate() {
        let name = format!("chihat/v{k:03}.bin");
        write_field(&dir.join(&name), &AnyField::SymTF2(s.f.clone()))?;
        chihat_files.push(name);
    }
    let mut outgoing_files = Vec::new();
    for (k, s) in b.outgoing.samples.iter().enumerate() {
        let pair = [format!("outgoing/phi{k:03}.bin"), format!("outgoing/ghat{k:03}.bin")];
        write_field(&dir.join(&pair[0]), &AnyField::Scalar(s.phi.clone()))?;
        write_tensor(&dir.join(&pair[1]), &s.ghat)?;
        outgoing_files.push(pair);
    }
    let man = BundleManifest {
        n_theta: g.n_theta,
        n_phi: g.n_phi,
        kappa: b.kappa,
        v_bar: b.v_bar,
        ladder: b.ladder(),
        chihat_files,
        v_hat: b.outgoing.samples.iter().map(|s| s.v_hat).collect(),
        outgoing_files,
        report: b.report.clone(),
    };
    write_json(&dir.join("manifest.json"), &man)?;
    Ok(man)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::OneForm;
    use crate::random::{random_oneform, random_scalar, random_symtf, rng};

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let g = SphereGrid::new(6, 8).unwrap();
        let mut r = rng(3);
        let dir = tempfile::tempdir().unwrap();
        let fields = [
            AnyField::Scalar(random_scalar(&g, &mut r, 0, 4)),
            AnyField::OneForm(random_oneform(&g, &mut r, 4)),
            AnyField::SymTF2(random_symtf(&g, &mut r, 4)),
        ];
        for (k, f) in fields.iter().enumerate() {
            let p = dir.path().join(format!("f{k}.bin"));
            write_field(&p, f).unwrap();
            let back = read_field(&p, &g).unwrap();
            assert_eq!(back.kind(), f.kind());
            assert!(back.data().iter().zip(f.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
            assert_eq!(fs::metadata(&p).unwrap().len() as usize, 24 + 8 * f.data().len());
        }
    }

    #[test]
    fn header_layout() {
        let g = SphereGrid::new(2, 4).unwrap();
        let mut buf = Vec::new();
        let f = ScalarField::constant(&g, 1.5);
        write_grid_data(&mut buf, &GridHeader::of_kind(&g, FieldKind::Scalar), f.data()).unwrap();
        assert_eq!(&buf[..4], b"KSGF");
        assert_eq!(&buf[4..8], &2u32.to_le_bytes());
        assert_eq!(&buf[8..12], &4u32.to_le_bytes());
        assert_eq!(&buf[24..32], &1.5f64.to_le_bytes());
    }

    #[test]
    fn rejects_wrong_grid_and_garbage() {
        let g = SphereGrid::new(4, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        write_field(&p, &AnyField::Scalar(ScalarField::constant(&g, 1.0))).unwrap();
        let other = SphereGrid::new(4, 8).unwrap();
        assert!(matches!(read_field(&p, &other), Err(Error::GridMismatch(_))));
        fs::write(&p, b"nonsense").unwrap();
        assert!(matches!(read_field(&p, &g), Err(Error::Format(_))));
        let mut bad = Vec::new();
        let h = GridHeader { n_theta: 4, n_phi: 4, rank: 1, ncomp: 1, kind: 0 };
        write_grid_data(&mut bad, &h, &[0.0; 16]).unwrap();
        assert!(read_grid_data(&mut bad.as_slice()).is_err());
    }

    #[test]
    fn general_tensor_round_trip() {
        let g = SphereGrid::new(4, 4).unwrap();
        let mut t = Tensor::zeros(&g, 2);
        t.data.iter_mut().enumerate().for_each(|(k, v)| *v = k as f64 * 0.25);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.bin");
        write_tensor(&p, &t).unwrap();
        assert_eq!(read_tensor(&p, &g).unwrap().data, t.data);
        assert!(read_field(&p, &g).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = SphereGrid::new(5, 6).unwrap();
        let f = AnyField::OneForm(OneForm::from_fn(&g, |th, ph| [th.cos() * ph.sin(), 0.1 / 3.0]));
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,theta,phi,c0,c1\n"));
        assert_eq!(text.lines().count(), 1 + g.len());
        let back = read_field_csv(buf.as_slice(), FieldKind::OneForm, &g).unwrap();
        assert_eq!(back.data(), f.data());
        assert!(read_field_csv(buf.as_slice(), FieldKind::SymTF2, &g).is_ok());
        assert!(read_field_csv(buf.as_slice(), FieldKind::Scalar, &g).is_err());
    }

    #[test]
    fn tuple_round_trip() {
        let g = SphereGrid::new(8, 8).unwrap();
        let mut t = RegularTuple::trivial(&g);
        t.epsilon = 0.0;
        t.gamma = 0.1;
        let dir = tempfile::tempdir().unwrap();
        save_tuple(dir.path(), &t).unwrap();
        let (back, meta) = load_tuple(dir.path()).unwrap();
        assert_eq!(meta.kappa, 0.0);
        assert_eq!(back.b.data(), t.b.data());
        assert_eq!(back.residual, 0.0);
    }

    #[test]
    fn nan_metadata_survives_json() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        let m = TupleMeta {
            n_theta: 1,
            n_phi: 2,
            epsilon: f64::NAN,
            gamma: 0.1,
            kappa: 1.0 / 3.0,
            residual: 1e-300,
            iteration_trace: vec![],
        };
        write_json(&p, &m).unwrap();
        let back: TupleMeta = read_json(&p).unwrap();
        assert!(back.epsilon.is_nan());
        assert_eq!((back.gamma, back.kappa, back.residual), (m.gamma, m.kappa, m.residual));
    }
}
