//! Sampled tensor fields in the orthonormal dyad (e_θ, (sinθ)⁻¹∂_φ).

use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SphereGrid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Scalar,
    Vector,
    OneForm,
    SymTF2,
}

impl FieldKind {
    pub fn ncomp(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            _ => 2,
        }
    }

    /// Tensor rank (the trace-free tensor has rank 2 with two stored components).
    pub fn rank(self) -> usize {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Vector | FieldKind::OneForm => 1,
            FieldKind::SymTF2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Scalar => "scalar",
            FieldKind::Vector => "vector",
            FieldKind::OneForm => "one-form",
            FieldKind::SymTF2 => "symmetric trace-free 2-tensor",
        }
    }

    pub fn code(self) -> u32 {
        match self {
            FieldKind::Scalar => 0,
            FieldKind::Vector => 1,
            FieldKind::OneForm => 2,
            FieldKind::SymTF2 => 3,
        }
    }

    pub fn from_code(c: u32) -> Option<FieldKind> {
        Some(match c {
            0 => FieldKind::Scalar,
            1 => FieldKind::Vector,
            2 => FieldKind::OneForm,
            3 => FieldKind::SymTF2,
            _ => return None,
        })
    }
}

pub trait Kind: Clone + Copy + Default + Send + Sync + 'static {
    const KIND: FieldKind;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Scalar;
#[derive(Clone, Copy, Debug, Default)]
pub struct Vector;
#[derive(Clone, Copy, Debug, Default)]
pub struct Form1;
#[derive(Clone, Copy, Debug, Default)]
pub struct SymTF2;

impl Kind for Scalar {
    const KIND: FieldKind = FieldKind::Scalar;
}
impl Kind for Vector {
    const KIND: FieldKind = FieldKind::Vector;
}
impl Kind for Form1 {
    const KIND: FieldKind = FieldKind::OneForm;
}
impl Kind for SymTF2 {
    const KIND: FieldKind = FieldKind::SymTF2;
}

/// Component samples, component-major: component c occupies
/// `data[c * N .. (c + 1) * N]` with N the number of grid nodes.
#[derive(Clone)]
pub struct Field<K: Kind> {
    grid: Arc<SphereGrid>,
    data: Vec<f64>,
    _k: PhantomData<K>,
}

pub type ScalarField = Field<Scalar>;
pub type VectorField = Field<Vector>;
pub type OneForm = Field<Form1>;
pub type SymTF2Field = Field<SymTF2>;

impl<K: Kind> std::fmt::Debug for Field<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({:?}, max {:.3e})", K::KIND.name(), self.grid, self.norm_inf())
    }
}

impl<K: Kind> Field<K> {
    pub const NCOMP: usize = if matches!(K::KIND, FieldKind::Scalar) { 1 } else { 2 };

    pub fn zeros(grid: &Arc<SphereGrid>) -> Self {
        Field { grid: grid.clone(), data: vec![0.0; K::KIND.ncomp() * grid.len()], _k: PhantomData }
    }

    pub fn from_data(grid: &Arc<SphereGrid>, data: Vec<f64>) -> Result<Self> {
        let want = K::KIND.ncomp() * grid.len();
        if data.len() != want {
            return Err(Error::GridMismatch(format!(
                "{} needs {want} samples, got {}",
                K::KIND.name(),
                data.len()
            )));
        }
        Ok(Field { grid: grid.clone(), data, _k: PhantomData })
    }

    /// Builds from per-component sample vectors.
    pub fn from_comps(grid: &Arc<SphereGrid>, comps: &[Vec<f64>]) -> Result<Self> {
        if comps.len() != K::KIND.ncomp() {
            return Err(Error::RankMismatch {
                expected: format!("{} components", K::KIND.ncomp()),
                got: format!("{} components", comps.len()),
            });
        }
        Self::from_data(grid, comps.concat())
    }

    pub(crate) fn from_raw(grid: &Arc<SphereGrid>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), K::KIND.ncomp() * grid.len());
        Field { grid: grid.clone(), data, _k: PhantomData }
    }

    /// Component-wise sampling of a function of (θ, φ).
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let n = grid.len();
        let nc = K::KIND.ncomp();
        let mut data = vec![0.0; nc * n];
        let mut k = 0;
        for &t in &grid.theta_nodes {
            for &p in &grid.phi_nodes {
                let v = f(t, p);
                for c in 0..nc {
                    data[c * n + k] = v[c];
                }
                k += 1;
            }
        }
        Field::from_raw(grid, data)
    }

    pub fn kind(&self) -> FieldKind {
        K::KIND
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn check_grid<L: Kind>(&self, other: &Field<L>) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, a: f64) -> Self {
        Field::from_raw(&self.grid, self.data.iter().map(|v| a * v).collect())
    }

    /// self + a·other.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        Field::from_raw(
            &self.grid,
            self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect(),
        )
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        let n = self.grid.len();
        let sv = s.comp(0);
        let mut data = self.data.clone();
        for c in 0..K::KIND.ncomp() {
            for k in 0..n {
                data[c * n + k] *= sv[k];
            }
        }
        Field::from_raw(&self.grid, data)
    }

    /// Azimuthally averaged copy (dyad components are rotation-equivariant).
    pub fn phi_average(&self) -> Self {
        let n = self.grid.len();
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..K::KIND.ncomp() {
            data.extend(self.grid.phi_average(&self.data[c * n..(c + 1) * n]));
        }
        Field::from_raw(&self.grid, data)
    }

    pub fn phi_variation(&self) -> f64 {
        let n = self.grid.len();
        (0..K::KIND.ncomp())
            .map(|c| self.grid.phi_variation(&self.data[c * n..(c + 1) * n]))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl ScalarField {
    pub fn constant(grid: &Arc<SphereGrid>, v: f64) -> Self {
        Field::from_raw(grid, vec![v; grid.len()])
    }

    pub fn from_scalar_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        Field::from_raw(grid, grid.sample(f))
    }

    /// A function of θ alone, given by its values at the colatitude nodes.
    pub fn from_theta_profile(grid: &Arc<SphereGrid>, prof: &[f64]) -> Self {
        Field::from_raw(grid, grid.broadcast_theta(prof))
    }

    pub fn values(&self) -> &[f64] {
        self.comp(0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Field::from_raw(&self.grid, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        Field::from_raw(&self.grid, self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect())
    }

    pub fn add_const(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }
}

impl SymTF2Field {
    /// Reconstructed f_22 = −f_11.
    pub fn f22(&self) -> Vec<f64> {
        self.comp(0).iter().map(|v| -v).collect()
    }
}

impl<K: Kind> Add for &Field<K> {
    type Output = Field<K>;
    fn add(self, o: &Field<K>) -> Field<K> {
        self.axpy(1.0, o)
    }
}

impl<K: Kind> Sub for &Field<K> {
    type Output = Field<K>;
    fn sub(self, o: &Field<K>) -> Field<K> {
        self.axpy(-1.0, o)
    }
}

impl<K: Kind> Neg for &Field<K> {
    type Output = Field<K>;
    fn neg(self) -> Field<K> {
        self.scale(-1.0)
    }
}

impl<K: Kind> Mul<f64> for &Field<K> {
    type Output = Field<K>;
    fn mul(self, a: f64) -> Field<K> {
        self.scale(a)
    }
}

/// Runtime-tagged field, for interfaces that dispatch on rank.
#[derive(Clone, Debug)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
    OneForm(OneForm),
    SymTF2(SymTF2Field),
}

impl AnyField {
    pub fn kind(&self) -> FieldKind {
        match self {
            AnyField::Scalar(_) => FieldKind::Scalar,
            AnyField::Vector(_) => FieldKind::Vector,
            AnyField::OneForm(_) => FieldKind::OneForm,
            AnyField::SymTF2(_) => FieldKind::SymTF2,
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::Vector(f) => f.grid(),
            AnyField::OneForm(f) => f.grid(),
            AnyField::SymTF2(f) => f.grid(),
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            AnyField::Scalar(f) => f.data(),
            AnyField::Vector(f) => f.data(),
            AnyField::OneForm(f) => f.data(),
            AnyField::SymTF2(f) => f.data(),
        }
    }

    pub fn into_data(self) -> Vec<f64> {
        match self {
            AnyField::Scalar(f) => f.into_data(),
            AnyField::Vector(f) => f.into_data(),
            AnyField::OneForm(f) => f.into_data(),
            AnyField::SymTF2(f) => f.into_data(),
        }
    }

    pub fn from_kind_data(kind: FieldKind, grid: &Arc<SphereGrid>, data: Vec<f64>) -> Result<Self> {
        Ok(match kind {
            FieldKind::Scalar => AnyField::Scalar(Field::from_data(grid, data)?),
            FieldKind::Vector => AnyField::Vector(Field::from_data(grid, data)?),
            FieldKind::OneForm => AnyField::OneForm(Field::from_data(grid, data)?),
            FieldKind::SymTF2 => AnyField::SymTF2(Field::from_data(grid, data)?),
        })
    }
}

/// General covariant tensor of rank r in dyad components; component index
/// `Σ a_i 2^{r-1-i}` (first index most significant, a_i ∈ {0, 1}).
#[derive(Clone, Debug)]
pub struct Tensor {
    pub grid: Arc<SphereGrid>,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(grid: &Arc<SphereGrid>, rank: usize) -> Tensor {
        Tensor { grid: grid.clone(), rank, data: vec![0.0; (1 << rank) * grid.len()] }
    }

    pub fn ncomp(&self) -> usize {
        1 << self.rank
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn from_scalar(u: &ScalarField) -> Tensor {
        Tensor { grid: u.grid().clone(), rank: 0, data: u.data().to_vec() }
    }

    /// One-forms and vectors share components in the orthonormal dyad.
    pub fn from_rank1<K: Kind>(w: &Field<K>) -> Tensor {
        debug_assert_eq!(K::KIND.rank(), 1);
        Tensor { grid: w.grid().clone(), rank: 1, data: w.data().to_vec() }
    }

    pub fn from_symtf(f: &SymTF2Field) -> Tensor {
        let f11 = f.comp(0);
        let f12 = f.comp(1);
        let mut data = Vec::with_capacity(4 * f11.len());
        data.extend_from_slice(f11);
        data.extend_from_slice(f12);
        data.extend_from_slice(f12);
        data.extend(f11.iter().map(|v| -v));
        Tensor { grid: f.grid().clone(), rank: 2, data }
    }

    /// Trace-free symmetric part of a rank-2 tensor (round trace).
    pub fn tf_part(&self) -> SymTF2Field {
        assert_eq!(self.rank, 2);
        let (t11, t12, t21, t22) = (self.comp(0), self.comp(1), self.comp(2), self.comp(3));
        let f11: Vec<f64> = t11.iter().zip(t22).map(|(a, b)| 0.5 * (a - b)).collect();
        let f12: Vec<f64> = t12.iter().zip(t21).map(|(a, b)| 0.5 * (a + b)).collect();
        Field::from_raw(&self.grid, [f11, f12].concat())
    }

    pub fn to_rank1<K: Kind>(&self) -> Field<K> {
        assert_eq!(self.rank, 1);
        Field::from_raw(&self.grid, self.data.clone())
    }

    pub fn to_scalar(&self) -> ScalarField {
        assert_eq!(self.rank, 0);
        Field::from_raw(&self.grid, self.data.clone())
    }

    /// Pointwise sum of squares of all components.
    pub fn sq_norm_pointwise(&self) -> Vec<f64> {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for c in 0..self.ncomp() {
            for (o, v) in out.iter_mut().zip(&self.data[c * n..(c + 1) * n]) {
                *o += v * v;
            }
        }
        out
    }
}
