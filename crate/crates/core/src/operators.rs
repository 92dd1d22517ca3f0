//! Matrices of the model in the rovibrational basis: the permanent-dipole
//! coupling, the orientation operator cos θ, level projectors and the
//! orientation operator restricted to a set of bound levels.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::basis::{Level, RovibBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen, SymEigen};

/// Parameters of μ(r) = q·r·exp(−r/r_d), atomic units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleParams {
    pub charge: f64,
    pub range: f64,
}

impl DipoleParams {
    pub fn new(charge: f64, range: f64) -> Result<Self> {
        if !(charge > 0.0 && range > 0.0) {
            return Err(Error::Config(format!("dipole needs q > 0 and r_d > 0, got q = {charge}, r_d = {range}")));
        }
        Ok(Self { charge, range })
    }
}

pub fn dipole_function(p: &DipoleParams, r: f64) -> f64 {
    p.charge * r * (-r / p.range).exp()
}

/// p_l = ⟨Y_{l+1}⁰|cos θ|Y_l⁰⟩ = (l+1)/√((2l+1)(2l+3)).
pub fn angular_coupling(l: usize) -> f64 {
    let l = l as f64;
    (l + 1.0) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)).sqrt()
}

/// `N × N` matrix of ∫ φ_{k,l}(r) f(r) φ_{k',l'}(r) dr on the basis grid.
pub fn radial_matrix_elements<F: Fn(f64) -> f64>(basis: &RovibBasis, f: F, l: usize, lp: usize) -> Result<Mat<f64>> {
    let l_max = basis.l_max();
    if l > l_max || lp > l_max {
        return Err(Error::Config(format!("partial waves ({l}, {lp}) exceed l_max = {l_max}")));
    }
    let left = &basis.channels[l].vectors;
    let right = &basis.channels[lp].vectors;
    if left.nrows() != basis.grid.n_points || right.nrows() != basis.grid.n_points {
        return Err(Error::Config("radial functions are not sampled on the basis grid".into()));
    }
    let weights: Vec<f64> = basis.grid.points().map(&f).collect();
    let weighted = Mat::from_fn(right.nrows(), right.ncols(), |i, k| weights[i] * right[(i, k)]);
    Ok(linalg::mul(left.transpose(), weighted.as_ref()))
}

/// Fill the Δl = ±1 blocks of an `N_D × N_D` matrix with `p_l·R_{l,l+1}` and its transpose.
fn angular_block_matrix<F: Fn(f64) -> f64>(basis: &RovibBasis, f: F) -> Result<Mat<f64>> {
    let n = basis.n_levels;
    let mut m = Mat::zeros(basis.dimension(), basis.dimension());
    for l in 0..basis.l_max() {
        let radial = radial_matrix_elements(basis, &f, l, l + 1)?;
        let p = angular_coupling(l);
        for a in 0..n {
            for b in 0..n {
                let v = p * radial[(a, b)];
                m[(l * n + a, (l + 1) * n + b)] = v;
                m[((l + 1) * n + b, l * n + a)] = v;
            }
        }
    }
    Ok(m)
}

/// Dipole coupling matrix μ with elements ⟨φ_{kl}|μ|φ_{k'l'}⟩·⟨Y_l⁰|cos θ|Y_{l'}⁰⟩
/// and its eigendecomposition μ = Q Λ Qᵀ. The interaction is H₁ = −μ·u(t).
#[derive(Debug, Clone)]
pub struct DipoleOperator {
    pub matrix: Mat<f64>,
    pub eigen: SymEigen,
}

impl DipoleOperator {
    pub fn from_matrix(matrix: Mat<f64>) -> Result<Self> {
        let eigen = sym_eigen(matrix.as_ref())?;
        Ok(Self { matrix, eigen })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |QΛQᵀ − M|.
    pub fn reconstruction_error(&self) -> f64 {
        let q = &self.eigen.vectors;
        let scaled = Mat::from_fn(q.nrows(), q.ncols(), |i, k| q[(i, k)] * self.eigen.values[k]);
        let back = linalg::mul(scaled.as_ref(), q.transpose());
        let diff = Mat::from_fn(back.nrows(), back.ncols(), |i, j| back[(i, j)] - self.matrix[(i, j)]);
        linalg::max_abs(diff.as_ref())
    }
}

pub fn assemble_dipole(basis: &RovibBasis, p: &DipoleParams) -> Result<DipoleOperator> {
    let p = *p;
    DipoleOperator::from_matrix(angular_block_matrix(basis, |r| dipole_function(&p, r))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    Projector,
    Orientation,
    RestrictedOrientation,
}

/// Cost operator O with its eigenpairs of nonzero eigenvalue.
#[derive(Debug, Clone)]
pub struct TargetObservable {
    pub kind: TargetKind,
    pub matrix: Mat<f64>,
    /// Nonzero eigenvalues σ_k.
    pub sigmas: Vec<f64>,
    /// Column `k` is |k⟩ for `sigmas[k]`.
    pub states: Mat<f64>,
}

/// Eigenvalues below this (relative to the spectral radius) are treated as zero.
const ZERO_EIGENVALUE: f64 = 1e-10;

impl TargetObservable {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of backward-propagated eigenstates.
    pub fn rank(&self) -> usize {
        self.sigmas.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.sigmas.iter().copied().fold(0.0, f64::max)
    }

    /// Any real symmetric operator; eigenstates with |σ| below the cutoff are dropped.
    pub fn from_matrix(kind: TargetKind, matrix: Mat<f64>) -> Result<Self> {
        let evd = sym_eigen(matrix.as_ref())?;
        Ok(Self::from_eigen(kind, matrix, evd))
    }

    fn from_eigen(kind: TargetKind, matrix: Mat<f64>, evd: SymEigen) -> Self {
        let radius = evd.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let keep: Vec<usize> =
            (0..evd.values.len()).filter(|&k| evd.values[k].abs() > ZERO_EIGENVALUE * radius.max(1.0)).collect();
        let states = Mat::from_fn(matrix.nrows(), keep.len(), |i, c| evd.vectors[(i, keep[c])]);
        let sigmas = keep.iter().map(|&k| evd.values[k]).collect();
        Self { kind, matrix, sigmas, states }
    }
}

/// cos θ in the truncated basis. Cross-l radial overlaps ⟨φ_{kl}|φ_{k'l±1}⟩ are
/// computed on the grid, not assumed to be Kronecker deltas.
pub fn build_cos_theta(basis: &RovibBasis) -> Result<TargetObservable> {
    TargetObservable::from_matrix(TargetKind::Orientation, angular_block_matrix(basis, |_| 1.0)?)
}

/// Set S of bound levels (ν, l).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSet(pub BTreeSet<(usize, usize)>);

impl LevelSet {
    /// ν ∈ `nus`, l ∈ `ls`.
    pub fn grid(nus: impl IntoIterator<Item = usize> + Clone, ls: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BTreeSet::new();
        for l in ls {
            for v in nus.clone() {
                s.insert((v, l));
            }
        }
        Self(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sorted flat indices; fails on unbound or out-of-range members.
    pub fn indices(&self, basis: &RovibBasis) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(self.0.len());
        for &(v, l) in &self.0 {
            out.push(basis.index(l, Level::Bound(v)).map_err(|_| {
                Error::Config(format!("level (ν = {v}, l = {l}) is not a bound level of the basis"))
            })?);
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// P_B = Σ_{(ν,l)∈S} |νl⟩⟨νl|.
pub fn build_projector(basis: &RovibBasis, set: &LevelSet) -> Result<TargetObservable> {
    let idx = set.indices(basis)?;
    let nd = basis.dimension();
    let mut matrix = Mat::zeros(nd, nd);
    let mut states = Mat::zeros(nd, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        matrix[(i, i)] = 1.0;
        states[(i, c)] = 1.0;
    }
    Ok(TargetObservable { kind: TargetKind::Projector, matrix, sigmas: vec![1.0; idx.len()], states })
}

/// B = P_B · cos θ · P_B.
pub fn build_restricted_orientation(basis: &RovibBasis, set: &LevelSet) -> Result<TargetObservable> {
    let idx = set.indices(basis)?;
    let a = angular_block_matrix(basis, |_| 1.0)?;
    let nd = basis.dimension();
    let mut matrix = Mat::zeros(nd, nd);
    let sub = Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
    for (i, &gi) in idx.iter().enumerate() {
        for (j, &gj) in idx.iter().enumerate() {
            matrix[(gi, gj)] = sub[(i, j)];
        }
    }
    let evd = sym_eigen(sub.as_ref())?;
    let mut vectors = Mat::zeros(nd, idx.len());
    for k in 0..idx.len() {
        for (i, &gi) in idx.iter().enumerate() {
            vectors[(gi, k)] = evd.vectors[(i, k)];
        }
    }
    Ok(TargetObservable::from_eigen(
        TargetKind::RestrictedOrientation,
        matrix,
        SymEigen { values: evd.values, vectors },
    ))
}

/// Dense CSV dump: one matrix row per line, `%.17e` values.
pub fn write_matrix_csv(m: &Mat<f64>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.17e}", m[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Binary dump: `b"RVMATRX1"`, u64 rows, u64 cols, then f64 values column-major, all little-endian.
pub fn write_matrix_binary(m: &Mat<f64>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(b"RVMATRX1")?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            w.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_binary(path: &Path) -> Result<Mat<f64>> {
    let bytes = std::fs::read(path)?;
    let bad = |reason: &str| Error::Format { path: path.to_path_buf(), reason: reason.into() };
    if bytes.len() < 24 || &bytes[..8] != b"RVMATRX1" {
        return Err(bad("not a matrix dump"));
    }
    let word = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (rows, cols) = (word(8) as usize, word(16) as usize);
    if bytes.len() != 24 + 8 * rows * cols {
        return Err(bad("truncated matrix dump"));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| f64::from_le_bytes(bytes[24 + 8 * (j * rows + i)..][..8].try_into().unwrap())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, MorseParams, RadialGrid};
    use crate::units::{amu, angstrom, ev};

    fn basis(l_max: usize, n: usize) -> RovibBasis {
        let p = MorseParams::new(ev(5.42), 1.0 / angstrom(0.445), angstrom(0.9697), angstrom(6.0)).unwrap();
        let g = RadialGrid::with_max_spacing(p.box_length, 0.06).unwrap();
        build_basis(&p, &g, l_max, amu(0.94), n).unwrap()
    }

    #[test]
    fn dipole_function_values() {
        let p = DipoleParams::new(1.634, angstrom(0.6)).unwrap();
        assert_eq!(dipole_function(&p, 0.0), 0.0);
        let peak = dipole_function(&p, p.range);
        assert!((peak - p.charge * p.range / std::f64::consts::E).abs() < 1e-15);
        // q·r_d/e in e·Å
        assert!((peak / angstrom(1.0) - 0.3607).abs() < 1e-4);
        assert!(dipole_function(&p, 0.99 * p.range) < peak && dipole_function(&p, 1.01 * p.range) < peak);
        assert!(DipoleParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn angular_coupling_values() {
        assert!((angular_coupling(0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((angular_coupling(1) - 2.0 / 15f64.sqrt()).abs() < 1e-15);
        for l in 0..50 {
            assert!(angular_coupling(l + 1) < angular_coupling(l));
            assert!(angular_coupling(l) > 0.5);
        }
        assert!((angular_coupling(1_000_000) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn overlaps_and_symmetry() {
        let b = basis(2, 10);
        let id = radial_matrix_elements(&b, |_| 1.0, 1, 1).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                assert!((id[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        let p = DipoleParams::new(1.634, angstrom(0.6)).unwrap();
        let a = radial_matrix_elements(&b, |r| dipole_function(&p, r), 0, 1).unwrap();
        let c = radial_matrix_elements(&b, |r| dipole_function(&p, r), 1, 0).unwrap();
        let scale = linalg::max_abs(a.as_ref());
        for i in 0..10 {
            for j in 0..10 {
                assert!((a[(i, j)] - c[(j, i)]).abs() <= 1e-13 * scale);
            }
        }
        assert!(radial_matrix_elements(&b, |_| 1.0, 0, 3).is_err());
    }

    #[test]
    fn dipole_structure() {
        let b = basis(3, 8);
        let d = assemble_dipole(&b, &DipoleParams::new(1.634, angstrom(0.6)).unwrap()).unwrap();
        let n = d.dimension();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(d.matrix[(i, j)], d.matrix[(j, i)]);
                if b.l_of(i).abs_diff(b.l_of(j)) != 1 {
                    assert_eq!(d.matrix[(i, j)], 0.0);
                }
            }
        }
        assert!(d.reconstruction_error() < 1e-10 * linalg::max_abs(d.matrix.as_ref()));
        let b0 = basis(0, 8);
        let d0 = assemble_dipole(&b0, &DipoleParams::new(1.634, angstrom(0.6)).unwrap()).unwrap();
        assert_eq!(linalg::max_abs(d0.matrix.as_ref()), 0.0);
    }

    #[test]
    fn cos_theta_spectrum_bounded() {
        let b = basis(4, 6);
        let a = build_cos_theta(&b).unwrap();
        assert!(a.sigmas.iter().all(|s| s.abs() <= 1.0 + 1e-10));
        // zero diagonal in l
        for i in 0..b.dimension() {
            assert_eq!(a.matrix[(i, i)], 0.0);
        }
    }

    #[test]
    fn projector_targets() {
        let b = basis(4, 12);
        let p = build_projector(&b, &LevelSet::grid(0..1, 0..5)).unwrap();
        assert_eq!(p.rank(), 5);
        let trace: f64 = (0..b.dimension()).map(|i| p.matrix[(i, i)]).sum();
        assert_eq!(trace, 5.0);
        let sq = linalg::mul(p.matrix.as_ref(), p.matrix.as_ref());
        for i in 0..b.dimension() {
            for j in 0..b.dimension() {
                assert!((sq[(i, j)] - p.matrix[(i, j)]).abs() < 1e-14);
            }
        }
        let band = build_projector(&b, &LevelSet::grid(0..10, 0..5)).unwrap();
        assert_eq!(band.rank(), 50);
        let empty = build_projector(&b, &LevelSet::default()).unwrap();
        assert_eq!(empty.rank(), 0);
        assert_eq!(linalg::max_abs(empty.matrix.as_ref()), 0.0);
        // scattering level in S
        assert!(build_projector(&b, &LevelSet::grid([b.bound_count(0)], [0])).is_err());
        assert!(build_projector(&b, &LevelSet::grid([0], [5])).is_err());
    }

    #[test]
    fn restricted_orientation_single_level_vanishes() {
        let b = basis(2, 6);
        let t = build_restricted_orientation(&b, &LevelSet::grid([0], [0])).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(linalg::max_abs(t.matrix.as_ref()), 0.0);
    }

    #[test]
    fn matrix_dump_round_trip() {
        let b = basis(1, 4);
        let a = build_cos_theta(&b).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        write_matrix_binary(&a.matrix, &path).unwrap();
        assert_eq!(read_matrix_binary(&path).unwrap(), a.matrix);
        let csv = dir.path().join("a.csv");
        write_matrix_csv(&a.matrix, &csv).unwrap();
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text.lines().count(), 8);
        let v: f64 = text.lines().next().unwrap().split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(v, a.matrix[(0, 4)]);
    }
}
