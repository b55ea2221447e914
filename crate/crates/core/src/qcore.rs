//! Exact linear algebra on the two-qubit polarisation ⊗ path space.
//!
//! Every vector and operator carries a [`BasisTag`] naming the ordered basis
//! its coefficients refer to. The canonical ordering is `(H1, H2, V1, V2)`:
//! polarisation is the major index, path the minor one, so the Kronecker
//! product `pol ⊗ path` lands directly in canonical coordinates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex amplitude stored as a `(re, im)` pair.
pub type Amplitude = Complex64;

/// Dimension of the polarisation ⊗ path space.
pub const DIM: usize = 4;

/// Tolerance for every exact identity in the crate.
pub const TOLERANCE: f64 = 1e-12;

/// Name of the canonical `(H1, H2, V1, V2)` basis.
pub const CANONICAL: &str = "HV12";

/// Canonical component labels, in storage order.
pub const CANONICAL_LABELS: [&str; DIM] = ["H1", "H2", "V1", "V2"];

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Amplitude {
    Amplitude::new(re, im)
}

pub(crate) fn r(re: f64) -> Amplitude {
    Amplitude::new(re, 0.0)
}

#[derive(Debug)]
struct Frame {
    name: String,
    /// Column `n` holds basis ket `n` in canonical coordinates.
    columns: Matrix4<Amplitude>,
}

/// Identifies the ordered basis a set of coefficients is expressed in.
///
/// Two tags are equal when their basis names agree.
#[derive(Clone, Debug)]
pub struct BasisTag(Arc<Frame>);

impl BasisTag {
    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn is_canonical(&self) -> bool {
        self.0.name == CANONICAL
    }

    fn columns(&self) -> &Matrix4<Amplitude> {
        &self.0.columns
    }
}

impl PartialEq for BasisTag {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.name == other.0.name
    }
}

impl Eq for BasisTag {}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.name)
    }
}

fn canonical_tag() -> BasisTag {
    use std::sync::OnceLock;
    static TAG: OnceLock<BasisTag> = OnceLock::new();
    TAG.get_or_init(|| {
        BasisTag(Arc::new(Frame {
            name: CANONICAL.to_string(),
            columns: Matrix4::identity(),
        }))
    })
    .clone()
}

fn check_tags(left: &BasisTag, right: &BasisTag) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::BasisMismatch {
            left: left.name().to_string(),
            right: right.name().to_string(),
        })
    }
}

fn all_finite<'a>(it: impl IntoIterator<Item = &'a Amplitude>) -> bool {
    it.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A vector in the 4-dimensional space.
///
/// Physical states are normalised; residual vectors produced by detector taps
/// may have norm below one.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vector4<Amplitude>,
    tag: BasisTag,
}

impl Ket {
    /// Builds a ket from canonical `(H1, H2, V1, V2)` amplitudes.
    pub fn new(amps: [Amplitude; DIM]) -> Result<Self> {
        if !all_finite(&amps) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Self::from_vector(Vector4::from(amps), canonical_tag()))
    }

    /// Builds a ket with real canonical amplitudes.
    pub fn real(amps: [f64; DIM]) -> Result<Self> {
        Self::new(amps.map(r))
    }

    pub(crate) fn from_vector(amps: Vector4<Amplitude>, tag: BasisTag) -> Self {
        Self { amps, tag }
    }

    pub fn zero() -> Self {
        Self::from_vector(Vector4::zeros(), canonical_tag())
    }

    /// Canonical basis vector `k` (0 = H1, 1 = H2, 2 = V1, 3 = V2).
    pub fn unit(k: usize) -> Self {
        let mut v = Vector4::zeros();
        v[k] = r(1.0);
        Self::from_vector(v, canonical_tag())
    }

    pub fn amplitudes(&self) -> [Amplitude; DIM] {
        [self.amps[0], self.amps[1], self.amps[2], self.amps[3]]
    }

    pub fn amplitude(&self, k: usize) -> Amplitude {
        self.amps[k]
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `true` when the squared norm is within [`TOLERANCE`] of one.
    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < TOLERANCE {
            return Err(Error::InvalidState("cannot normalise a zero vector".into()));
        }
        Ok(self.scale(r(1.0 / n)))
    }

    pub fn scale(&self, factor: Amplitude) -> Self {
        Self::from_vector(self.amps * factor, self.tag.clone())
    }

    /// Maximum entrywise deviation from `other`, or `None` on basis mismatch.
    pub fn distance(&self, other: &Ket) -> Option<f64> {
        (self.tag == other.tag).then(|| {
            (self.amps - other.amps)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
    }

    /// Entrywise equality within `tol`; `false` on basis mismatch.
    pub fn approx_eq(&self, other: &Ket, tol: f64) -> bool {
        self.distance(other).is_some_and(|d| d < tol)
    }

    /// Projector `|self⟩⟨self|`.
    pub fn projector(&self) -> Operator {
        outer_product(self, self).expect("same tag")
    }
}

impl Add for &Ket {
    type Output = Ket;

    /// # Panics
    /// Panics when the operands are tagged with different bases.
    fn add(self, rhs: &Ket) -> Ket {
        check_tags(&self.tag, &rhs.tag).expect("ket addition across bases");
        Ket::from_vector(self.amps + rhs.amps, self.tag.clone())
    }
}

impl Sub for &Ket {
    type Output = Ket;

    fn sub(self, rhs: &Ket) -> Ket {
        check_tags(&self.tag, &rhs.tag).expect("ket subtraction across bases");
        Ket::from_vector(self.amps - rhs.amps, self.tag.clone())
    }
}

impl Neg for &Ket {
    type Output = Ket;

    fn neg(self) -> Ket {
        self.scale(r(-1.0))
    }
}

/// A 4×4 complex matrix acting on the space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    m: Matrix4<Amplitude>,
    tag: BasisTag,
}

impl Operator {
    /// Builds an operator from canonical-basis rows.
    pub fn from_rows(rows: [[Amplitude; DIM]; DIM]) -> Result<Self> {
        if !all_finite(rows.iter().flatten()) {
            return Err(Error::NonFinite("operator"));
        }
        let m = Matrix4::from_fn(|j, k| rows[j][k]);
        Ok(Self::from_matrix(m, canonical_tag()))
    }

    pub fn real_rows(rows: [[f64; DIM]; DIM]) -> Result<Self> {
        Self::from_rows(rows.map(|row| row.map(r)))
    }

    pub(crate) fn from_matrix(m: Matrix4<Amplitude>, tag: BasisTag) -> Self {
        Self { m, tag }
    }

    pub fn identity() -> Self {
        Self::from_matrix(Matrix4::identity(), canonical_tag())
    }

    pub fn zero() -> Self {
        Self::from_matrix(Matrix4::zeros(), canonical_tag())
    }

    /// Diagonal operator in canonical coordinates.
    pub fn diagonal(entries: [f64; DIM]) -> Self {
        let m = Matrix4::from_diagonal(&Vector4::from(entries.map(r)));
        Self::from_matrix(m, canonical_tag())
    }

    /// `pol ⊗ path` for single-qubit operators given as row-major 2×2 arrays.
    pub fn kron(pol: [[Amplitude; 2]; 2], path: [[Amplitude; 2]; 2]) -> Self {
        let a = Matrix2::from_fn(|j, k| pol[j][k]);
        let b = Matrix2::from_fn(|j, k| path[j][k]);
        Self::from_matrix(
            Matrix4::from_fn(|j, k| a[(j / 2, k / 2)] * b[(j % 2, k % 2)]),
            canonical_tag(),
        )
    }

    pub fn entry(&self, row: usize, col: usize) -> Amplitude {
        self.m[(row, col)]
    }

    pub fn rows(&self) -> [[Amplitude; DIM]; DIM] {
        std::array::from_fn(|j| std::array::from_fn(|k| self.m[(j, k)]))
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    #[cfg(test)]
    fn matrix(&self) -> &Matrix4<Amplitude> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.m.adjoint(), self.tag.clone())
    }

    pub fn trace(&self) -> Amplitude {
        self.m.trace()
    }

    pub fn scale(&self, factor: Amplitude) -> Self {
        Self::from_matrix(self.m * factor, self.tag.clone())
    }

    /// Largest entrywise deviation from `other`, or `None` on basis mismatch.
    pub fn distance(&self, other: &Operator) -> Option<f64> {
        (self.tag == other.tag).then(|| {
            (self.m - other.m)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.distance(other).is_some_and(|d| d < tol)
    }

    pub fn is_hermitian(&self) -> bool {
        self.approx_eq(&self.adjoint(), TOLERANCE)
    }

    /// `U†U = 1` within [`TOLERANCE`].
    pub fn is_unitary(&self) -> bool {
        let id = Operator::from_matrix(Matrix4::identity(), self.tag.clone());
        (&self.adjoint() * self).approx_eq(&id, TOLERANCE)
    }

    /// Idempotent and Hermitian within [`TOLERANCE`].
    pub fn is_projector(&self) -> bool {
        self.is_hermitian() && (self * self).approx_eq(self, TOLERANCE)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; DIM] {
        let h = (self.m + self.m.adjoint()) * r(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Hermitian, positive semidefinite and trace one, all within [`TOLERANCE`].
    pub fn is_density(&self) -> bool {
        self.is_hermitian()
            && (self.trace() - r(1.0)).norm() < TOLERANCE
            && self.hermitian_eigenvalues()[0] >= -TOLERANCE
    }

    /// Hermitian with spectrum inside `[0, 1]`, within [`TOLERANCE`].
    pub fn is_effect(&self) -> bool {
        let ev = self.hermitian_eigenvalues();
        self.is_hermitian() && ev[0] >= -TOLERANCE && ev[3] <= 1.0 + TOLERANCE
    }

    /// Rank counted from singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.m
            .singular_values()
            .iter()
            .filter(|s| **s > tol)
            .count()
    }
}

impl Add for &Operator {
    type Output = Operator;

    /// # Panics
    /// Panics when the operands are tagged with different bases.
    fn add(self, rhs: &Operator) -> Operator {
        check_tags(&self.tag, &rhs.tag).expect("operator addition across bases");
        Operator::from_matrix(self.m + rhs.m, self.tag.clone())
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        check_tags(&self.tag, &rhs.tag).expect("operator subtraction across bases");
        Operator::from_matrix(self.m - rhs.m, self.tag.clone())
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Operator composition `self · rhs`.
    fn mul(self, rhs: &Operator) -> Operator {
        check_tags(&self.tag, &rhs.tag).expect("operator product across bases");
        Operator::from_matrix(self.m * rhs.m, self.tag.clone())
    }
}

impl Mul<&Ket> for &Operator {
    type Output = Ket;

    fn mul(self, rhs: &Ket) -> Ket {
        apply(self, rhs).expect("operator applied across bases")
    }
}

/// An ordered, labelled orthonormal basis.
#[derive(Clone, Debug)]
pub struct Basis {
    labels: [String; DIM],
    kets: [Ket; DIM],
    tag: BasisTag,
}

impl Basis {
    /// Builds a basis from four canonical-coordinate kets.
    ///
    /// Fails with [`Error::InvalidBasis`] unless `|⟨m|n⟩ − δ_mn| < 1e-12` for all
    /// pairs.
    pub fn new(name: &str, labels: [&str; DIM], kets: [Ket; DIM]) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidBasis {
            name: name.to_string(),
            reason,
        };
        let kets = kets.map(|k| to_canonical_ket(&k));
        for (m, a) in kets.iter().enumerate() {
            for (n, b) in kets.iter().enumerate() {
                let expected = if m == n { 1.0 } else { 0.0 };
                let ip = inner_product(a, b)?;
                if (ip - r(expected)).norm() >= TOLERANCE {
                    return Err(invalid(format!(
                        "<{}|{}> = {ip} (expected {expected})",
                        labels[m], labels[n]
                    )));
                }
            }
        }
        let columns = Matrix4::from_fn(|j, k| kets[k].amps[j]);
        let tag = if name == CANONICAL {
            if (columns - Matrix4::identity()).iter().any(|z| z.norm() >= TOLERANCE) {
                return Err(invalid("the canonical name is reserved".into()));
            }
            canonical_tag()
        } else {
            BasisTag(Arc::new(Frame {
                name: name.to_string(),
                columns,
            }))
        };
        Ok(Self {
            labels: labels.map(String::from),
            kets,
            tag,
        })
    }

    /// The canonical `(H1, H2, V1, V2)` basis.
    pub fn canonical() -> Self {
        Self {
            labels: CANONICAL_LABELS.map(String::from),
            kets: std::array::from_fn(Ket::unit),
            tag: canonical_tag(),
        }
    }

    pub fn name(&self) -> &str {
        self.tag.name()
    }

    pub fn labels(&self) -> &[String; DIM] {
        &self.labels
    }

    /// Basis kets in canonical coordinates.
    pub fn kets(&self) -> &[Ket; DIM] {
        &self.kets
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// `⟨bra|ket⟩ = Σ conj(bra_k)·ket_k`.
pub fn inner_product(bra: &Ket, ket: &Ket) -> Result<Amplitude> {
    check_tags(&bra.tag, &ket.tag)?;
    Ok(bra.amps.dotc(&ket.amps))
}

/// Kronecker product of a polarisation pair `(H, V)` and a path pair `(1, 2)`.
pub fn tensor_product(pol: [Amplitude; 2], path: [Amplitude; 2]) -> Ket {
    let a = Vector2::from(pol);
    let b = Vector2::from(path);
    Ket::from_vector(Vector4::from_fn(|j, _| a[j / 2] * b[j % 2]), canonical_tag())
}

/// Matrix–vector product `op·ket`.
pub fn apply(op: &Operator, ket: &Ket) -> Result<Ket> {
    check_tags(&op.tag, &ket.tag)?;
    Ok(Ket::from_vector(op.m * ket.amps, ket.tag.clone()))
}

/// `|ket⟩⟨bra|`, with entries `ket_j · conj(bra_k)`.
pub fn outer_product(ket: &Ket, bra: &Ket) -> Result<Operator> {
    check_tags(&ket.tag, &bra.tag)?;
    Ok(Operator::from_matrix(ket.amps * bra.amps.adjoint(), ket.tag.clone()))
}

fn to_canonical_ket(ket: &Ket) -> Ket {
    if ket.tag.is_canonical() {
        return ket.clone();
    }
    Ket::from_vector(ket.tag.columns() * ket.amps, canonical_tag())
}

/// Re-expression of coefficients in another orthonormal basis.
///
/// The target is validated when the [`Basis`] is constructed, so conversion
/// itself cannot fail.
pub trait ChangeBasis: Sized {
    fn change_basis(&self, target: &Basis) -> Self;
}

impl ChangeBasis for Ket {
    fn change_basis(&self, target: &Basis) -> Self {
        let canonical = to_canonical_ket(self);
        let amps = target.tag.columns().adjoint() * canonical.amps;
        Ket::from_vector(amps, target.tag.clone())
    }
}

impl ChangeBasis for Operator {
    fn change_basis(&self, target: &Basis) -> Self {
        let w = self.tag.columns();
        let canonical = w * self.m * w.adjoint();
        let t = target.tag.columns();
        Operator::from_matrix(t.adjoint() * canonical * t, target.tag.clone())
    }
}

/// Free-function form of [`ChangeBasis::change_basis`].
pub fn change_basis<T: ChangeBasis>(value: &T, target: &Basis) -> T {
    value.change_basis(target)
}
