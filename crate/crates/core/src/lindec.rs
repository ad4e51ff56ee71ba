//! Linear decomposition attack on MOR.
//!
//! The automorphism is extended to a linear map of `V = Lin(G)`, the span of
//! the group inside the matrix algebra. From there everything is linear
//! algebra: cyclic subspaces `V_i = span{φ^k(g_i)}` with their companion
//! matrices, inverse images `φ⁻¹(g_i)`, and a single discrete logarithm
//! between linearized automorphisms that is enough to undo `φ^{tr}` on the
//! ciphertext.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::groups::{GroupSpec, GroupWord, Letter};
use crate::linalg::{EchelonBasis, FlatVector, Matrix};
use crate::mor::{AutomorphismPresentation, Ciphertext, PublicKey};
use crate::par::Execution;

/// Basis of `V = Lin(G)` made of group elements given as words.
#[derive(Debug, Clone)]
pub struct SpanBasis {
    d: usize,
    generators: Vec<Matrix>,
    words: Vec<GroupWord>,
    mats: Vec<Matrix>,
    /// `words[j] = words[parent]·g_generator`; `None` for the identity.
    parents: Vec<Option<(usize, usize)>>,
    flat: EchelonBasis,
}

impl SpanBasis {
    pub fn dimension(&self) -> usize {
        self.mats.len()
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn words(&self) -> &[GroupWord] {
        &self.words
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn echelon(&self) -> &EchelonBasis {
        &self.flat
    }

    pub fn contains(&self, x: &Matrix) -> Result<bool> {
        self.flat.contains(&x.vectorize())
    }

    /// Coordinates of `x` against `mats`.
    pub fn coordinates(&self, x: &Matrix) -> Result<FlatVector> {
        self.flat.solve_in_span(&x.vectorize())?.ok_or(Error::NotInSpan)
    }

    /// `Σ coords_j·mats[j]`.
    pub fn combine(&self, coords: &FlatVector) -> Result<Matrix> {
        let p = self.flat.modulus();
        let flats: Vec<_> = self.mats.iter().map(Matrix::vectorize).collect();
        let v = FlatVector::combine(p, self.d * self.d, coords, &flats)?;
        Matrix::devectorize(&v, self.d, self.d)
    }
}

/// Spans `V` by closing `{1}` under right multiplication by the generators.
/// The result is closed under multiplication by `G` and contains `G`, so it
/// equals `Lin(G)`.
pub fn build_span_basis(spec: &GroupSpec) -> Result<SpanBasis> {
    let d = spec.degree();
    let p = spec.modulus();
    let id = spec.identity();
    let mut flat = EchelonBasis::new(p, d * d);
    flat.insert(&id.vectorize())?;
    let mut basis = SpanBasis {
        d,
        generators: spec.generators().to_vec(),
        words: vec![GroupWord::empty()],
        mats: vec![id],
        parents: vec![None],
        flat,
    };
    let mut next = 0;
    while next < basis.mats.len() {
        for (k, g) in basis.generators.clone().iter().enumerate() {
            let candidate = basis.mats[next].mul(g)?;
            if basis.flat.insert(&candidate.vectorize())? {
                let mut word = basis.words[next].clone();
                word.letters.push(Letter {
                    generator: k,
                    inverse: false,
                });
                basis.words.push(word);
                basis.mats.push(candidate);
                basis.parents.push(Some((next, k)));
            }
        }
        next += 1;
    }
    Ok(basis)
}

/// The linear extension of an automorphism presentation to `V`.
///
/// Construction verifies that the extension is well defined and
/// multiplicative: `ψ(x·g_k) = ψ(x)·ψ(g_k)` for every basis element `x`.
#[derive(Debug, Clone)]
pub struct Extension<'a> {
    basis: &'a SpanBasis,
    /// `ψ(mats[j])`, computed by substituting images into `words[j]`.
    basis_images: Vec<Matrix>,
    image_flats: Vec<FlatVector>,
}

impl<'a> Extension<'a> {
    pub fn new(basis: &'a SpanBasis, psi: &AutomorphismPresentation) -> Result<Self> {
        let p = basis.flat.modulus();
        psi.validate_parts(basis.generators.len(), basis.d, p)?;
        let images = psi.images();
        let mut basis_images: Vec<Matrix> = Vec::with_capacity(basis.dimension());
        for parent in &basis.parents {
            let m = match *parent {
                None => Matrix::identity(basis.d, p),
                Some((j, k)) => basis_images[j].mul(&images[k])?,
            };
            basis_images.push(m);
        }
        let image_flats = basis_images.iter().map(Matrix::vectorize).collect();
        let ext = Extension {
            basis,
            basis_images,
            image_flats,
        };
        for (j, x) in basis.mats.iter().enumerate() {
            for (k, g) in basis.generators.iter().enumerate() {
                let lhs = ext.apply(&x.mul(g)?).map_err(|e| match e {
                    Error::NotInSpan => Error::InconsistentExtension("product left the span".into()),
                    other => other,
                })?;
                let rhs = ext.basis_images[j].mul(&images[k])?;
                if lhs != rhs {
                    return Err(Error::InconsistentExtension(format!(
                        "ψ(w_{j}·g_{}) differs from ψ(w_{j})·ψ(g_{})",
                        k + 1,
                        k + 1
                    )));
                }
            }
        }
        Ok(ext)
    }

    pub fn basis(&self) -> &SpanBasis {
        self.basis
    }

    /// Images of the span-basis elements.
    pub fn basis_images(&self) -> &[Matrix] {
        &self.basis_images
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let c = self.basis.coordinates(x)?;
        let d = self.basis.d;
        let v = FlatVector::combine(x.modulus(), d * d, &c, &self.image_flats)?;
        Matrix::devectorize(&v, d, d)
    }
}

/// `ψ(x)` for `x ∈ V`, via the linear extension of `ψ`.
pub fn apply_extension(basis: &SpanBasis, psi: &AutomorphismPresentation, x: &Matrix) -> Result<Matrix> {
    Extension::new(basis, psi)?.apply(x)
}

/// Matrix `L` of the extension in span-basis coordinates: column `j` holds
/// the coordinates of `ψ(mats[j])`, so `coords(ψ(x)) = L·coords(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedAutomorphism {
    pub matrix: Matrix,
}

impl LinearizedAutomorphism {
    pub fn apply(&self, coords: &FlatVector) -> Result<FlatVector> {
        self.matrix.apply(coords)
    }
}

pub fn linearize(basis: &SpanBasis, psi: &AutomorphismPresentation) -> Result<LinearizedAutomorphism> {
    linearize_with(basis, psi, Execution::default())
}

pub fn linearize_with(basis: &SpanBasis, psi: &AutomorphismPresentation, exec: Execution) -> Result<LinearizedAutomorphism> {
    let ext = Extension::new(basis, psi)?;
    linearize_extension(&ext, exec)
}

pub fn linearize_extension(ext: &Extension<'_>, exec: Execution) -> Result<LinearizedAutomorphism> {
    let basis = ext.basis;
    let m = basis.dimension();
    let p = basis.flat.modulus();
    let columns = exec.try_map_range(m, |j| {
        basis
            .coordinates(&ext.basis_images[j])
            .map_err(|_| Error::InconsistentExtension(format!("image of basis element {j} leaves the span")))
    })?;
    let matrix = Matrix::from_fn(m, m, p, |i, j| columns[j].raw()[i]);
    Ok(LinearizedAutomorphism { matrix })
}

/// Cyclic basis `e_1 = g_i, e_{j+1} = ψ^j(g_i)` of the `ψ`-invariant
/// subspace `V_i`.
#[derive(Debug, Clone)]
pub struct CyclicBasis {
    pub generator_index: usize,
    pub elems: Vec<Matrix>,
    pub flat: EchelonBasis,
}

impl CyclicBasis {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

/// Collects `g_i, ψ(g_i), ψ²(g_i), ...` until the first linear dependence.
/// `i` is zero-based.
pub fn cyclic_basis(ext: &Extension<'_>, i: usize) -> Result<CyclicBasis> {
    let basis = ext.basis;
    let g = basis.generators.get(i).ok_or(Error::GeneratorIndex {
        index: i + 1,
        n: basis.generators.len(),
    })?;
    let d2 = basis.d * basis.d;
    let mut flat = EchelonBasis::new(basis.flat.modulus(), d2);
    let mut elems = Vec::new();
    let mut current = g.clone();
    // l_i <= d², so at most d² + 1 rounds
    for _ in 0..=d2 {
        if !flat.insert(&current.vectorize())? {
            break;
        }
        let next = ext.apply(&current)?;
        elems.push(current);
        current = next;
    }
    Ok(CyclicBasis {
        generator_index: i,
        elems,
        flat,
    })
}

/// `A(ψ_i)`: shifted identity rows over the row `(α_1, ..., α_l)` with
/// `ψ(e_l) = Σ α_k e_k`. Row `j` holds the `E_i`-coordinates of `ψ(e_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompanionMatrix {
    pub matrix: Matrix,
    pub alphas: FlatVector,
}

pub fn companion_matrix(cb: &CyclicBasis, ext: &Extension<'_>) -> Result<CompanionMatrix> {
    let l = cb.len();
    let last = cb.elems.last().ok_or(Error::InvalidParameter("empty cyclic basis".into()))?;
    let image = ext.apply(last)?;
    let alphas = cb.flat.solve_in_span(&image.vectorize())?.ok_or_else(|| {
        Error::InconsistentExtension(format!(
            "ψ(e_{l}) left the cyclic subspace of generator {}",
            cb.generator_index + 1
        ))
    })?;
    let p = alphas.modulus();
    let matrix = Matrix::from_fn(l, l, p, |i, j| {
        if i + 1 == l {
            alphas.raw()[j]
        } else {
            u32::from(j == i + 1)
        }
    });
    Ok(CompanionMatrix { matrix, alphas })
}

/// `ψ⁻¹(g_i) = Σ_k (A(ψ_i)⁻¹)_{1,k}·e_k(i)` for every generator.
pub fn inverse_images(spec: &GroupSpec, basis: &SpanBasis, psi: &AutomorphismPresentation) -> Result<AutomorphismPresentation> {
    inverse_images_with(spec, basis, psi, Execution::default())
}

pub fn inverse_images_with(
    spec: &GroupSpec,
    basis: &SpanBasis,
    psi: &AutomorphismPresentation,
    exec: Execution,
) -> Result<AutomorphismPresentation> {
    if basis.generators != spec.generators() {
        return Err(Error::InvalidParameter("span basis was built for a different group".into()));
    }
    let ext = Extension::new(basis, psi)?;
    let d = spec.degree();
    let p = spec.modulus();
    let images = exec.try_map_range(spec.n(), |i| {
        let cb = cyclic_basis(&ext, i)?;
        let a = companion_matrix(&cb, &ext)?;
        let a_inv = a.matrix.inv().map_err(|_| {
            Error::InconsistentExtension(format!("companion matrix of generator {} is singular", i + 1))
        })?;
        let first_row = FlatVector::from_i64(p, &a_inv.row(0).iter().map(|&x| x as i64).collect::<Vec<_>>());
        let flats: Vec<_> = cb.elems.iter().map(Matrix::vectorize).collect();
        Matrix::devectorize(&FlatVector::combine(p, d * d, &first_row, &flats)?, d, d)
    })?;
    Ok(AutomorphismPresentation::new(images))
}

pub const DEFAULT_BSGS_BOUND: u64 = 1 << 20;

/// Smallest `k` in `[0, bound)` with `base^k = target`, by baby-step
/// giant-step over matrices.
pub fn matrix_dlog_bsgs(base: &Matrix, target: &Matrix, bound: u64) -> Result<u64> {
    matrix_dlog_bsgs_with(base, target, bound, Execution::default())
}

pub fn matrix_dlog_bsgs_with(base: &Matrix, target: &Matrix, bound: u64, exec: Execution) -> Result<u64> {
    if !base.is_square() {
        return Err(Error::NotSquare(base.rows(), base.cols()));
    }
    if base.shape() != target.shape() {
        return Err(Error::ShapeMismatch {
            left: base.shape(),
            right: target.shape(),
        });
    }
    if base.modulus() != target.modulus() {
        return Err(Error::ModulusMismatch(base.modulus().value(), target.modulus().value()));
    }
    if bound == 0 {
        return Err(Error::InvalidParameter("bound must be at least 1".into()));
    }
    let step = bound.isqrt() + u64::from(bound.isqrt() * bound.isqrt() < bound);
    let giant = base.pow(step as i64)?.inv()?;

    let chunks = chunk_count(exec, step);
    let chunk_len = step.div_ceil(chunks);
    let baby_chunks = exec.try_map_range(chunks as usize, |c| -> Result<Vec<(Vec<u8>, u64)>> {
        let start = c as u64 * chunk_len;
        let end = (start + chunk_len).min(step);
        let mut out = Vec::with_capacity(end.saturating_sub(start) as usize);
        if start >= end {
            return Ok(out);
        }
        let mut power = base.pow(start as i64)?;
        for j in start..end {
            out.push((power.key_bytes(), j));
            power = power.mul_unchecked(base);
        }
        Ok(out)
    })?;
    let mut table: HashMap<Vec<u8>, u64> = HashMap::with_capacity(step as usize);
    for (key, j) in baby_chunks.into_iter().flatten() {
        table.entry(key).or_insert(j);
    }

    let giant_steps = bound.div_ceil(step);
    let chunks = chunk_count(exec, giant_steps);
    let chunk_len = giant_steps.div_ceil(chunks);
    let hit = exec.find_first(chunks as usize, |c| {
        let start = c as u64 * chunk_len;
        let end = (start + chunk_len).min(giant_steps);
        if start >= end {
            return None;
        }
        let mut gamma = target.mul_unchecked(&giant.pow(start as i64).ok()?);
        for i in start..end {
            if let Some(&j) = table.get(&gamma.key_bytes()) {
                return Some(i * step + j);
            }
            gamma = gamma.mul_unchecked(&giant);
        }
        None
    });
    match hit {
        Some((_, k)) if k < bound => Ok(k),
        _ => Err(Error::NoSolutionBelowBound(bound)),
    }
}

fn chunk_count(exec: Execution, work: u64) -> u64 {
    if !exec.is_parallel() || work < 64 {
        return 1;
    }
    #[cfg(feature = "parallel")]
    let threads = rayon::current_num_threads() as u64;
    #[cfg(not(feature = "parallel"))]
    let threads = 1;
    (threads * 4).clamp(1, work / 16)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    pub span: Duration,
    pub linearize: Duration,
    pub dlog: Duration,
    pub recover: Duration,
    pub cyclic: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.span + self.linearize + self.dlog + self.recover + self.cyclic
    }
}

/// Result of [`recover_plaintext`].
#[derive(Debug, Clone)]
pub struct Recovery {
    pub plaintext: Matrix,
    /// `k` with `L_φ^k = L_{φ^r}`; congruent to Bob's `r` modulo `ord(L_φ)`.
    pub exponent: u64,
    pub span_dimension: usize,
    /// `l_i` of every cyclic subspace of `φ`.
    pub cyclic_lengths: Vec<usize>,
    /// `c2 = L_t^k·coords(m)` recomputed, and `m` passes the group invariants.
    pub self_consistent: bool,
    pub timings: PhaseTimings,
}

/// Recovers the plaintext from public data alone.
pub fn recover_plaintext(pk: &PublicKey, ct: &Ciphertext, bound: u64) -> Result<Recovery> {
    recover_plaintext_with(pk, ct, bound, Execution::default())
}

pub fn recover_plaintext_with(pk: &PublicKey, ct: &Ciphertext, bound: u64, exec: Execution) -> Result<Recovery> {
    let spec = &pk.spec;
    let mut timings = PhaseTimings::default();

    let clock = Instant::now();
    let basis = build_span_basis(spec)?;
    timings.span = clock.elapsed();

    let clock = Instant::now();
    let ext_phi = Extension::new(&basis, &pk.phi)?;
    let l_phi = linearize_extension(&ext_phi, exec)?;
    let l_r = linearize_with(&basis, &ct.phi_r, exec)?;
    let l_t = linearize_with(&basis, &pk.phi_t, exec)?;
    timings.linearize = clock.elapsed();

    let clock = Instant::now();
    let k = matrix_dlog_bsgs_with(&l_phi.matrix, &l_r.matrix, bound, exec)?;
    timings.dlog = clock.elapsed();

    let clock = Instant::now();
    let c2_coords = basis.coordinates(&ct.c2)?;
    let undo = l_t.matrix.pow(-(k as i64))?;
    let m_coords = undo.apply(&c2_coords)?;
    let plaintext = basis.combine(&m_coords)?;
    let redo = l_t.matrix.pow(k as i64)?.apply(&m_coords)?;
    let self_consistent = basis.combine(&redo)? == ct.c2 && spec.check_membership(&plaintext)?;
    timings.recover = clock.elapsed();

    let clock = Instant::now();
    let cyclic_lengths = exec.try_map_range(spec.n(), |i| cyclic_basis(&ext_phi, i).map(|cb| cb.len()))?;
    timings.cyclic = clock.elapsed();

    Ok(Recovery {
        plaintext,
        exponent: k,
        span_dimension: basis.dimension(),
        cyclic_lengths,
        self_consistent,
        timings,
    })
}
