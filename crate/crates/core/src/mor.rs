//! ElGamal-type MOR encryption over a matrix group `G = <g_1..g_n>` with an
//! inner automorphism `φ(x) = a·x·a⁻¹` published through its action on the
//! generators.
//!
//! Keys: private `t`; public `{φ(g_i)}` and `{φ^t(g_i)}`. A ciphertext is
//! `({φ^r(g_i)}, φ^{tr}(m))` for a fresh random `r`. Honest parties
//! exponentiate automorphisms by recovering the conjugating matrix from a
//! presentation (unique up to a scalar, which cancels under conjugation).

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Prime;
use crate::groups::GroupSpec;
use crate::lindec;
use crate::linalg::{EchelonBasis, FlatVector, Matrix};

/// An automorphism given by its images on the generators, `images[i] = ψ(g_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomorphismPresentation {
    images: Vec<Matrix>,
}

impl AutomorphismPresentation {
    pub fn new(images: Vec<Matrix>) -> Self {
        AutomorphismPresentation { images }
    }

    pub fn identity(spec: &GroupSpec) -> Self {
        Self::new(spec.generators().to_vec())
    }

    /// `g_i ↦ x·g_i·x⁻¹`.
    pub fn conjugation(spec: &GroupSpec, x: &Matrix) -> Result<Self> {
        let x_inv = x.inv()?;
        Self::conjugation_with_inverse(spec, x, &x_inv)
    }

    fn conjugation_with_inverse(spec: &GroupSpec, x: &Matrix, x_inv: &Matrix) -> Result<Self> {
        let images = spec
            .generators()
            .iter()
            .map(|g| x.mul(g)?.mul(x_inv))
            .collect::<Result<_>>()?;
        Ok(Self::new(images))
    }

    pub fn images(&self) -> &[Matrix] {
        &self.images
    }

    pub fn into_images(self) -> Vec<Matrix> {
        self.images
    }

    /// Checks image count, shapes, modulus and invertibility against `spec`.
    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        self.validate_parts(spec.n(), spec.degree(), spec.modulus())
    }

    pub(crate) fn validate_parts(&self, n: usize, d: usize, p: Prime) -> Result<()> {
        if self.images.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.images.len(),
            });
        }
        for m in &self.images {
            if m.shape() != (d, d) {
                return Err(Error::ShapeMismatch {
                    left: (d, d),
                    right: m.shape(),
                });
            }
            if m.modulus() != p {
                return Err(Error::ModulusMismatch(p.value(), m.modulus().value()));
            }
            if !m.is_invertible() {
                return Err(Error::Singular);
            }
        }
        Ok(())
    }
}

/// The conjugating matrix behind `φ`. Kept for test oracles only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretConjugator {
    pub a: Matrix,
    pub a_inv: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivateKey {
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub spec: GroupSpec,
    pub phi: AutomorphismPresentation,
    pub phi_t: AutomorphismPresentation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub phi_r: AutomorphismPresentation,
    pub c2: Matrix,
}

/// A message: an element of `G` (checked against the family invariants).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plaintext {
    m: Matrix,
}

impl Plaintext {
    pub fn new(spec: &GroupSpec, m: Matrix) -> Result<Self> {
        if !spec.check_membership(&m)? {
            return Err(Error::InvalidParameter(format!(
                "message is not an element of the {} group",
                spec.family()
            )));
        }
        Ok(Plaintext { m })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }
}

pub const DEFAULT_EXPONENT_CAP: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeygenParams {
    /// `t` is drawn uniformly from `[2, t_cap]`.
    pub t_cap: u64,
    /// Length of the random word whose value is the conjugator `a`.
    pub word_len: usize,
    /// Resampling budget for a conjugator that acts non-trivially on `G`.
    pub max_attempts: usize,
}

impl Default for KeygenParams {
    fn default() -> Self {
        KeygenParams {
            t_cap: DEFAULT_EXPONENT_CAP,
            word_len: 20,
            max_attempts: 64,
        }
    }
}

pub fn keygen<R: Rng + ?Sized>(
    spec: &GroupSpec,
    params: &KeygenParams,
    rng: &mut R,
) -> Result<(PrivateKey, PublicKey, SecretConjugator)> {
    if params.t_cap < 2 {
        return Err(Error::InvalidParameter("exponent cap must be at least 2".into()));
    }
    if params.word_len < 1 {
        return Err(Error::InvalidParameter("conjugator word length must be at least 1".into()));
    }
    for _ in 0..params.max_attempts {
        let a = spec.eval_word(&spec.random_word(params.word_len, rng))?;
        if a.is_scalar() || acts_trivially(spec, &a)? {
            continue;
        }
        let t = rng.gen_range(2..=params.t_cap);
        let conjugator = SecretConjugator {
            a_inv: a.inv()?,
            a,
        };
        let pk = key_from_conjugator(spec, &conjugator, t)?;
        // the public key is only usable if the conjugator is recoverable
        recover_conjugator(spec, &pk.phi)?;
        return Ok((PrivateKey { t }, pk, conjugator));
    }
    Err(Error::KeygenExhausted(params.max_attempts))
}

/// Public key for a fixed conjugator and exponent.
pub fn key_from_conjugator(spec: &GroupSpec, conjugator: &SecretConjugator, t: u64) -> Result<PublicKey> {
    let a_t = conjugator.a.pow(t as i64)?;
    let a_t_inv = conjugator.a_inv.pow(t as i64)?;
    Ok(PublicKey {
        spec: spec.clone(),
        phi: AutomorphismPresentation::conjugation_with_inverse(spec, &conjugator.a, &conjugator.a_inv)?,
        phi_t: AutomorphismPresentation::conjugation_with_inverse(spec, &a_t, &a_t_inv)?,
    })
}

fn acts_trivially(spec: &GroupSpec, a: &Matrix) -> Result<bool> {
    for g in spec.generators() {
        if a.mul(g)? != g.mul(a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves `X·g_i = ψ(g_i)·X` for all `i` and returns the unique solution
/// line, normalized so the first nonzero entry (row-major) is 1.
pub fn recover_conjugator(spec: &GroupSpec, psi: &AutomorphismPresentation) -> Result<Matrix> {
    psi.validate(spec)?;
    let d = spec.degree();
    let p = spec.modulus();
    let unknowns = d * d;
    let mut system = EchelonBasis::new(p, unknowns);
    'gens: for (g, h) in spec.generators().iter().zip(psi.images()) {
        // equation (a, b): Σ_v X[a][v]·g[v][b] − Σ_u h[a][u]·X[u][b] = 0
        for a in 0..d {
            for b in 0..d {
                let mut row = vec![0u32; unknowns];
                for v in 0..d {
                    row[a * d + v] = g.raw(v, b);
                }
                for u in 0..d {
                    let idx = u * d + b;
                    row[idx] = p.sub(row[idx], h.raw(a, u));
                }
                system.insert(&FlatVector::from_raw(p, row))?;
                if system.rank() == unknowns {
                    break 'gens;
                }
            }
        }
    }
    let mut kernel = system.null_space();
    match kernel.len() {
        0 => Err(Error::NotAConjugation),
        1 => {
            let x = kernel.pop().expect("one kernel vector");
            let lead = x.raw().iter().copied().find(|&c| c != 0).expect("kernel vectors are nonzero");
            let x = x.scale(p.inv(lead)?);
            let x = Matrix::devectorize(&x, d, d)?;
            if !x.is_invertible() {
                return Err(Error::NotAConjugation);
            }
            Ok(x)
        }
        k => Err(Error::AmbiguousConjugator(k)),
    }
}

/// `ψ^k` on the generators via the recovered conjugator.
pub fn power_presentation(spec: &GroupSpec, psi: &AutomorphismPresentation, k: i64) -> Result<AutomorphismPresentation> {
    let x = recover_conjugator(spec, psi)?;
    let xk = x.pow(k)?;
    let xk_inv = xk.inv()?;
    AutomorphismPresentation::conjugation_with_inverse(spec, &xk, &xk_inv)
}

/// Encrypts with a fresh `r` drawn uniformly from `[2, r_cap]`.
pub fn encrypt<R: Rng + ?Sized>(pk: &PublicKey, m: &Plaintext, r_cap: u64, rng: &mut R) -> Result<Ciphertext> {
    if r_cap < 2 {
        return Err(Error::InvalidParameter("exponent cap must be at least 2".into()));
    }
    let r = rng.gen_range(2..=r_cap);
    encrypt_with_exponent(pk, m, r)
}

/// Deterministic encryption core for a caller-chosen `r`.
pub fn encrypt_with_exponent(pk: &PublicKey, m: &Plaintext, r: u64) -> Result<Ciphertext> {
    if !pk.spec.check_membership(m.matrix())? {
        return Err(Error::InvalidParameter("message is not a group element".into()));
    }
    let phi_r = power_presentation(&pk.spec, &pk.phi, r as i64)?;
    let y = recover_conjugator(&pk.spec, &pk.phi_t)?;
    let yr = y.pow(r as i64)?;
    let c2 = yr.mul(m.matrix())?.mul(&yr.inv()?)?;
    Ok(Ciphertext { phi_r, c2 })
}

/// How Alice inverts `φ^{tr}` during decryption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecryptRoute {
    /// Recover `Z ∝ a^r` from `φ^r` and undo the conjugation by `Z^t`.
    #[default]
    Conjugator,
    /// Build `φ^{tr}` on the generators, invert it through the companion
    /// matrices of its cyclic subspaces, and apply the inverse linearly to
    /// `c2`. Uses no inverse of any conjugator.
    LinearInverse,
}

pub fn decrypt(sk: &PrivateKey, ct: &Ciphertext, pk: &PublicKey) -> Result<Plaintext> {
    decrypt_with(sk, ct, pk, DecryptRoute::Conjugator)
}

pub fn decrypt_with(sk: &PrivateKey, ct: &Ciphertext, pk: &PublicKey, route: DecryptRoute) -> Result<Plaintext> {
    decrypt_in(&pk.spec, sk, ct, route)
}

/// Decryption needs only the platform group, `t` and the ciphertext.
pub fn decrypt_in(spec: &GroupSpec, sk: &PrivateKey, ct: &Ciphertext, route: DecryptRoute) -> Result<Plaintext> {
    ct.phi_r.validate(spec)?;
    if ct.c2.shape() != (spec.degree(), spec.degree()) || ct.c2.modulus() != spec.modulus() {
        return Err(Error::ShapeMismatch {
            left: (spec.degree(), spec.degree()),
            right: ct.c2.shape(),
        });
    }
    let m = match route {
        DecryptRoute::Conjugator => {
            let z = recover_conjugator(spec, &ct.phi_r)?;
            unconjugate(&z, sk.t, &ct.c2)?
        }
        DecryptRoute::LinearInverse => {
            let phi_tr = power_presentation(spec, &ct.phi_r, sk.t as i64)?;
            let basis = lindec::build_span_basis(spec)?;
            let inverse = lindec::inverse_images(spec, &basis, &phi_tr)?;
            lindec::apply_extension(&basis, &inverse, &ct.c2)?
        }
    };
    if !spec.check_membership(&m)? {
        return Err(Error::DecryptionFailure);
    }
    Ok(Plaintext { m })
}

/// `Z^{-t}·c2·Z^t`.
pub fn unconjugate(z: &Matrix, t: u64, c2: &Matrix) -> Result<Matrix> {
    let zt = z.pow(t as i64)?;
    zt.inv()?.mul(c2)?.mul(&zt)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::groups::{sl_generators, sp_generators, GroupWord};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sl27() -> GroupSpec {
        sl_generators(2, Prime::new(7).unwrap()).unwrap()
    }

    fn small_params() -> KeygenParams {
        KeygenParams {
            t_cap: 1 << 12,
            word_len: 12,
            max_attempts: 64,
        }
    }

    /// Entrywise proportionality: some `c != 0` with `x = c·y`.
    fn proportional(x: &Matrix, y: &Matrix) -> bool {
        let p = x.modulus();
        let mut ratio = None;
        for (&a, &b) in x.entries().iter().zip(y.entries()) {
            if (a == 0) != (b == 0) {
                return false;
            }
            if a != 0 {
                let r = p.mul(a, p.inv(b).unwrap());
                if *ratio.get_or_insert(r) != r {
                    return false;
                }
            }
        }
        ratio.is_some()
    }

    #[test]
    fn keygen_presentations_match_definition() {
        let spec = sl27();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (sk, pk, sc) = keygen(&spec, &small_params(), &mut rng).unwrap();
        assert!(sk.t >= 2 && sk.t <= 1 << 12);
        assert!(!sc.a.is_scalar());
        assert!(sc.a.mul(&sc.a_inv).unwrap().is_identity());
        for (i, g) in spec.generators().iter().enumerate() {
            assert_eq!(pk.phi.images()[i], sc.a.mul(g).unwrap().mul(&sc.a_inv).unwrap());
        }
        let once = key_from_conjugator(&spec, &sc, 1).unwrap();
        assert_eq!(once.phi_t, once.phi);
        assert_eq!(power_presentation(&spec, &pk.phi, sk.t as i64).unwrap(), pk.phi_t);
    }

    #[test]
    fn keygen_rejects_centralizing_conjugators() {
        // abelian group: every conjugator from G acts trivially
        let p = Prime::new(7).unwrap();
        let g = Matrix::from_rows(p, &[[1, 1], [0, 1]]).unwrap();
        let spec = GroupSpec::custom(p, vec![g]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let err = keygen(&spec, &small_params(), &mut rng).unwrap_err();
        assert_eq!(err, Error::KeygenExhausted(64));
    }

    #[test]
    fn keygen_parameter_errors() {
        let spec = sl27();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let bad = KeygenParams { t_cap: 1, ..small_params() };
        assert!(matches!(keygen(&spec, &bad, &mut rng), Err(Error::InvalidParameter(_))));
        let bad = KeygenParams { word_len: 0, ..small_params() };
        assert!(matches!(keygen(&spec, &bad, &mut rng), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn recover_conjugator_examples() {
        let spec = sl27();
        assert!(recover_conjugator(&spec, &AutomorphismPresentation::identity(&spec))
            .unwrap()
            .is_identity());

        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = spec.eval_word(&spec.random_word(10, &mut rng)).unwrap();
            let psi = AutomorphismPresentation::conjugation(&spec, &a).unwrap();
            let x = recover_conjugator(&spec, &psi).unwrap();
            assert!(proportional(&x, &a), "{x:?} vs {a:?}");
            let lead = x.entries().iter().find(|&&c| c != 0).unwrap();
            assert_eq!(*lead, 1);
        }
    }

    pub(crate) fn mixed_presentation(spec: &GroupSpec, seed: u64) -> AutomorphismPresentation {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a = spec.eval_word(&spec.random_word(15, &mut rng)).unwrap();
        let b = spec.eval_word(&spec.random_word(15, &mut rng)).unwrap();
        let pa = AutomorphismPresentation::conjugation(spec, &a).unwrap();
        let pb = AutomorphismPresentation::conjugation(spec, &b).unwrap();
        let half = spec.n() / 2;
        AutomorphismPresentation::new(
            pa.images()[..half].iter().chain(&pb.images()[half..]).cloned().collect(),
        )
    }

    #[test]
    fn mixed_presentation_is_not_a_conjugation() {
        let spec = sl_generators(3, Prime::new(7).unwrap()).unwrap();
        for seed in 0..5 {
            let mixed = mixed_presentation(&spec, seed);
            assert_eq!(recover_conjugator(&spec, &mixed), Err(Error::NotAConjugation));
        }
    }

    #[test]
    fn reducible_generators_are_ambiguous() {
        // diagonal group: centralizer contains all diagonal matrices
        let p = Prime::new(7).unwrap();
        let spec = GroupSpec::custom(p, vec![Matrix::from_rows(p, &[[2, 0], [0, 4]]).unwrap()]).unwrap();
        let id = AutomorphismPresentation::identity(&spec);
        assert_eq!(recover_conjugator(&spec, &id), Err(Error::AmbiguousConjugator(2)));
    }

    #[test]
    fn presentation_validation() {
        let spec = sl27();
        let short = AutomorphismPresentation::new(vec![spec.identity()]);
        assert!(matches!(short.validate(&spec), Err(Error::DimensionMismatch { .. })));
        let singular = AutomorphismPresentation::new(vec![spec.identity(), Matrix::zeros(2, 2, spec.modulus())]);
        assert_eq!(singular.validate(&spec), Err(Error::Singular));
    }

    #[test]
    fn power_presentation_examples() {
        let spec = sl27();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (_, pk, _) = keygen(&spec, &small_params(), &mut rng).unwrap();
        assert_eq!(
            power_presentation(&spec, &pk.phi, 0).unwrap(),
            AutomorphismPresentation::identity(&spec)
        );
        assert_eq!(power_presentation(&spec, &pk.phi, 1).unwrap(), pk.phi);
        let inv = power_presentation(&spec, &pk.phi, -1).unwrap();
        assert_eq!(power_presentation(&spec, &inv, -1).unwrap(), pk.phi);
        // φ ∘ φ⁻¹ on generators: conjugating φ⁻¹(g_i) by the recovered conjugator of φ
        let x = recover_conjugator(&spec, &pk.phi).unwrap();
        for (g, h) in spec.generators().iter().zip(inv.images()) {
            assert_eq!(&x.mul(h).unwrap().mul(&x.inv().unwrap()).unwrap(), g);
        }
    }

    #[test]
    fn round_trip_both_routes() {
        let p5 = Prime::new(5).unwrap();
        for spec in [sl27(), sl_generators(3, p5).unwrap(), sp_generators(4, p5).unwrap()] {
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            let (sk, pk, _) = keygen(&spec, &small_params(), &mut rng).unwrap();
            for _ in 0..5 {
                let m = Plaintext::new(&spec, spec.eval_word(&spec.random_word(15, &mut rng)).unwrap()).unwrap();
                let ct = encrypt(&pk, &m, 1 << 12, &mut rng).unwrap();
                assert_eq!(decrypt(&sk, &ct, &pk).unwrap(), m);
                assert_eq!(decrypt_with(&sk, &ct, &pk, DecryptRoute::LinearInverse).unwrap(), m);
            }
        }
    }

    #[test]
    fn t_equal_one_and_fixed_points() {
        let spec = sl27();
        let p = spec.modulus();
        let a = Matrix::from_rows(p, &[[1, 2], [0, 1]]).unwrap();
        let sc = SecretConjugator {
            a_inv: a.inv().unwrap(),
            a: a.clone(),
        };
        let pk = key_from_conjugator(&spec, &sc, 1).unwrap();
        let sk = PrivateKey { t: 1 };
        // m commutes with a, so c2 = m
        let m = Plaintext::new(&spec, Matrix::from_rows(p, &[[1, 5], [0, 1]]).unwrap()).unwrap();
        let ct = encrypt_with_exponent(&pk, &m, 3).unwrap();
        assert_eq!(&ct.c2, m.matrix());
        let z = recover_conjugator(&spec, &ct.phi_r).unwrap();
        assert_eq!(z.inv().unwrap().mul(&ct.c2).unwrap().mul(&z).unwrap(), *m.matrix());
        assert_eq!(decrypt(&sk, &ct, &pk).unwrap(), m);
    }

    #[test]
    fn encryption_is_randomized() {
        let spec = sl_generators(3, Prime::new(7).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (_, pk, _) = keygen(&spec, &small_params(), &mut rng).unwrap();
        let m = Plaintext::new(&spec, spec.eval_word(&"1 2 3".parse::<GroupWord>().unwrap()).unwrap()).unwrap();
        let c1 = encrypt(&pk, &m, 1 << 12, &mut ChaCha20Rng::seed_from_u64(10)).unwrap();
        let c2 = encrypt(&pk, &m, 1 << 12, &mut ChaCha20Rng::seed_from_u64(11)).unwrap();
        assert_ne!(c1.phi_r, c2.phi_r);
    }

    #[test]
    fn non_members_rejected() {
        let spec = sl27();
        let p = spec.modulus();
        assert!(Plaintext::new(&spec, Matrix::scalar(2, 2, p)).is_err());
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        assert!(encrypt(&keygen(&spec, &small_params(), &mut rng).unwrap().1, &Plaintext::new(&spec, spec.identity()).unwrap(), 1, &mut rng).is_err());
    }

    #[test]
    fn tampered_ciphertext_fails_membership() {
        let spec = sl27();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, pk, _) = keygen(&spec, &small_params(), &mut rng).unwrap();
        let m = Plaintext::new(&spec, spec.eval_word(&spec.random_word(9, &mut rng)).unwrap()).unwrap();
        let mut ct = encrypt(&pk, &m, 1 << 12, &mut rng).unwrap();
        // scaling by 2 multiplies the determinant by 4: never in SL
        ct.c2 = ct.c2.scale(spec.modulus().element(2)).unwrap();
        assert_eq!(decrypt(&sk, &ct, &pk), Err(Error::DecryptionFailure));
    }

    #[test]
    fn decryption_ignores_conjugator_scale() {
        let spec = sp_generators(4, Prime::new(5).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (sk, pk, _) = keygen(&spec, &small_params(), &mut rng).unwrap();
        let m = Plaintext::new(&spec, spec.eval_word(&spec.random_word(9, &mut rng)).unwrap()).unwrap();
        let ct = encrypt(&pk, &m, 1 << 12, &mut rng).unwrap();
        let z = recover_conjugator(&spec, &ct.phi_r).unwrap();
        for c in 1..5 {
            let scaled = z.scale(spec.modulus().element(c)).unwrap();
            assert_eq!(&unconjugate(&scaled, sk.t, &ct.c2).unwrap(), m.matrix());
        }
    }
}
