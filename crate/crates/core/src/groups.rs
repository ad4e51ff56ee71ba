//! Finitely generated matrix groups `G = <g_1, ..., g_n> <= GL(d, p)` and
//! words over their generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Prime;
use crate::linalg::{FlatVector, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Elementary transvections of SL(d, p).
    Sl,
    /// Symplectic transvections preserving the standard alternating form.
    Sp,
    /// Arbitrary invertible generators.
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Sl => "sl",
            Family::Sp => "sp",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(Family::Sl),
            "sp" => Ok(Family::Sp),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }
}

/// One letter `g_i^{±1}` of a word; `generator` is zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

/// A word over the generators. The empty word evaluates to the identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn generator(i: usize) -> Self {
        GroupWord {
            letters: vec![Letter {
                generator: i,
                inverse: false,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        GroupWord {
            letters: self.letters.iter().chain(&other.letters).copied().collect(),
        }
    }

    /// Word for the inverse element: reversed, exponents flipped.
    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter {
                    generator: l.generator,
                    inverse: !l.inverse,
                })
                .collect(),
        }
    }

    /// Evaluates the word with `images[i]` standing in for `g_i` and
    /// `inverse_images[i]` for `g_i^{-1}`.
    pub fn eval_with(&self, images: &[Matrix], inverse_images: &[Matrix], identity: &Matrix) -> Result<Matrix> {
        let mut acc = identity.clone();
        for l in &self.letters {
            let table = if l.inverse { inverse_images } else { images };
            let g = table.get(l.generator).ok_or(Error::GeneratorIndex {
                index: l.generator + 1,
                n: images.len(),
            })?;
            acc = acc.mul(g)?;
        }
        Ok(acc)
    }
}

/// Text form: whitespace/comma separated one-based indices, negative for an
/// inverse letter (`"1 -2 3"`). The empty word prints as `e`.
impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("e");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            let i = l.generator as i64 + 1;
            write!(f, "{}", if l.inverse { -i } else { i })?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(GroupWord::empty());
        }
        let letters = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                let i: i64 = t
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad word letter {t:?}")))?;
                if i == 0 {
                    return Err(Error::InvalidParameter("generator indices are one-based".into()));
                }
                Ok(Letter {
                    generator: (i.unsigned_abs() - 1) as usize,
                    inverse: i < 0,
                })
            })
            .collect::<Result<_>>()?;
        Ok(GroupWord { letters })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSpec {
    family: Family,
    d: usize,
    p: Prime,
    generators: Vec<Matrix>,
    inverses: Vec<Matrix>,
    form: Option<Matrix>,
}

impl GroupSpec {
    /// Validates the family invariants and caches generator inverses.
    pub fn new(family: Family, p: Prime, generators: Vec<Matrix>, form: Option<Matrix>) -> Result<Self> {
        let d = generators
            .first()
            .ok_or_else(|| Error::InvalidGroup("at least one generator is required".into()))?
            .rows();
        if d == 0 {
            return Err(Error::InvalidGroup("degree must be positive".into()));
        }
        let mut inverses = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            if g.shape() != (d, d) || g.modulus() != p {
                return Err(Error::InvalidGroup(format!(
                    "generator {} is not a {d}x{d} matrix over F_{p}",
                    i + 1
                )));
            }
            inverses.push(
                g.inv()
                    .map_err(|_| Error::InvalidGroup(format!("generator {} is singular", i + 1)))?,
            );
        }
        match (family, &form) {
            (Family::Sp, Some(j)) => {
                if d % 2 != 0 {
                    return Err(Error::InvalidGroup("symplectic degree must be even".into()));
                }
                if j.shape() != (d, d) || j.modulus() != p {
                    return Err(Error::InvalidGroup("form has the wrong shape".into()));
                }
                let neg = j.scale(p.element(-1))?;
                if j.transpose() != neg || !j.is_invertible() {
                    return Err(Error::InvalidGroup("form is not alternating and non-degenerate".into()));
                }
            }
            (Family::Sp, None) => return Err(Error::InvalidGroup("symplectic family needs a form".into())),
            (_, Some(_)) => return Err(Error::InvalidGroup("form given for a non-symplectic family".into())),
            _ => {}
        }
        let spec = GroupSpec {
            family,
            d,
            p,
            generators,
            inverses,
            form,
        };
        for (i, g) in spec.generators.iter().enumerate() {
            if !spec.check_membership(g)? {
                return Err(Error::InvalidGroup(format!(
                    "generator {} violates the {} invariant",
                    i + 1,
                    family
                )));
            }
        }
        Ok(spec)
    }

    pub fn custom(p: Prime, generators: Vec<Matrix>) -> Result<Self> {
        Self::new(Family::Custom, p, generators, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn modulus(&self) -> Prime {
        self.p
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator_inverses(&self) -> &[Matrix] {
        &self.inverses
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn form(&self) -> Option<&Matrix> {
        self.form.as_ref()
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.d, self.p)
    }

    pub fn eval_word(&self, w: &GroupWord) -> Result<Matrix> {
        w.eval_with(&self.generators, &self.inverses, &self.identity())
    }

    /// Uniform letters (generator and sign); deterministic for a seeded `rng`.
    pub fn random_word<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> GroupWord {
        let n = self.n();
        GroupWord {
            letters: (0..length)
                .map(|_| Letter {
                    generator: rng.gen_range(0..n),
                    inverse: rng.gen_bool(0.5),
                })
                .collect(),
        }
    }

    /// SL: `det = 1`; SP: `MᵀJM = J`; CUSTOM: invertible.
    pub fn check_membership(&self, m: &Matrix) -> Result<bool> {
        if m.shape() != (self.d, self.d) {
            return Err(Error::ShapeMismatch {
                left: (self.d, self.d),
                right: m.shape(),
            });
        }
        if m.modulus() != self.p {
            return Err(Error::ModulusMismatch(self.p.value(), m.modulus().value()));
        }
        Ok(match self.family {
            Family::Sl => m.det()?.value() == 1,
            Family::Sp => {
                let j = self.form.as_ref().expect("validated at construction");
                m.transpose().mul(j)?.mul(m)? == *j
            }
            Family::Custom => m.is_invertible(),
        })
    }
}

/// The elementary transvections `I + E_ij` (`i != j`), ordered by `(i, j)`.
pub fn sl_generators(d: usize, p: Prime) -> Result<GroupSpec> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("SL needs d >= 2, got {d}")));
    }
    let mut gens = Vec::with_capacity(d * (d - 1));
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let mut g = Matrix::identity(d, p);
                g.set(i, j, p.element(1))?;
                gens.push(g);
            }
        }
    }
    GroupSpec::new(Family::Sl, p, gens, None)
}

/// `J = [[0, I], [-I, 0]]` with `d/2` blocks.
pub fn standard_form(d: usize, p: Prime) -> Matrix {
    let h = d / 2;
    Matrix::from_fn(d, d, p, |i, j| {
        if i < h && j == i + h {
            1
        } else if i >= h && j + h == i {
            p.value() - 1
        } else {
            0
        }
    })
}

/// Matrix of `x ↦ x + ⟨x, v⟩·v` with `⟨x, v⟩ = xᵀJv`, i.e. `I + v·(Jv)ᵀ`.
pub fn symplectic_transvection(form: &Matrix, v: &FlatVector) -> Result<Matrix> {
    let d = form.rows();
    let jv = form.apply(v)?;
    let p = form.modulus();
    let mut t = Matrix::identity(d, p);
    for i in 0..d {
        for j in 0..d {
            let x = p.add(t.raw(i, j), p.mul(v.raw()[i], jv.raw()[j]));
            t.set(i, j, p.element(x as i64))?;
        }
    }
    Ok(t)
}

/// Symplectic transvections `T_v` for `v` in the standard basis followed by
/// `e_i + e_j` (`i < j`): `d + d(d-1)/2` generators.
pub fn sp_generators(d: usize, p: Prime) -> Result<GroupSpec> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("Sp needs even d >= 2, got {d}")));
    }
    let j = standard_form(d, p);
    let mut vs: Vec<FlatVector> = (0..d).map(|i| FlatVector::unit(p, d, i)).collect();
    for a in 0..d {
        for b in a + 1..d {
            vs.push(FlatVector::unit(p, d, a).add_scaled(1, &FlatVector::unit(p, d, b))?);
        }
    }
    let gens = vs
        .iter()
        .map(|v| symplectic_transvection(&j, v))
        .collect::<Result<Vec<_>>>()?;
    GroupSpec::new(Family::Sp, p, gens, Some(j))
}
