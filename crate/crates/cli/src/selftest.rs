//! Small-parameter invariant checks across all modules.

use std::io::Write;
use std::time::Instant;

use mor_core::groups::{sl_generators, sp_generators};
use mor_core::lindec::{apply_extension, build_span_basis, inverse_images, matrix_dlog_bsgs, recover_plaintext};
use mor_core::mor::{decrypt, encrypt, keygen, power_presentation, recover_conjugator, KeygenParams, Plaintext};
use mor_core::{EchelonBasis, Execution, FlatVector, GroupSpec, Matrix, Prime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{CliError, CliResult};
use crate::format;

const TRIALS: usize = 20;

/// Test hook: corrupts one ciphertext inside the protocol check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Fault {
    pub tamper_ciphertext: bool,
}

type Check = fn(u64, Fault) -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn groups() -> Vec<GroupSpec> {
    let p5 = Prime::new(5).unwrap();
    let p7 = Prime::new(7).unwrap();
    vec![
        sl_generators(2, p5).unwrap(),
        sl_generators(2, p7).unwrap(),
        sl_generators(3, p7).unwrap(),
        sp_generators(4, p5).unwrap(),
    ]
}

fn field(_: u64, _: Fault) -> Result<(), String> {
    let p = Prime::new(7).unwrap();
    for a in 0..7u32 {
        ensure(p.add(a, p.neg(a)) == 0, || format!("{a} + (-{a}) != 0"))?;
        if a != 0 {
            let inv = p.inv(a).map_err(|e| e.to_string())?;
            ensure(p.mul(a, inv) == 1, || format!("{a} * {a}^-1 != 1"))?;
        }
        for b in 0..7u32 {
            for c in 0..7u32 {
                ensure(p.mul(a, p.add(b, c)) == p.add(p.mul(a, b), p.mul(a, c)), || "distributivity".into())?;
            }
        }
    }
    ensure(Prime::new(9).is_err() && Prime::new(2_147_483_647).is_ok(), || "primality".into())
}

fn linear_algebra(seed: u64, _: Fault) -> Result<(), String> {
    let p = Prime::new(101).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..TRIALS {
        let a = Matrix::from_fn(4, 4, p, |_, _| rng.gen_range(0..101));
        let b = Matrix::from_fn(4, 4, p, |_, _| rng.gen_range(0..101));
        let ab = a.mul(&b).map_err(|e| e.to_string())?;
        let dets = [&a, &b, &ab].map(|m| m.det().map(|x| x.value()));
        let [Ok(da), Ok(db), Ok(dab)] = dets else {
            return Err("det failed on a square matrix".into());
        };
        ensure(dab == p.mul(da, db), || "det(AB) != det(A)det(B)".into())?;
        if a.is_invertible() {
            let inv = a.inv().map_err(|e| e.to_string())?;
            ensure(a.mul(&inv).map_err(|e| e.to_string())?.is_identity(), || "A·A⁻¹ != I".into())?;
        }
        let vecs = [a.vectorize(), b.vectorize()];
        let mut basis = EchelonBasis::new(p, 16);
        for v in &vecs {
            basis.insert(v).map_err(|e| e.to_string())?;
        }
        let combo = vecs[0].scale(3).add_scaled(5, &vecs[1]).map_err(|e| e.to_string())?;
        let coeffs = basis
            .solve_in_span(&combo)
            .map_err(|e| e.to_string())?
            .ok_or("a combination of basis vectors left the span")?;
        let back = FlatVector::combine(p, 16, &coeffs, &vecs).map_err(|e| e.to_string())?;
        ensure(back == combo, || "span coefficients do not reconstruct".into())?;
    }
    Ok(())
}

fn group_words(seed: u64, _: Fault) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for spec in groups() {
        for g in spec.generators() {
            ensure(spec.check_membership(g).map_err(|e| e.to_string())?, || "generator outside G".into())?;
        }
        for _ in 0..TRIALS {
            let u = spec.random_word(8, &mut rng);
            let v = spec.random_word(8, &mut rng);
            let uv = spec.eval_word(&u.concat(&v)).map_err(|e| e.to_string())?;
            let prod = spec
                .eval_word(&u)
                .and_then(|x| x.mul(&spec.eval_word(&v)?))
                .map_err(|e| e.to_string())?;
            ensure(uv == prod, || "eval(uv) != eval(u)·eval(v)".into())?;
            let uu = spec.eval_word(&u.concat(&u.inverse())).map_err(|e| e.to_string())?;
            ensure(uu.is_identity(), || "eval(u·u⁻¹) != I".into())?;
        }
    }
    Ok(())
}

fn protocol(seed: u64, fault: Fault) -> Result<(), String> {
    let params = KeygenParams { t_cap: 1 << 12, ..KeygenParams::default() };
    for (c, spec) in groups().iter().enumerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ c as u64);
        for trial in 0..TRIALS {
            let (sk, pk, _) = keygen(spec, &params, &mut rng).map_err(|e| e.to_string())?;
            let phi_t = power_presentation(spec, &pk.phi, sk.t as i64).map_err(|e| e.to_string())?;
            ensure(phi_t == pk.phi_t, || "power_presentation(φ, t) != φ^t".into())?;
            let m = Plaintext::new(spec, spec.eval_word(&spec.random_word(16, &mut rng)).unwrap())
                .map_err(|e| e.to_string())?;
            let mut ct = encrypt(&pk, &m, 1 << 12, &mut rng).map_err(|e| e.to_string())?;
            if fault.tamper_ciphertext && c == 0 && trial == 0 {
                let p = spec.modulus();
                let x = ct.c2.raw(0, 0);
                ct.c2.set(0, 0, p.element(i64::from(x) + 1)).map_err(|e| e.to_string())?;
            }
            let back = decrypt(&sk, &ct, &pk).map_err(|e| e.to_string())?;
            ensure(back == m, || format!("round trip failed over {}", spec.family()))?;
        }
    }
    Ok(())
}

fn conjugators(seed: u64, _: Fault) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for spec in groups() {
        let (_, pk, secret) = keygen(&spec, &KeygenParams::default(), &mut rng).map_err(|e| e.to_string())?;
        let x = recover_conjugator(&spec, &pk.phi).map_err(|e| e.to_string())?;
        let p = spec.modulus();
        let lead = secret.a.entries().iter().copied().find(|&v| v != 0).unwrap();
        let scaled = secret.a.scale(p.element(i64::from(p.inv(lead).unwrap()))).unwrap();
        ensure(x == scaled, || "recovered conjugator is not proportional to a".into())?;
    }
    Ok(())
}

fn attack(seed: u64, _: Fault) -> Result<(), String> {
    for (c, spec) in groups().iter().enumerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ c as u64);
        let basis = build_span_basis(spec).map_err(|e| e.to_string())?;
        let params = KeygenParams { t_cap: 1 << 12, ..KeygenParams::default() };
        for _ in 0..TRIALS / 4 {
            let (_, pk, _) = keygen(spec, &params, &mut rng).map_err(|e| e.to_string())?;
            let inv = inverse_images(spec, &basis, &pk.phi).map_err(|e| e.to_string())?;
            for (i, g) in spec.generators().iter().enumerate() {
                let back = apply_extension(&basis, &pk.phi, &inv.images()[i]).map_err(|e| e.to_string())?;
                ensure(&back == g, || "ψ(ψ⁻¹(g)) != g".into())?;
            }
            let m = Plaintext::new(spec, spec.eval_word(&spec.random_word(16, &mut rng)).unwrap())
                .map_err(|e| e.to_string())?;
            let ct = encrypt(&pk, &m, 1 << 12, &mut rng).map_err(|e| e.to_string())?;
            let rec = recover_plaintext(&pk, &ct, 1 << 20).map_err(|e| e.to_string())?;
            ensure(rec.plaintext == *m.matrix() && rec.self_consistent, || "attack missed the plaintext".into())?;
        }
    }
    Ok(())
}

fn discrete_log(seed: u64, _: Fault) -> Result<(), String> {
    let p = Prime::new(7).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..TRIALS {
        let base = loop {
            let m = Matrix::from_fn(3, 3, p, |_, _| rng.gen_range(0..7));
            if m.is_invertible() {
                break m;
            }
        };
        let k = rng.gen_range(0..500u64);
        let target = base.pow(k as i64).map_err(|e| e.to_string())?;
        let found = matrix_dlog_bsgs(&base, &target, 500).map_err(|e| e.to_string())?;
        let mut brute = Matrix::identity(3, p);
        let mut expected = 0;
        while brute != target {
            brute = brute.mul(&base).map_err(|e| e.to_string())?;
            expected += 1;
        }
        ensure(found == expected, || format!("bsgs {found} vs brute force {expected}"))?;
    }
    Ok(())
}

fn file_format(seed: u64, _: Fault) -> Result<(), String> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for spec in groups() {
        let (sk, pk, secret) = keygen(&spec, &KeygenParams::default(), &mut rng).map_err(|e| e.to_string())?;
        let (_, back) = format::decode_public(&format::encode_public(&pk, Some(seed))).map_err(|e| e.to_string())?;
        ensure(back == pk, || "public key round trip".into())?;
        let (_, back) = format::decode_private(&format::encode_private(&spec, &sk, Some(&secret), Some(seed)))
            .map_err(|e| e.to_string())?;
        ensure(back.key == sk && back.conjugator == Some(secret), || "private key round trip".into())?;
    }
    Ok(())
}

pub const CHECKS: [(&str, Check); 8] = [
    ("gf field axioms", field),
    ("linalg identities", linear_algebra),
    ("groups word evaluation", group_words),
    ("mor round trip", protocol),
    ("mor conjugator recovery", conjugators),
    ("lindec discrete log", discrete_log),
    ("lindec attack", attack),
    ("cli file format", file_format),
];

/// Runs all checks in parallel, prints one line each, fails if any fails.
pub fn cmd_selftest<W: Write + ?Sized>(seed: u64, fault: Fault, out: &mut W) -> CliResult<()> {
    let start = Instant::now();
    let results = Execution::default().map(&CHECKS, |(_, check)| {
        let clock = Instant::now();
        (check(seed, fault), clock.elapsed())
    });
    let mut failed = 0;
    let w = |e: std::io::Error| CliError::Param(format!("cannot write output: {e}"));
    for ((name, _), (result, elapsed)) in CHECKS.iter().zip(results) {
        match result {
            Ok(()) => writeln!(out, "selftest {name} ... ok [{elapsed:.2?}]").map_err(w)?,
            Err(msg) => {
                failed += 1;
                writeln!(out, "selftest {name} ... FAILED: {msg} [{elapsed:.2?}]").map_err(w)?;
            }
        }
    }
    writeln!(out, "selftest: {} passed, {failed} failed in {:.2?}", CHECKS.len() - failed, start.elapsed()).map_err(w)?;
    if failed > 0 {
        return Err(CliError::Crypto(format!("{failed} selftest check(s) failed")));
    }
    Ok(())
}
