use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mor_core::lindec::{recover_plaintext, Recovery};
use mor_core::mor::{decrypt_in, encrypt, keygen, DecryptRoute, Plaintext};
use mor_core::{GroupSpec, GroupWord, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::Config;
use crate::error::{crypto, param, CliError, CliResult};
use crate::format;

pub const PUBLIC_FILE: &str = "public.json";
pub const PRIVATE_FILE: &str = "private.json";

pub(crate) fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn report<W: Write + ?Sized>(out: &mut W, text: std::fmt::Arguments<'_>) -> CliResult<()> {
    out.write_fmt(text)
        .map_err(|e| CliError::Param(format!("cannot write output: {e}")))
}

/// Writes `public.json` and `private.json` into `out_dir`.
pub fn cmd_keygen(config: &Config, out_dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let spec = config.group()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let (sk, pk, secret) = keygen(&spec, &config.keygen_params(), &mut rng).map_err(crypto)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let public = out_dir.join(PUBLIC_FILE);
    let private = out_dir.join(PRIVATE_FILE);
    write(&public, &format::encode_public(&pk, Some(config.seed)))?;
    write(&private, &format::encode_private(&spec, &sk, Some(&secret), Some(config.seed)))?;
    Ok((public, private))
}

/// Where the plaintext comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageSource {
    /// A word in the generators, e.g. `"1 -2 3"` for `g_1·g_2⁻¹·g_3`.
    Word(String),
    /// A `message` document.
    File(PathBuf),
}

pub fn load_message(spec: &GroupSpec, source: &MessageSource) -> CliResult<Plaintext> {
    let m = match source {
        MessageSource::Word(text) => {
            let word: GroupWord = text.parse().map_err(param)?;
            spec.eval_word(&word).map_err(param)?
        }
        MessageSource::File(path) => format::decode_message(&read(path)?, spec)?,
    };
    Plaintext::new(spec, m).map_err(|e| CliError::Param(format!("message rejected: {e}")))
}

pub fn cmd_encrypt(config: &Config, public: &Path, message: &MessageSource, out: &Path) -> CliResult<()> {
    let (_, pk) = format::decode_public(&read(public)?)?;
    let m = load_message(&pk.spec, message)?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let ct = encrypt(&pk, &m, config.r_cap, &mut rng).map_err(crypto)?;
    write(out, &format::encode_ciphertext(&pk.spec, &ct, Some(config.seed)))
}

/// Decrypts with the private key file alone and prints `m`.
pub fn cmd_decrypt<W: Write + ?Sized>(
    private: &Path,
    ciphertext: &Path,
    out: Option<&Path>,
    stdout: &mut W,
) -> CliResult<Matrix> {
    let (_, key) = format::decode_private(&read(private)?)?;
    let (header, ct) = format::decode_ciphertext(&read(ciphertext)?, &key.spec)?;
    let m = decrypt_in(&key.spec, &key.key, &ct, DecryptRoute::Conjugator)
        .map_err(crypto)?
        .into_matrix();
    if let Some(path) = out {
        write(path, &format::encode_message(&key.spec, &m, header.seed))?;
    }
    report(stdout, format_args!("{m}"))?;
    Ok(m)
}

/// Runs the attack from public data. Only `public` and `ciphertext` are read.
pub fn cmd_attack<W: Write + ?Sized>(
    public: &Path,
    ciphertext: &Path,
    bound: u64,
    out: Option<&Path>,
    stdout: &mut W,
) -> CliResult<Recovery> {
    let (_, pk) = format::decode_public(&read(public)?)?;
    let (header, ct) = format::decode_ciphertext(&read(ciphertext)?, &pk.spec)?;
    let rec = recover_plaintext(&pk, &ct, bound).map_err(crypto)?;
    let t = &rec.timings;
    let lengths: Vec<String> = rec.cyclic_lengths.iter().map(ToString::to_string).collect();
    report(
        stdout,
        format_args!(
            "recovered m:\n{}k = {}\ndim V = {}\nl_i = {}\ntimings: span {:?}, linearize {:?}, dlog {:?}, recover {:?}, cyclic {:?}, total {:?}\nself-consistent: {}\n",
            rec.plaintext,
            rec.exponent,
            rec.span_dimension,
            lengths.join(" "),
            t.span,
            t.linearize,
            t.dlog,
            t.recover,
            t.cyclic,
            t.total(),
            if rec.self_consistent { "yes" } else { "no" },
        ),
    )?;
    if !rec.self_consistent {
        return Err(CliError::Crypto(
            "recovered matrix is not self-consistent with the ciphertext".into(),
        ));
    }
    if let Some(path) = out {
        write(path, &format::encode_message(&pk.spec, &rec.plaintext, header.seed))?;
    }
    Ok(rec)
}
