//! On-disk JSON schema for keys, ciphertexts and messages.
//!
//! Every document starts with the same header fields:
//!
//! ```json
//! { "format_version": 1, "kind": "public_key", "family": "sl", "d": 2, "p": 7, "seed": 42, ... }
//! ```
//!
//! Field elements are decimal strings and matrices are arrays of row arrays,
//! e.g. `[["1","1"],["0","1"]]`. Kinds and their bodies:
//!
//! | kind          | body fields                                                  |
//! |---------------|--------------------------------------------------------------|
//! | `public_key`  | `group`, `phi`, `phi_t`                                      |
//! | `private_key` | `group`, `t`, `secret_conjugator { note, a, a_inv }`         |
//! | `ciphertext`  | `phi_r`, `c2`                                                |
//! | `message`     | `m`                                                          |
//! | `group`       | `group`                                                      |
//!
//! `group` is `{ "generators": [matrix, ...], "form": matrix }` with `form`
//! present only for the symplectic family. A ciphertext or message is
//! interpreted against the group of the key it is used with and must agree
//! with it on family, `d` and `p`.

use mor_core::mor::{AutomorphismPresentation, Ciphertext, PrivateKey, PublicKey, SecretConjugator};
use mor_core::{Family, GroupSpec, Matrix, Prime};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// Marker stored next to the secret conjugator in private key files.
pub const ORACLE_NOTE: &str = "oracle material — not required for decryption";

pub type Rows = Vec<Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub kind: String,
    pub family: String,
    pub d: usize,
    pub p: u64,
    pub seed: Option<u64>,
}

impl Header {
    pub fn new(kind: &str, spec: &GroupSpec, seed: Option<u64>) -> Self {
        Header {
            format_version: FORMAT_VERSION,
            kind: kind.to_owned(),
            family: spec.family().as_str().to_owned(),
            d: spec.degree(),
            p: spec.modulus().value().into(),
            seed,
        }
    }

    fn check_against(&self, spec: &GroupSpec) -> CliResult<()> {
        let expected = Header::new(&self.kind, spec, self.seed);
        if (&self.family, self.d, self.p) != (&expected.family, expected.d, expected.p) {
            return Err(CliError::Parse(format!(
                "{} is for {}(d={}, p={}) but the key is for {}(d={}, p={})",
                self.kind, self.family, self.d, self.p, expected.family, expected.d, expected.p
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Document<B> {
    #[serde(flatten)]
    header: Header,
    #[serde(flatten)]
    body: B,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupRecord {
    pub generators: Vec<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Rows>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GroupBody {
    group: GroupRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PublicBody {
    group: GroupRecord,
    phi: Vec<Rows>,
    phi_t: Vec<Rows>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConjugatorRecord {
    note: String,
    a: Rows,
    a_inv: Rows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PrivateBody {
    group: GroupRecord,
    t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    secret_conjugator: Option<ConjugatorRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CiphertextBody {
    phi_r: Vec<Rows>,
    c2: Rows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MessageBody {
    m: Rows,
}

pub fn rows_of(m: &Matrix) -> Rows {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.to_string()).collect())
        .collect()
}

/// Parses a `d x d` matrix of decimal residues below `p`.
pub fn matrix_from(rows: &Rows, d: usize, p: Prime) -> CliResult<Matrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(CliError::Parse(format!("expected a {d}x{d} matrix")));
    }
    let data = rows
        .iter()
        .flatten()
        .map(|s| {
            p.parse_element(s)
                .map(|e| e.value())
                .ok_or_else(|| CliError::Parse(format!("{s:?} is not a decimal residue mod {p}")))
        })
        .collect::<CliResult<Vec<u32>>>()?;
    Matrix::from_raw(d, d, p, data).map_err(|e| CliError::Parse(e.to_string()))
}

fn matrices_from(list: &[Rows], d: usize, p: Prime) -> CliResult<Vec<Matrix>> {
    list.iter().map(|r| matrix_from(r, d, p)).collect()
}

fn encode<B: Serialize>(header: Header, body: B) -> String {
    let value = serde_json::to_value(Document { header, body }).expect("documents serialize");
    let mut text = String::new();
    write_value(&value, 0, &mut text);
    text.push('\n');
    text
}

/// Pretty JSON with each matrix row (an array of scalars) kept on one line.
fn write_value(value: &Value, depth: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Array(items) if items.is_empty() || items.iter().all(|v| !v.is_array() && !v.is_object()) => {
            let parts: Vec<String> = items
                .iter()
                .map(|v| serde_json::to_string(v).expect("scalars serialize"))
                .collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                out.push_str(": ");
                write_value(item, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

fn decode<B: DeserializeOwned>(text: &str, kind: &str) -> CliResult<(Header, B)> {
    let doc: Document<B> = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if doc.header.format_version != FORMAT_VERSION {
        return Err(CliError::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.header.format_version
        )));
    }
    if doc.header.kind != kind {
        return Err(CliError::Parse(format!("expected a {kind} file, found {}", doc.header.kind)));
    }
    Ok((doc.header, doc.body))
}

fn group_record(spec: &GroupSpec) -> GroupRecord {
    GroupRecord {
        generators: spec.generators().iter().map(rows_of).collect(),
        form: spec.form().map(rows_of),
    }
}

fn group_from(header: &Header, record: &GroupRecord) -> CliResult<GroupSpec> {
    let family: Family = header.family.parse().map_err(|e: mor_core::Error| CliError::Parse(e.to_string()))?;
    let p = Prime::new(header.p).map_err(|e| CliError::Parse(e.to_string()))?;
    let generators = matrices_from(&record.generators, header.d, p)?;
    let form = record.form.as_ref().map(|f| matrix_from(f, header.d, p)).transpose()?;
    GroupSpec::new(family, p, generators, form).map_err(|e| CliError::Parse(e.to_string()))
}

fn presentation_from(list: &[Rows], spec: &GroupSpec, what: &str) -> CliResult<AutomorphismPresentation> {
    let psi = AutomorphismPresentation::new(matrices_from(list, spec.degree(), spec.modulus())?);
    psi.validate(spec).map_err(|e| CliError::Parse(format!("{what}: {e}")))?;
    Ok(psi)
}

pub fn encode_group(spec: &GroupSpec, seed: Option<u64>) -> String {
    encode(Header::new("group", spec, seed), GroupBody { group: group_record(spec) })
}

pub fn decode_group(text: &str) -> CliResult<GroupSpec> {
    let (header, body): (_, GroupBody) = decode(text, "group")?;
    group_from(&header, &body.group)
}

pub fn encode_public(pk: &PublicKey, seed: Option<u64>) -> String {
    let body = PublicBody {
        group: group_record(&pk.spec),
        phi: pk.phi.images().iter().map(rows_of).collect(),
        phi_t: pk.phi_t.images().iter().map(rows_of).collect(),
    };
    encode(Header::new("public_key", &pk.spec, seed), body)
}

pub fn decode_public(text: &str) -> CliResult<(Header, PublicKey)> {
    let (header, body): (_, PublicBody) = decode(text, "public_key")?;
    let spec = group_from(&header, &body.group)?;
    let phi = presentation_from(&body.phi, &spec, "phi")?;
    let phi_t = presentation_from(&body.phi_t, &spec, "phi_t")?;
    Ok((header, PublicKey { spec, phi, phi_t }))
}

/// Private key material as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKeyFile {
    pub spec: GroupSpec,
    pub key: PrivateKey,
    pub conjugator: Option<SecretConjugator>,
}

pub fn encode_private(spec: &GroupSpec, key: &PrivateKey, conjugator: Option<&SecretConjugator>, seed: Option<u64>) -> String {
    let body = PrivateBody {
        group: group_record(spec),
        t: key.t,
        secret_conjugator: conjugator.map(|c| ConjugatorRecord {
            note: ORACLE_NOTE.to_owned(),
            a: rows_of(&c.a),
            a_inv: rows_of(&c.a_inv),
        }),
    };
    encode(Header::new("private_key", spec, seed), body)
}

pub fn decode_private(text: &str) -> CliResult<(Header, PrivateKeyFile)> {
    let (header, body): (_, PrivateBody) = decode(text, "private_key")?;
    let spec = group_from(&header, &body.group)?;
    let (d, p) = (spec.degree(), spec.modulus());
    let conjugator = body
        .secret_conjugator
        .map(|c| -> CliResult<_> {
            Ok(SecretConjugator {
                a: matrix_from(&c.a, d, p)?,
                a_inv: matrix_from(&c.a_inv, d, p)?,
            })
        })
        .transpose()?;
    Ok((
        header,
        PrivateKeyFile {
            spec,
            key: PrivateKey { t: body.t },
            conjugator,
        },
    ))
}

pub fn encode_ciphertext(spec: &GroupSpec, ct: &Ciphertext, seed: Option<u64>) -> String {
    let body = CiphertextBody {
        phi_r: ct.phi_r.images().iter().map(rows_of).collect(),
        c2: rows_of(&ct.c2),
    };
    encode(Header::new("ciphertext", spec, seed), body)
}

/// Parses a ciphertext for the group of the key it will be used with.
pub fn decode_ciphertext(text: &str, spec: &GroupSpec) -> CliResult<(Header, Ciphertext)> {
    let (header, body): (_, CiphertextBody) = decode(text, "ciphertext")?;
    header.check_against(spec)?;
    let phi_r = presentation_from(&body.phi_r, spec, "phi_r")?;
    let c2 = matrix_from(&body.c2, spec.degree(), spec.modulus())?;
    Ok((header, Ciphertext { phi_r, c2 }))
}

pub fn encode_message(spec: &GroupSpec, m: &Matrix, seed: Option<u64>) -> String {
    encode(Header::new("message", spec, seed), MessageBody { m: rows_of(m) })
}

pub fn decode_message(text: &str, spec: &GroupSpec) -> CliResult<Matrix> {
    let (header, body): (_, MessageBody) = decode(text, "message")?;
    header.check_against(spec)?;
    matrix_from(&body.m, spec.degree(), spec.modulus())
}
