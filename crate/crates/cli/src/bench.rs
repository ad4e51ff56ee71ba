//! Grid sweep over `(family, d, p)` cells, one end-to-end run per cell.
//!
//! CSV columns, in order (see [`COLUMNS`]):
//!
//! | column       | meaning                                              |
//! |--------------|------------------------------------------------------|
//! | `family`     | `sl` or `sp`                                         |
//! | `d`, `p`     | matrix degree and field size                         |
//! | `seed`       | cell seed, `base seed XOR cell index`                |
//! | `dim_v`      | dimension of the linear span of the group            |
//! | `max_l`      | longest cyclic basis over all generators             |
//! | `keygen_ms`  | wall time of key generation                          |
//! | `encrypt_ms` | wall time of encryption                              |
//! | `attack_ms`  | wall time of plaintext recovery from public data     |
//! | `success`    | recovered plaintext equals the encrypted one         |
//! | `error`      | failure message, empty on success                    |
//!
//! A failing cell is recorded and the sweep continues.

use std::io::Write;
use std::time::Instant;

use mor_core::lindec::recover_plaintext;
use mor_core::mor::{encrypt, keygen, Plaintext};
use mor_core::{Execution, Family, Prime};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::Config;
use crate::error::{param, CliError, CliResult};

pub const COLUMNS: [&str; 11] = [
    "family",
    "d",
    "p",
    "seed",
    "dim_v",
    "max_l",
    "keygen_ms",
    "encrypt_ms",
    "attack_ms",
    "success",
    "error",
];

pub const DEFAULT_GRID: &str = "sl:2:5,sl:2:7,sl:3:7,sp:4:5";

const MESSAGE_WORD_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub family: Family,
    pub d: usize,
    pub p: Prime,
}

/// Parses `family:d:p` entries separated by commas.
pub fn parse_grid(text: &str) -> CliResult<Vec<Cell>> {
    let cells = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let parts: Vec<&str> = entry.trim().split(':').collect();
            let [family, d, p] = parts[..] else {
                return Err(CliError::Param(format!("grid entry {entry:?} is not family:d:p")));
            };
            let family: Family = family.parse().map_err(param)?;
            if family == Family::Custom {
                return Err(CliError::Param("bench grids support sl and sp only".into()));
            }
            let d = d.parse().map_err(|_| CliError::Param(format!("bad degree in {entry:?}")))?;
            let p = p.parse().map_err(|_| CliError::Param(format!("bad modulus in {entry:?}")))?;
            let cell = Cell {
                family,
                d,
                p: Prime::new(p).map_err(param)?,
            };
            Config { family, d, p: cell.p, ..Config::default() }.validate()?;
            Ok(cell)
        })
        .collect::<CliResult<Vec<_>>>()?;
    if cells.is_empty() {
        return Err(CliError::Param("empty grid".into()));
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub family: &'static str,
    pub d: usize,
    pub p: u32,
    pub seed: u64,
    pub dim_v: Option<usize>,
    pub max_l: Option<usize>,
    pub keygen_ms: Option<f64>,
    pub encrypt_ms: Option<f64>,
    pub attack_ms: Option<f64>,
    pub success: bool,
    pub error: String,
}

fn millis(start: Instant) -> f64 {
    (start.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

/// One keygen/encrypt/attack run; failures land in the `error` column.
pub fn run_cell(cell: Cell, config: &Config, seed: u64) -> Row {
    let mut row = Row {
        family: cell.family.as_str(),
        d: cell.d,
        p: cell.p.value(),
        seed,
        dim_v: None,
        max_l: None,
        keygen_ms: None,
        encrypt_ms: None,
        attack_ms: None,
        success: false,
        error: String::new(),
    };
    if let Err(e) = fill(&mut row, cell, config, seed) {
        row.error = e.to_string();
    }
    row
}

fn fill(row: &mut Row, cell: Cell, config: &Config, seed: u64) -> Result<(), String> {
    let cell_config = Config { family: cell.family, d: cell.d, p: cell.p, seed, ..config.clone() };
    let spec = cell_config.group().map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let start = Instant::now();
    let (_, pk, _) = keygen(&spec, &cell_config.keygen_params(), &mut rng).map_err(|e| e.to_string())?;
    row.keygen_ms = Some(millis(start));

    let m = spec
        .eval_word(&spec.random_word(MESSAGE_WORD_LEN, &mut rng))
        .and_then(|m| Plaintext::new(&spec, m))
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let ct = encrypt(&pk, &m, cell_config.r_cap, &mut rng).map_err(|e| e.to_string())?;
    row.encrypt_ms = Some(millis(start));

    let start = Instant::now();
    let rec = recover_plaintext(&pk, &ct, cell_config.bsgs_bound).map_err(|e| e.to_string())?;
    row.attack_ms = Some(millis(start));
    row.dim_v = Some(rec.span_dimension);
    row.max_l = rec.cyclic_lengths.iter().copied().max();
    row.success = rec.self_consistent && rec.plaintext == *m.matrix();
    if !row.success {
        return Err("recovered plaintext differs from the encrypted one".into());
    }
    Ok(())
}

/// Runs every cell (in parallel when enabled) and writes the CSV to `out`.
pub fn cmd_bench<W: Write>(cells: &[Cell], config: &Config, exec: Execution, out: W) -> CliResult<Vec<Row>> {
    let rows = exec.map_range(cells.len(), |i| run_cell(cells[i], config, config.seed ^ i as u64));
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io = |e: csv::Error| CliError::Param(format!("cannot write CSV: {e}"));
    writer.write_record(COLUMNS).map_err(io)?;
    for row in &rows {
        writer.serialize(row).map_err(io)?;
    }
    writer.flush().map_err(|e| CliError::Param(format!("cannot write CSV: {e}")))?;
    Ok(rows)
}
