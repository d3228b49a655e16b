//! Truncation and bit-flip corpus for the MAT parser.

use vibforge::matio::{parse_mat, MatError, MatFile};
use vibforge::rng::SeededRng;

use super::mat_writer::{write_mat_with_offsets, Options, Storage, Var};

pub fn random_vars(rng: &mut SeededRng) -> Vec<Var> {
    let storages = [
        Storage::Double,
        Storage::Single,
        Storage::Int32,
        Storage::Int16,
        Storage::Uint8,
    ];
    (0..1 + rng.below(3))
        .map(|i| {
            let storage = storages[rng.below(5) as usize];
            let rows = 1 + rng.below(40) as usize;
            let cols = 1 + rng.below(2) as usize;
            let data = (0..rows * cols)
                .map(|_| storage.quantize(rng.standard_normal() * 100.0))
                .collect();
            Var {
                name: format!("v{i}_{}", "x".repeat(rng.below(6) as usize)),
                rows,
                cols,
                data,
                storage,
            }
        })
        .collect()
}

pub fn matches(file: &MatFile, i: usize, var: &Var) -> bool {
    file.variables
        .get(i)
        .is_some_and(|d| d.name == var.name && d.dims == [var.rows, var.cols] && d.data == var.data)
}

fn all_match(file: &MatFile, vars: &[Var]) -> bool {
    file.variables.len() == vars.len() && vars.iter().enumerate().all(|(i, v)| matches(file, i, v))
}

/// One corpus case. `Err` describes an oracle violation.
pub fn fuzz_case(case: u64) -> Result<(), String> {
    let mut rng = SeededRng::derive(case, "mat-fuzz");
    let vars = random_vars(&mut rng);
    let opts = Options {
        big_endian: rng.below(4) == 0,
        compressed: rng.below(2) == 0,
    };
    let (bytes, offsets) = write_mat_with_offsets(&vars, opts);
    let clean = parse_mat(&bytes).map_err(|e| format!("case {case}: clean file failed: {e}"))?;
    if !all_match(&clean, &vars) {
        return Err(format!("case {case}: clean file decoded wrongly"));
    }
    let mut ends = offsets[1..].to_vec();
    ends.push(bytes.len());

    if rng.below(2) == 0 {
        let len = rng.below(bytes.len() as u64) as usize;
        let cut = &bytes[..len];
        let result = std::panic::catch_unwind(|| parse_mat(cut))
            .map_err(|_| format!("case {case}: panic on truncation to {len}"))?;
        let complete = offsets.iter().position(|&o| o == len);
        return match (result, complete) {
            (Ok(f), Some(j))
                if f.variables.len() == j
                    && vars[..j].iter().enumerate().all(|(i, v)| matches(&f, i, v)) =>
            {
                Ok(())
            }
            (Err(MatError::TruncatedFile { .. }), None) => Ok(()),
            (r, _) => Err(format!(
                "case {case}: truncation to {len} of {} gave {:?}",
                bytes.len(),
                r.map(|f| f.variables.len())
            )),
        };
    }

    let region = rng.below(4);
    let pos = match region {
        0 => rng.below(116) as usize,
        1 => 124 + rng.below(4) as usize,
        2 => {
            let j = rng.below(offsets.len() as u64) as usize;
            offsets[j] + rng.below(8) as usize
        }
        _ => 128 + rng.below((bytes.len() - 128) as u64) as usize,
    };
    let bit = rng.below(8) as u8;
    let mut mutated = bytes.clone();
    mutated[pos] ^= 1 << bit;
    let result = std::panic::catch_unwind(|| parse_mat(&mutated))
        .map_err(|_| format!("case {case}: panic on flip at {pos}"))?;
    let owner = offsets
        .iter()
        .zip(&ends)
        .position(|(&s, &e)| (s..e).contains(&pos));
    let ok = match (&result, region) {
        (Ok(f), 0) => all_match(f, &vars),
        (Err(_), 0) => false,
        (Ok(_), 1) => false,
        (Err(_), 1) => true,
        (Err(_), _) => true,
        (Ok(f), _) if opts.compressed => all_match(f, &vars),
        // Uncompressed payloads carry no checksum: only the element holding
        // the flipped byte may differ.
        (Ok(f), _) => {
            f.variables.len() == vars.len()
                && vars
                    .iter()
                    .enumerate()
                    .all(|(i, v)| Some(i) == owner || matches(f, i, v))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "case {case}: flip bit {bit} at {pos} (region {region}, compressed {}) gave {:?}",
            opts.compressed,
            result.map(|f| f.variables.len())
        ))
    }
}
