//! Small hand-checked instances used by tests, examples and the CLI.

use crate::allocation::Allocation;
use crate::instance::Instance;
use crate::items::ItemSet;
use crate::valuation::ValuationDescriptor;

/// Three additive agents over items `a..g`; unspecified values are zero.
pub fn table1() -> Instance {
    let agents = vec![
        ValuationDescriptor::Additive {
            values: vec![1, 2, 3, 7, 0, 0, 0],
        },
        ValuationDescriptor::Additive {
            values: vec![1, 3, 0, 6, 1, 3, 4],
        },
        ValuationDescriptor::Additive {
            values: vec![0, 0, 5, 0, 3, 3, 2],
        },
    ];
    Instance::new(7, agents)
        .and_then(|inst| {
            inst.with_names(
                Some(["a", "b", "c", "d", "e", "f", "g"].map(String::from).to_vec()),
                Some(["1", "2", "3"].map(String::from).to_vec()),
            )
        })
        .expect("fixture is valid")
}

/// `X_1 = {a,b,c}`, `X_2 = {d}`, `X_3 = {e,f}`, `U = {g}`.
pub fn table1_allocation(instance: &Instance) -> Allocation {
    let bundles = vec![
        ItemSet::from_bits(0b0000111),
        ItemSet::from_bits(0b0001000),
        ItemSet::from_bits(0b0110000),
    ];
    Allocation::from_bundles(instance, bundles).expect("fixture is valid")
}

/// Six-item cancelable table: singletons 101..104, a fixed pair table, and
/// 200 for every bundle of three or more items.
pub fn sm_not_tb_table() -> Vec<u64> {
    const SINGLES: [u64; 6] = [101, 102, 102, 103, 103, 104];
    // Rows a..e, columns after the row item.
    const PAIRS: [(usize, usize, u64); 15] = [
        (0, 1, 152),
        (0, 2, 152),
        (0, 3, 153),
        (0, 4, 153),
        (0, 5, 154),
        (1, 2, 152),
        (1, 3, 155),
        (1, 4, 155),
        (1, 5, 156),
        (2, 3, 155),
        (2, 4, 155),
        (2, 5, 156),
        (3, 4, 155),
        (3, 5, 156),
        (4, 5, 156),
    ];
    let mut table = vec![0u64; 64];
    for (mask, value) in table.iter_mut().enumerate() {
        *value = match mask.count_ones() {
            0 => 0,
            1 => SINGLES[mask.trailing_zeros() as usize],
            2 => 0,
            _ => 200,
        };
    }
    for (x, y, v) in PAIRS {
        table[1 << x | 1 << y] = v;
    }
    table
}
