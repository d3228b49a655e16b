//! File-number index of the Case Western Reserve University bearing data, as
//! published on its download pages. Each group lists files for motor loads
//! 0, 1, 2 and 3 hp in order; groups with fewer entries start at the load
//! given by `first_load`.

use crate::HealthLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FaultEnd {
    None,
    Drive,
    Fan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CwruFile {
    pub number: u32,
    pub label: HealthLabel,
    /// Defect diameter in inches; absent for baseline files.
    pub size_in: Option<f64>,
    pub load_hp: u32,
    pub sampling_rate: f64,
    pub fault_end: FaultEnd,
}

struct Group {
    files: &'static [u32],
    first_load: u32,
    label: HealthLabel,
    size_in: f64,
    sampling_rate: f64,
    fault_end: FaultEnd,
}

const fn g(
    files: &'static [u32],
    label: HealthLabel,
    size_in: f64,
    sampling_rate: f64,
    fault_end: FaultEnd,
) -> Group {
    Group {
        files,
        first_load: 0,
        label,
        size_in,
        sampling_rate,
        fault_end,
    }
}

use FaultEnd::{Drive, Fan};
use HealthLabel::{B, I, O};

const K12: f64 = 12_000.0;
const K48: f64 = 48_000.0;

const GROUPS: &[Group] = &[
    // 12 kHz drive-end faults.
    g(&[105, 106, 107, 108], I, 0.007, K12, Drive),
    g(&[118, 119, 120, 121], B, 0.007, K12, Drive),
    g(&[130, 131, 132, 133], O, 0.007, K12, Drive),
    g(&[144, 145, 146, 147], O, 0.007, K12, Drive),
    g(&[156, 158, 159, 160], O, 0.007, K12, Drive),
    g(&[169, 170, 171, 172], I, 0.014, K12, Drive),
    g(&[185, 186, 187, 188], B, 0.014, K12, Drive),
    g(&[197, 198, 199, 200], O, 0.014, K12, Drive),
    g(&[209, 210, 211, 212], I, 0.021, K12, Drive),
    g(&[222, 223, 224, 225], B, 0.021, K12, Drive),
    g(&[234, 235, 236, 237], O, 0.021, K12, Drive),
    g(&[246, 247, 248, 249], O, 0.021, K12, Drive),
    g(&[258, 259, 260, 261], O, 0.021, K12, Drive),
    g(&[3001, 3002, 3003, 3004], I, 0.028, K12, Drive),
    g(&[3005, 3006, 3007, 3008], B, 0.028, K12, Drive),
    // 48 kHz drive-end faults.
    g(&[109, 110, 111, 112], I, 0.007, K48, Drive),
    g(&[122, 123, 124, 125], B, 0.007, K48, Drive),
    g(&[135, 136, 137, 138], O, 0.007, K48, Drive),
    g(&[148, 149, 150, 151], O, 0.007, K48, Drive),
    g(&[161, 162, 163, 164], O, 0.007, K48, Drive),
    g(&[174, 175, 176, 177], I, 0.014, K48, Drive),
    g(&[189, 190, 191, 192], B, 0.014, K48, Drive),
    g(&[201, 202, 203, 204], O, 0.014, K48, Drive),
    g(&[213, 214, 215, 217], I, 0.021, K48, Drive),
    g(&[226, 227, 228, 229], B, 0.021, K48, Drive),
    g(&[238, 239, 240, 241], O, 0.021, K48, Drive),
    g(&[250, 251, 252, 253], O, 0.021, K48, Drive),
    g(&[262, 263, 264, 265], O, 0.021, K48, Drive),
    // 12 kHz fan-end faults.
    g(&[278, 279, 280, 281], I, 0.007, K12, Fan),
    g(&[282, 283, 284, 285], B, 0.007, K12, Fan),
    g(&[294, 295, 296, 297], O, 0.007, K12, Fan),
    g(&[298, 299, 300, 301], O, 0.007, K12, Fan),
    g(&[302, 305, 306, 307], O, 0.007, K12, Fan),
    g(&[274, 275, 276, 277], I, 0.014, K12, Fan),
    g(&[286, 287, 288, 289], B, 0.014, K12, Fan),
    g(&[310, 309, 311, 312], O, 0.014, K12, Fan),
    g(&[313], O, 0.014, K12, Fan),
    g(&[270, 271, 272, 273], I, 0.021, K12, Fan),
    g(&[290, 291, 292, 293], B, 0.021, K12, Fan),
    g(&[315], O, 0.021, K12, Fan),
    Group {
        files: &[316, 317, 318],
        first_load: 1,
        label: O,
        size_in: 0.021,
        sampling_rate: K12,
        fault_end: Fan,
    },
];

/// Normal baseline files, 48 kHz, loads 0–3 hp.
const BASELINE: [u32; 4] = [97, 98, 99, 100];

/// Nominal shaft speed per motor load.
pub(crate) const RPM_BY_LOAD: [f64; 4] = [1797.0, 1772.0, 1750.0, 1730.0];

pub(crate) fn lookup(number: u32) -> Option<CwruFile> {
    if let Some(load) = BASELINE.iter().position(|&n| n == number) {
        return Some(CwruFile {
            number,
            label: HealthLabel::H,
            size_in: None,
            load_hp: load as u32,
            sampling_rate: K48,
            fault_end: FaultEnd::None,
        });
    }
    GROUPS.iter().find_map(|grp| {
        grp.files
            .iter()
            .position(|&n| n == number)
            .map(|i| CwruFile {
                number,
                label: grp.label,
                size_in: Some(grp.size_in),
                load_hp: grp.first_load + i as u32,
                sampling_rate: grp.sampling_rate,
                fault_end: grp.fault_end,
            })
    })
}
