//! Channelizer presets: a uniform bank and the allocation merged from it.

use std::f64::consts::PI;

use modfrm::{Case, InterpolationFactor, ModalConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct StandardPreset {
    pub name: &'static str,
    pub uniform_channels: usize,
    pub allocation: &'static [usize],
    pub theta: f64,
    pub phi: f64,
    pub m: usize,
    pub l: usize,
    /// Standards served by the merged channels; documentation only.
    pub standards: &'static [&'static str],
}

impl StandardPreset {
    pub fn config(&self) -> ModalConfig {
        ModalConfig::new(
            self.theta,
            self.phi,
            self.m,
            InterpolationFactor::new(self.l).expect("preset factors are positive"),
            Case::I,
        )
        .expect("preset geometry is valid")
    }
}

pub const PRESETS: &[StandardPreset] = &[
    StandardPreset {
        name: "CDMA2000-x4",
        uniform_channels: 8,
        allocation: &[2, 1, 3, 2],
        theta: 0.2 * PI,
        phi: 0.3 * PI,
        m: 3,
        l: 10,
        standards: &["CDMA2000"],
    },
    StandardPreset {
        name: "BT-ANT-Zigbee",
        uniform_channels: 10,
        allocation: &[2, 1, 1, 5, 1],
        theta: 0.4 * PI,
        phi: 0.6 * PI,
        m: 1,
        l: 25,
        standards: &["Bluetooth", "ANT", "Zigbee"],
    },
    StandardPreset {
        name: "HSDPA-CDMA2000-WCDMA",
        uniform_channels: 12,
        allocation: &[4, 1, 4, 3],
        theta: 0.2 * PI,
        phi: 0.3 * PI,
        m: 3,
        l: 15,
        standards: &["HSDPA", "CDMA2000", "WCDMA"],
    },
    StandardPreset {
        name: "WCDMA-WiMAX-HSDPA",
        uniform_channels: 16,
        allocation: &[4, 1, 1, 8, 2],
        theta: 0.2 * PI,
        phi: 0.3 * PI,
        m: 3,
        l: 20,
        standards: &["WCDMA", "CDMA2000", "Fixed WiMAX", "HSDPA"],
    },
    StandardPreset {
        name: "nine-standards",
        uniform_channels: 32,
        allocation: &[5, 5, 1, 1, 5, 5, 3, 6, 1],
        theta: 0.2 * PI,
        phi: 0.3 * PI,
        m: 3,
        l: 40,
        standards: &[
            "WCDMA",
            "CDMA2000",
            "Zigbee",
            "ANT",
            "Bluetooth",
            "Digital Cable TV",
            "LTE",
            "HSDPA",
        ],
    },
];

pub fn find(name: &str) -> Option<&'static StandardPreset> {
    PRESETS.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use modfrm::bank::channel_count_formula;

    #[test]
    fn presets_are_consistent() {
        for p in PRESETS {
            let c = p.config();
            assert_eq!(
                channel_count_formula(c.m, c.l.get(), c.case).unwrap(),
                p.uniform_channels,
                "{}",
                p.name
            );
            assert!(
                p.allocation.iter().sum::<usize>() <= p.uniform_channels,
                "{}",
                p.name
            );
        }
    }

    #[test]
    fn lookup_ignores_case() {
        assert_eq!(find("cdma2000-X4").unwrap().uniform_channels, 8);
        assert!(find("gsm").is_none());
    }
}
