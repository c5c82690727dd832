//! Reward inputs with term-by-term hand computations.

#![allow(dead_code)]

use rdz_core::metrics::RewardInputs;

const NONE: f64 = f64::NEG_INFINITY;

fn base() -> RewardInputs {
    RewardInputs {
        u: 0.0,
        sinr_db: NONE,
        interference_dbm: NONE,
        interference_threshold: -70.0,
        leakage_points: 0.0,
        zone_area: 100.0,
        leaked_power_dbm: NONE,
        leakage_threshold: -95.0,
        clip_bound: 10.0,
        normalize_reward_signs: false,
    }
}

/// (label, inputs, expected clipped terms, expected reward)
pub fn cases() -> Vec<(&'static str, RewardInputs, [f64; 5], f64)> {
    vec![
        (
            "enabled, 30 dB, nothing measured",
            RewardInputs { u: 1.0, sinr_db: 30.0, ..base() },
            [10.0, 1.0, 0.0, 0.0, 0.0],
            11.0,
        ),
        ("all sentinels", base(), [0.0; 5], 0.0),
        (
            "leak count equal to zone area",
            RewardInputs { leakage_points: 100.0, ..base() },
            [0.0, 0.0, 0.0, -1.0, 0.0],
            -1.0,
        ),
        (
            "every term finite",
            RewardInputs {
                u: 1.0,
                sinr_db: 60.0,
                interference_dbm: -60.0,
                leakage_points: 10.0,
                leaked_power_dbm: -90.0,
                ..base()
            },
            // -(-60 / -70) = -6/7, -(-90 / -95) = -18/19
            [10.0, 2.0, -6.0 / 7.0, -0.1, -18.0 / 19.0],
            12.0 - 6.0 / 7.0 - 0.1 - 18.0 / 19.0,
        ),
        (
            "uptime and SINR clipped high",
            RewardInputs { u: 2.0, sinr_db: 600.0, ..base() },
            [10.0, 10.0, 0.0, 0.0, 0.0],
            20.0,
        ),
        (
            "SINR clipped low",
            RewardInputs { sinr_db: -450.0, ..base() },
            [0.0, -10.0, 0.0, 0.0, 0.0],
            -10.0,
        ),
        (
            "interference ratio clipped",
            RewardInputs {
                interference_dbm: -50.0,
                interference_threshold: -1.0,
                ..base()
            },
            [0.0, 0.0, -10.0, 0.0, 0.0],
            -10.0,
        ),
        (
            "magnitude ratios",
            RewardInputs {
                u: 1.0,
                sinr_db: 30.0,
                interference_dbm: -60.0,
                leaked_power_dbm: -100.0,
                normalize_reward_signs: true,
                ..base()
            },
            // -(70 / 60), -(95 / 100)
            [10.0, 1.0, -7.0 / 6.0, 0.0, -0.95],
            11.0 - 7.0 / 6.0 - 0.95,
        ),
        (
            "tight clip bound",
            RewardInputs {
                u: 1.0,
                sinr_db: 30.0,
                leakage_points: 50.0,
                leaked_power_dbm: -90.0,
                clip_bound: 0.5,
                ..base()
            },
            [0.5, 0.5, 0.0, -0.5, -0.5],
            0.0,
        ),
        (
            "literal signs",
            RewardInputs {
                u: 1.0,
                sinr_db: 0.0,
                interference_dbm: -35.0,
                leaked_power_dbm: -190.0,
                ..base()
            },
            [10.0, 0.0, -0.5, 0.0, -2.0],
            7.5,
        ),
    ]
}
