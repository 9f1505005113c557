//! Shapiro-Wilk reference values computed independently with
//! `scipy.stats.shapiro` (AS R94) and frozen here.

#![allow(dead_code)]

/// Deterministic test vectors; `i` runs over `0..n`.
pub fn family(k: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|ii| {
            let i = ii as f64;
            let frac = ((ii as u64 * 7919) % 1000) as f64 / 1000.0;
            match k {
                0 => (1.7 * i + 0.3).sin(),
                1 => (2.0 * (0.37 * i).sin()).exp(),
                2 => (i * 0.9).sin() + (i * 2.3 + 1.0).sin() + (i * 3.7 + 2.0).sin(),
                3 => frac,
                4 => frac.powi(3) + 0.01 * i / n as f64,
                _ => unreachable!(),
            }
        })
        .collect()
}

/// (family, n, W, p)
pub const REFERENCE: [(usize, usize, f64, f64); 20] = [
    (0, 10, 0.9146154212762336, 0.3142218026242244),
    (0, 50, 0.9000463065404423, 0.0004821769855133504),
    (0, 500, 0.8997209502059129, 1.3615474021637418e-17),
    (0, 4999, 0.8995151411161431, 2.744295966524933e-49),
    (1, 10, 0.9214195043993181, 0.368946474356854),
    (1, 50, 0.8013592307739884, 9.424121950793799e-07),
    (1, 500, 0.8002615353023206, 2.388529572088101e-24),
    (1, 4999, 0.7986281291903703, 1.0295654640990232e-61),
    (2, 10, 0.9586644173051269, 0.7705422415317351),
    (2, 50, 0.9778627114617792, 0.465771408638335),
    (2, 500, 0.9816716833295971, 6.141172601713011e-06),
    (2, 4999, 0.9818285920497064, 7.765970492025855e-25),
    (3, 10, 0.9757361989251098, 0.9383516949800551),
    (3, 50, 0.952646764035867, 0.04386492948851155),
    (3, 500, 0.9544627756731991, 2.6865880628874442e-11),
    (3, 4999, 0.9549351710325358, 9.684304146197412e-37),
    (4, 10, 0.8915320264536459, 0.1764373427263275),
    (4, 50, 0.8173592288496208, 2.2557948206374566e-06),
    (4, 500, 0.8275393615646218, 8.25447069077185e-23),
    (4, 4999, 0.8250986290421567, 4.4474754511368845e-59),
];
