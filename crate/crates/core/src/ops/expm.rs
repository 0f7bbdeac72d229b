// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense matrix exponential by scaling and squaring with Padé approximants
//! (Higham 2005 degree selection).

use super::real;
use crate::{CMat, Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "expm needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let finite = a.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    let nrm = norm1(a);
    if !finite || nrm > 1e300 {
        return Err(Error::numerical(format!(
            "expm input norm {nrm:.3e} is not representable"
        )));
    }
    let ident = CMat::identity(n, n);
    if nrm == 0.0 {
        return Ok(ident);
    }

    for &(m, theta) in &THETA {
        if nrm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs, &ident);
        }
    }

    let s = (nrm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a * real(0.5f64.powi(s));
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::numerical(format!(
            "expm overflowed for input norm {nrm:.3e}"
        )));
    }
    Ok(r)
}

fn pade_low(a: &CMat, b: &[f64], ident: &CMat) -> Result<CMat> {
    let a2 = a * a;
    let mut pow = ident.clone();
    let mut u = CMat::zeros(a.nrows(), a.ncols());
    let mut v = CMat::zeros(a.nrows(), a.ncols());
    for k in 0..b.len() / 2 {
        v += &pow * real(b[2 * k]);
        u += &pow * real(b[2 * k + 1]);
        pow = &pow * &a2;
    }
    let u = a * u;
    solve_pade(&u, &v)
}

fn pade13(a: &CMat, ident: &CMat) -> Result<CMat> {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u = a
        * (&a6 * inner_u
            + &a6 * real(b[7])
            + &a4 * real(b[5])
            + &a2 * real(b[3])
            + ident * real(b[1]));
    let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + ident * real(b[0]);
    solve_pade(&u, &v)
}

fn solve_pade(u: &CMat, v: &CMat) -> Result<CMat> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::numerical("singular Padé denominator in expm"))
}
