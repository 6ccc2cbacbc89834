//! Airy function `Ai` and its derivative on `[-30, 30]`.
//!
//! Three regimes: the Maclaurin series on `[0, 1]`, a Bessel-K integral
//! representation for `x > 1`, and Taylor stepping of `y'' = x y` from the
//! origin for `x < 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const AIRY_MAX_ABS: f64 = 30.0;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_24;
/// `-Ai'(0) = 3^{-1/3} / Gamma(1/3)`.
pub const AIP0_NEG: f64 = 0.258_819_403_792_806_8;

/// Returns `(Ai(x), Ai'(x))`.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x.abs() > AIRY_MAX_ABS {
        return Err(Error::OutOfRange { x, lo: -AIRY_MAX_ABS, hi: AIRY_MAX_ABS });
    }
    Ok(if x > 1.0 {
        airy_bessel(x)
    } else if x >= 0.0 {
        airy_maclaurin(x)
    } else {
        airy_negative(x)
    })
}

/// Convenience wrapper returning `Ai(x)` only.
pub fn ai(x: f64) -> Result<f64> {
    airy(x).map(|(a, _)| a)
}

fn airy_maclaurin(x: f64) -> (f64, f64) {
    // f = sum x^{3k} a_k, g = sum x^{3k+1} b_k, both solving y'' = x y.
    let x3 = x * x * x;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let (mut tf, mut tg) = (1.0, x);
    for k in 0..60 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f += tf;
        g += tg;
        if x != 0.0 {
            fp += tf * (3.0 * kf + 3.0) / x;
            gp += tg * (3.0 * kf + 4.0) / x;
        }
        if tf.abs() < 1e-18 && tg.abs() < 1e-18 {
            break;
        }
    }
    (AI0 * f - AIP0_NEG * g, AI0 * fp - AIP0_NEG * gp)
}

/// `e^z K_nu(z) = int_0^inf exp(-z (cosh t - 1)) cosh(nu t) dt`, trapezoid rule.
fn scaled_bessel_k(nu: f64, z: f64) -> f64 {
    let h = 0.02;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let e = z * (t.cosh() - 1.0);
        if e > 45.0 {
            break;
        }
        sum += (-e).exp() * (nu * t).cosh();
        k += 1;
    }
    sum * h
}

fn airy_bessel(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let damp = (-zeta).exp();
    let k13 = scaled_bessel_k(1.0 / 3.0, zeta) * damp;
    let k23 = scaled_bessel_k(2.0 / 3.0, zeta) * damp;
    let a = (x / 3.0).sqrt() * k13 / PI;
    let ap = -x * k23 / (PI * 3f64.sqrt());
    (a, ap)
}

fn airy_negative(x: f64) -> (f64, f64) {
    let (mut y, mut yp) = (AI0, -AIP0_NEG);
    let steps = (x.abs() / 0.25).ceil().max(1.0) as usize;
    let h = x / steps as f64;
    let mut x0 = 0.0;
    let mut c = [0.0f64; 64];
    for _ in 0..steps {
        // Taylor coefficients about x0 from (k+2)(k+1)c_{k+2} = x0 c_k + c_{k-1}.
        c[0] = y;
        c[1] = yp;
        c[2] = 0.5 * x0 * y;
        for k in 1..c.len() - 2 {
            c[k + 2] = (x0 * c[k] + c[k - 1]) / ((k + 2) as f64 * (k + 1) as f64);
        }
        let (mut v, mut d) = (0.0, 0.0);
        for k in (0..c.len()).rev() {
            v = v * h + c[k];
            if k > 0 {
                d = d * h + k as f64 * c[k];
            }
        }
        y = v;
        yp = d;
        x0 += h;
    }
    (y, yp)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit evaluation.
    const TABLE: &[(f64, f64, f64)] = &[
        (-30.0, -0.087968188456842162833, 1.2286206026374851347),
        (-20.0, -0.17640612707798468959, 0.8928628567364712384),
        (-10.0, 0.040241238486443190689, 0.9962650441327900559),
        (-5.5, 0.017781541276574975603, 0.86419721777139839077),
        (-1.0, 0.5355608832923521188, -0.010160567116645209395),
        (-0.3, 0.4309030952855808556, -0.24054512725815461017),
        (0.0, 0.35502805388781723926, -0.25881940379280679841),
        (0.5, 0.23169360648083348977, -0.22491053266468389314),
        (1.0, 0.13529241631288141552, -0.15914744129679321279),
        (1.5, 0.071749497008105409674, -0.097382012842301319218),
        (2.5, 0.015725923380470489995, -0.026250881035903230365),
        (5.0, 0.00010834442813607441735, -0.000247413890868462476),
        (10.0, 1.1047532552898685934e-10, -3.5206336767389236366e-10),
        (20.0, 1.6916728686705403136e-27, -7.5863916257483549605e-27),
        (30.0, 3.2082175915504955711e-49, -1.7598765814327259821e-48),
    ];

    #[test]
    fn matches_reference_table() {
        for &(x, a, ap) in TABLE {
            let (ca, cap) = airy(x).unwrap();
            let tol = if x < -5.0 { 1e-12 } else { 2e-14 };
            assert!((ca - a).abs() <= tol * a.abs(), "Ai({x}) = {ca}, want {a}");
            assert!((cap - ap).abs() <= tol * ap.abs(), "Ai'({x}) = {cap}, want {ap}");
        }
    }

    #[test]
    fn origin_constants_from_gamma() {
        assert!((AI0 - 3f64.powf(-2.0 / 3.0) / libm::tgamma(2.0 / 3.0)).abs() < 1e-15);
        assert!((AIP0_NEG - 3f64.powf(-1.0 / 3.0) / libm::tgamma(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn continuous_across_regime_boundaries() {
        for x0 in [0.0, 1.0] {
            let (a, ap) = airy(x0 - 1e-15).unwrap();
            let (b, bp) = airy(x0 + 1e-15).unwrap();
            assert!((a - b).abs() < 1e-13 && (ap - bp).abs() < 1e-13);
        }
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = x Ai checked by a fourth-order difference.
        for &x in &[-7.3, -2.0, 0.7, 1.3, 4.0] {
            let h = 2e-3;
            let f = |t: f64| ai(t).unwrap();
            let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * f(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(airy(30.5).is_err());
        assert!(airy(-31.0).is_err());
        assert!(airy(f64::NAN).is_err());
    }
}
