//! Faddeeva function w(z) = exp(−z²)·erfc(−iz) in the closed upper half plane.
//!
//! Algorithm 916 (Zaghloul & Ali) sums for moderate |z|, with Johnson's
//! continued fraction for large |z| and the shifted-sum variant for real
//! arguments beyond x = 10. Machine-precision coefficients.

use num_complex::Complex64;

const ISPI: f64 = 0.564_189_583_547_756_3; // 1/√π
const A: f64 = 0.518_321_480_430_085_9; // π/√(−ln(ε/2))
const A2: f64 = 0.268_657_157_075_235_95;
const C: f64 = 0.329_973_702_884_629_07; // 2a/π
const RELERR: f64 = f64::EPSILON;

fn erfcx_nonneg(y: f64) -> f64 {
    (y * y).exp() * libm::erfc(y)
}

fn sinc(x: f64, sinx: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - 0.166_666_666_666_666_66 * x * x
    } else {
        sinx / x
    }
}

fn sinh_taylor(x: f64) -> f64 {
    x * (1.0 + (x * x) * (0.166_666_666_666_666_66 + 0.008_333_333_333_333_333 * (x * x)))
}

/// w(z) for Im z ≥ 0.
pub fn faddeeva(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0, "faddeeva is implemented for Im z >= 0");
    let xs = z.re;
    let x = xs.abs();
    let y = z.im.max(0.0);
    if xs == 0.0 && y <= 7.0 {
        return Complex64::new(erfcx_nonneg(y), 0.0);
    }

    if y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x > 28.0)) {
        return continued_fraction(xs, x, y);
    }

    let (mut sum1, mut sum2, mut sum3, mut sum4, mut sum5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    if x >= 10.0 {
        // Only sum3 and sum5 survive; sum outward from the dominant term.
        let base = Complex64::new((-x * x).exp(), 0.0);
        let n0 = (x / A + 0.5).floor();
        let dx = A * n0 - x;
        sum3 = (-dx * dx).exp() / (A2 * n0 * n0 + y * y);
        sum5 = A * n0 * sum3;
        let exp1 = (4.0 * A * dx).exp();
        let mut exp1dn = 1.0;
        let mut dn = 1.0;
        let finish = |s3: f64, s5: f64| {
            base + Complex64::new(0.5 * C * y * (sum2 + s3), (0.5 * C * (s5 - sum4)).copysign(xs))
        };
        while dn < n0 {
            let np = n0 + dn;
            let nm = n0 - dn;
            let mut tp = (-(A * dn + dx).powi(2)).exp();
            exp1dn *= exp1;
            let mut tm = tp * exp1dn;
            tp /= A2 * np * np + y * y;
            tm /= A2 * nm * nm + y * y;
            sum3 += tp + tm;
            sum5 += A * (np * tp + nm * tm);
            if A * (np * tp + nm * tm) < RELERR * sum5 {
                return finish(sum3, sum5);
            }
            dn += 1.0;
        }
        loop {
            let np = n0 + dn;
            let tp = (-(A * dn + dx).powi(2)).exp() / (A2 * np * np + y * y);
            sum3 += tp;
            sum5 += A * np * tp;
            if A * np * tp < RELERR * sum5 {
                return finish(sum3, sum5);
            }
            dn += 1.0;
        }
    }

    let expx2;
    let exp2ax = (2.0 * A * x).exp();
    let expm2ax = 1.0 / exp2ax;
    let mut prod2ax = 1.0;
    let mut prodm2ax = 1.0;
    let mut n = 1.0f64;
    if x < 5e-4 {
        let x2 = x * x;
        expx2 = 1.0 - x2 * (1.0 - 0.5 * x2);
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum3 += coef * prod2ax;
            // Holds sum5 − sum4 directly.
            sum5 += coef * (2.0 * A) * n * sinh_taylor(2.0 * A * n * x);
            if coef * prod2ax < RELERR * sum3 {
                break;
            }
            n += 1.0;
        }
    } else {
        expx2 = (-x * x).exp();
        loop {
            let coef = (-A2 * n * n).exp() * expx2 / (A2 * n * n + y * y);
            prod2ax *= exp2ax;
            prodm2ax *= expm2ax;
            sum1 += coef;
            sum2 += coef * prodm2ax;
            sum4 += coef * prodm2ax * (A * n);
            sum3 += coef * prod2ax;
            sum5 += coef * prod2ax * (A * n);
            if coef * prod2ax * (A * n) < RELERR * sum5 {
                break;
            }
            n += 1.0;
        }
    }

    let expx2erfcxy = expx2 * erfcx_nonneg(y);
    let ret = if y > 5.0 {
        let sinxy = (x * y).sin();
        Complex64::new(
            (expx2erfcxy - C * y * sum1) * (2.0 * x * y).cos() + (C * x * expx2) * sinxy * sinc(x * y, sinxy),
            0.0,
        )
    } else {
        let sinxy = (xs * y).sin();
        let sin2xy = (2.0 * xs * y).sin();
        let cos2xy = (2.0 * xs * y).cos();
        let coef1 = expx2erfcxy - C * y * sum1;
        let coef2 = C * xs * expx2;
        Complex64::new(
            coef1 * cos2xy + coef2 * sinxy * sinc(xs * y, sinxy),
            coef2 * sinc(2.0 * xs * y, sin2xy) - coef1 * sin2xy,
        )
    };
    ret + Complex64::new(0.5 * C * y * (sum2 + sum3), (0.5 * C * (sum5 - sum4)).copysign(xs))
}

fn continued_fraction(xs: f64, x: f64, y: f64) -> Complex64 {
    if x + y > 4000.0 {
        if x + y > 1e7 {
            // w ≈ i/(√π z), scaled against overflow.
            if x > y {
                let yax = y / xs;
                let denom = ISPI / (xs + yax * y);
                return Complex64::new(denom * yax, denom);
            }
            let xya = xs / y;
            let denom = ISPI / (xya * xs + y);
            return Complex64::new(denom, denom * xya);
        }
        // w ≈ i z/(√π (z² − ½))
        let dr = xs * xs - y * y - 0.5;
        let di = 2.0 * xs * y;
        let denom = ISPI / (dr * dr + di * di);
        return Complex64::new(denom * (xs * di - y * dr), denom * (xs * dr + y * di));
    }
    let terms = (3.9 + 11.398 / (0.08254 * x + 0.1421 * y + 0.2023)).floor();
    let mut wr = xs;
    let mut wi = y;
    let mut nu = 0.5 * (terms - 1.0);
    while nu > 0.4 {
        let denom = nu / (wr * wr + wi * wi);
        wr = xs - wr * denom;
        wi = y + wi * denom;
        nu -= 0.5;
    }
    let denom = ISPI / (wr * wr + wi * wi);
    Complex64::new(denom * wi, denom * wr)
}
