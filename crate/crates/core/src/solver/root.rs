//! Bracketed scalar root finding: bisection safeguarding secant and inverse
//! quadratic steps (Brent's method).

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Root {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Finds a zero of `f` in `[a, b]` given `f(a) = fa`, `f(b) = fb` of opposite sign.
pub(crate) fn brent<F, E>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    max_eval: usize,
) -> Result<Root, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            evaluations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            evaluations: 0,
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let mut evaluations = 0;
    loop {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || evaluations >= max_eval {
            return Ok(Root {
                x: b,
                fx: fb,
                evaluations,
            });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
        evaluations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn solve(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Root {
        brent::<_, Infallible>(|x| Ok(f(x)), a, b, f(a), f(b), 1e-14, 200).unwrap()
    }

    #[test]
    fn classic_roots() {
        let r = solve(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r.x - 2f64.sqrt()).abs() < 1e-13);
        let r = solve(|x| x.cos() - x, 0.0, 1.0);
        assert!((r.x - 0.739_085_133_215_160_6).abs() < 1e-13);
        let r = solve(|x| (x - 0.3).powi(3), -1.0, 2.0);
        assert!((r.x - 0.3).abs() < 1e-4);
    }

    #[test]
    fn steep_linear_map_converges_fast() {
        // typical fixed-point residual: slope around -20
        let r = solve(|x| 4.3 - 20.0 * x, -0.5, 1.0);
        assert!((r.x - 0.215).abs() < 1e-14);
        assert!(r.evaluations <= 3, "{}", r.evaluations);
    }

    #[test]
    fn endpoint_root() {
        let r = solve(|x| x, 0.0, 1.0);
        assert_eq!(r.x, 0.0);
        assert_eq!(r.evaluations, 0);
    }
}
