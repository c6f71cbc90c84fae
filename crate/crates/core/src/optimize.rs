//! Small dense quasi-Newton minimizer used by the gauge optimization.

use nalgebra::{DMatrix, DVector};

/// BFGS with Armijo backtracking. Returns the final point and value.
pub(crate) fn bfgs<F>(mut f: F, x0: DVector<f64>, max_iter: usize, gtol: f64) -> (DVector<f64>, f64)
where
    F: FnMut(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut stalls = 0;
    for _ in 0..max_iter {
        if g.norm() <= gtol {
            break;
        }
        let mut p = -(&hinv * &g);
        let mut slope = g.dot(&p);
        if slope >= 0.0 {
            hinv = DMatrix::identity(n, n);
            p = -g.clone();
            slope = g.dot(&p);
        }
        let mut step = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let xn = &x + &p * step;
            let (fnew, gnew) = f(&xn);
            if fnew <= fx + 1e-4 * step * slope {
                next = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = next else { break };
        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            if fresh {
                hinv *= sy / y.dot(&y);
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // Sherman–Morrison form of the inverse-Hessian update.
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if (fx - fnew).abs() <= 1e-15 * fx.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 5 {
                x = xn;
                fx = fnew;
                break;
            }
        } else {
            stalls = 0;
        }
        x = xn;
        fx = fnew;
        g = gnew;
    }
    (x, fx)
}
