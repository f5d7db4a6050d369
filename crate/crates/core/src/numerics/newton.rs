use super::linalg::solve_linear;
use super::{norm_inf, RootResult, Scalar};
use crate::error::{Error, Result};

type Projection<'a, T> = &'a dyn Fn(&mut [T]) -> Result<()>;

/// Knobs for [`newton_solve_with`].
pub struct NewtonOptions<'a, T> {
    pub tol: T,
    pub max_iter: usize,
    /// Relative finite-difference step: h_j = fd_step·(1 + |x_j|).
    pub fd_step: T,
    /// Central instead of forward differences.
    pub central: bool,
    /// Keeps iterates inside an admissible set; may clip `x` or fail.
    pub project: Option<Projection<'a, T>>,
}

impl<T: Scalar> NewtonOptions<'_, T> {
    pub fn new(tol: T, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            fd_step: T::epsilon().sqrt(),
            central: false,
            project: None,
        }
    }
}

/// Damped Newton with a forward-difference Jacobian; converged iff
/// ‖F(x)‖∞ ≤ tol.
pub fn newton_solve<T, F>(
    mut f: F,
    x0: &[T],
    tol: T,
    max_iter: usize,
) -> Result<RootResult<Vec<T>, T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Vec<T>,
{
    newton_solve_with(|x| Ok(f(x)), x0, &NewtonOptions::new(tol, max_iter))
}

/// Fallible-residual variant with options.
pub fn newton_solve_with<T, F>(
    mut f: F,
    x0: &[T],
    opts: &NewtonOptions<'_, T>,
) -> Result<RootResult<Vec<T>, T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    if let Some(p) = opts.project {
        p(&mut x)?;
    }
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::Invalid("newton_solve needs a square system".into()));
    }
    let mut res = norm_inf(&fx);
    for it in 0..opts.max_iter {
        if !res.is_finite() {
            return Err(Error::NonFinite("Newton residual".into()));
        }
        if res <= opts.tol {
            return Ok(RootResult {
                value: x,
                residual: res,
                iterations: it,
                converged: true,
            });
        }
        let jac = fd_jacobian(&mut f, &x, &fx, opts)?;
        let rhs: Vec<T> = fx.iter().map(|v| -*v).collect();
        let dx = regularized_solve(&jac, &rhs)?;

        // backtracking on ‖F‖
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let mut xt: Vec<T> = x.iter().zip(&dx).map(|(a, d)| *a + lambda * *d).collect();
            if let Some(p) = opts.project {
                p(&mut xt)?;
            }
            if let Ok(ft) = f(&xt) {
                let rt = norm_inf(&ft);
                if rt.is_finite() && (rt < res || rt <= opts.tol) {
                    x = xt;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            return Err(Error::NoConvergence {
                stage: "newton line search".into(),
                iterations: it + 1,
                residual: res.as_f64(),
            });
        }
    }
    if res <= opts.tol {
        return Ok(RootResult {
            value: x,
            residual: res,
            iterations: opts.max_iter,
            converged: true,
        });
    }
    Err(Error::NoConvergence {
        stage: "newton".into(),
        iterations: opts.max_iter,
        residual: res.as_f64(),
    })
}

fn fd_jacobian<T, F>(f: &mut F, x: &[T], fx: &[T], opts: &NewtonOptions<'_, T>) -> Result<Vec<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    let n = x.len();
    let mut jac = vec![T::zero(); n * n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = opts.fd_step * (T::one() + x[j].abs());
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        if opts.central {
            xp[j] = x[j] - h;
            let fm = f(&xp)?;
            for i in 0..n {
                jac[i * n + j] = (fp[i] - fm[i]) / (h + h);
            }
        } else {
            for i in 0..n {
                jac[i * n + j] = (fp[i] - fx[i]) / h;
            }
        }
        xp[j] = x[j];
    }
    Ok(jac)
}

/// Plain solve, then Levenberg-style shifts J^T J + λI if the pivot test fails.
fn regularized_solve<T: Scalar>(jac: &[T], rhs: &[T]) -> Result<Vec<T>> {
    if let Ok(dx) = solve_linear(jac, rhs) {
        if dx.iter().all(|v| v.is_finite()) {
            return Ok(dx);
        }
    }
    let n = rhs.len();
    let mut jtj = vec![T::zero(); n * n];
    let mut jtr = vec![T::zero(); n];
    for i in 0..n {
        for j in 0..n {
            let mut s = T::zero();
            for k in 0..n {
                s = s + jac[k * n + i] * jac[k * n + j];
            }
            jtj[i * n + j] = s;
        }
        for k in 0..n {
            jtr[i] = jtr[i] + jac[k * n + i] * rhs[k];
        }
    }
    let scale = (0..n).fold(T::zero(), |s, i| s.max(jtj[i * n + i]));
    for shift in [T::lit(1e-12), T::lit(1e-8), T::lit(1e-4)] {
        let mut m = jtj.clone();
        for i in 0..n {
            m[i * n + i] = m[i * n + i] + shift * scale.max(T::min_positive_value());
        }
        if let Ok(dx) = solve_linear(&m, &jtr) {
            return Ok(dx);
        }
    }
    Err(Error::SingularJacobian)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_quadratic() {
        let r = newton_solve(|x: &[f64]| vec![x[0] * x[0] - 4.0], &[3.0], 1e-12, 50).unwrap();
        assert!(r.converged && (r.value[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn linear_system_one_step() {
        let r = newton_solve(
            |x: &[f64]| vec![x[0] + x[1] - 3.0, x[0] - x[1] - 1.0],
            &[0.0, 0.0],
            1e-10,
            50,
        )
        .unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-7 && (r.value[1] - 1.0).abs() < 1e-7);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn log_balance_stationary_point() {
        // d/dd (c d² − C₀ log d) = 2cd − C₀/d
        let (c, c0) = (0.7f64, 1.3f64);
        let r = newton_solve(
            |x: &[f64]| vec![2.0 * c * x[0] - c0 / x[0]],
            &[1.0],
            1e-12,
            50,
        )
        .unwrap();
        assert!((r.value[0] - (c0 / (2.0 * c)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn no_root() {
        let r = newton_solve(|x: &[f64]| vec![x[0] * x[0] + 1.0], &[1.0], 1e-12, 20);
        assert!(r.is_err());
    }
}
