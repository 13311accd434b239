//! The envelope functional `P(f) = inf { int phi(|f|/v) v : v >= 0, v
//! submajorized by w }` and its induced norm and fundamental functions.
//!
//! For a nonincreasing step argument the infimum is attained by a
//! nonincreasing `v` that is constant on the cells of `f*`: averaging any
//! feasible `v` within a cell preserves every prefix constraint (the
//! cumulative of the average matches at cell edges and W is concave) and,
//! by Jensen applied to the convex `v -> phi(s/v) v`, does not increase the
//! objective. That reduces `P` to a finite-dimensional convex program:
//!
//!   minimize   sum_k phi(c_k / v_k) v_k len_k
//!   subject to v_1 >= ... >= v_K >= 0,
//!              sum_{j<=k} v_j len_j <= W(b_k)  for every cell edge b_k.
//!
//! The change of variables `v_k = sum_{j>=k} u_j`, `u >= 0`, makes the
//! monotonicity structural and the prefix constraints linear, and the
//! program is solved with a logarithmic-barrier Newton method. Prefix
//! checks at cell edges suffice exactly: prefix integrals of cellwise
//! constant functions are piecewise linear while W is concave.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::modular::{modular_m, modular_m_decreasing, psi};
use crate::orlicz::OrliczFn;
use crate::rearrange::{decreasing_rearrangement, prefix_integral};
use crate::scalar::{lit, Real};
use crate::solve::threshold_nonincreasing;
use crate::step::StepFn;
use crate::weight::Weight;

/// Outcome of an envelope minimization.
#[derive(Debug, Clone)]
pub struct EnvelopeSolution<R: Real> {
    pub value: ExtReal<R>,
    /// The optimizing v: nonincreasing, nonnegative, submajorized by w.
    pub minimizer: StepFn<R>,
    /// Residual barrier duality gap at termination.
    pub gap: R,
    /// Modular of f against the envelope weight W/t: a certified floor.
    pub lower: ExtReal<R>,
    /// Modular of f against w itself (v = w is feasible): a ceiling.
    pub upper: ExtReal<R>,
    pub iterations: usize,
}

impl<R: Real> EnvelopeSolution<R> {
    /// Re-checks the minimizer against the cone: nonincreasing,
    /// nonnegative, prefix integrals below W at every kink (with a hair of
    /// slack for re-summation order).
    pub fn minimizer_feasible(&self, w: &Weight<R>) -> bool {
        if !self.minimizer.is_nonincreasing() {
            return false;
        }
        let slack = R::one() + lit(1e-9);
        for &b in &self.minimizer.breakpoints()[1..] {
            if !b.is_finite() {
                continue;
            }
            let cap = match w.cumulative(b.min(w.domain_end())) {
                Ok(c) => c,
                Err(_) => return false,
            };
            if prefix_integral(&self.minimizer, b) > cap * slack {
                return false;
            }
        }
        true
    }
}

/// One positive cell of the rearranged argument.
struct Cell<R> {
    /// Right edge b_k (absolute position).
    edge: R,
    len: R,
    value: R,
    /// W(b_k), clamped to the weight's interval.
    cap: R,
}

fn infinite_solution<R: Real>(domain_end: R) -> EnvelopeSolution<R> {
    EnvelopeSolution {
        value: ExtReal::infinity(),
        minimizer: StepFn::zero(if domain_end.is_finite() { domain_end } else { R::one() }),
        gap: R::zero(),
        lower: ExtReal::infinity(),
        upper: ExtReal::infinity(),
        iterations: 0,
    }
}

/// `P(f)` with certificate data; `tol` is the relative duality-gap target
/// (1e-6 is the library default).
pub fn envelope_modular_p<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<EnvelopeSolution<R>> {
    let fstar = decreasing_rearrangement(f);
    if fstar.is_zero() {
        return Ok(EnvelopeSolution {
            value: ExtReal::zero(),
            minimizer: StepFn::zero(if fstar.domain_end().is_finite() {
                fstar.domain_end()
            } else {
                R::one()
            }),
            gap: R::zero(),
            lower: ExtReal::zero(),
            upper: ExtReal::zero(),
            iterations: 0,
        });
    }
    let end = w.domain_end();
    let mut cells: Vec<Cell<R>> = Vec::new();
    for (lo, hi, c) in fstar.cells() {
        if c == R::zero() {
            continue;
        }
        if !hi.is_finite() {
            // Positive mass on infinite measure costs infinity against any
            // feasible v.
            return Ok(infinite_solution(fstar.domain_end()));
        }
        let cap = if hi >= end {
            match w.total_mass().finite() {
                Some(t) => t,
                None => w.cumulative(end.min(hi))?,
            }
        } else {
            w.cumulative(hi)?
        };
        if cap == R::zero() {
            return Ok(infinite_solution(fstar.domain_end()));
        }
        cells.push(Cell { edge: hi, len: hi - lo, value: c, cap });
    }

    let (v, value, gap, iterations) = barrier_minimize(&cells, phi, tol)?;

    // The barrier's residual-gap claim rests on good centering, and flat
    // stretches of phi can park the optimum on the cone boundary where
    // centering stalls. The cell-average point is feasible and averaging
    // within cells never raises the cost, so it caps the report by the
    // plain modular.
    let vbar = cell_averages(&cells);
    let (v, value) = match objective_ext(&cells, phi, &vbar).finite() {
        Some(fbar) if fbar < value => (vbar, fbar),
        _ => (v, value),
    };

    // Assemble the minimizer over the full domain of f*.
    let k = cells.len();
    let mut breaks = vec![R::zero()];
    let mut values = Vec::with_capacity(k + 1);
    for (i, cell) in cells.iter().enumerate() {
        breaks.push(cell.edge);
        values.push(v[i]);
    }
    if fstar.domain_end() > cells[k - 1].edge {
        breaks.push(fstar.domain_end());
        values.push(R::zero());
    }
    let minimizer = StepFn::new(breaks, values)?;

    // Certified sandwich: modular against W/t from below, against w itself
    // from above. Pairings without a closed form fall back to the objective
    // at the feasible cell-average point, which still brackets correctly.
    let lower = match w
        .w1_envelope(16)
        .and_then(|w1| modular_m_decreasing(&fstar, &w1, phi))
    {
        Ok(m1) => m1,
        Err(_) => ExtReal::new((value - gap).max(R::zero())),
    };
    let upper = match modular_m_decreasing(&fstar, w, phi) {
        Ok(m) => m,
        Err(_) => {
            let vbar = cell_averages(&cells);
            objective_ext(&cells, phi, &vbar)
        }
    };
    Ok(EnvelopeSolution {
        value: ExtReal::new(value),
        minimizer,
        gap,
        lower,
        upper,
        iterations,
    })
}

fn cell_averages<R: Real>(cells: &[Cell<R>]) -> Vec<R> {
    let mut prev_cap = R::zero();
    let mut out = Vec::with_capacity(cells.len());
    for c in cells {
        out.push(((c.cap - prev_cap) / c.len).max(R::zero()));
        prev_cap = c.cap;
    }
    // W need not be strictly increasing across cells (zero weight tails);
    // keep the averages honest as a decreasing profile.
    for i in 1..out.len() {
        if out[i] > out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    out
}

fn objective_ext<R: Real>(cells: &[Cell<R>], phi: &OrliczFn<R>, v: &[R]) -> ExtReal<R> {
    cells
        .iter()
        .zip(v)
        .map(|(c, &vk)| psi(phi, c.value, vk) * ExtReal::new(c.len))
        .sum()
}

/// Finite-valued objective for solver iterates (all v_k > 0 there).
fn objective<R: Real>(cells: &[Cell<R>], phi: &OrliczFn<R>, v: &[R]) -> R {
    let mut acc = R::zero();
    for (c, &vk) in cells.iter().zip(v) {
        acc = acc + phi.eval(c.value / vk) * vk * c.len;
    }
    acc
}

/// `d/dv [phi(s/v) v] = phi(x) - x phi'(x)` at `x = s/v`; nonpositive.
fn psi_v<R: Real>(phi: &OrliczFn<R>, s: R, v: R) -> R {
    let x = s / v;
    phi.eval(x) - x * phi.right_deriv(x)
}

/// `d2/dv2 [phi(s/v) v] = x^2 phi''(x) / v`; nonnegative.
fn psi_vv<R: Real>(phi: &OrliczFn<R>, s: R, v: R) -> R {
    let x = s / v;
    x * x * phi.second_deriv(x) / v
}

struct BarrierState<R> {
    /// Increments; v_k = suffix sum from k.
    u: Vec<R>,
    mu: R,
}

/// Minimizes the reduced program; returns (v, value, gap, iterations).
fn barrier_minimize<R: Real>(
    cells: &[Cell<R>],
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<(Vec<R>, R, R, usize)> {
    let k = cells.len();
    let edges: Vec<R> = cells.iter().map(|c| c.edge).collect();

    // Start at a strictified, shrunk copy of the cell averages of w: the
    // averages are feasible with tight constraints, so pulling toward zero
    // gives interior slack.
    let vbar = cell_averages(cells);
    let shrink = lit::<R>(0.85);
    let floor = vbar
        .iter()
        .cloned()
        .filter(|x| *x > R::zero())
        .fold(R::infinity(), R::min)
        * lit(1e-6)
        * shrink;
    let mut u0: Vec<R> = Vec::with_capacity(k);
    for i in 0..k {
        let next = if i + 1 < k { vbar[i + 1] } else { R::zero() };
        u0.push(((vbar[i] - next) * shrink).max(floor));
    }
    // Rescale into strict feasibility if the floor pushed a prefix over.
    let pre = prefixes(&edges, &u0);
    let mut rho = R::one();
    for i in 0..k {
        rho = rho.min(lit::<R>(0.95) * cells[i].cap / pre[i]);
    }
    if rho < R::one() {
        for x in &mut u0 {
            *x = *x * rho;
        }
    }

    let v0 = suffix_sums(&u0);
    let f0 = objective(cells, phi, &v0);
    if !f0.is_finite() {
        return Err(Error::NonConvergence(
            "envelope start point overflows the objective".into(),
        ));
    }
    let mut st = BarrierState { u: u0, mu: (R::one() + f0.abs()) * lit(0.1) };
    let m_count = lit::<R>((2 * k) as f64);
    let mut iterations = 0usize;
    loop {
        center(cells, phi, &edges, &mut st, &mut iterations)?;
        let val = objective(cells, phi, &suffix_sums(&st.u));
        if m_count * st.mu <= tol * (R::one() + val.abs()) {
            let v = suffix_sums(&st.u);
            return Ok((v, val, m_count * st.mu, iterations));
        }
        st.mu = st.mu / lit(10.0);
        if iterations > 20_000 || st.mu < lit(1e-300) {
            return Err(Error::NonConvergence(format!(
                "barrier stalled after {iterations} Newton steps"
            )));
        }
    }
}

fn suffix_sums<R: Real>(u: &[R]) -> Vec<R> {
    let mut v = vec![R::zero(); u.len()];
    let mut acc = R::zero();
    for i in (0..u.len()).rev() {
        acc = acc + u[i];
        v[i] = acc;
    }
    v
}

/// prefix_k = sum_m b_min(m,k) u_m for every k, in O(K).
fn prefixes<R: Real>(edges: &[R], u: &[R]) -> Vec<R> {
    let k = u.len();
    let mut head = vec![R::zero(); k]; // sum_{m<=k} b_m u_m
    let mut acc = R::zero();
    for i in 0..k {
        acc = acc + edges[i] * u[i];
        head[i] = acc;
    }
    let mut suffix = vec![R::zero(); k + 1]; // sum_{m>k} u_m
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + u[i];
    }
    (0..k).map(|i| head[i] + edges[i] * suffix[i + 1]).collect()
}

fn barrier_value<R: Real>(
    cells: &[Cell<R>],
    phi: &OrliczFn<R>,
    edges: &[R],
    u: &[R],
    mu: R,
) -> R {
    for &x in u {
        if !(x > R::zero()) {
            return R::infinity();
        }
    }
    let pre = prefixes(edges, u);
    let mut logs = R::zero();
    for (i, c) in cells.iter().enumerate() {
        let slack = c.cap - pre[i];
        if !(slack > R::zero()) {
            return R::infinity();
        }
        logs = logs + slack.ln();
    }
    for &x in u {
        logs = logs + x.ln();
    }
    objective(cells, phi, &suffix_sums(u)) - mu * logs
}

/// Newton-centers the barrier at the current mu.
fn center<R: Real>(
    cells: &[Cell<R>],
    phi: &OrliczFn<R>,
    edges: &[R],
    st: &mut BarrierState<R>,
    iterations: &mut usize,
) -> Result<()> {
    let k = cells.len();
    for _ in 0..80 {
        *iterations += 1;
        let v = suffix_sums(&st.u);
        let pre = prefixes(edges, &st.u);
        let slack: Vec<R> = cells.iter().zip(&pre).map(|(c, &p)| c.cap - p).collect();
        if slack.iter().any(|s| !(*s > R::zero())) {
            return Err(Error::NonConvergence("barrier iterate left the region".into()));
        }

        // Gradient.
        let mut a = vec![R::zero(); k]; // prefix sums of len * psi_v
        let mut acc = R::zero();
        for i in 0..k {
            acc = acc + cells[i].len * psi_v(phi, cells[i].value, v[i]);
            a[i] = acc;
        }
        // Prefix helpers over 1/slack and b/slack.
        let mut inv_s = vec![R::zero(); k];
        let mut b_over_s_prefix = vec![R::zero(); k];
        let mut acc2 = R::zero();
        for i in 0..k {
            inv_s[i] = R::one() / slack[i];
            acc2 = acc2 + edges[i] * inv_s[i];
            b_over_s_prefix[i] = acc2;
        }
        let mut inv_s_suffix = vec![R::zero(); k + 1];
        for i in (0..k).rev() {
            inv_s_suffix[i] = inv_s_suffix[i + 1] + inv_s[i];
        }
        let mut g = vec![R::zero(); k];
        for m in 0..k {
            let slack_part = if m == 0 {
                edges[0] * inv_s_suffix[0]
            } else {
                b_over_s_prefix[m - 1] + edges[m] * inv_s_suffix[m]
            };
            g[m] = a[m] + st.mu * slack_part - st.mu / st.u[m];
        }

        // Hessian: curvature prefix + slack rank structure + diagonal.
        let mut curv = vec![R::zero(); k]; // prefix sums of len * psi_vv
        let mut acc3 = R::zero();
        for i in 0..k {
            acc3 = acc3 + cells[i].len * psi_vv(phi, cells[i].value, v[i]);
            curv[i] = acc3;
        }
        let mut p_bb = vec![R::zero(); k]; // prefix of b^2/s^2
        let mut p_b = vec![R::zero(); k]; // prefix of b/s^2
        let mut p_1 = vec![R::zero(); k]; // prefix of 1/s^2
        let (mut s1, mut s2, mut s3) = (R::zero(), R::zero(), R::zero());
        for i in 0..k {
            let w2 = inv_s[i] * inv_s[i];
            s1 = s1 + edges[i] * edges[i] * w2;
            s2 = s2 + edges[i] * w2;
            s3 = s3 + w2;
            p_bb[i] = s1;
            p_b[i] = s2;
            p_1[i] = s3;
        }
        let total_1 = p_1[k - 1];
        let mut h = vec![R::zero(); k * k];
        for m in 0..k {
            for n in m..k {
                let bb = if m == 0 { R::zero() } else { p_bb[m - 1] };
                let mid = if n == 0 {
                    R::zero()
                } else {
                    p_b[n - 1] - if m == 0 { R::zero() } else { p_b[m - 1] }
                };
                let tail1 = total_1 - if n == 0 { R::zero() } else { p_1[n - 1] };
                let mut val = curv[m]
                    + st.mu * (bb + edges[m] * mid + edges[m] * edges[n] * tail1);
                if m == n {
                    val = val + st.mu / (st.u[m] * st.u[m]);
                }
                h[m * k + n] = val;
                h[n * k + m] = val;
            }
        }

        // Newton direction; fall back to scaled steepest descent if the
        // factorization degenerates numerically.
        let delta = match cholesky_solve(&mut h, &g, k) {
            Some(mut d) => {
                for x in &mut d {
                    *x = -*x;
                }
                d
            }
            None => {
                let scale =
                    st.u.iter().cloned().fold(R::zero(), R::max) / (R::one() + norm_inf(&g));
                g.iter().map(|&x| -x * scale).collect()
            }
        };
        let dec2 = -dot(&g, &delta);
        let cur = barrier_value(cells, phi, edges, &st.u, st.mu);
        if dec2 <= lit::<R>(1e-12) * (R::one() + cur.abs()) {
            return Ok(());
        }

        // Fraction to the boundary on u > 0 and slack > 0.
        let mut alpha = R::one();
        for i in 0..k {
            if delta[i] < R::zero() {
                alpha = alpha.min(lit::<R>(0.99) * st.u[i] / -delta[i]);
            }
        }
        let dpre = prefixes(edges, &delta);
        for i in 0..k {
            if dpre[i] > R::zero() {
                alpha = alpha.min(lit::<R>(0.99) * slack[i] / dpre[i]);
            }
        }

        // Armijo backtracking.
        let mut step = alpha;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<R> =
                st.u.iter().zip(&delta).map(|(&x, &d)| x + step * d).collect();
            let val = barrier_value(cells, phi, edges, &trial, st.mu);
            if val <= cur - lit::<R>(0.25) * step * dec2 {
                st.u = trial;
                accepted = true;
                break;
            }
            step = step * lit(0.5);
        }
        if !accepted {
            return Ok(()); // no further progress at this mu; move on
        }
    }
    Ok(())
}

fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).fold(R::zero(), |s, (&x, &y)| s + x * y)
}

fn norm_inf<R: Real>(a: &[R]) -> R {
    a.iter().fold(R::zero(), |s, &x| s.max(x.abs()))
}

/// Dense Cholesky solve of `H x = rhs` (H overwritten); None if H is not
/// numerically positive definite.
fn cholesky_solve<R: Real>(h: &mut [R], rhs: &[R], n: usize) -> Option<Vec<R>> {
    for j in 0..n {
        let mut d = h[j * n + j];
        for t in 0..j {
            d = d - h[j * n + t] * h[j * n + t];
        }
        if !(d > R::zero()) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        h[j * n + j] = d;
        for i in (j + 1)..n {
            let mut x = h[i * n + j];
            for t in 0..j {
                x = x - h[i * n + t] * h[j * n + t];
            }
            h[i * n + j] = x / d;
        }
    }
    // Forward substitution L y = rhs.
    let mut y = vec![R::zero(); n];
    for i in 0..n {
        let mut x = rhs[i];
        for t in 0..i {
            x = x - h[i * n + t] * y[t];
        }
        y[i] = x / h[i * n + i];
    }
    // Back substitution L^T x = y.
    let mut x = vec![R::zero(); n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for t in (i + 1)..n {
            v = v - h[t * n + i] * x[t];
        }
        x[i] = v / h[i * n + i];
    }
    Some(x)
}

/// `||f|| = inf { eps : P(f/eps) <= 1 }` by outer bisection.
pub fn envelope_norm<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<ExtReal<R>> {
    if f.is_zero() {
        return Ok(ExtReal::zero());
    }
    let inner_tol = (tol * lit(1e-2)).max(lit(1e-10));
    // One probe validates structure (feasibility, truncation, overflow).
    let probe = envelope_modular_p(f, w, phi, inner_tol)?;
    if probe.value.is_infinite() {
        return Ok(ExtReal::infinity());
    }
    let fstar = decreasing_rearrangement(f);
    let guess = fstar.values().iter().cloned().fold(R::zero(), R::max);
    Ok(threshold_nonincreasing(
        |eps| {
            envelope_modular_p(&fstar.scale(R::one() / eps), w, phi, inner_tol)
                .expect("structure validated by probe")
                .value
        },
        guess,
        tol * lit(0.1),
    ))
}

/// Fundamental function of the envelope space, closed form:
/// `t / (W(t) phi^-1(1/W(t)))`.
pub fn fundamental_m_env<R: Real>(t: R, w: &Weight<R>, phi: &OrliczFn<R>) -> Result<R> {
    let cap = w.cumulative(t)?;
    if !(cap > R::zero()) {
        return Err(Error::Precondition(format!("W({t}) must be positive")));
    }
    Ok(t / (cap * phi.inverse(R::one() / cap)))
}

/// Fundamental function of the modular space: the homogeneous functional of
/// the indicator of (0, t].
pub fn fundamental_m<R: Real>(t: R, w: &Weight<R>, phi: &OrliczFn<R>) -> Result<ExtReal<R>> {
    let ind = StepFn::indicator(t, t)?;
    crate::modular::luxemburg_norm(&ind, w, phi)
}

/// Pointwise comparison function `1 / (w(t) phi^-1(1/(t w(t))))`; increasing
/// in t, and wedged between the fundamental function at t and at 2t.
pub fn fundamental_g<R: Real>(t: R, w: &Weight<R>, phi: &OrliczFn<R>) -> Result<R> {
    let wt = w.eval(t)?;
    if !(wt > R::zero()) {
        return Err(Error::Precondition(format!("w({t}) must be positive")));
    }
    Ok(R::one() / (wt * phi.inverse(R::one() / (t * wt))))
}

/// `(t, F_M(t) / F_env(t))` at interior weight breakpoints; the ratio stays
/// below the regularity constant for regular weights and climbs without
/// bound cell over cell for the hyperbolic counterexample.
pub fn fundamental_ratio_at_edges<R: Real>(
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<Vec<(R, R)>> {
    let mut out = Vec::new();
    let edges = w.breakpoints();
    for &b in &edges[1..edges.len().saturating_sub(1)] {
        if !b.is_finite() {
            continue;
        }
        let fm = match fundamental_m(b, w, phi)?.finite() {
            Some(x) => x,
            None => continue,
        };
        let fe = fundamental_m_env(b, w, phi)?;
        out.push((b, fm / fe));
    }
    Ok(out)
}

/// Upper bound `M(f)` used by comparison suites; exposed so callers can
/// sandwich without re-deriving pairings.
pub fn envelope_upper<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<ExtReal<R>> {
    modular_m(f, w, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::step::Seq;
    use approx::assert_relative_eq;

    fn sq() -> OrliczFn<f64> {
        OrliczFn::power(2.0).unwrap()
    }

    fn ones() -> Weight<f64> {
        Weight::constant(1.0).unwrap()
    }

    #[test]
    fn linear_phi_makes_p_the_l1_mass() {
        let lin = OrliczFn::power(1.0).unwrap();
        let f = Seq::new(vec![3.0, 4.0]).unwrap().to_step();
        let sol = envelope_modular_p(&f, &ones(), &lin, 1e-8).unwrap();
        assert_relative_eq!(sol.value.value(), 7.0, max_relative = 1e-9);
        assert!(sol.minimizer_feasible(&ones()));
        assert!(sol.lower.value() <= sol.value.value() * (1.0 + 1e-9));
        assert!(sol.value.value() <= sol.upper.value() * (1.0 + 1e-9));
    }

    #[test]
    fn indicator_closed_form() {
        // P(chi_(0,t]/c) = W(t) phi(t/(c W(t))).
        let phi = sq();
        let w = ones();
        for (t, c) in [(1.0, 1.0), (4.0, 1.0), (2.0, 0.5)] {
            let f = StepFn::indicator(t, t).unwrap().scale(1.0 / c);
            let sol = envelope_modular_p(&f, &w, &phi, 1e-9).unwrap();
            let expect = t * phi.eval(t / (c * t));
            assert_relative_eq!(sol.value.value(), expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn sandwich_brackets_every_run() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![4.0, 2.0, 1.0, 0.5]).unwrap().to_step()).unwrap();
        let f = Seq::new(vec![5.0, 3.0, 2.0, 1.0]).unwrap().to_step();
        let sol = envelope_modular_p(&f, &w, &phi, 1e-8).unwrap();
        assert!(sol.lower.value() <= sol.value.value() * (1.0 + 1e-7));
        assert!(sol.value.value() <= sol.upper.value() * (1.0 + 1e-7));
        assert!(sol.minimizer_feasible(&w));
        assert!(sol.gap <= 1e-8 * (1.0 + sol.value.value()));
    }

    #[test]
    fn rearrangement_invariance_of_p() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![4.0, 2.0, 1.0, 0.5]).unwrap().to_step()).unwrap();
        let a = Seq::new(vec![1.0, 4.0, 2.0, 3.0]).unwrap().to_step();
        let b = Seq::new(vec![4.0, 3.0, 2.0, 1.0]).unwrap().to_step();
        let pa = envelope_modular_p(&a, &w, &phi, 1e-8).unwrap().value.value();
        let pb = envelope_modular_p(&b, &w, &phi, 1e-8).unwrap().value.value();
        assert_relative_eq!(pa, pb, max_relative = 1e-6);
    }

    #[test]
    fn infinite_p_when_mass_escapes() {
        let phi = sq();
        let flat = StepFn::new(vec![0.0, f64::INFINITY], vec![1.0]).unwrap();
        let sol = envelope_modular_p(&flat, &ones(), &phi, 1e-6).unwrap();
        assert!(sol.value.is_infinite());
        // Weight with no mass at all on the support.
        let w = Weight::step(StepFn::new(vec![0.0, 1.0], vec![0.0]).unwrap());
        assert!(w.is_err()); // all-zero weights are rejected upstream
    }

    #[test]
    fn envelope_norm_closed_forms() {
        let phi = sq();
        let n = envelope_norm(&StepFn::indicator(4.0, 4.0).unwrap(), &ones(), &phi, 1e-8)
            .unwrap()
            .value();
        assert_relative_eq!(n, 2.0, max_relative = 1e-6);
        let lin = OrliczFn::power(1.0).unwrap();
        let f = Seq::new(vec![3.0, 4.0]).unwrap().to_step();
        let n1 = envelope_norm(&f, &ones(), &lin, 1e-8).unwrap().value();
        assert_relative_eq!(n1, 7.0, max_relative = 1e-6);
    }

    #[test]
    fn envelope_norm_below_luxemburg() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![4.0, 2.0, 1.0, 0.5]).unwrap().to_step()).unwrap();
        let f = Seq::new(vec![4.0, 1.0, 3.0, 2.0]).unwrap().to_step();
        let env = envelope_norm(&f, &w, &phi, 1e-8).unwrap().value();
        let lux = crate::modular::luxemburg_norm(&f, &w, &phi).unwrap().value();
        assert!(env <= lux * (1.0 + 1e-6), "envelope {env} vs luxemburg {lux}");
    }

    #[test]
    fn fundamental_functions_at_four() {
        let phi = sq();
        let w = ones();
        assert_relative_eq!(fundamental_m_env(4.0, &w, &phi).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(
            fundamental_m(4.0, &w, &phi).unwrap().value(),
            2.0,
            max_relative = 1e-8
        );
        assert_relative_eq!(fundamental_g(4.0, &w, &phi).unwrap(), 2.0, max_relative = 1e-12);
        // Linear phi: F_env(t) = t.
        let lin = OrliczFn::power(1.0).unwrap();
        assert_relative_eq!(fundamental_m_env(3.0, &w, &lin).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn fundamental_sandwich_on_sqrt_weight() {
        let phi = sq();
        let w = Weight::power(0.5).unwrap();
        for t in [0.25, 1.0, 3.0, 8.0] {
            let fm = fundamental_m(t, &w, &phi).unwrap().value();
            let g = fundamental_g(t, &w, &phi).unwrap();
            let fm2 = fundamental_m(2.0 * t, &w, &phi).unwrap().value();
            assert!(fm <= g * (1.0 + 1e-9));
            assert!(g <= fm2 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn convexity_along_pairs() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![3.0, 2.0, 1.0]).unwrap().to_step()).unwrap();
        let f = Seq::new(vec![4.0, 2.0, 1.0]).unwrap().to_step();
        let g = Seq::new(vec![2.0, 2.0, 2.0]).unwrap().to_step();
        let mid = f.compose(&g, |a, b| 0.5 * (a + b)).unwrap();
        let pf = envelope_modular_p(&f, &w, &phi, 1e-8).unwrap().value.value();
        let pg = envelope_modular_p(&g, &w, &phi, 1e-8).unwrap().value.value();
        let pm = envelope_modular_p(&mid, &w, &phi, 1e-8).unwrap().value.value();
        assert!(pm <= 0.5 * (pf + pg) + 1e-6 * (1.0 + pf + pg));
    }
}
