//! Dual-side functionals: the Amemiya form of the Orlicz norm on the cone,
//! the Hölder pairing, a 1-norming supremum oracle, and the probe showing
//! the pairing degenerates when the weight fails to be locally integrable.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::modular::{integral_against_weight, modular_m_decreasing, unify_domains};
use crate::orlicz::{NFunctionConfig, OrliczFn};
use crate::rearrange::{decreasing_rearrangement, integral_product};
use crate::scalar::{lit, Real};
use crate::solve::{min_unimodal_positive, root_nonincreasing};
use crate::step::{merged_cells, StepFn};
use crate::weight::{Piece, Weight};

/// Result of a dual-norm computation or of the norming oracle.
#[derive(Debug, Clone)]
pub struct DualNormResult<R: Real> {
    pub value: ExtReal<R>,
    /// Optimal scaling: the Amemiya argmin k, or the norming multiplier.
    pub scaling: R,
    /// Witness with modular at most 1, when the oracle builds one.
    pub attainer: Option<StepFn<R>>,
}

fn require_n_function<R: Real>(phi: &OrliczFn<R>) -> Result<()> {
    if !phi.is_n_function(&NFunctionConfig::default()) {
        return Err(Error::Precondition(
            "the dual-side oracles need an N-function".into(),
        ));
    }
    Ok(())
}

/// Amemiya functional `inf_k (1 + int phi_star(k f*) dW) / k`.
///
/// The integrand depends on the weight only through W, so the inner
/// integral is exact for every catalog weight. The map in k is convex;
/// golden section on an expanding bracket finds the infimum.
pub fn orlicz_norm_amemiya<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi_star: &OrliczFn<R>,
    tol: R,
) -> Result<DualNormResult<R>> {
    require_n_function(phi_star)?;
    amemiya_with(f, w, |x| ExtReal::new(phi_star.eval(x)), tol)
}

/// Same functional with the conjugate taken pointwise in closed form, so
/// every representable phi gets an exact dual integrand.
pub fn orlicz_norm_conjugate<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<DualNormResult<R>> {
    amemiya_with(f, w, |x| phi.conjugate_value(x), tol)
}

fn amemiya_with<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    star: impl Fn(R) -> ExtReal<R>,
    tol: R,
) -> Result<DualNormResult<R>> {
    if f.is_zero() {
        return Ok(DualNormResult {
            value: ExtReal::zero(),
            scaling: R::one(),
            attainer: None,
        });
    }
    let fstar = decreasing_rearrangement(f);
    let cmax = fstar.values().iter().cloned().fold(R::zero(), R::max);
    // One probe validates domains and truncation; those checks do not
    // depend on the scaling k.
    integral_against_weight(&fstar, w, &star)?;
    let objective = |k: R| -> ExtReal<R> {
        let modular = integral_against_weight(&fstar, w, |c| star(k * c))
            .expect("domains validated by the probe");
        (ExtReal::new(R::one()) + modular) * ExtReal::new(R::one() / k)
    };
    // Start where the largest argument of the integrand is order one.
    let guess = (R::one() / cmax).max(lit(1e-12));
    let (k, value) = min_unimodal_positive(objective, guess, tol)?;
    Ok(DualNormResult { value, scaling: k, attainer: None })
}

/// `(pairing, bound)` with `pairing = int |f g|` exact and the bound the
/// product of the dual Amemiya functional of f and the Luxemburg functional
/// of g. Callers assert `pairing <= bound * (1 + tol)`.
pub fn holder_pairing<R: Real>(
    f: &StepFn<R>,
    g: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<(ExtReal<R>, ExtReal<R>)> {
    require_n_function(phi)?;
    let pairing = integral_product(f, g);
    let dual = orlicz_norm_conjugate(f, w, phi, tol)?.value;
    let lux = crate::modular::luxemburg_norm(g, w, phi)?;
    Ok((pairing, dual * lux))
}

/// Supremum of `int f* g` over decreasing g with modular at most 1,
/// realized by the stationarity profile `g = w * (phi')^{-1}(f*/lambda)`
/// with lambda tuned until the modular of g hits 1.
///
/// Exactness of the modular of g needs g piecewise constant, so the oracle
/// accepts piecewise-constant weights only; flat derivative stretches
/// (linear and piecewise-linear phi) are rejected by the derivative
/// inversion.
pub fn norming_supremum<R: Real>(
    f: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
    tol: R,
) -> Result<DualNormResult<R>> {
    require_n_function(phi)?;
    if f.is_zero() {
        return Ok(DualNormResult {
            value: ExtReal::zero(),
            scaling: R::one(),
            attainer: None,
        });
    }
    let fstar = decreasing_rearrangement(f);

    // Materialize w as a step function over the support of f*. The modular
    // of the attainer is exact only when the attainer itself is a step
    // function, so genuinely non-constant pieces are out of scope here.
    if w.truncation_floor().is_some() {
        return Err(Error::Precondition(
            "norming oracle needs an untruncated piecewise-constant weight".into(),
        ));
    }
    let end = fstar.domain_end();
    let mut wbreaks = vec![R::zero()];
    let mut wvalues = Vec::new();
    for (_, hi, piece) in w.segments_between(R::zero(), end) {
        match piece {
            Piece::Const(c) => wvalues.push(c),
            Piece::Pow { .. } => {
                return Err(Error::Precondition(
                    "norming oracle needs an untruncated piecewise-constant weight".into(),
                ))
            }
        }
        wbreaks.push(hi);
    }
    if *wbreaks.last().unwrap() < end {
        wvalues.push(R::zero());
        wbreaks.push(end);
    }
    let wstep = StepFn::new(wbreaks, wvalues)?;

    // Probe the derivative inversion once so the closure below stays total.
    let cmax = fstar.values().iter().cloned().fold(R::zero(), R::max);
    phi.deriv_inverse(cmax)?;

    let build = |lambda: R| -> StepFn<R> {
        let g = fstar
            .compose(&wstep, |c, wv| {
                if c == R::zero() || wv == R::zero() {
                    R::zero()
                } else {
                    wv * phi.deriv_inverse(c / lambda).expect("probed above")
                }
            })
            .expect("domains unified by construction");
        g.canonicalized()
    };
    let modular_of = |lambda: R| -> ExtReal<R> {
        modular_m_decreasing(&build(lambda), w, phi).expect("step pairing is exact")
    };
    let mut lambda = root_nonincreasing(modular_of, R::one(), cmax, tol * lit(0.1))?;
    // Land on the admissible side.
    for _ in 0..64 {
        if modular_of(lambda) <= ExtReal::new(R::one()) {
            break;
        }
        lambda = lambda * (R::one() + tol);
    }
    let g = build(lambda);
    let pairing = integral_product(&fstar, &g);
    Ok(DualNormResult { value: pairing, scaling: lambda, attainer: Some(g) })
}

/// One row of the degenerate-dual probe, kept in log form: the grid point
/// is `u = b exp(-log_ratio)`, far below floating-point range at the tail.
#[derive(Debug, Clone, Copy)]
pub struct TrivialDualRow<R> {
    /// ln(b/u) for the grid point u.
    pub log_ratio: R,
    /// Scaling c_u with modular of c_u f_u at most 1.
    pub scaling: R,
    /// Exact modular of the scaled test function; at most 1 by design.
    pub modular: R,
    /// Pairing of the indicator of (0, b] with c_u f_u.
    pub pairing: R,
}

#[derive(Debug, Clone)]
pub struct TrivialDualProbe<R> {
    pub rows: Vec<TrivialDualRow<R>>,
    /// Pairings exceeded the ceiling while every modular stayed admissible.
    pub diverges: bool,
}

/// Probe for the hyperbolic weight `w(t) = 1/t`, whose cumulative is
/// infinite on every interval: test functions `f_u = (w ∧ w(u)) χ_(0,b]`
/// have admissible scalings whose pairings with a fixed indicator grow
/// without bound, so no nonzero functional pairs continuously.
///
/// Everything is closed form for scaled power phi (exponent p > 1):
/// with L = ln(b/u),
///   int_0^b (w ∧ w(u)) = 1 + L,
///   modular(c f_u)     = phi(c) (1/p + L),
///   c_u                = phi^{-1}(1/(1 + L)),
///   pairing            = c_u (1 + L).
/// The hyperbola never materializes as a Weight: it has no finite
/// cumulative to truncate.
pub fn trivial_dual_probe<R: Real>(
    b: R,
    phi: &OrliczFn<R>,
    ceiling: R,
) -> Result<TrivialDualProbe<R>> {
    require_n_function(phi)?;
    let (p, _) = phi.power_params().ok_or_else(|| {
        Error::Precondition("the degenerate-dual probe is closed-form for powers only".into())
    })?;
    if !(b > R::zero()) || !b.is_finite() {
        return Err(Error::Precondition("probe needs a finite positive b".into()));
    }
    let mut rows = Vec::new();
    let mut admissible = true;
    let mut l = R::one();
    for _ in 0..=12 {
        let area = R::one() + l;
        let c = phi.inverse(R::one() / area);
        let modular = phi.eval(c) * (R::one() / p + l);
        let pairing = c * area;
        admissible = admissible && modular <= R::one() + lit(1e-12);
        rows.push(TrivialDualRow { log_ratio: l, scaling: c, modular, pairing });
        l = l * lit(10.0);
    }
    let diverges = admissible
        && rows.last().map(|r| r.pairing > ceiling).unwrap_or(false)
        && rows.windows(2).all(|p| p[1].pairing > p[0].pairing);
    Ok(TrivialDualProbe { rows, diverges })
}

/// `(int phi*(g*) v, int phi*(g*) dW)` for decreasing v: the left side
/// never exceeds the right when v is submajorized by w, because the
/// integrand is decreasing.
pub fn conjugate_order_pair<R: Real>(
    g: &StepFn<R>,
    v: &StepFn<R>,
    w: &Weight<R>,
    phi: &OrliczFn<R>,
) -> Result<(ExtReal<R>, ExtReal<R>)> {
    let gstar = decreasing_rearrangement(g);
    let (gu, vu) = unify_domains(&gstar, v);
    let mut lhs = ExtReal::zero();
    for (a, b, gc, vc) in merged_cells(&gu, &vu) {
        if vc == R::zero() {
            continue;
        }
        let len = if b.is_finite() {
            ExtReal::new(b - a)
        } else {
            ExtReal::infinity()
        };
        lhs += phi.conjugate_value(gc) * ExtReal::new(vc) * len;
    }
    let rhs = integral_against_weight(&gstar, w, |c| phi.conjugate_value(c))?;
    Ok((lhs, rhs))
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
    fn amemiya_of_unit_indicator() {
        // inf_k (1 + k^2)/k = 2 at k = 1.
        let f = StepFn::indicator(1.0, 1.0).unwrap();
        let r = orlicz_norm_amemiya(&f, &ones(), &sq(), 1e-9).unwrap();
        assert_relative_eq!(r.value.value(), 2.0, max_relative = 1e-7);
        assert_relative_eq!(r.scaling, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn amemiya_matches_grid_on_normalized_power() {
        // phi*(u) = u^q/q: objective (1 + k^q/q)/k minimized on a 1-D grid.
        let q = 3.0;
        let star = OrliczFn::power_normalized(q).unwrap();
        let f = StepFn::indicator(1.0, 1.0).unwrap();
        let r = orlicz_norm_amemiya(&f, &ones(), &star, 1e-10).unwrap();
        let mut grid_best = f64::INFINITY;
        let mut k: f64 = 1e-4;
        while k < 1e4 {
            grid_best = grid_best.min((1.0 + k.powf(q) / q) / k);
            k *= 1.0005;
        }
        assert_relative_eq!(r.value.value(), grid_best, max_relative = 1e-5);
    }

    #[test]
    fn amemiya_rejects_non_n_functions() {
        let f = StepFn::indicator(1.0, 1.0).unwrap();
        let lin = OrliczFn::power(1.0).unwrap();
        assert!(orlicz_norm_amemiya(&f, &ones(), &lin, 1e-8).is_err());
    }

    #[test]
    fn amemiya_zero_and_infinite() {
        let zero = StepFn::zero(1.0);
        let r = orlicz_norm_amemiya(&zero, &ones(), &sq(), 1e-8).unwrap();
        assert!(r.value.value() == 0.0);
        // Positive value on an infinite cell: every k gives an infinite
        // integral.
        let flat = StepFn::new(vec![0.0, f64::INFINITY], vec![1.0]).unwrap();
        let r = orlicz_norm_amemiya(&flat, &ones(), &sq(), 1e-8).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn holder_on_unit_indicators() {
        let phi = OrliczFn::power_normalized(2.0).unwrap(); // u^2/2, self-conjugate
        let f = StepFn::indicator(1.0, 1.0).unwrap();
        let (pairing, bound) = holder_pairing(&f, &f, &ones(), &phi, 1e-8).unwrap();
        assert_relative_eq!(pairing.value(), 1.0, max_relative = 1e-12);
        assert!(pairing.value() <= bound.value() * (1.0 + 1e-6));
    }

    #[test]
    fn holder_random_shapes_hold() {
        let phi = sq();
        let w = Weight::step(Seq::new(vec![4.0, 2.0, 1.0, 0.5]).unwrap().to_step()).unwrap();
        let fs = [
            Seq::new(vec![3.0, 1.0, 2.0]).unwrap().to_step(),
            Seq::new(vec![0.5, 0.25]).unwrap().to_step(),
        ];
        let gs = [
            Seq::new(vec![1.0, 1.0, 1.0]).unwrap().to_step(),
            Seq::new(vec![2.0, 0.5, 0.25]).unwrap().to_step(),
        ];
        for f in &fs {
            for g in &gs {
                let (pairing, bound) = holder_pairing(f, g, &w, &phi, 1e-8).unwrap();
                assert!(
                    pairing.value() <= bound.value() * (1.0 + 1e-6),
                    "pairing {} bound {}",
                    pairing.value(),
                    bound.value()
                );
            }
        }
    }

    #[test]
    fn norming_reaches_amemiya_within_five_percent() {
        let phi = OrliczFn::power_normalized(2.0).unwrap();
        let f = StepFn::indicator(1.0, 1.0).unwrap();
        let amemiya = orlicz_norm_conjugate(&f, &ones(), &phi, 1e-9).unwrap();
        let sup = norming_supremum(&f, &ones(), &phi, 1e-9).unwrap();
        let g = sup.attainer.as_ref().unwrap();
        assert!(modular_m_decreasing(g, &ones(), &phi).unwrap().value() <= 1.0 + 1e-6);
        assert!(
            sup.value.value() >= 0.95 * amemiya.value.value(),
            "sup {} vs amemiya {}",
            sup.value.value(),
            amemiya.value.value()
        );
        assert!(sup.value.value() <= amemiya.value.value() * (1.0 + 1e-6));
    }

    #[test]
    fn norming_rejects_flat_derivatives() {
        let f = Seq::new(vec![2.0, 1.0]).unwrap().to_step();
        let pwl = OrliczFn::pwl(vec![(1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert!(norming_supremum(&f, &ones(), &pwl, 1e-8).is_err());
    }

    #[test]
    fn trivial_dual_probe_diverges_for_square() {
        let probe = trivial_dual_probe(1.0, &sq(), 1e3).unwrap();
        assert!(probe.diverges);
        for row in &probe.rows {
            assert!(row.modular <= 1.0 + 1e-12);
        }
        // Closed form at L = 1: c = 1/sqrt(2), pairing = sqrt(2).
        assert_relative_eq!(probe.rows[0].pairing, 2f64.sqrt(), max_relative = 1e-12);
        // Rejected for the linear function.
        let lin = OrliczFn::power(1.0).unwrap();
        assert!(trivial_dual_probe(1.0, &lin, 1e3).is_err());
    }

    #[test]
    fn conjugate_order_between_minorant_and_weight() {
        let phi = OrliczFn::power_normalized(2.0).unwrap();
        let w = Weight::step(Seq::new(vec![3.0, 2.0, 1.0]).unwrap().to_step()).unwrap();
        // v below the cell averages of w is submajorized by w.
        let v = Seq::new(vec![2.0, 1.5, 1.0]).unwrap().to_step();
        let g = Seq::new(vec![2.0, 1.0, 0.5]).unwrap().to_step();
        let (lhs, rhs) = conjugate_order_pair(&g, &v, &w, &phi).unwrap();
        assert!(lhs.value() <= rhs.value() * (1.0 + 1e-12));
    }
}
