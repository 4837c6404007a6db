//! Surfaces given by coordinate expressions in `u` and `v`.

use std::cell::RefCell;

use bicons_core::ambient::{AmbientSpace, ClosedForm, WarpingFunction};
use bicons_core::immersion::{MapSurface, ParamDomain};
use bicons_core::linalg::AmbientVector;
use bicons_core::{Error, Result};

thread_local! {
    // meval contexts are not Sync, so each worker keeps its own.
    static CTX: RefCell<meval::Context<'static>> = RefCell::new(meval::Context::new());
}

fn eval(e: &meval::Expr, u: f64, v: f64) -> std::result::Result<f64, meval::Error> {
    CTX.with(|c| {
        let mut c = c.borrow_mut();
        c.var("u", u).var("v", v);
        e.eval_with_context(&*c)
    })
}

/// Builds the map `(u, v) -> (x0(u, v), .., x_{n-1}(u, v))` into
/// `I x_f R^{n-1}`, where `x0` is the time coordinate and `f` defaults to 1.
pub fn user_map(
    components: &[String],
    domain: ParamDomain,
    warp: Option<ClosedForm>,
) -> Result<MapSurface> {
    let exprs = components
        .iter()
        .enumerate()
        .map(|(k, s)| {
            s.parse::<meval::Expr>()
                .map_err(|e| Error::Usage(format!("component {k} ({s:?}): {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (uc, vc) = (
        0.5 * (domain.u.0 + domain.u.1),
        0.5 * (domain.v.0 + domain.v.1),
    );
    for (k, e) in exprs.iter().enumerate() {
        eval(e, uc, vc)
            .map_err(|err| Error::Usage(format!("component {k} ({:?}): {err}", components[k])))?;
    }
    let warp = match warp {
        Some(form) => WarpingFunction::closed_form(form, (f64::NEG_INFINITY, f64::INFINITY)),
        None => WarpingFunction::unit(),
    };
    let ambient = AmbientSpace::warped_flat(exprs.len(), warp)?;
    let map = move |u: f64, v: f64| {
        let mut x = Vec::with_capacity(exprs.len());
        for e in &exprs {
            let y = eval(e, u, v).map_err(|err| Error::Domain(err.to_string()))?;
            if !y.is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite coordinate at (u, v) = ({u}, {v})"
                )));
            }
            x.push(y);
        }
        Ok(AmbientVector::new(x))
    };
    Ok(MapSurface::new("user-map", ambient, domain, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bicons_core::immersion::Immersion;

    fn dom() -> ParamDomain {
        ParamDomain::new((-0.5, 0.5), (-0.5, 0.5)).unwrap()
    }

    #[test]
    fn evaluates_components() {
        let s = user_map(
            &["0.5*u".into(), "u".into(), "v".into(), "sin(u*v)".into()],
            dom(),
            None,
        )
        .unwrap();
        let p = s.position(0.2, 0.3).unwrap();
        assert_eq!(p.as_slice()[..3], [0.1, 0.2, 0.3]);
        assert!((p.as_slice()[3] - (0.06f64).sin()).abs() < 1e-15);
        assert_eq!(s.ambient().dim(), 4);
    }

    #[test]
    fn rejects_bad_expressions() {
        let bad = |c: &str| user_map(&["0".into(), "u".into(), c.into()], dom(), None);
        assert_eq!(bad("u +* v").unwrap_err().kind(), "usage");
        assert_eq!(bad("w").unwrap_err().kind(), "usage");
        assert!(user_map(&["u".into(), "v".into()], dom(), None).is_err());
    }
}
