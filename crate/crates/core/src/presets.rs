//! Built-in example systems on the unit disk.
//!
//! Both couple a weak-order and a strong-order equation through an
//! exponential integral weight, the oscillation of the first component,
//! a point product at the center and the limsup at infinity; they differ
//! only in the first nonlinearity. With f1 = (1 − u1) · ∫ e^{u2}, suitable
//! parameters admit a non-zero positive solution; with the cubic
//! f1 = u1² (1 − u1) · ∫ e^{u2}, small parameters force the zero solution.

use crate::expr::ScalarExpr;
use crate::geometry::BallDomain;
use crate::kernel::{ExteriorData, FracOrder};
use crate::model::{BoxBounds, ComponentSpec, FunctionalSpec, PointFactor, SystemSpec};

fn base_components(f1: ScalarExpr, params: [f64; 4]) -> Vec<ComponentSpec> {
    let [lambda1, lambda2, eta1, eta2] = params;
    let center = vec![0.0, 0.0];
    vec![
        ComponentSpec {
            s: FracOrder::new(0.25).expect("valid order"),
            lambda: lambda1,
            eta: eta1,
            f: f1,
            weight: FunctionalSpec::IntegralOfExpOf { component: 2 },
            boundary: FunctionalSpec::PointProduct {
                factors: vec![
                    PointFactor {
                        component: 1,
                        point: center.clone(),
                    },
                    PointFactor {
                        component: 2,
                        point: center,
                    },
                ],
            },
            zeta: ExteriorData::constant(1.0).expect("valid profile"),
        },
        ComponentSpec {
            s: FracOrder::new(0.75).expect("valid order"),
            lambda: lambda2,
            eta: eta2,
            f: ScalarExpr::mul(ScalarExpr::z(2), ScalarExpr::w()),
            weight: FunctionalSpec::Oscillation { component: 1 },
            boundary: FunctionalSpec::LimSupAtInfinity { component: 1 },
            zeta: ExteriorData::constant(1.0).expect("valid profile"),
        },
    ]
}

/// The system whose parameters can be certified to admit a non-zero
/// positive solution: f1 = (1 − z1) w.
pub fn existence_example(
    lambda1: f64,
    lambda2: f64,
    eta1: f64,
    eta2: f64,
    resolution: usize,
) -> SystemSpec {
    let f1 = ScalarExpr::mul(
        ScalarExpr::sub(ScalarExpr::constant(1.0), ScalarExpr::z(1)),
        ScalarExpr::w(),
    );
    SystemSpec {
        m: 2,
        domain: BallDomain::new(2, 1.0).expect("unit disk"),
        resolution,
        components: base_components(f1, [lambda1, lambda2, eta1, eta2]),
    }
}

/// Box bounds used with [`existence_example`].
pub fn existence_box() -> BoxBounds {
    BoxBounds::new(vec![0.5, 1.0]).expect("positive bounds")
}

/// The variant with the cubic first nonlinearity f1 = z1² (1 − z1) w,
/// whose small-parameter region admits only the zero solution.
pub fn nonexistence_example(
    lambda1: f64,
    lambda2: f64,
    eta1: f64,
    eta2: f64,
    resolution: usize,
) -> SystemSpec {
    let f1 = ScalarExpr::mul(
        ScalarExpr::mul(
            ScalarExpr::pow(ScalarExpr::z(1), 2),
            ScalarExpr::sub(ScalarExpr::constant(1.0), ScalarExpr::z(1)),
        ),
        ScalarExpr::w(),
    );
    SystemSpec {
        m: 2,
        domain: BallDomain::new(2, 1.0).expect("unit disk"),
        resolution,
        components: base_components(f1, [lambda1, lambda2, eta1, eta2]),
    }
}

/// Box bounds used with [`nonexistence_example`].
pub fn nonexistence_box() -> BoxBounds {
    BoxBounds::new(vec![1.0, 1.0]).expect("positive bounds")
}
