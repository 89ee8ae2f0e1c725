//! `(-Δ)^s` three ways: hypergeometric closed form for radial powers,
//! principal-value quadrature, and a grid discretisation with exterior data.

mod discrete;
mod pv;
mod radial;

pub use discrete::{apply_discrete, build_discrete_op, DiscreteFracOp, ExteriorDatum};
pub use pv::{
    frac_lap_quadrature, frac_lap_radial_quadrature_3d, ConstantProfile, GaussianProfile, SmoothProfile,
};
pub use radial::{calibrate_fv_constant, frac_lap_radial_power, RadialPowerProfile};
