//! Exact computer-algebra kernel for filtered skew power series at desk
//! scale: finite fields, truncated Laurent series with honest precision
//! tracking, matrix filtrations, Ore polynomials, bounded skew power
//! series, crossed-product decompositions, finite-dimensional crossed
//! products, and scalar-extension pipelines.

pub mod error;
pub mod fq;
pub mod laurent;
pub mod qelem;
pub mod val;

pub mod crossed;
pub mod fd;
pub mod fieldtheory;
pub mod filtmap;
pub mod ore;
pub mod scalar;
pub mod series;
pub mod skew;

pub use crossed::{decompose, derivative_invariance_check, extend_ideal_psi, extract_components_by_derivative, formal_derivative, iwasawa_normalize, naive_derivative, CrossedDecomp, IwasawaNormalization, Localized};
pub use error::{Error, Result};
pub use fd::{central_minimal_with_p_nilpotence, enumerate_ideals, ideal_closure, is_prime_fd, minimal_support_element, nilradical_fd, p1_holds, p1_witness, phi_contract, psi_extend, subring_crossed, CentralMinimalOutcome, FdAlgebra, FdCrossed, FdIdeal};
pub use fieldtheory::{adjoin_root_of_unit_power, artin_schreier_split, fixed_field, frobenius_orbit, AdjoinedField, ArtinSchreier, FixedField};
pub use ore::{frobenius_power_relation, OrePoly};
pub use scalar::{build_extended_datum, central_scale, compose_filt_bases, converge_inner, frobenius_twist_lift, lift_map, lift_qelem, reduce_to_sfoh, tensor_decompose, tensor_filtration, tensor_filtration_oracle, theta_map, CentralScale, ConvergenceRun, ExtendedDatum, SfohInstance, SfohReport, StageReport, TwistLift};
pub use series::BoundedSeries;
pub use skew::{Compat, SkewDatum};
pub use filtmap::{degree_of_map, graded_regular, FiltMap, RingCtx};
pub use fq::{FqElem, FqField};
pub use laurent::Laurent;
pub use qelem::QElem;
pub use val::Val;
