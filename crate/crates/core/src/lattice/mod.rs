//! The sets `A(delta, Q)`, `L_{delta,q}` and `L^n_{delta,q}`, and the plane
//! measures `L_q` with their closed-form transforms and mollified densities.

mod plane;
mod sets;

pub use plane::{
    ad_constants, mollified_density_at_phase, mollified_plane_density, plane_coefficient_table,
    plane_fourier_coefficient, plane_fourier_quadrature, primitive_part, AdConstants, PlaneUnionMeasure,
};
pub use sets::{
    euclidean_norm, gcd, in_lattice_neighborhood, in_linear_form, is_primitive, lattice_distance,
    linear_form_distance, measure_of_lattice_neighborhood, measure_of_linear_form, LatticeNeighborhood,
    LinearFormSpec, MassEstimate,
};
