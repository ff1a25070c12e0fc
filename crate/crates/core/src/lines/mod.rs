//! Exact linear algebra over `Q` and `Z_(p)`, lattices, and metrized lines.

pub mod adelic;
pub mod lattice;
pub mod matrix;
pub mod metrized;
pub mod snf;

pub use adelic::{intersect_adelic, ValuationMap};
pub use lattice::{
    local_kernel_mod, local_kernel_of_coords, quotient_lattice_valuation, saturate_in, LatticeBasis, LocalLattice,
};
pub use matrix::{format_rational, is_p_integral, is_prime, parse_rational, rat, ratio, valuation, RationalMatrix};
pub use metrized::{line_tensor, pow_rational, MetrizedLine};
pub use snf::{hermite_columns, smith_normal_form, SmithForm};
