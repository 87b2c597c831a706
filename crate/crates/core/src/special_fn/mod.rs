//! Special functions used by the expansions: spherical Bessel/Hankel
//! functions, spherical harmonics, Gaunt coefficients and Wigner-D blocks.

pub mod bessel;
pub mod coupling;
pub mod harmonics;
pub mod quadrature;
pub mod wigner;

pub use bessel::{
    sph_bessel_j, sph_bessel_j_array, sph_bessel_j_deriv, sph_bessel_j_deriv_array, sph_bessel_y,
    sph_bessel_y_array, sph_hankel2, sph_hankel2_array, sph_hankel2_deriv, sph_hankel2_deriv_array,
};
pub use coupling::{gaunt, gaunt_range, wigner3j, wigner3j_range};
pub use harmonics::{
    cart_to_sph, legendre_normalized_all, order_from_len, sh_count, sph_harmonic, sph_harmonics_all,
    sph_to_unit, ShIndex,
};
pub use quadrature::{gauss_legendre, sphere_gauss_grid};
pub use wigner::{wigner_d_block, wigner_small_d, EulerAngles};
