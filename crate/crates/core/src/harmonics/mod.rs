//! Angular harmonic machinery: Wigner d elements, spin spherical harmonic
//! transforms on the sphere, and Wigner transforms on SO(3).

mod so3;
mod sphere;
mod wigner;

pub use so3::{wigner_forward, wigner_inverse, So3Grid, WignerCoeffs};
pub use sphere::{
    flm_index, sht_forward, sht_forward_direct, sht_inverse, sht_inverse_direct, Flm, SphereGrid,
};
pub use wigner::wigner_d;

pub(crate) use sphere::{sht_forward_weighted, WeightMode};
