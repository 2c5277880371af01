//! Small numerical toolkit shared by the solvers.

pub mod interp;
pub mod quadrature;
pub mod roots;
pub mod sum;

pub use interp::{hermite_slopes, interp_cubic, interp_linear, Grid};
pub use quadrature::GaussLegendre;
pub use roots::{bracket_root, golden_section_max, RootOptions};
pub use sum::NeumaierSum;
