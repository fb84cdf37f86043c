pub mod algebra;
pub mod sampling;
pub mod spin;
pub mod td;
pub mod fermionic;
pub mod matrix;
