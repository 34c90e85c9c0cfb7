pub mod fit;
pub mod ode;
pub mod quad;
pub mod root;
