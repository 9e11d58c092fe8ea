pub mod deviation;
pub mod exprdsl;
pub mod kcc;
pub mod linalg;
pub mod models;
pub mod odesys;
pub mod stability;
