pub mod expoly;
pub mod json;
pub mod linalg;
pub mod marchenko;
pub mod model;
