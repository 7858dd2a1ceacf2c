pub mod dobinski;
pub mod error;
pub mod exact;
pub mod exec;
pub mod hp;
pub mod moments;
pub mod series;
pub mod spec;
pub mod specfun;
pub mod sum;

pub use error::{Error, Result};
pub use exact::ExactRational;
pub use hp::{HpReal, DEFAULT_PRECISION};
pub use spec::GeneratorSpec;
pub use sum::TruncationCertificate;
