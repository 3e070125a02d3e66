//! Physical and structural checks of the constructed data.

pub mod identities;
pub mod mass;
pub mod selfsim;
pub mod shear;
pub mod signature;

pub use identities::{tensor_identity_suite, IdentityOptions, IdentityReport};
pub use mass::{hawking_mass_v0, MassReport};
pub use selfsim::{selfsim_relations, SelfSimReport};
pub use shear::{shear_profile_v0, ShearProfile, ShearRatio};
pub use signature::{builtin_corpus, signature_check, SignatureReport, SignatureTerm};
