//! Exact symbolic algebra for inertial endomorphisms of abelian groups.
//!
//! Groups are finite lists of cyclic, Prüfer and localized torsion-free
//! blocks. Endomorphisms are kept in a finite normal form on which
//! inertiality, the canonical decomposition and the classification
//! predicates are decided exactly. The [`oracle`] module recomputes subgroup
//! indices by Smith normal form as independent ground truth.

pub mod cli;
pub mod endokit;
pub mod exactnum;
pub mod exec;
pub mod groupkit;
pub mod inertia;
pub mod linmap;
pub mod oracle;
