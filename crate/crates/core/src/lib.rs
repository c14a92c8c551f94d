//! Fully nonlinear second-order constraint sets ("subequations") as margin
//! functions on the 2-jet fiber `R × Rⁿ × Sym(n)`.
//!
//! * [`jet`]: symmetric matrices, ordered eigenvalues, hermitian parts,
//!   plane traces and σ_k Gårding eigenvalues.
//! * [`subeq`]: the [`Subequation`](subeq::Subequation) type, Dirichlet
//!   duality, affine jet maps, strictness and asymptotic-interior tests, and
//!   a catalog of named entries.
//! * [`geometry`]: metric charts, riemannian hessians, second fundamental
//!   forms, boundary convexity and barriers.
//! * [`solver`]: discrete jets, a Perron-style Dirichlet solver, maximum
//!   principle checks and counterexample harnesses.
//!
//! ```
//! use subeq::jet::{Jet2, SymMat};
//! use subeq::subeq::{catalog_construct, dual};
//!
//! let f = catalog_construct("Pq:n=3,q=1").unwrap();
//! let j = Jet2::pure(SymMat::from_diagonal(&[1.0, 2.0, 3.0]));
//! assert_eq!(f.margin(&[0.0; 3], &j), 1.0);
//! assert_eq!(dual(&f).margin(&[0.0; 3], &j), 3.0);
//! ```

pub mod error;
pub mod geometry;
pub mod jet;
pub mod solver;
pub mod subeq;

pub use error::{Error, Result};
