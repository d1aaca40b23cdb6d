//! Nonlocal Dirichlet energies with boundary penalties on meshfree grids.
//!
//! A field `u` on the interior nodes of a mesh has energy
//!
//! ```text
//! E(u) = Σ_i Σ_j q_i q_j R_δ(|x_i − x_j|) |u_i − u_j|^p / δ^p  +  penalty(u, a)
//! ```
//!
//! where `R_δ` is a compactly supported kernel of horizon `δ` and the
//! penalty ties `u` near the boundary to the datum `a`. As `δ → 0` the
//! minimizers approach the solution of the local p-Laplace problem with
//! `u = a` on the boundary, and the energy approaches `σ_R ∫|∇u|^p`.
//!
//! ```
//! use std::sync::Arc;
//! use nldir::{assemble, build_mesh, solve_quadratic, BoundaryData, Field, KernelSpec, PenaltySpec, Shape, SolveOptions};
//!
//! let mesh = Arc::new(build_mesh(&Shape::unit_interval(), 0.025)?);
//! let a = BoundaryData::sample(&mesh, |x| x[0]);
//! let q = KernelSpec::quartic();
//! let op = assemble(&mesh, &q, &PenaltySpec::product(q.clone()), 0.1, 2.0, &a)?;
//! let u = solve_quadratic(&op, &SolveOptions::default())?.minimizer;
//! let exact = Field::sample(&mesh, |x| x[0]);
//! assert!(u.l2_distance(&exact, mesh.weights()) < 0.05);
//! # Ok::<(), nldir::Error>(())
//! ```
//!
//! Modules, bottom up: [`kernel`] (profiles, `σ_R`, validation),
//! [`geometry`] (shapes, meshes, neighbor tables), [`assembly`] (energy
//! operators, mollifier, mass forms), [`minimize`], [`spectra`] and
//! [`study`] (δ-sweeps and probes).

pub mod assembly;
pub mod error;
pub mod field;
pub mod format;
pub mod geometry;
pub mod kernel;
pub mod minimize;
pub mod sparse;
pub mod spectra;
pub mod study;

pub use assembly::{assemble, EnergyOperator, Mollifier, PenaltySpec, PenaltyVariant, WMass};
pub use error::{Error, Result};
pub use field::{BoundaryData, Field, NamedFunction};
pub use geometry::{build_mesh, neighbor_pairs, DomainMesh, Shape};
pub use kernel::{sigma_r, validate_kernel, KernelSpec};
pub use minimize::{solve_p_energy, solve_quadratic, SolveOptions, SolveResult};
pub use spectra::{solve_eigen, EigenOptions, EigenProblem, EigenResult, MassModel};
pub use study::{compare_penalties, coercivity_probe, manufactured_case, run_delta_sweep, StudyConfig, StudyReport};
