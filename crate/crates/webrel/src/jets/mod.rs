//! Jet coefficient calculus, Koszul bases and the jet matrices of a web.

pub mod assemble;
pub mod coeffs;
pub mod koszul;

pub use assemble::{prolong, values, ColLabel, JetSystem, Layout, RowLabel};
pub use coeffs::{m_coeffs, n_coeffs_topdegree, CoeffTable, Peel};
pub use koszul::{closed_jet_basis, closed_symbol_basis, koszul_matrix, symbol_labels};
