//! Closed-form contact-distance laws and coverage integrals.

pub mod audit;
pub mod contact;
pub mod coverage;
pub mod scenario;
pub mod sigma;

pub use contact::{
    contact_cdf_product, contact_ccdf_simple, contact_pdf_overlap, contact_pdf_overlap_with, ContactLaw,
    ContactLawConfig, ContactPdfVariant, OverlapContactLaw, OverlapGeometry, SimpleContactLaw,
};
pub use coverage::{coverage_end_to_end, coverage_link_integral, coverage_link_integral_with_exponent};
pub use sigma::{literal_density, literal_terms, sigma_terms, LiteralTerms, SigmaSet};
pub use scenario::{separation_density, tsr_coverage, tsr_coverage_at, AnalyticForm};
