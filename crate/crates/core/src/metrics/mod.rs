//! Distances and error measures between diagrams, fields and noise.

pub mod bottleneck;
pub mod edt;
pub mod kl;
pub mod matching;
pub mod noise;
pub mod sandwich;
pub mod supnorm;

pub use bottleneck::{bottleneck, bottleneck_all_degrees};
pub use kl::kl_product_gaussians;
pub use noise::{noise_statistic, nh_cdf, nh_tail_bound, NhStatistic};
pub use sandwich::{sandwich_check, SandwichRaster, SandwichReport};
pub use supnorm::sup_norm_error;
