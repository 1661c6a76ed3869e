//! Physical and effective baseband channels of the BS-RIS-UE link.

pub mod config;
pub mod effective;
pub mod fading;
pub mod pulse;
pub mod spectrum;

pub use config::{dbm_to_watt, watt_to_dbm, Deployment, SystemConfig, SPEED_OF_LIGHT};
pub use effective::{bs_gain, effective_delay_channel, EffectiveDelayChannel, ReceiveCombiner};
pub use fading::{
    channel_coefficients, coefficient_magnitudes, molecular_absorption, random_direction, reciprocal_uplink,
    sample_rician, FadingConfig, LinkDirection, PathLossParams, PathTerm, RicianChannelParams, UePosition,
};
pub use pulse::{raised_cosine, PulseShape};
pub use spectrum::{frequency_domain_channel, frequency_response, interpolate_to_k, unitary_dft, write_taps_csv};
