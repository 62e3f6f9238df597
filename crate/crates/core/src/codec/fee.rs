//! Gas fee to fiat conversion.
//!
//! `fiat = gas × gas_price × 10⁻⁹ × rate`, with the gas price in GWei per Gas
//! and the rate in fiat per Eth. All arithmetic is exact; only the rendered
//! amount is rounded (half-even, two decimals).
//!
//! The commonly quoted FairSwap initialization figure of about 1,050,000 Gas
//! is often paired with roughly 349.20 USD. At 60 GWei and 3880 USD/Eth that
//! amount actually belongs to 1,500,000 Gas; 1,050,000 Gas comes to 244.44.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeeError {
    #[error("{field} must be non-negative, got {value}")]
    Negative { field: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeeQuote {
    pub gas: BigInt,
    /// GWei per Gas.
    pub gas_price: BigRational,
    /// Fiat per Eth.
    pub fiat_rate: BigRational,
    pub fiat_total: BigRational,
}

impl FeeQuote {
    /// Total rounded half-even to cents, e.g. `349.20`.
    pub fn rendered(&self) -> String {
        render_half_even(&self.fiat_total, 2)
    }
}

impl fmt::Display for FeeQuote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered())
    }
}

pub fn gas_fee_to_fiat(
    gas: &BigInt,
    gas_price: &BigRational,
    fiat_rate: &BigRational,
) -> Result<FeeQuote, FeeError> {
    if gas.is_negative() {
        return Err(FeeError::Negative {
            field: "gas",
            value: gas.to_string(),
        });
    }
    for (field, value) in [("gas price", gas_price), ("rate", fiat_rate)] {
        if value.is_negative() {
            return Err(FeeError::Negative {
                field,
                value: value.to_string(),
            });
        }
    }
    let gwei_per_eth = BigRational::from_integer(BigInt::from(1_000_000_000u64));
    let fiat_total = BigRational::from_integer(gas.clone()) * gas_price * fiat_rate / gwei_per_eth;
    Ok(FeeQuote {
        gas: gas.clone(),
        gas_price: gas_price.clone(),
        fiat_rate: fiat_rate.clone(),
        fiat_total,
    })
}

/// Decimal rendering with `places` digits, ties to even.
pub fn render_half_even(value: &BigRational, places: u32) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), places as usize);
    let scaled = value.abs() * BigRational::from_integer(scale.clone());
    let (mut units, rest) = scaled.numer().div_rem(scaled.denom());
    let twice_rest = rest * 2;
    let denom = scaled.denom();
    if twice_rest > *denom || (twice_rest == *denom && units.is_odd()) {
        units += 1;
    }
    let negative = value.is_negative() && !units.is_zero();
    let (whole, frac) = units.div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!(
            "{sign}{whole}.{:0>width$}",
            frac.to_string(),
            width = places as usize
        )
    }
}
