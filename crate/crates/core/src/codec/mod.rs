//! Text format, DOT export, built-in protocols and fee conversion.

pub mod builtin;
pub mod dot;
pub mod fee;
pub mod format;

pub use builtin::{
    builtin, builtin_draft, fairswap_draft, free_deposit_draft, FairSwapParams, UnknownBuiltin,
    BUILTIN_NAMES,
};
pub use dot::{export_dot, DotOptions};
pub use fee::{gas_fee_to_fiat, FeeError, FeeQuote};
pub use format::{parse_draft, parse_protocol, serialize_protocol, ParseError, FORMAT_VERSION};
