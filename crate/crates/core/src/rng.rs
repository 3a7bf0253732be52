//! Counter-based random substreams.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by the
//! master seed and a purpose tag, with the round (or repetition) index as
//! the stream id. Results therefore never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a substream is used for. Distinct purposes never share keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Moves,
    Quantum,
    Announcement,
    Verification,
    Messages,
    Auxiliary(u32),
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Moves => 0x6d6f_7665_7300_0001,
            Purpose::Quantum => 0x7175_616e_7400_0002,
            Purpose::Announcement => 0x616e_6e6f_756e_0003,
            Purpose::Verification => 0x7665_7269_6679_0004,
            Purpose::Messages => 0x6d73_6773_0000_0005,
            Purpose::Auxiliary(n) => 0x6175_7800_0000_0000 | u64::from(n),
        }
    }
}

/// Substream `index` of `purpose` under the master `seed`.
pub fn substream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.tag());
    rng.set_stream(index);
    rng
}
