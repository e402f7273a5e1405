//! Standard 32-bit Mersenne Twister (MT19937).
//!
//! State is 624 words; seeding uses the Knuth-multiplier fill. The
//! tempering constants are exposed to the recovery module, which inverts
//! the tempering chain and rebuilds full states from observed outputs.

/// Number of 32-bit state words.
pub const N: usize = 624;
/// Middle-word offset of the twist recurrence.
pub const M: usize = 397;
/// Twist matrix constant.
pub const MATRIX_A: u32 = 0x9908_b0df;
/// Mask selecting the top bit of a state word (r = 31 split).
pub const UPPER_MASK: u32 = 0x8000_0000;
/// Mask selecting the lower 31 bits of a state word.
pub const LOWER_MASK: u32 = 0x7fff_ffff;
/// Knuth multiplier used by the seeding fill.
pub const SEED_MULT: u32 = 1_812_433_253;

/// Tempering shift/mask pairs, in application order.
pub const TEMPER_U: u32 = 11;
pub const TEMPER_S: u32 = 7;
pub const TEMPER_B: u32 = 0x9d2c_5680;
pub const TEMPER_T: u32 = 15;
pub const TEMPER_C: u32 = 0xefc6_0000;
pub const TEMPER_L: u32 = 18;

/// MT19937 generator state: 624 words plus the read cursor.
#[derive(Clone)]
pub struct Mt19937 {
    state: Box<[u32; N]>,
    index: usize,
}

impl std::fmt::Debug for Mt19937 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mt19937")
            .field("index", &self.index)
            .field("state[0]", &self.state[0])
            .finish()
    }
}

impl Mt19937 {
    /// Seeds the state with the standard recurrence
    /// `state[i] = 1812433253·(state[i-1] XOR (state[i-1] >> 30)) + i`.
    pub fn from_seed(seed: u32) -> Self {
        let mut state = Box::new([0u32; N]);
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = SEED_MULT
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Mt19937 { state, index: N }
    }

    /// Rebuilds a generator from a full state snapshot. With
    /// `index = N` the next output starts a fresh twist of `state`,
    /// which is how recovered states resume prediction.
    pub fn from_state(state: [u32; N], index: usize) -> Self {
        Mt19937 {
            state: Box::new(state),
            index: index.min(N),
        }
    }

    /// Next tempered 32-bit output.
    pub fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let y = self.state[self.index];
        self.index += 1;
        temper(y)
    }

    /// One full in-place twist. Lower indices are updated before they are
    /// read again, which makes the batch twist equivalent to the sliding
    /// one-word recurrence — the property state cloning relies on.
    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.state[i] & UPPER_MASK) | (self.state[(i + 1) % N] & LOWER_MASK);
            let mut next = self.state[(i + M) % N] ^ (y >> 1);
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            self.state[i] = next;
        }
        self.index = 0;
    }
}

/// The MT19937 output tempering chain.
pub fn temper(mut y: u32) -> u32 {
    y ^= y >> TEMPER_U;
    y ^= (y << TEMPER_S) & TEMPER_B;
    y ^= (y << TEMPER_T) & TEMPER_C;
    y ^= y >> TEMPER_L;
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_1234_matches_published_values() {
        let mut mt = Mt19937::from_seed(1234);
        assert_eq!(mt.next_u32(), 822569775);
        assert_eq!(mt.next_u32(), 2137449171);
        assert_eq!(mt.next_u32(), 2671936806);
    }

    #[test]
    fn from_state_resumes_mid_stream() {
        let mut a = Mt19937::from_seed(31337);
        let snapshot = *a.state;
        let mut b = Mt19937::from_state(snapshot, a.index);
        for _ in 0..2000 {
            assert_eq!(a.next_u32(), b.next_u32());
        }
    }
}
